#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "codebench/churn.hpp"
#include "codebench/lang.hpp"
#include "codebench/smells.hpp"

namespace codebench::analysis {

struct FileMetrics {
  std::string path;
  std::string language;
  lang::SlocCount lines;
  smells::SmellReport smells;
  std::size_t function_count = 0;
  double health = 10.0;
  smells::Band band = smells::Band::healthy;

  std::size_t sloc() const { return lines.sloc; }
};

struct LanguageAggregate {
  double score = 0.0;
  std::size_t sloc = 0;

  bool operator==(const LanguageAggregate&) const = default;
};

struct ProjectAnalysis {
  static constexpr int kSchemaVersion = 1;

  std::string project_id;
  Instant as_of;
  Instant inception;
  std::vector<FileMetrics> files;  // sorted by path
  std::set<std::string> hotspots;
  std::size_t total_sloc = 0;
  double avg_health = 10.0;
  std::optional<double> hotspot_health;
  std::map<std::string, LanguageAggregate> per_language;
  churn::ChurnMap churn;
  std::vector<std::string> diagnostics;
};

// SLoC-weighted mean of file health; zero-sloc files carry no weight.
// Throws Error(no_weighted_mass) when no file has sloc > 0.
double weighted_average_health(std::span<const FileMetrics> files);

// Weighted mean restricted to the hotspot files; nullopt without weighted mass.
// Hotspot paths missing from `files` are reported through `diagnostics`.
std::optional<double> hotspot_health(std::span<const FileMetrics> files, const std::set<std::string>& hotspots,
                                     std::vector<std::string>* diagnostics = nullptr);

std::map<std::string, LanguageAggregate> per_language_aggregate(std::span<const FileMetrics> files);

FileMetrics analyze_file(const std::string& path, std::string_view content, const lang::LanguageProfile& profile,
                         const smells::SmellConfig& config, std::vector<std::string>* diagnostics = nullptr);

struct AnalysisOptions {
  const lang::LanguageRegistry* languages = nullptr;  // nullptr: builtin registry
  const smells::SmellConfig* smells = nullptr;        // nullptr: builtin config
  churn::ChurnOptions churn;
  // Entries ending in '/' match a directory at any depth, others match a file-name suffix.
  std::vector<std::string> ignore = {"vendor/", "third_party/", "thirdparty/", "node_modules/", "external/",
                                     "bower_components/", ".min.js", ".min.css", ".pb.go", ".pb.cc", ".pb.h"};
  unsigned workers = 0;  // 0: hardware concurrency
};

bool is_ignored(std::string_view path, const std::vector<std::string>& ignore);

ProjectAnalysis analyze_project(const std::string& repo_path, Instant as_of, const std::string& project_id,
                                const AnalysisOptions& options = {});

// Versioned analysis document (the unit of ingestion).
std::string to_json(const ProjectAnalysis& analysis);
// Throws Error(schema_mismatch) for a wrong schema/version or missing/invalid fields.
ProjectAnalysis analysis_from_json(std::string_view text);

}  // namespace codebench::analysis
