#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codebench/analysis.hpp"

namespace codebench::benchstore {

enum class CodebaseSize { Small, Medium, Large };
enum class CompanySize { Small, Medium, Large, Unknown };
enum class Age { Legacy, Brownfield, Greenfield };
enum class Cluster { A, B, C, Unknown };

std::string_view to_string(CodebaseSize v);
std::string_view to_string(CompanySize v);
std::string_view to_string(Age v);
std::string_view to_string(Cluster v);  // "C-A", "C-B", "C-C", "Unknown"

struct SegmentLabels {
  CodebaseSize codebase_size = CodebaseSize::Small;
  CompanySize company_size = CompanySize::Unknown;
  Age age = Age::Greenfield;
  Cluster cluster = Cluster::Unknown;

  bool operator==(const SegmentLabels&) const = default;
};

// Ordered, contiguous bins given by inclusive upper bounds; the last bin is open.
template <typename Label>
struct Bins {
  struct Bin {
    Label label;
    std::optional<std::int64_t> max;  // inclusive; nullopt for the open last bin
  };
  std::vector<Bin> bins;

  // Whether value falls in bin i: previous max < value <= max.
  bool matches(std::size_t i, std::int64_t value) const {
    bool above_prev = i == 0 || value > *bins[i - 1].max;
    bool below_max = !bins[i].max || value <= *bins[i].max;
    return above_prev && below_max;
  }

  Label classify(std::int64_t value) const {
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (matches(i, value)) return bins[i].label;
    }
    return bins.back().label;
  }
};

struct SegmentRules {
  static constexpr int kSchemaVersion = 1;

  Bins<CodebaseSize> codebase;
  Bins<CompanySize> company;
  Bins<Age> age;
  std::map<std::string, Cluster> cluster_map;  // normalized segment name -> cluster
  std::map<Cluster, std::string> cluster_names;

  static SegmentRules from_json(std::string_view text);
  static SegmentRules from_file(const std::string& path);
  static const SegmentRules& builtin();

  Cluster cluster_of(std::string_view industry_segment) const;
};

// Lowercase, '_' and '-' to spaces, whitespace collapsed ("COMPUTER_SOFTWARE" -> "computer software").
std::string normalize_segment(std::string_view segment);

struct OrgMetadata {
  std::optional<std::int64_t> employees;
  std::optional<std::string> industry_segment;

  bool operator==(const OrgMetadata&) const = default;
};

// Comma-separated with header "org_id,employees,industry_segment" (RFC 4180 quoting).
std::map<std::string, OrgMetadata> parse_metadata_csv(std::string_view text);

struct ProjectRecord {
  std::string record_id;  // "<project_id>@<as_of>"
  std::string project_id;
  Instant as_of;
  std::string org_id;
  double avg_health = 10.0;
  std::optional<double> hotspot_health;
  std::size_t total_sloc = 0;
  std::optional<std::int64_t> employees;
  std::optional<std::string> industry_segment;
  int inception_year = 0;
  std::string dominant_language;
  std::map<std::string, analysis::LanguageAggregate> per_language;
  Instant ingested_at;

  bool operator==(const ProjectRecord&) const = default;
};

SegmentLabels classify(const ProjectRecord& record, const SegmentRules& rules);

// Throws Error(invalid_record) when the record violates its invariants.
void validate(const ProjectRecord& record);

std::string record_to_json(const ProjectRecord& record);
ProjectRecord record_from_json(std::string_view line);

// Builds the benchmark entry for one analysis document.
ProjectRecord make_record(const analysis::ProjectAnalysis& analysis, const std::string& org_id,
                          const std::optional<OrgMetadata>& metadata, Instant ingested_at);

enum class Metric { avg_health, hotspot_health };
enum class Weighting { raw, sloc };

std::string_view to_string(Metric m);
std::string_view to_string(Weighting w);

struct SegmentFilter {
  std::optional<CodebaseSize> codebase_size;
  std::optional<CompanySize> company_size;
  std::optional<Age> age;
  std::optional<Cluster> cluster;
  std::optional<std::string> language;  // per-language scores of that language

  bool operator==(const SegmentFilter&) const = default;
};

// Sets one dimension from its textual form; throws Error(bad_parameter) on an
// unknown dimension or label.
void set_filter(SegmentFilter& filter, std::string_view dimension, std::string_view label);

struct QueryRow {
  double value = 0.0;
  double weight = 1.0;
  std::size_t sloc = 0;  // mass behind the value (language sloc under a language filter)
  SegmentLabels labels;
  const ProjectRecord* record = nullptr;
};

// Immutable view of the store at one point in time.
struct Snapshot {
  std::vector<ProjectRecord> records;
  std::shared_ptr<const SegmentRules> rules;

  std::vector<QueryRow> query(const SegmentFilter& filter, Metric metric, Weighting weighting) const;
};

// Keeps, per (org_id, project_id), the most recently ingested row (ties: later
// as_of, then larger record_id). Output is ordered by (org_id, project_id).
std::vector<QueryRow> latest_per_project(const std::vector<QueryRow>& rows);

struct IngestReceipt {
  std::string record_id;
  bool replaced = false;
  SegmentLabels labels;
};

inline constexpr std::string_view kStoreSchema = "codebench.store";
inline constexpr int kStoreSchemaVersion = 1;

// Line-delimited JSON store: a header line, then one record per line. A later
// line with the same (project_id, as_of) replaces the earlier one in place.
// One writer at a time; readers work on immutable snapshots.
class BenchStore {
 public:
  explicit BenchStore(std::string path, std::shared_ptr<const SegmentRules> rules = nullptr);

  BenchStore(const BenchStore&) = delete;
  BenchStore& operator=(const BenchStore&) = delete;

  std::shared_ptr<const Snapshot> snapshot() const;

  IngestReceipt ingest(const analysis::ProjectAnalysis& analysis, const std::string& org_id,
                       const std::optional<OrgMetadata>& metadata, Instant ingested_at);

  // Canonical file content for the current snapshot.
  std::string serialize() const;
  const std::string& path() const { return path_; }

  static std::vector<ProjectRecord> parse(std::string_view content);
  static std::string serialize(const std::vector<ProjectRecord>& records);

 private:
  std::string path_;
  std::shared_ptr<const SegmentRules> rules_;
  std::mutex write_mutex_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
};

}  // namespace codebench::benchstore
