#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codebench/lang.hpp"

namespace codebench::smells {

struct FunctionInfo {
  std::string name;
  std::size_t start_line = 0;  // 1-based, inclusive
  std::size_t end_line = 0;
  std::size_t param_count = 0;
  std::size_t max_nesting = 0;
  std::size_t cyclomatic = 1;
  std::size_t span_sloc = 0;

  bool operator==(const FunctionInfo&) const = default;
};

enum class SmellKind {
  LongFile,
  LongFunction,
  ManyParameters,
  DeepNesting,
  ComplexConditional,
  HighCyclomaticComplexity,
  DuplicatedBlock,
};

inline constexpr std::array<SmellKind, 7> kAllSmells = {
    SmellKind::LongFile,           SmellKind::LongFunction,
    SmellKind::ManyParameters,     SmellKind::DeepNesting,
    SmellKind::ComplexConditional, SmellKind::HighCyclomaticComplexity,
    SmellKind::DuplicatedBlock,
};

std::string_view to_string(SmellKind kind);
std::optional<SmellKind> smell_from_string(std::string_view name);

struct SmellReport {
  std::array<std::size_t, kAllSmells.size()> counts{};

  std::size_t& operator[](SmellKind k) { return counts[static_cast<std::size_t>(k)]; }
  std::size_t operator[](SmellKind k) const { return counts[static_cast<std::size_t>(k)]; }
  std::size_t total() const;

  bool operator==(const SmellReport&) const = default;
};

enum class Band { healthy, warning, alert };

std::string_view to_string(Band band);

struct CodeHealth {
  double score = 10.0;
  Band band = Band::healthy;
};

struct Penalty {
  double weight = 0.0;
  double cap = 0.0;
};

// Thresholds, penalty table and band edges. Defaults come from config/smells.json.
struct SmellConfig {
  static constexpr int kSchemaVersion = 1;

  std::size_t long_function_sloc = 70;        // LongFunction when span_sloc exceeds this
  std::size_t many_parameters = 4;            // ManyParameters when param_count exceeds this
  std::size_t deep_nesting_depth = 4;         // DeepNesting when max_nesting reaches this
  std::size_t cyclomatic_complexity = 10;     // HighCyclomaticComplexity when exceeded
  std::size_t complex_conditional_operators = 2;
  std::size_t duplicated_block_lines = 6;
  std::size_t long_file_sloc = 600;
  std::size_t long_file_double_sloc = 1200;   // LongFile penalty doubles above this
  std::array<Penalty, kAllSmells.size()> penalties{};
  double healthy_min = 8.0;
  double alert_below = 4.0;

  const Penalty& penalty(SmellKind k) const { return penalties[static_cast<std::size_t>(k)]; }

  static SmellConfig from_json(std::string_view text);
  static SmellConfig from_file(const std::string& path);
  static const SmellConfig& builtin();
};

struct ExtractResult {
  std::vector<FunctionInfo> functions;
  Diagnostics diagnostics;
};

// Input must already be comment/string-stripped.
ExtractResult extract_functions(std::string_view stripped_source, const lang::LanguageProfile& profile);

SmellReport detect_smells(const lang::SlocCount& sloc, const std::vector<FunctionInfo>& functions,
                          std::string_view stripped_source, const lang::LanguageProfile& profile,
                          const SmellConfig& config = SmellConfig::builtin());

CodeHealth score_code_health(const SmellReport& report, std::size_t sloc,
                             const SmellConfig& config = SmellConfig::builtin());

Band band_for(double score, const SmellConfig& config = SmellConfig::builtin());

// Number of conditions carrying at least `min_operators` boolean operators.
std::size_t count_complex_conditionals(std::string_view stripped_source, const lang::LanguageProfile& profile,
                                       std::size_t min_operators);

// Runs of 6-line (configurable) normalized windows that repeat an earlier disjoint window.
std::size_t count_duplicated_blocks(std::string_view stripped_source, std::size_t window);

}  // namespace codebench::smells
