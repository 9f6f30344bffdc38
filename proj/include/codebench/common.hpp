#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace codebench {

enum class ErrorCode {
  invalid_argument,
  no_history,
  repo_access,
  no_analyzable_files,
  no_weighted_mass,
  empty_segment,
  bad_parameter,
  schema_mismatch,
  invalid_record,
  io,
  internal,
};

// Machine-readable name used in API payloads ("empty_segment", ...).
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal finding attached to a result (unterminated comment, skipped file, ...).
struct Diagnostic {
  std::string message;
  std::size_t line = 0;  // 1-based; 0 when not tied to a line

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

using Instant = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SSZ" and "YYYY-MM-DDTHH:MM:SS+00:00".
Instant parse_instant(std::string_view text);
// Always "YYYY-MM-DDTHH:MM:SSZ".
std::string format_instant(Instant t);
int year_of(Instant t);
Instant utc_midnight_today();

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace codebench
