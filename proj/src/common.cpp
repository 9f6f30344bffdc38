#include "codebench/common.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace codebench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::no_history: return "no_history";
    case ErrorCode::repo_access: return "repo_access";
    case ErrorCode::no_analyzable_files: return "no_analyzable_files";
    case ErrorCode::no_weighted_mass: return "no_weighted_mass";
    case ErrorCode::empty_segment: return "empty_segment";
    case ErrorCode::bad_parameter: return "bad_parameter";
    case ErrorCode::schema_mismatch: return "schema_mismatch";
    case ErrorCode::invalid_record: return "invalid_record";
    case ErrorCode::io: return "io";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
  int value = 0;
  auto begin = text.data() + pos;
  auto end = begin + len;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::invalid_argument, "malformed timestamp: " + std::string(text));
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(ErrorCode::invalid_argument, "malformed timestamp: " + std::string(text));
  }
}

}  // namespace

Instant parse_instant(std::string_view text) {
  using namespace std::chrono;
  if (text.size() < 10) {
    throw Error(ErrorCode::invalid_argument, "malformed timestamp: " + std::string(text));
  }
  expect_char(text, 4, '-');
  expect_char(text, 7, '-');
  year_month_day ymd{year{parse_fixed(text, 0, 4)}, month{static_cast<unsigned>(parse_fixed(text, 5, 2))},
                     day{static_cast<unsigned>(parse_fixed(text, 8, 2))}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::invalid_argument, "invalid date: " + std::string(text));
  }
  Instant t = sys_days{ymd};
  if (text.size() == 10) {
    return t;
  }
  expect_char(text, 10, 'T');
  if (text.size() < 19) {
    throw Error(ErrorCode::invalid_argument, "malformed timestamp: " + std::string(text));
  }
  expect_char(text, 13, ':');
  expect_char(text, 16, ':');
  int hh = parse_fixed(text, 11, 2);
  int mm = parse_fixed(text, 14, 2);
  int ss = parse_fixed(text, 17, 2);
  if (hh > 23 || mm > 59 || ss > 60) {
    throw Error(ErrorCode::invalid_argument, "invalid time of day: " + std::string(text));
  }
  auto rest = text.substr(19);
  if (rest != "Z" && rest != "+00:00") {
    throw Error(ErrorCode::invalid_argument, "timestamps must be UTC: " + std::string(text));
  }
  return t + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_instant(Instant t) {
  using namespace std::chrono;
  auto day_point = floor<days>(t);
  year_month_day ymd{day_point};
  hh_mm_ss tod{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

int year_of(Instant t) {
  using namespace std::chrono;
  return static_cast<int>(year_month_day{floor<days>(t)}.year());
}

Instant utc_midnight_today() {
  using namespace std::chrono;
  return floor<days>(system_clock::now());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io, "cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io, "cannot write " + path);
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw Error(ErrorCode::io, "write failed for " + path);
  }
}

}  // namespace codebench
