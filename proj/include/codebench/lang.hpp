#pragma once

#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "codebench/common.hpp"

namespace codebench::lang {

enum class FunctionSyntax { brace, indentation };

enum class EscapeRule {
  none,
  backslash,  // "\x" escapes one character
  doubled,    // closing delimiter written twice is literal
};

struct BlockComment {
  std::string open;
  std::string close;
};

struct StringDelimiter {
  std::string open;
  std::string close;
  EscapeRule escape = EscapeRule::backslash;
  bool multiline = false;
};

// One analyzed language. Loaded from the bundled registry file; see
// config/languages.json for the schema.
struct LanguageProfile {
  std::string name;
  std::vector<std::string> extensions;  // lowercase, with leading dot
  std::vector<std::string> line_comment;
  std::vector<BlockComment> block_comment;
  std::vector<StringDelimiter> string_delims;
  FunctionSyntax function_syntax = FunctionSyntax::brace;
  // Searched against a function header; group 1 = name, group 2 = parameter list.
  std::vector<std::regex> function_patterns;
  std::vector<std::string> branch_keywords;     // each occurrence adds 1 to cyclomatic complexity
  std::vector<std::string> nesting_keywords;    // constructs that open a nesting level
  std::vector<std::string> condition_keywords;  // introduce a condition checked for boolean operators
  std::vector<std::string> boolean_operators;
  std::vector<std::string> implicit_params;     // not counted as parameters (self, this, ...)
};

class LanguageRegistry {
 public:
  static constexpr int kSchemaVersion = 1;

  // Throws Error(schema_mismatch) for a wrong version and Error(invalid_argument)
  // when a profile violates the registry invariants.
  static LanguageRegistry from_json(std::string_view text);
  static LanguageRegistry from_file(const std::string& path);
  // The registry compiled into the library from config/languages.json.
  static const LanguageRegistry& builtin();

  // Longest matching extension suffix wins; nullptr means Unknown.
  const LanguageProfile* detect(std::string_view path) const;
  const LanguageProfile* find(std::string_view name) const;
  const std::vector<LanguageProfile>& profiles() const { return profiles_; }

 private:
  std::vector<LanguageProfile> profiles_;
};

struct SlocCount {
  std::size_t total_lines = 0;
  std::size_t blank_lines = 0;
  std::size_t comment_lines = 0;
  std::size_t sloc = 0;

  bool operator==(const SlocCount&) const = default;
};

enum class LineKind { blank, comment, code };

// Result of one lexing pass: the classification of every physical line and the
// comment-free, string-masked text with the original line structure.
struct LexResult {
  std::vector<LineKind> lines;
  std::string stripped;
  Diagnostics diagnostics;
};

LexResult lex(std::string_view source, const LanguageProfile& profile);

struct SlocResult {
  SlocCount counts;
  Diagnostics diagnostics;
};

SlocResult count_sloc(std::string_view source, const LanguageProfile& profile);

// String literal contents become this token; the delimiters are kept.
inline constexpr std::string_view kStringPlaceholder = "S";

struct StripResult {
  std::string text;
  Diagnostics diagnostics;
};

StripResult strip_comments_and_strings(std::string_view source, const LanguageProfile& profile);

SlocCount tally(const std::vector<LineKind>& lines);

}  // namespace codebench::lang
