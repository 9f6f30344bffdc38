#include "codebench/lang.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>

#include <json.hpp>

#include "builtin_config.hpp"

namespace codebench::lang {

using nlohmann::json;

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

EscapeRule parse_escape(const std::string& s) {
  if (s == "backslash") return EscapeRule::backslash;
  if (s == "doubled") return EscapeRule::doubled;
  if (s == "none") return EscapeRule::none;
  throw Error(ErrorCode::invalid_argument, "unknown escape rule: " + s);
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<std::string>>();
}

LanguageProfile parse_profile(const json& j) {
  LanguageProfile p;
  p.name = j.at("name").get<std::string>();
  for (const auto& ext : j.at("extensions")) {
    p.extensions.push_back(lowercase(ext.get<std::string>()));
  }
  p.line_comment = string_list(j, "line_comment");
  if (j.contains("block_comment")) {
    for (const auto& pair : j.at("block_comment")) {
      p.block_comment.push_back({pair.at(0).get<std::string>(), pair.at(1).get<std::string>()});
    }
  }
  if (j.contains("strings")) {
    for (const auto& s : j.at("strings")) {
      StringDelimiter d;
      d.open = s.at("open").get<std::string>();
      d.close = s.value("close", d.open);
      d.escape = parse_escape(s.value("escape", std::string("backslash")));
      d.multiline = s.value("multiline", false);
      p.string_delims.push_back(std::move(d));
    }
  }
  auto syntax = j.at("function_syntax").get<std::string>();
  if (syntax == "brace") {
    p.function_syntax = FunctionSyntax::brace;
  } else if (syntax == "indentation") {
    p.function_syntax = FunctionSyntax::indentation;
  } else {
    throw Error(ErrorCode::invalid_argument, p.name + ": unknown function_syntax " + syntax);
  }
  for (const auto& pattern : string_list(j, "function_patterns")) {
    try {
      p.function_patterns.emplace_back(pattern, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::invalid_argument, p.name + ": bad function pattern: " + e.what());
    }
  }
  p.branch_keywords = string_list(j, "branch_keywords");
  p.nesting_keywords = string_list(j, "nesting_keywords");
  p.condition_keywords = string_list(j, "condition_keywords");
  p.boolean_operators = string_list(j, "boolean_operators");
  p.implicit_params = string_list(j, "implicit_params");
  return p;
}

void validate(const std::vector<LanguageProfile>& profiles) {
  std::set<std::string> seen_ext;
  std::set<std::string> seen_name;
  for (const auto& p : profiles) {
    if (p.name.empty() || !seen_name.insert(p.name).second) {
      throw Error(ErrorCode::invalid_argument, "profile names must be non-empty and unique: " + p.name);
    }
    if (p.extensions.empty()) {
      throw Error(ErrorCode::invalid_argument, p.name + ": no extensions");
    }
    for (const auto& ext : p.extensions) {
      if (ext.empty() || !seen_ext.insert(ext).second) {
        throw Error(ErrorCode::invalid_argument, p.name + ": duplicate or empty extension " + ext);
      }
    }
    for (const auto& bc : p.block_comment) {
      if (bc.open.empty() || bc.close.empty()) {
        throw Error(ErrorCode::invalid_argument, p.name + ": empty block comment delimiter");
      }
      for (const auto& lc : p.line_comment) {
        if (lc == bc.open || lc == bc.close) {
          throw Error(ErrorCode::invalid_argument, p.name + ": block delimiter equals line marker " + lc);
        }
      }
    }
    for (const auto& lc : p.line_comment) {
      if (lc.empty()) throw Error(ErrorCode::invalid_argument, p.name + ": empty line comment marker");
    }
    for (const auto& sd : p.string_delims) {
      if (sd.open.empty() || sd.close.empty()) {
        throw Error(ErrorCode::invalid_argument, p.name + ": empty string delimiter");
      }
    }
  }
}

}  // namespace

LanguageRegistry LanguageRegistry::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("language registry is not valid JSON: ") + e.what());
  }
  if (doc.value("schema_version", 0) != kSchemaVersion) {
    throw Error(ErrorCode::schema_mismatch, "language registry schema_version must be " +
                                                std::to_string(kSchemaVersion));
  }
  LanguageRegistry reg;
  try {
    for (const auto& p : doc.at("profiles")) {
      reg.profiles_.push_back(parse_profile(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("language registry: ") + e.what());
  }
  validate(reg.profiles_);
  return reg;
}

LanguageRegistry LanguageRegistry::from_file(const std::string& path) {
  return from_json(read_file(path));
}

const LanguageRegistry& LanguageRegistry::builtin() {
  static const LanguageRegistry reg = from_json(builtin_config::languages);
  return reg;
}

const LanguageProfile* LanguageRegistry::detect(std::string_view path) const {
  auto slash = path.find_last_of('/');
  std::string base = lowercase(slash == std::string_view::npos ? path : path.substr(slash + 1));
  const LanguageProfile* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& p : profiles_) {
    for (const auto& ext : p.extensions) {
      if (ext.size() < base.size() && base.ends_with(ext) && ext.size() > best_len) {
        best = &p;
        best_len = ext.size();
      }
    }
  }
  return best;
}

const LanguageProfile* LanguageRegistry::find(std::string_view name) const {
  for (const auto& p : profiles_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

enum class OpenerKind { line_comment, block_comment, string };

struct Opener {
  OpenerKind kind;
  std::size_t index;
  std::size_t length;
};

class Lexer {
 public:
  Lexer(std::string_view src, const LanguageProfile& profile) : src_(src), p_(profile) {
    out_.reserve(src.size());
  }

  LexResult run() {
    if (src_.empty()) return {};
    std::size_t i = 0;
    while (i < src_.size()) {
      char c = src_[i];
      if (c == '\n') {
        end_line();
        out_.push_back('\n');
        ++i;
        continue;
      }
      switch (state_) {
        case State::code: i = step_code(i); break;
        case State::block: i = step_block(i); break;
        case State::string: i = step_string(i); break;
      }
    }
    if (state_ == State::block) {
      diag_.push_back({"unterminated block comment", block_start_line_});
    } else if (state_ == State::string) {
      diag_.push_back({"unterminated string literal", line_no_});
      const auto& close = p_.string_delims[active_].close;
      if (!out_.empty() && out_.back() == '\n') {
        out_.insert(out_.size() - 1, close);
      } else {
        out_ += close;
      }
      state_ = State::code;
    }
    if (src_.back() != '\n') end_line();
    return {std::move(lines_), std::move(out_), std::move(diag_)};
  }

 private:
  enum class State { code, block, string };

  std::size_t step_code(std::size_t i) {
    auto opener = match_opener(i);
    if (!opener) {
      char c = src_[i];
      if (!std::isspace(static_cast<unsigned char>(c))) has_code_ = true;
      out_.push_back(c);
      return i + 1;
    }
    switch (opener->kind) {
      case OpenerKind::line_comment: {
        has_comment_ = true;
        auto nl = src_.find('\n', i);
        return nl == std::string_view::npos ? src_.size() : nl;
      }
      case OpenerKind::block_comment:
        has_comment_ = true;
        state_ = State::block;
        active_ = opener->index;
        block_start_line_ = line_no_;
        out_.push_back(' ');
        return i + opener->length;
      case OpenerKind::string:
        has_code_ = true;
        state_ = State::string;
        active_ = opener->index;
        out_ += p_.string_delims[active_].open;
        out_ += kStringPlaceholder;
        return i + opener->length;
    }
    return i + 1;
  }

  std::size_t step_block(std::size_t i) {
    has_comment_ = true;
    const auto& close = p_.block_comment[active_].close;
    if (src_.compare(i, close.size(), close) == 0) {
      state_ = State::code;
      return i + close.size();
    }
    return i + 1;
  }

  std::size_t step_string(std::size_t i) {
    has_code_ = true;
    const auto& d = p_.string_delims[active_];
    if (d.escape == EscapeRule::backslash && src_[i] == '\\') {
      if (i + 1 < src_.size() && src_[i + 1] == '\n') {
        continuation_ = true;
        return i + 1;
      }
      return i + 2;
    }
    if (src_.compare(i, d.close.size(), d.close) == 0) {
      if (d.escape == EscapeRule::doubled &&
          src_.compare(i + d.close.size(), d.close.size(), d.close) == 0) {
        return i + 2 * d.close.size();
      }
      out_ += d.close;
      state_ = State::code;
      return i + d.close.size();
    }
    return i + 1;
  }

  // The longest comment or string opener at position i, if any.
  std::optional<Opener> match_opener(std::size_t i) const {
    std::optional<Opener> best;
    auto consider = [&](OpenerKind kind, std::size_t index, const std::string& token) {
      if (src_.compare(i, token.size(), token) == 0 && (!best || token.size() > best->length)) {
        best = Opener{kind, index, token.size()};
      }
    };
    for (std::size_t k = 0; k < p_.line_comment.size(); ++k) {
      consider(OpenerKind::line_comment, k, p_.line_comment[k]);
    }
    for (std::size_t k = 0; k < p_.block_comment.size(); ++k) {
      consider(OpenerKind::block_comment, k, p_.block_comment[k].open);
    }
    for (std::size_t k = 0; k < p_.string_delims.size(); ++k) {
      consider(OpenerKind::string, k, p_.string_delims[k].open);
    }
    return best;
  }

  void end_line() {
    if (state_ == State::string && !p_.string_delims[active_].multiline && !continuation_) {
      diag_.push_back({"unterminated string literal", line_no_});
      out_ += p_.string_delims[active_].close;
      state_ = State::code;
    }
    LineKind kind = LineKind::blank;
    if (has_code_) {
      kind = LineKind::code;
    } else if (has_comment_) {
      kind = LineKind::comment;
    }
    lines_.push_back(kind);
    ++line_no_;
    continuation_ = false;
    has_code_ = false;
    has_comment_ = state_ == State::block;
    if (state_ == State::string) has_code_ = true;
  }

  std::string_view src_;
  const LanguageProfile& p_;
  State state_ = State::code;
  std::size_t active_ = 0;
  std::size_t line_no_ = 1;
  std::size_t block_start_line_ = 0;
  bool has_code_ = false;
  bool has_comment_ = false;
  bool continuation_ = false;
  std::vector<LineKind> lines_;
  std::string out_;
  Diagnostics diag_;
};

}  // namespace

LexResult lex(std::string_view source, const LanguageProfile& profile) {
  return Lexer(source, profile).run();
}

SlocCount tally(const std::vector<LineKind>& lines) {
  SlocCount c;
  c.total_lines = lines.size();
  for (auto k : lines) {
    switch (k) {
      case LineKind::blank: ++c.blank_lines; break;
      case LineKind::comment: ++c.comment_lines; break;
      case LineKind::code: ++c.sloc; break;
    }
  }
  return c;
}

SlocResult count_sloc(std::string_view source, const LanguageProfile& profile) {
  auto lexed = lex(source, profile);
  return {tally(lexed.lines), std::move(lexed.diagnostics)};
}

StripResult strip_comments_and_strings(std::string_view source, const LanguageProfile& profile) {
  auto lexed = lex(source, profile);
  return {std::move(lexed.stripped), std::move(lexed.diagnostics)};
}

}  // namespace codebench::lang
