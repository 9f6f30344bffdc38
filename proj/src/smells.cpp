#include "codebench/smells.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include <json.hpp>

#include "builtin_config.hpp"

namespace codebench::smells {

using lang::LanguageProfile;
using nlohmann::json;

std::string_view to_string(SmellKind kind) {
  switch (kind) {
    case SmellKind::LongFile: return "LongFile";
    case SmellKind::LongFunction: return "LongFunction";
    case SmellKind::ManyParameters: return "ManyParameters";
    case SmellKind::DeepNesting: return "DeepNesting";
    case SmellKind::ComplexConditional: return "ComplexConditional";
    case SmellKind::HighCyclomaticComplexity: return "HighCyclomaticComplexity";
    case SmellKind::DuplicatedBlock: return "DuplicatedBlock";
  }
  return "";
}

std::optional<SmellKind> smell_from_string(std::string_view name) {
  for (auto k : kAllSmells) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Band band) {
  switch (band) {
    case Band::healthy: return "healthy";
    case Band::warning: return "warning";
    case Band::alert: return "alert";
  }
  return "";
}

std::size_t SmellReport::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

SmellConfig SmellConfig::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("smell config is not valid JSON: ") + e.what());
  }
  if (doc.value("schema_version", 0) != kSchemaVersion) {
    throw Error(ErrorCode::schema_mismatch, "smell config schema_version must be 1");
  }
  SmellConfig c;
  try {
    const auto& t = doc.at("thresholds");
    c.long_function_sloc = t.at("long_function_sloc").get<std::size_t>();
    c.many_parameters = t.at("many_parameters").get<std::size_t>();
    c.deep_nesting_depth = t.at("deep_nesting_depth").get<std::size_t>();
    c.cyclomatic_complexity = t.at("cyclomatic_complexity").get<std::size_t>();
    c.complex_conditional_operators = t.at("complex_conditional_operators").get<std::size_t>();
    c.duplicated_block_lines = t.at("duplicated_block_lines").get<std::size_t>();
    c.long_file_sloc = t.at("long_file_sloc").get<std::size_t>();
    c.long_file_double_sloc = t.at("long_file_double_sloc").get<std::size_t>();
    const auto& p = doc.at("penalties");
    for (auto k : kAllSmells) {
      const auto& entry = p.at(std::string(to_string(k)));
      Penalty pen{entry.at("weight").get<double>(), entry.at("cap").get<double>()};
      if (pen.weight < 0.0 || pen.cap < 0.0) {
        throw Error(ErrorCode::invalid_argument, "penalty weights and caps must be non-negative");
      }
      c.penalties[static_cast<std::size_t>(k)] = pen;
    }
    const auto& b = doc.at("bands");
    c.healthy_min = b.at("healthy_min").get<double>();
    c.alert_below = b.at("alert_below").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("smell config: ") + e.what());
  }
  if (c.duplicated_block_lines == 0 || c.alert_below > c.healthy_min) {
    throw Error(ErrorCode::invalid_argument, "smell config: inconsistent thresholds");
  }
  return c;
}

SmellConfig SmellConfig::from_file(const std::string& path) { return from_json(read_file(path)); }

const SmellConfig& SmellConfig::builtin() {
  static const SmellConfig config = from_json(builtin_config::smells);
  return config;
}

// ---------------------------------------------------------------------------

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool contains(const std::vector<std::string>& set, std::string_view word) {
  return std::find(set.begin(), set.end(), word) != set.end();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  if (text.empty()) return lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

// Calls f(word) for every identifier-like token.
template <typename F>
void for_each_word(std::string_view text, F&& f) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_word_char(text[i])) {
      std::size_t j = i;
      while (j < text.size() && is_word_char(text[j])) ++j;
      f(text.substr(i, j - i));
      i = j;
    } else {
      ++i;
    }
  }
}

std::size_t count_params(std::string_view params, const LanguageProfile& profile) {
  std::size_t count = 0;
  int depth = 0;
  std::size_t item_start = 0;
  auto flush = [&](std::size_t end) {
    auto item = trim(params.substr(item_start, end - item_start));
    if (!item.empty() && !contains(profile.implicit_params, item)) ++count;
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    char c = params[i];
    if (c == '(' || c == '[' || c == '{' || c == '<') {
      ++depth;
    } else if (c == ')' || c == ']' || c == '}' || (c == '>' && (i == 0 || params[i - 1] != '-'))) {
      depth = std::max(0, depth - 1);
    } else if (c == ',' && depth == 0) {
      flush(i);
      item_start = i + 1;
    }
  }
  flush(params.size());
  return count;
}

bool is_reserved_name(std::string_view name, const LanguageProfile& profile) {
  static const std::vector<std::string> reserved = {
      "return", "sizeof", "new", "delete", "throw", "using", "typeof", "decltype",
      "alignof", "defined", "function", "await", "yield", "assert", "static_assert"};
  auto colon = name.find_last_of(':');
  if (colon != std::string_view::npos) name = name.substr(colon + 1);
  return contains(reserved, name) || contains(profile.nesting_keywords, name) ||
         contains(profile.branch_keywords, name) || contains(profile.condition_keywords, name);
}

class SpanCounter {
 public:
  explicit SpanCounter(const std::vector<std::string_view>& lines) : prefix_(lines.size() + 1, 0) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      prefix_[i + 1] = prefix_[i] + (is_blank(lines[i]) ? 0 : 1);
    }
  }

  // Non-blank lines within [first, last], 1-based inclusive.
  std::size_t code_lines(std::size_t first, std::size_t last) const {
    last = std::min(last, prefix_.size() - 1);
    if (first == 0 || first > last) return 0;
    return prefix_[last] - prefix_[first - 1];
  }

 private:
  std::vector<std::size_t> prefix_;
};

class BraceExtractor {
 public:
  BraceExtractor(std::string_view src, const LanguageProfile& profile) : src_(src), p_(profile) {}

  ExtractResult run() {
    std::size_t i = 0;
    while (i < src_.size()) {
      char c = src_[i];
      if (is_word_char(c)) {
        std::size_t j = i;
        while (j < src_.size() && is_word_char(src_[j])) ++j;
        on_word(src_.substr(i, j - i));
        i = j;
        continue;
      }
      switch (c) {
        case '\n':
          header_.push_back(' ');
          ++line_;
          break;
        case '{': open_brace(); break;
        case '}': close_brace(); break;
        case ';':
          if (parens_ == 0) reset_header();
          else header_.push_back(c);
          break;
        case '(':
          ++parens_;
          header_.push_back(c);
          break;
        case ')':
          parens_ = std::max(0, parens_ - 1);
          header_.push_back(c);
          break;
        default:
          if (header_line_ == 0 && !std::isspace(static_cast<unsigned char>(c))) header_line_ = line_;
          header_.push_back(c);
      }
      ++i;
    }
    if (current_) {
      diag_.push_back({"unbalanced braces: function '" + current_->name + "' closed at end of file", line_});
      std::size_t last = src_.empty() || src_.back() != '\n' ? line_ : line_ - 1;
      finish_function(std::max(last, current_->start_line));
    } else if (!stack_.empty()) {
      diag_.push_back({"unbalanced braces at end of file", line_});
    }
    auto lines = split_lines(src_);
    SpanCounter spans(lines);
    for (auto& f : functions_) f.span_sloc = spans.code_lines(f.start_line, f.end_line);
    return {std::move(functions_), std::move(diag_)};
  }

 private:
  enum class Kind { function, control, other };

  struct Frame {
    Kind kind;
    int saved_parens;
  };

  void on_word(std::string_view word) {
    if (header_line_ == 0) header_line_ = line_;
    header_.append(word);
    if (contains(p_.nesting_keywords, word)) header_has_nesting_ = true;
    if (current_ && contains(p_.branch_keywords, word)) ++current_->cyclomatic;
  }

  void open_brace() {
    Kind kind = Kind::other;
    if (!current_) {
      if (auto fn = match_function()) {
        current_ = std::move(fn);
        kind = Kind::function;
      }
    } else if (header_has_nesting_) {
      kind = Kind::control;
      ++control_depth_;
      current_->max_nesting = std::max(current_->max_nesting, control_depth_);
    }
    stack_.push_back({kind, parens_});
    parens_ = 0;
    reset_header();
  }

  void close_brace() {
    if (stack_.empty()) {
      diag_.push_back({"unbalanced closing brace", line_});
      reset_header();
      return;
    }
    Frame top = stack_.back();
    stack_.pop_back();
    parens_ = top.saved_parens;
    if (top.kind == Kind::control) --control_depth_;
    if (top.kind == Kind::function) finish_function(line_);
    reset_header();
  }

  std::optional<FunctionInfo> match_function() const {
    if (header_line_ == 0) return std::nullopt;
    for (const auto& re : p_.function_patterns) {
      std::smatch m;
      if (!std::regex_search(header_, m, re) || m.size() < 3) continue;
      std::string name = m[1].str();
      if (is_reserved_name(name, p_)) continue;
      FunctionInfo f;
      f.name = std::move(name);
      f.start_line = header_line_;
      f.param_count = count_params(m[2].str(), p_);
      return f;
    }
    return std::nullopt;
  }

  void finish_function(std::size_t end_line) {
    current_->end_line = end_line;
    functions_.push_back(std::move(*current_));
    current_.reset();
    control_depth_ = 0;
  }

  void reset_header() {
    header_.clear();
    header_line_ = 0;
    header_has_nesting_ = false;
  }

  std::string_view src_;
  const LanguageProfile& p_;
  std::vector<Frame> stack_;
  std::optional<FunctionInfo> current_;
  std::size_t control_depth_ = 0;
  std::string header_;
  std::size_t header_line_ = 0;
  bool header_has_nesting_ = false;
  int parens_ = 0;
  std::size_t line_ = 1;
  std::vector<FunctionInfo> functions_;
  Diagnostics diag_;
};

std::size_t indent_of(std::string_view line) {
  std::size_t col = 0;
  for (char c : line) {
    if (c == ' ') ++col;
    else if (c == '\t') col = (col / 8 + 1) * 8;
    else break;
  }
  return col;
}

std::string_view first_word(std::string_view line) {
  line = trim(line);
  std::size_t j = 0;
  while (j < line.size() && is_word_char(line[j])) ++j;
  return line.substr(0, j);
}

bool opens_block(std::string_view line) {
  line = trim(line);
  if (!line.empty() && line.back() == ':') return true;
  int depth = 0;
  for (char c : line) {
    if (c == '(' || c == '[' || c == '{') ++depth;
    else if (c == ')' || c == ']' || c == '}') --depth;
  }
  return depth > 0;
}

ExtractResult extract_indented(std::string_view src, const LanguageProfile& p) {
  ExtractResult result;
  auto lines = split_lines(src);
  SpanCounter spans(lines);
  std::size_t i = 0;
  while (i < lines.size()) {
    if (is_blank(lines[i])) {
      ++i;
      continue;
    }
    std::string line(lines[i]);
    std::smatch m;
    bool matched = false;
    for (const auto& re : p.function_patterns) {
      if (std::regex_search(line, m, re) && m.size() >= 2) {
        matched = true;
        break;
      }
    }
    if (!matched) {
      ++i;
      continue;
    }
    FunctionInfo f;
    f.name = m[1].str();
    f.start_line = i + 1;
    std::size_t def_indent = indent_of(lines[i]);

    // Parameter list: balanced scan from the opening parenthesis, possibly across lines.
    std::string params;
    std::size_t close_line = i;
    {
      std::size_t li = i;
      std::size_t col = static_cast<std::size_t>(m.position(0) + m.length(0));
      int depth = 1;
      bool closed = false;
      while (li < lines.size() && !closed) {
        auto text = lines[li];
        for (; col < text.size(); ++col) {
          char c = text[col];
          if (c == '(' || c == '[' || c == '{') ++depth;
          if (c == ')' || c == ']' || c == '}') --depth;
          if (depth == 0) {
            closed = true;
            break;
          }
          params.push_back(c);
        }
        close_line = li;
        if (!closed) {
          params.push_back(' ');
          ++li;
          col = 0;
        }
      }
      if (!closed) {
        result.diagnostics.push_back({"unterminated parameter list for '" + f.name + "'", f.start_line});
      }
    }
    f.param_count = count_params(params, p);

    std::size_t last_code = close_line;
    std::size_t j = close_line + 1;
    for (; j < lines.size(); ++j) {
      if (is_blank(lines[j])) continue;
      if (indent_of(lines[j]) <= def_indent) break;
      last_code = j;
    }
    f.end_line = last_code + 1;

    std::vector<std::size_t> blocks;
    for (std::size_t k = close_line + 1; k <= last_code; ++k) {
      if (is_blank(lines[k])) continue;
      auto ind = indent_of(lines[k]);
      while (!blocks.empty() && blocks.back() >= ind) blocks.pop_back();
      if (contains(p.nesting_keywords, first_word(lines[k])) && opens_block(lines[k])) {
        blocks.push_back(ind);
        f.max_nesting = std::max(f.max_nesting, blocks.size());
      }
    }
    // Branch keywords after the signature (a single-line body shares the def line).
    std::string_view body_first = lines[close_line];
    if (close_line == i) body_first = body_first.substr(std::min(body_first.size(), static_cast<std::size_t>(m.position(0) + m.length(0))));
    for_each_word(body_first, [&](std::string_view w) {
      if (contains(p.branch_keywords, w)) ++f.cyclomatic;
    });
    for (std::size_t k = close_line + 1; k <= last_code; ++k) {
      for_each_word(lines[k], [&](std::string_view w) {
        if (contains(p.branch_keywords, w)) ++f.cyclomatic;
      });
    }
    f.span_sloc = spans.code_lines(f.start_line, f.end_line);
    result.functions.push_back(std::move(f));
    i = last_code + 1;
  }
  return result;
}

std::size_t count_operator(std::string_view text, std::string_view op) {
  if (op.empty()) return 0;
  bool alpha = is_word_char(op.front());
  std::size_t n = 0;
  std::size_t pos = 0;
  while ((pos = text.find(op, pos)) != std::string_view::npos) {
    bool ok = true;
    if (alpha) {
      bool left = pos == 0 || !is_word_char(text[pos - 1]);
      std::size_t end = pos + op.size();
      bool right = end >= text.size() || !is_word_char(text[end]);
      ok = left && right;
    }
    if (ok) {
      ++n;
      pos += op.size();
    } else {
      ++pos;
    }
  }
  return n;
}

// Text of the condition that follows a condition keyword ending at `pos`.
std::string_view condition_after(std::string_view text, std::size_t pos) {
  std::size_t i = pos;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
  if (i < text.size() && text[i] == '(') {
    int depth = 0;
    std::size_t start = i;
    for (; i < text.size(); ++i) {
      if (text[i] == '(') ++depth;
      if (text[i] == ')' && --depth == 0) return text.substr(start, i - start + 1);
    }
    return text.substr(start);
  }
  int depth = 0;
  std::size_t start = i;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '(' || c == '[') ++depth;
    else if (c == ')' || c == ']') depth = std::max(0, depth - 1);
    else if (depth == 0 && (c == '{' || c == ':' || c == '\n' || c == ';')) break;
  }
  return text.substr(start, i - start);
}

}  // namespace

ExtractResult extract_functions(std::string_view stripped_source, const LanguageProfile& profile) {
  if (profile.function_syntax == lang::FunctionSyntax::indentation) {
    return extract_indented(stripped_source, profile);
  }
  return BraceExtractor(stripped_source, profile).run();
}

std::size_t count_complex_conditionals(std::string_view text, const LanguageProfile& profile,
                                       std::size_t min_operators) {
  std::size_t found = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_char(text[j])) ++j;
    if (contains(profile.condition_keywords, text.substr(i, j - i))) {
      auto cond = condition_after(text, j);
      std::size_t ops = 0;
      for (const auto& op : profile.boolean_operators) ops += count_operator(cond, op);
      if (ops >= min_operators) ++found;
    }
    i = j;
  }
  return found;
}

std::size_t count_duplicated_blocks(std::string_view text, std::size_t window) {
  std::vector<std::string> code;
  for (auto line : split_lines(text)) {
    auto t = trim(line);
    if (t.empty()) continue;
    std::string norm;
    bool space = false;
    for (char c : t) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        space = true;
        continue;
      }
      if (space) norm.push_back(' ');
      space = false;
      norm.push_back(c);
    }
    code.push_back(std::move(norm));
  }
  if (window == 0 || code.size() < 2 * window) return 0;

  auto substantive = [](const std::string& s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c); });
  };
  std::unordered_map<std::string, std::size_t> first_seen;
  std::size_t runs = 0;
  bool in_run = false;
  for (std::size_t i = 0; i + window <= code.size(); ++i) {
    bool any_content = false;
    std::string key;
    for (std::size_t k = i; k < i + window; ++k) {
      any_content = any_content || substantive(code[k]);
      key += code[k];
      key.push_back('\n');
    }
    bool duplicate = false;
    if (any_content) {
      auto [it, inserted] = first_seen.emplace(std::move(key), i);
      duplicate = !inserted && it->second + window <= i;
    }
    if (duplicate && !in_run) ++runs;
    in_run = duplicate;
  }
  return runs;
}

SmellReport detect_smells(const lang::SlocCount& sloc, const std::vector<FunctionInfo>& functions,
                          std::string_view stripped_source, const LanguageProfile& profile,
                          const SmellConfig& config) {
  SmellReport r;
  for (const auto& f : functions) {
    if (f.span_sloc > config.long_function_sloc) ++r[SmellKind::LongFunction];
    if (f.param_count > config.many_parameters) ++r[SmellKind::ManyParameters];
    if (f.max_nesting >= config.deep_nesting_depth) ++r[SmellKind::DeepNesting];
    if (f.cyclomatic > config.cyclomatic_complexity) ++r[SmellKind::HighCyclomaticComplexity];
  }
  r[SmellKind::ComplexConditional] =
      count_complex_conditionals(stripped_source, profile, config.complex_conditional_operators);
  r[SmellKind::DuplicatedBlock] = count_duplicated_blocks(stripped_source, config.duplicated_block_lines);
  r[SmellKind::LongFile] = sloc.sloc > config.long_file_sloc ? 1 : 0;
  return r;
}

Band band_for(double score, const SmellConfig& config) {
  if (score < config.alert_below) return Band::alert;
  if (score >= config.healthy_min) return Band::healthy;
  return Band::warning;
}

CodeHealth score_code_health(const SmellReport& report, std::size_t sloc, const SmellConfig& config) {
  double total = 0.0;
  for (auto k : kAllSmells) {
    const auto& pen = config.penalty(k);
    double weight = pen.weight;
    if (k == SmellKind::LongFile && sloc > config.long_file_double_sloc) weight *= 2.0;
    total += std::min(static_cast<double>(report[k]) * weight, pen.cap);
  }
  double score = std::clamp(10.0 - total, 1.0, 10.0);
  return {score, band_for(score, config)};
}

}  // namespace codebench::smells
