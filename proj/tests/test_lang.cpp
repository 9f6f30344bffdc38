#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "codebench/lang.hpp"

using namespace codebench;
using namespace codebench::lang;

namespace {

const LanguageProfile& profile(std::string_view name) {
  const auto* p = LanguageRegistry::builtin().find(name);
  REQUIRE(p != nullptr);
  return *p;
}

std::size_t line_count(std::string_view text) {
  if (text.empty()) return 0;
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return text.back() == '\n' ? n : n + 1;
}

std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("hand-counted fixtures") {
  std::ifstream manifest(std::string(CODEBENCH_FIXTURES) + "/sloc/expected.txt");
  REQUIRE(manifest);
  std::string line;
  int checked = 0;
  while (std::getline(manifest, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string name;
    SlocCount want;
    row >> name >> want.total_lines >> want.blank_lines >> want.comment_lines >> want.sloc;
    CAPTURE(name);
    const auto* p = LanguageRegistry::builtin().detect(name);
    REQUIRE(p != nullptr);
    auto got = count_sloc(read(std::string(CODEBENCH_FIXTURES) + "/sloc/" + name), *p);
    CHECK(got.counts == want);
    CHECK(got.diagnostics.empty());
    ++checked;
  }
  CHECK(checked == 10);
}

TEST_CASE("count_sloc basics") {
  const auto& c = profile("c");
  CHECK(count_sloc("", c).counts == SlocCount{0, 0, 0, 0});

  std::string ten =
      "// a\n"
      "int a;\n"
      "\n"
      "int b;\n"
      "// b\n"
      "int c;\n"
      "   \n"
      "// c\n"
      "int d;\n"
      "int e;\n";
  CHECK(count_sloc(ten, c).counts == SlocCount{10, 2, 3, 5});

  std::string block = "/* one\n   two\n   three\n   four */\nint x;\n";
  CHECK(count_sloc(block, c).counts == SlocCount{5, 0, 4, 1});

  SUBCASE("no trailing newline") { CHECK(count_sloc("int x;", c).counts == SlocCount{1, 0, 0, 1}); }
  SUBCASE("code with trailing comment is code") {
    CHECK(count_sloc("int x; /* c */\nint y; // d\n", c).counts == SlocCount{2, 0, 0, 2});
  }
  SUBCASE("comment then code on one line is code") {
    CHECK(count_sloc("/* c */ int x;\n", c).counts == SlocCount{1, 0, 0, 1});
  }
}

TEST_CASE("unterminated block comment swallows the rest with a diagnostic") {
  auto r = count_sloc("int x;\n/* open\nint y;\n\nint z;\n", profile("cpp"));
  CHECK(r.counts == SlocCount{5, 0, 4, 1});
  CHECK(r.diagnostics.size() == 1);
}

TEST_CASE("strip_comments_and_strings") {
  const auto& c = profile("c");
  SUBCASE("identity without comments or strings") {
    std::string src = "int main() {\n  return 1 + 2;\n}\n";
    CHECK(strip_comments_and_strings(src, c).text == src);
  }
  SUBCASE("line comment removed, line kept") {
    CHECK(strip_comments_and_strings("x = 1 // note\ny = 2\n", c).text == "x = 1 \ny = 2\n");
  }
  SUBCASE("comment marker inside a string") {
    auto r = strip_comments_and_strings("s = \"a//b\";\n", c);
    CHECK(r.text == "s = \"S\";\n");
  }
  SUBCASE("block comment keeps line structure") {
    auto r = strip_comments_and_strings("a /* x\n y */ b\n", c);
    CHECK(r.text == "a  \n b\n");
  }
  SUBCASE("unterminated string closes at end of line") {
    auto r = strip_comments_and_strings("s = \"abc\nint x;\n", c);
    CHECK(r.text == "s = \"S\"\nint x;\n");
    CHECK(r.diagnostics.size() == 1);
  }
  SUBCASE("python hash inside string") {
    auto r = strip_comments_and_strings("x = '#a'  # real\n", profile("python"));
    CHECK(r.text == "x = 'S'  \n");
  }
}

TEST_CASE("detect") {
  const auto& reg = LanguageRegistry::builtin();
  CHECK(reg.detect("src/app.rb") == nullptr);
  CHECK(reg.detect("README") == nullptr);
  REQUIRE(reg.detect("src/main.go") != nullptr);
  CHECK(reg.detect("src/main.go")->name == "go");
  REQUIRE(reg.detect("web/a.test.ts") != nullptr);
  CHECK(reg.detect("web/a.test.ts")->name == "typescript");
  REQUIRE(reg.detect("lib/x.h") != nullptr);
  CHECK(reg.detect("lib/x.h")->name == "c");
  REQUIRE(reg.detect("SRC/UPPER.CPP") != nullptr);
  CHECK(reg.detect("SRC/UPPER.CPP")->name == "cpp");
}

TEST_CASE("registry ships at least eight profiles with unique extensions") {
  const auto& reg = LanguageRegistry::builtin();
  CHECK(reg.profiles().size() >= 8);
  std::set<std::string> seen;
  for (const auto& p : reg.profiles()) {
    CHECK_FALSE(p.extensions.empty());
    for (const auto& e : p.extensions) CHECK(seen.insert(e).second);
    for (const auto& b : p.block_comment) {
      CHECK_FALSE(b.open.empty());
      CHECK_FALSE(b.close.empty());
      for (const auto& l : p.line_comment) {
        CHECK(b.open != l);
        CHECK(b.close != l);
      }
    }
  }
}

TEST_CASE("registry validation") {
  auto doc = [](const std::string& profiles, int version = 1) {
    return "{\"schema\":\"codebench.languages\",\"schema_version\":" + std::to_string(version) +
           ",\"profiles\":[" + profiles + "]}";
  };
  auto prof = [](const std::string& name, const std::string& ext, const std::string& line,
                 const std::string& block) {
    return "{\"name\":\"" + name + "\",\"extensions\":[\"" + ext + "\"],\"line_comment\":[\"" + line +
           "\"],\"block_comment\":[" + block +
           "],\"strings\":[],\"function_syntax\":\"brace\",\"function_patterns\":[],"
           "\"branch_keywords\":[],\"nesting_keywords\":[],\"condition_keywords\":[],"
           "\"boolean_operators\":[],\"implicit_params\":[]}";
  };
  CHECK_NOTHROW(LanguageRegistry::from_json(doc(prof("a", ".a", "//", "[\"/*\",\"*/\"]"))));

  auto code_of = [](const std::string& text) {
    try {
      LanguageRegistry::from_json(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::internal;
  };
  CHECK(code_of(doc(prof("a", ".a", "//", ""), 2)) == ErrorCode::schema_mismatch);
  CHECK(code_of(doc(prof("a", ".x", "//", "") + "," + prof("b", ".x", "#", ""))) == ErrorCode::invalid_argument);
  CHECK(code_of(doc(prof("a", ".a", "--", "[\"--\",\"*/\"]"))) == ErrorCode::invalid_argument);
  CHECK(code_of(doc(prof("a", ".a", "//", "[\"\",\"*/\"]"))) == ErrorCode::invalid_argument);
}

TEST_CASE("line classification properties on random sources") {
  std::mt19937 rng(7);
  const char* pieces[] = {"int x;", "// c", "/* a", "b */", "\"s//t\"", "  ", "", "/* x */", "y = 1; // z",
                          "'q'", "\"open", "*/ w"};
  for (const char* name : {"c", "cpp", "java", "javascript", "go", "rust", "python", "php"}) {
    const auto& p = profile(name);
    for (int trial = 0; trial < 200; ++trial) {
      std::string src;
      int lines = std::uniform_int_distribution<int>(0, 20)(rng);
      for (int i = 0; i < lines; ++i) {
        int parts = std::uniform_int_distribution<int>(0, 3)(rng);
        for (int k = 0; k < parts; ++k) src += pieces[rng() % std::size(pieces)];
        src += '\n';
      }
      auto counted = count_sloc(src, p).counts;
      CHECK(counted.blank_lines + counted.comment_lines + counted.sloc == counted.total_lines);
      CHECK(counted.total_lines == line_count(src));

      auto stripped = strip_comments_and_strings(src, p).text;
      CHECK(line_count(stripped) <= line_count(src));
      CHECK(std::count(stripped.begin(), stripped.end(), '\n') == std::count(src.begin(), src.end(), '\n'));
      auto recount = count_sloc(stripped, p).counts;
      CHECK(recount.comment_lines == 0);
      CHECK(recount.sloc <= counted.sloc);
    }
  }
}
