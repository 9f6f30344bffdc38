#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "codebench/codebench.h"
#include "git_fixture.hpp"
#include "process.hpp"

using json = nlohmann::json;
using codebench::detail::run_process;
using codebench::testing::Change;
using codebench::testing::days_before;
using codebench::testing::GitRepo;
using codebench::testing::TempDir;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  cb_string_free(s);
  return out;
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string small_repo(TempDir& tmp, const std::string& name, int functions) {
  GitRepo repo(tmp.file(name));
  std::string body;
  for (int i = 0; i < functions; ++i) {
    body += "int f" + std::to_string(i) + "(int a, int b, int c, int d, int e) {\n  return a + b;\n}\n";
  }
  auto as_of = codebench::parse_instant("2024-06-30");
  repo.commit(days_before(as_of, 10), {Change::write("src/main.c", body), Change::write("util.py", "x = 1\n")});
  repo.commit(days_before(as_of, 5), {Change::write("src/main.c", body + "int tail;\n")});
  repo.build();
  return repo.dir();
}

codebench::detail::ProcessResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), CODEBENCH_CLI);
  return run_process(args);
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(cb_status_name(CB_OK)) == "ok");
  CHECK(std::string(cb_status_name(CB_EMPTY_SEGMENT)) == "empty_segment");
  CHECK(std::string(cb_status_name(CB_BAD_PARAMETER)) == "bad_parameter");
  CHECK(std::string(cb_version()).size() > 0);
}

TEST_CASE("c api round trip") {
  TempDir tmp("capi");
  auto repo = small_repo(tmp, "repo", 3);

  char* doc = nullptr;
  REQUIRE(cb_analyze(repo.c_str(), "2024-06-30", "svc", nullptr, &doc) == CB_OK);
  auto analysis = take(doc);
  auto parsed = json::parse(analysis);
  CHECK(parsed["project_id"] == "svc");
  CHECK(parsed["files"].size() == 2);

  char* none = nullptr;
  CHECK(cb_analyze(tmp.file("missing").c_str(), "2024-06-30", "x", nullptr, &none) == CB_REPO_ACCESS);
  CHECK(none == nullptr);
  CHECK(std::string(cb_last_error_message()).size() > 0);
  CHECK(cb_analyze(repo.c_str(), "June", "x", nullptr, &none) == CB_INVALID_ARGUMENT);
  CHECK(cb_analyze(nullptr, nullptr, "x", nullptr, &none) == CB_INVALID_ARGUMENT);

  auto csv = tmp.file("orgs.csv");
  write_file(csv, "org_id,employees,industry_segment\nacme,500,Computer Software\n");

  cb_store* store = nullptr;
  REQUIRE(cb_store_open(tmp.file("bench.jsonl").c_str(), nullptr, &store) == CB_OK);
  char* receipt = nullptr;
  REQUIRE(cb_store_ingest(store, analysis.c_str(), "acme", csv.c_str(), "2024-07-01T00:00:00Z", &receipt) == CB_OK);
  auto r = json::parse(take(receipt));
  CHECK(r["payload"]["labels"]["company_size"] == "Large");
  CHECK(r["payload"]["labels"]["cluster"] == "C-C");

  char* out = nullptr;
  REQUIRE(cb_segments(store, &out) == CB_OK);
  CHECK(json::parse(take(out))["payload"]["records"] == 1);
  REQUIRE(cb_distribution(store, "weighting=sloc", &out) == CB_OK);
  CHECK(json::parse(take(out))["payload"]["query"]["weighting"] == "sloc");
  REQUIRE(cb_leaderboard(store, nullptr, "pepper", &out) == CB_OK);
  auto board = take(out);
  CHECK(board.find("acme") == std::string::npos);

  CHECK(cb_leaderboard(store, "", "", &out) == CB_INVALID_ARGUMENT);
  take(out);
  CHECK(cb_distribution(store, "weighting=banana", &out) == CB_BAD_PARAMETER);
  CHECK(json::parse(take(out))["error"]["code"] == "bad_parameter");
  CHECK(cb_distribution(store, "cluster=C-A", &out) == CB_EMPTY_SEGMENT);
  CHECK(json::parse(take(out))["error"]["code"] == "empty_segment");
  CHECK(cb_store_ingest(store, "{}", "acme", nullptr, nullptr, &out) == CB_SCHEMA_MISMATCH);
  cb_store_close(store);

  CHECK(cb_store_open(tmp.file("nodir/x/y.jsonl").c_str(), tmp.file("missing-rules.json").c_str(), &store) != CB_OK);
}

TEST_CASE("cli") {
  TempDir tmp("cli");
  auto repo = small_repo(tmp, "repo", 2);
  auto doc = tmp.file("a.json");
  auto store = tmp.file("bench.jsonl");

  auto analyzed = cli({"analyze", repo, "--as-of", "2024-06-30", "--project-id", "svc", "-o", doc});
  CHECK(analyzed.exit_code == 0);
  CHECK(json::parse(read_file(doc))["project_id"] == "svc");

  auto to_stdout = cli({"analyze", repo, "--as-of", "2024-06-30"});
  CHECK(to_stdout.exit_code == 0);
  CHECK(json::parse(to_stdout.out)["project_id"] == "repo");

  auto missing = cli({"analyze", tmp.file("nope"), "-o", tmp.file("never.json")});
  CHECK(missing.exit_code == 1);
  CHECK_FALSE(std::filesystem::exists(tmp.file("never.json")));
  CHECK(missing.err.find("repo_access") != std::string::npos);

  CHECK(cli({"ingest", "--store", store, "--analysis", doc, "--org-id", "acme", "--ingested-at",
             "2024-07-01T00:00:00Z"})
            .exit_code == 0);

  auto bench = cli({"bench", "--store", store, "--weighting", "sloc"});
  CHECK(bench.exit_code == 0);
  CHECK(bench.out.rfind("# metric=avg weighting=sloc", 0) == 0);
  CHECK(std::count(bench.out.begin(), bench.out.end(), '\n') == 514);

  CHECK(cli({"bench", "--store", store, "--weighting", "banana"}).exit_code == 2);
  CHECK(cli({"bench", "--store", store, "--filter", "age=Legacy", "--filter", "age=Greenfield"}).exit_code == 2);
  CHECK(cli({"bench", "--store", store, "--filter", "cluster=C-A"}).exit_code == 1);
  CHECK(cli({"frobnicate"}).exit_code == 2);

  unsetenv("CODEBENCH_SALT");
  CHECK(cli({"leaderboard", "--store", store}).exit_code != 0);
  CHECK(cli({"serve", "--store", store, "--port", "0"}).exit_code != 0);
  setenv("CODEBENCH_SALT", "pepper", 1);
  auto board = cli({"leaderboard", "--store", store, "--format", "json"});
  CHECK(board.exit_code == 0);
  CHECK(board.out.find("acme") == std::string::npos);

  cb_store* handle = nullptr;
  REQUIRE(cb_store_open(store.c_str(), nullptr, &handle) == CB_OK);
  char* direct = nullptr;
  REQUIRE(cb_leaderboard(handle, "", "pepper", &direct) == CB_OK);
  CHECK(board.out == take(direct) + "\n");
  cb_store_close(handle);
  unsetenv("CODEBENCH_SALT");
}
