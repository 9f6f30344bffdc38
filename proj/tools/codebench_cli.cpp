// Command-line front end. Talks to the library only through codebench.h.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "codebench/codebench.h"

namespace {

using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Owns a string returned by the library.
struct Owned {
  char* p = nullptr;
  ~Owned() { cb_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct StoreHandle {
  cb_store* p = nullptr;
  ~StoreHandle() { cb_store_close(p); }
};

int fail(cb_status status) {
  std::cerr << "codebench: " << cb_status_name(status) << ": " << cb_last_error_message() << "\n";
  return status == CB_BAD_PARAMETER ? kExitUsage : kExitFailure;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

std::string salt_from_env() {
  const char* salt = std::getenv("CODEBENCH_SALT");
  return salt ? salt : "";
}

struct QueryFlags {
  std::string metric;
  std::string weighting = "raw";
  std::vector<std::string> filters;
  std::string format = "text";

  void attach(CLI::App* cmd) {
    cmd->add_option("--metric", metric, "avg or hotspot")->check(CLI::IsMember({"avg", "hotspot"}));
    cmd->add_option("--weighting", weighting, "raw or sloc")->check(CLI::IsMember({"raw", "sloc"}));
    cmd->add_option("--filter", filters, "dimension=label (repeatable)");
    cmd->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
  }

  // Returns false (after printing a usage error) for a malformed filter.
  bool to_query(std::string& out) const {
    std::vector<std::pair<std::string, std::string>> pairs;
    if (!metric.empty()) pairs.emplace_back("metric", metric);
    pairs.emplace_back("weighting", weighting);
    for (const auto& f : filters) {
      auto eq = f.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "codebench: usage: --filter expects dimension=label, got '" << f << "'\n";
        return false;
      }
      pairs.emplace_back(f.substr(0, eq), f.substr(eq + 1));
    }
    out.clear();
    for (const auto& [k, v] : pairs) {
      if (!out.empty()) out += '&';
      out += httplib::detail::encode_query_param(k) + "=" + httplib::detail::encode_query_param(v);
    }
    return true;
  }
};

std::string filters_text(const json& query) {
  std::string out;
  for (const auto& [dim, label] : query.at("filters").items()) {
    if (!out.empty()) out += ",";
    out += dim + "=" + label.get<std::string>();
  }
  return out.empty() ? "none" : out;
}

void print_curve(const json& query, const json& curve) {
  const auto& s = curve.at("summary");
  std::printf("# metric=%s weighting=%s filters=%s\n", query.at("metric").get<std::string>().c_str(),
              query.at("weighting").get<std::string>().c_str(), filters_text(query).c_str());
  std::printf("# n=%zu mode=%.6f p10=%.6f p90=%.6f bandwidth=%.6f mass=%.6f\n", s.at("n").get<std::size_t>(),
              s.at("mode").get<double>(), s.at("p10").get<double>(), s.at("p90").get<double>(),
              s.at("bandwidth").get<double>(), s.at("mass").get<double>());
  const auto& grid = curve.at("grid");
  const auto& density = curve.at("density");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::printf("%.6f\t%.9e\n", grid[i].get<double>(), density[i].get<double>());
  }
}

void print_board(const json& payload) {
  const auto& query = payload.at("query");
  std::printf("# metric=%s weighting=%s filters=%s\n", query.at("metric").get<std::string>().c_str(),
              query.at("weighting").get<std::string>().c_str(), filters_text(query).c_str());
  std::printf("# p10=%.6f p90=%.6f", payload.at("thresholds").at("p10").get<double>(),
              payload.at("thresholds").at("p90").get<double>());
  for (const auto& a : payload.at("advisories")) std::printf(" advisory=%s", a.get<std::string>().c_str());
  std::printf("\n%-5s %-16s %7s %10s %-8s %s\n", "rank", "handle", "points", "value", "band", "segment");
  for (const auto& e : payload.at("entries")) {
    const auto& l = e.at("labels");
    std::printf("%-5zu %-16s %7lld %10.4f %-8s %s/%s/%s/%s\n", e.at("rank").get<std::size_t>(),
                e.at("handle").get<std::string>().c_str(), e.at("points").get<long long>(),
                e.at("metric_value").get<double>(), e.at("band").get<std::string>().c_str(),
                l.at("codebase_size").get<std::string>().c_str(), l.at("company_size").get<std::string>().c_str(),
                l.at("age").get<std::string>().c_str(), l.at("cluster").get<std::string>().c_str());
  }
}

int open_store(const std::string& path, const std::string& rules, StoreHandle& store) {
  cb_status st = cb_store_open(path.c_str(), opt(rules), &store.p);
  return st == CB_OK ? 0 : fail(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"codebench: code-health benchmarking"};
  app.set_version_flag("--version", std::string(cb_version()));
  app.require_subcommand(1);

  // analyze
  std::string repo, as_of, project_id, out_path, config_dir;
  auto* analyze = app.add_subcommand("analyze", "Analyze a git repository");
  analyze->add_option("repo", repo, "Repository path")->required();
  analyze->add_option("--project-id", project_id, "Project identifier (default: directory name)");
  analyze->add_option("--as-of", as_of, "Analysis date, YYYY-MM-DD or YYYY-MM-DDTHH:MM:SSZ (default: today, UTC)");
  analyze->add_option("--out,-o", out_path, "Write the analysis document here (default: stdout)");
  analyze->add_option("--config-dir", config_dir, "Directory with languages.json / smells.json overrides");

  // ingest
  std::string store_path, rules_path, analysis_path, org_id, metadata_path, ingested_at;
  auto* ingest = app.add_subcommand("ingest", "Add an analysis document to a benchmark store");
  ingest->add_option("--store", store_path, "Store file")->required();
  ingest->add_option("--analysis", analysis_path, "Analysis document")->required();
  ingest->add_option("--org-id", org_id, "Owning organization")->required();
  ingest->add_option("--metadata", metadata_path, "CSV with org_id,employees,industry_segment");
  ingest->add_option("--ingested-at", ingested_at, "Ingestion timestamp (default: now)");
  ingest->add_option("--segments", rules_path, "Segment rules file (default: built in)");

  // bench
  QueryFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Density curve and summary for a segment");
  bench->add_option("--store", store_path, "Store file")->required();
  bench->add_option("--segments", rules_path, "Segment rules file (default: built in)");
  bench_flags.attach(bench);

  // leaderboard
  QueryFlags board_flags;
  auto* board = app.add_subcommand("leaderboard", "Anonymous leaderboard for a segment (salt from CODEBENCH_SALT)");
  board->add_option("--store", store_path, "Store file")->required();
  board->add_option("--segments", rules_path, "Segment rules file (default: built in)");
  board_flags.attach(board);

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API (salt from CODEBENCH_SALT)");
  serve->add_option("--store", store_path, "Store file")->required();
  serve->add_option("--segments", rules_path, "Segment rules file (default: built in)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*analyze) {
    if (project_id.empty()) {
      project_id = std::filesystem::absolute(repo).lexically_normal().filename().string();
      if (project_id.empty()) project_id = std::filesystem::absolute(repo).parent_path().filename().string();
    }
    Owned doc;
    cb_status st = cb_analyze(repo.c_str(), opt(as_of), project_id.c_str(), opt(config_dir), &doc.p);
    if (st != CB_OK) return fail(st);
    if (out_path.empty()) {
      std::fputs(doc.p, stdout);
      return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    out << doc.str();
    if (!out) {
      std::cerr << "codebench: cannot write " << out_path << "\n";
      return kExitFailure;
    }
    return 0;
  }

  if (*ingest) {
    std::ifstream in(analysis_path, std::ios::binary);
    if (!in) {
      std::cerr << "codebench: cannot read " << analysis_path << "\n";
      return kExitFailure;
    }
    std::stringstream text;
    text << in.rdbuf();
    StoreHandle store;
    if (int rc = open_store(store_path, rules_path, store)) return rc;
    Owned receipt;
    cb_status st = cb_store_ingest(store.p, text.str().c_str(), org_id.c_str(), opt(metadata_path),
                                   opt(ingested_at), &receipt.p);
    if (st != CB_OK) return fail(st);
    std::puts(receipt.p);
    return 0;
  }

  if (*bench || *board) {
    const QueryFlags& flags = *bench ? bench_flags : board_flags;
    std::string query;
    if (!flags.to_query(query)) return kExitUsage;
    std::string salt;
    if (*board) {
      salt = salt_from_env();
      if (salt.empty()) {
        std::cerr << "codebench: set CODEBENCH_SALT to build a leaderboard\n";
        return kExitFailure;
      }
    }
    StoreHandle store;
    if (int rc = open_store(store_path, rules_path, store)) return rc;
    Owned doc;
    cb_status st = *bench ? cb_distribution(store.p, query.c_str(), &doc.p)
                          : cb_leaderboard(store.p, query.c_str(), salt.c_str(), &doc.p);
    if (st != CB_OK) return fail(st);
    if (flags.format == "json") {
      std::printf("%s\n", doc.p);
      return 0;
    }
    auto payload = json::parse(doc.str()).at("payload");
    if (*bench) {
      print_curve(payload.at("query"), payload.at("curve"));
    } else {
      print_board(payload);
    }
    return 0;
  }

  if (*serve) {
    std::string salt = salt_from_env();
    if (salt.empty()) {
      std::cerr << "codebench: refusing to serve without CODEBENCH_SALT\n";
      return kExitFailure;
    }
    cb_status st = cb_serve(store_path.c_str(), opt(rules_path), host.c_str(), port, salt.c_str());
    return st == CB_OK ? 0 : fail(st);
  }
  return kExitUsage;
}
