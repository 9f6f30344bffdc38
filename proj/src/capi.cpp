#include "codebench/codebench.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "codebench/analysis.hpp"
#include "codebench/benchstore.hpp"
#include "codebench/service.hpp"

namespace cb = codebench;

struct cb_store {
  std::shared_ptr<cb::benchstore::BenchStore> store;
};

namespace {

thread_local std::string last_error;

cb_status status_of(cb::ErrorCode code) {
  switch (code) {
    case cb::ErrorCode::invalid_argument: return CB_INVALID_ARGUMENT;
    case cb::ErrorCode::no_history: return CB_NO_HISTORY;
    case cb::ErrorCode::repo_access: return CB_REPO_ACCESS;
    case cb::ErrorCode::no_analyzable_files: return CB_NO_ANALYZABLE_FILES;
    case cb::ErrorCode::no_weighted_mass: return CB_NO_WEIGHTED_MASS;
    case cb::ErrorCode::empty_segment: return CB_EMPTY_SEGMENT;
    case cb::ErrorCode::bad_parameter: return CB_BAD_PARAMETER;
    case cb::ErrorCode::schema_mismatch: return CB_SCHEMA_MISMATCH;
    case cb::ErrorCode::invalid_record: return CB_INVALID_RECORD;
    case cb::ErrorCode::io: return CB_IO;
    case cb::ErrorCode::internal: return CB_INTERNAL;
  }
  return CB_INTERNAL;
}

char* duplicate(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void put(char** out, const std::string& s) {
  if (out) *out = duplicate(s);
}

// Runs fn, translating exceptions into a status and the thread's last error.
// When `error_doc` is set, failures also produce an error response document.
template <typename Fn>
cb_status guarded(Fn&& fn, char** error_doc = nullptr) {
  last_error.clear();
  try {
    fn();
    return CB_OK;
  } catch (const cb::Error& e) {
    last_error = e.what();
    if (error_doc) put(error_doc, cb::service::error_response(e.code(), e.what()));
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CB_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    if (error_doc) put(error_doc, cb::service::error_response(cb::ErrorCode::internal, e.what()));
    return CB_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (!p) throw cb::Error(cb::ErrorCode::invalid_argument, std::string(name) + " must not be NULL");
}

std::string text_or(const char* s, const char* fallback = "") { return s ? s : fallback; }

}  // namespace

extern "C" {

const char* cb_status_name(cb_status status) {
  switch (status) {
    case CB_OK: return "ok";
    case CB_INVALID_ARGUMENT: return "invalid_argument";
    case CB_NO_HISTORY: return "no_history";
    case CB_REPO_ACCESS: return "repo_access";
    case CB_NO_ANALYZABLE_FILES: return "no_analyzable_files";
    case CB_NO_WEIGHTED_MASS: return "no_weighted_mass";
    case CB_EMPTY_SEGMENT: return "empty_segment";
    case CB_BAD_PARAMETER: return "bad_parameter";
    case CB_SCHEMA_MISMATCH: return "schema_mismatch";
    case CB_INVALID_RECORD: return "invalid_record";
    case CB_IO: return "io";
    case CB_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* cb_last_error_message(void) { return last_error.c_str(); }

void cb_string_free(char* s) { std::free(s); }

const char* cb_version(void) { return CODEBENCH_VERSION; }

cb_status cb_analyze(const char* repo_path, const char* as_of, const char* project_id, const char* config_dir,
                     char** out_json) {
  return guarded([&] {
    require(repo_path, "repo_path");
    require(project_id, "project_id");
    require(out_json, "out_json");
    cb::Instant when = as_of ? cb::parse_instant(as_of) : cb::utc_midnight_today();

    std::optional<cb::lang::LanguageRegistry> languages;
    std::optional<cb::smells::SmellConfig> smell_config;
    cb::analysis::AnalysisOptions options;
    if (config_dir) {
      namespace fs = std::filesystem;
      fs::path dir(config_dir);
      if (fs::exists(dir / "languages.json")) {
        languages = cb::lang::LanguageRegistry::from_file((dir / "languages.json").string());
        options.languages = &*languages;
      }
      if (fs::exists(dir / "smells.json")) {
        smell_config = cb::smells::SmellConfig::from_file((dir / "smells.json").string());
        options.smells = &*smell_config;
      }
    }
    auto pa = cb::analysis::analyze_project(repo_path, when, project_id, options);
    put(out_json, cb::analysis::to_json(pa));
  });
}

cb_status cb_store_open(const char* path, const char* segment_rules_path, cb_store** out_store) {
  return guarded([&] {
    require(path, "path");
    require(out_store, "out_store");
    *out_store = nullptr;
    std::shared_ptr<const cb::benchstore::SegmentRules> rules;
    if (segment_rules_path) {
      rules = std::make_shared<cb::benchstore::SegmentRules>(cb::benchstore::SegmentRules::from_file(segment_rules_path));
    }
    auto handle = std::make_unique<cb_store>();
    handle->store = std::make_shared<cb::benchstore::BenchStore>(path, rules);
    *out_store = handle.release();
  });
}

void cb_store_close(cb_store* store) { delete store; }

cb_status cb_store_ingest(cb_store* store, const char* analysis_json, const char* org_id,
                          const char* metadata_csv_path, const char* ingested_at, char** out_receipt) {
  return guarded([&] {
    require(store, "store");
    require(analysis_json, "analysis_json");
    require(org_id, "org_id");
    auto pa = cb::analysis::analysis_from_json(analysis_json);
    std::optional<cb::benchstore::OrgMetadata> metadata;
    if (metadata_csv_path) {
      auto table = cb::benchstore::parse_metadata_csv(cb::read_file(metadata_csv_path));
      if (auto it = table.find(org_id); it != table.end()) metadata = it->second;
    }
    cb::Instant when = ingested_at
                           ? cb::parse_instant(ingested_at)
                           : std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    auto receipt = store->store->ingest(pa, org_id, metadata, when);
    put(out_receipt, cb::service::receipt_response(receipt));
  });
}

cb_status cb_segments(cb_store* store, char** out_json) {
  return guarded(
      [&] {
        require(store, "store");
        require(out_json, "out_json");
        put(out_json, cb::service::segments_response(*store->store->snapshot()));
      },
      out_json);
}

cb_status cb_distribution(cb_store* store, const char* query, char** out_json) {
  return guarded(
      [&] {
        require(store, "store");
        require(out_json, "out_json");
        auto q = cb::service::parse_query(cb::service::parse_query_string(text_or(query)),
                                          cb::service::kDistributionDefaultMetric);
        put(out_json, cb::service::distribution_response(*store->store->snapshot(), q));
      },
      out_json);
}

cb_status cb_leaderboard(cb_store* store, const char* query, const char* salt, char** out_json) {
  return guarded(
      [&] {
        require(store, "store");
        require(out_json, "out_json");
        auto q = cb::service::parse_query(cb::service::parse_query_string(text_or(query)),
                                          cb::service::kLeaderboardDefaultMetric);
        put(out_json, cb::service::leaderboard_response(*store->store->snapshot(), q, text_or(salt)));
      },
      out_json);
}

cb_status cb_serve(const char* store_path, const char* segment_rules_path, const char* host, int port,
                   const char* salt) {
  return guarded([&] {
    require(store_path, "store_path");
    require(host, "host");
    if (!salt || !*salt) {
      throw cb::Error(cb::ErrorCode::invalid_argument,
                      std::string("refusing to serve without a salt; set ") + cb::service::kSaltEnv);
    }
    std::shared_ptr<const cb::benchstore::SegmentRules> rules;
    if (segment_rules_path) {
      rules = std::make_shared<cb::benchstore::SegmentRules>(cb::benchstore::SegmentRules::from_file(segment_rules_path));
    }
    auto store = std::make_shared<cb::benchstore::BenchStore>(store_path, rules);
    cb::service::Server server(store, salt);
    int bound = server.bind(host, port);
    std::printf("listening on http://%s:%d\n", host, bound);
    std::fflush(stdout);
    server.listen();
  });
}

}  // extern "C"
