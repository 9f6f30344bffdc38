/* C interface to the codebench library. All strings are UTF-8, NUL-terminated.
 * Strings returned through `char** out` are owned by the caller and released
 * with cb_string_free. */
#ifndef CODEBENCH_H
#define CODEBENCH_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(CODEBENCH_BUILDING_LIBRARY)
#define CB_API __attribute__((visibility("default")))
#else
#define CB_API
#endif

typedef enum cb_status {
  CB_OK = 0,
  CB_INVALID_ARGUMENT,
  CB_NO_HISTORY,
  CB_REPO_ACCESS,
  CB_NO_ANALYZABLE_FILES,
  CB_NO_WEIGHTED_MASS,
  CB_EMPTY_SEGMENT,
  CB_BAD_PARAMETER,
  CB_SCHEMA_MISMATCH,
  CB_INVALID_RECORD,
  CB_IO,
  CB_INTERNAL
} cb_status;

typedef struct cb_store cb_store;

/* "ok", "empty_segment", ... */
CB_API const char* cb_status_name(cb_status status);

/* Message of the last failed call on this thread ("" if none). */
CB_API const char* cb_last_error_message(void);

CB_API void cb_string_free(char* s);

CB_API const char* cb_version(void);

/* Analyzes a git repository and returns the analysis document (JSON).
 * as_of: "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SSZ"; NULL for today's UTC midnight.
 * config_dir: directory with languages.json / smells.json overrides, or NULL. */
CB_API cb_status cb_analyze(const char* repo_path, const char* as_of, const char* project_id,
                            const char* config_dir, char** out_json);

/* Opens (or creates on first ingest) a store file. segment_rules_path may be NULL. */
CB_API cb_status cb_store_open(const char* path, const char* segment_rules_path, cb_store** out_store);
CB_API void cb_store_close(cb_store* store);

/* Ingests one analysis document. metadata_csv_path (NULL for none) is looked up
 * by org_id. ingested_at NULL means now. out_receipt receives the API response. */
CB_API cb_status cb_store_ingest(cb_store* store, const char* analysis_json, const char* org_id,
                                 const char* metadata_csv_path, const char* ingested_at, char** out_receipt);

/* Read-only queries. query is a URL query string such as
 * "metric=avg&weighting=sloc&cluster=C-A" (NULL or "" for defaults). On failure
 * out_json still receives the error response document when non-NULL. */
CB_API cb_status cb_segments(cb_store* store, char** out_json);
CB_API cb_status cb_distribution(cb_store* store, const char* query, char** out_json);
CB_API cb_status cb_leaderboard(cb_store* store, const char* query, const char* salt, char** out_json);

/* Serves the HTTP API until the process is terminated. */
CB_API cb_status cb_serve(const char* store_path, const char* segment_rules_path, const char* host, int port,
                          const char* salt);

#ifdef __cplusplus
}
#endif

#endif
