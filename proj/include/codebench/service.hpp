#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "codebench/benchstore.hpp"
#include "codebench/leaderboard.hpp"

namespace codebench::service {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSaltEnv = "CODEBENCH_SALT";

using Params = std::multimap<std::string, std::string>;

// URL-decoded "a=b&c=d" pairs.
Params parse_query_string(std::string_view query);

// Accepts metric=avg|hotspot, weighting=raw|sloc and one filter per dimension
// (codebase_size, company_size, age, cluster, language). Anything else is
// Error(bad_parameter).
leaderboard::Query parse_query(const Params& params, benchstore::Metric default_metric);

inline constexpr benchstore::Metric kDistributionDefaultMetric = benchstore::Metric::avg_health;
inline constexpr benchstore::Metric kLeaderboardDefaultMetric = benchstore::Metric::hotspot_health;

// Canonical response documents (sorted keys, compact). Payload functions throw
// codebench::Error; error_response renders one.
std::string ok_response(const std::string& payload_json);
std::string error_response(ErrorCode code, std::string_view message);
int http_status(ErrorCode code);

std::string segments_response(const benchstore::Snapshot& snapshot);
std::string distribution_response(const benchstore::Snapshot& snapshot, const leaderboard::Query& query);
std::string leaderboard_response(const benchstore::Snapshot& snapshot, const leaderboard::Query& query,
                                 std::string_view salt);

// Body: {"analysis": <analysis document>, "org_id": "...",
//        "metadata": {"employees": int|null, "industry_segment": str|null}}  (metadata optional)
// Malformed bodies raise Error(schema_mismatch).
std::string ingest_response(benchstore::BenchStore& store, std::string_view body, Instant ingested_at);
std::string receipt_response(const benchstore::IngestReceipt& receipt);

// Runs `fn` and renders either its result or the error it raised.
struct Rendered {
  int status = 200;
  std::string body;
};
Rendered render(const std::function<std::string()>& fn);

// HTTP front end over one store. Every request works on the snapshot current
// at its start.
class Server {
 public:
  Server(std::shared_ptr<benchstore::BenchStore> store, std::string salt);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace codebench::service
