#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "codebench/service.hpp"
#include "git_fixture.hpp"

using namespace codebench;
using namespace codebench::benchstore;
using json = nlohmann::json;
using codebench::testing::TempDir;

namespace {

const Instant kIngest = parse_instant("2024-07-01T00:00:00Z");

analysis::ProjectAnalysis doc(const std::string& project, double avg, std::optional<double> hotspot,
                              std::size_t sloc) {
  analysis::ProjectAnalysis pa;
  pa.project_id = project;
  pa.as_of = parse_instant("2024-06-30");
  pa.inception = parse_instant("2016-01-01");
  pa.avg_health = avg;
  pa.hotspot_health = hotspot;
  pa.total_sloc = sloc;
  pa.per_language["go"] = {avg, sloc};
  return pa;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

void fill(BenchStore& store, int orgs) {
  for (int i = 0; i < orgs; ++i) {
    store.ingest(doc("p" + std::to_string(i), 2.0 + 0.37 * i, 1.5 + 0.41 * i, 1000 * (i + 1)),
                 "org" + std::to_string(i), OrgMetadata{20 + 40 * i, i % 2 ? "retail" : "insurance"}, kIngest);
  }
}

struct RunningServer {
  std::shared_ptr<BenchStore> store;
  service::Server server;
  int port;
  std::thread thread;

  RunningServer(std::shared_ptr<BenchStore> s, const std::string& salt)
      : store(s), server(s, salt), port(server.bind("127.0.0.1", 0)), thread([this] { server.listen(); }) {
    server.wait_until_ready();
  }
  ~RunningServer() {
    server.stop();
    thread.join();
  }
};

}  // namespace

TEST_CASE("parse_query") {
  using service::parse_query;
  using service::parse_query_string;
  auto q = parse_query(parse_query_string("metric=avg&weighting=sloc&cluster=C-A&codebase_size=Large"),
                       service::kLeaderboardDefaultMetric);
  CHECK(q.metric == Metric::avg_health);
  CHECK(q.weighting == Weighting::sloc);
  CHECK(q.filter.cluster == Cluster::A);
  CHECK(q.filter.codebase_size == CodebaseSize::Large);

  auto defaults = parse_query({}, service::kLeaderboardDefaultMetric);
  CHECK(defaults.metric == Metric::hotspot_health);
  CHECK(defaults.weighting == Weighting::raw);
  CHECK(parse_query({}, service::kDistributionDefaultMetric).metric == Metric::avg_health);

  auto lang = parse_query(parse_query_string("language=c%2B%2B"), service::kDistributionDefaultMetric);
  CHECK(lang.filter.language == "c++");

  auto bad = [](const std::string& text) {
    return code_of([&] {
      service::parse_query(service::parse_query_string(text), service::kDistributionDefaultMetric);
    });
  };
  CHECK(bad("weighting=banana") == ErrorCode::bad_parameter);
  CHECK(bad("metric=median") == ErrorCode::bad_parameter);
  CHECK(bad("colour=red") == ErrorCode::bad_parameter);
  CHECK(bad("metric=avg&metric=hotspot") == ErrorCode::bad_parameter);
  CHECK(bad("age=Ancient") == ErrorCode::bad_parameter);
  CHECK(bad("metric=hotspot&language=go") == ErrorCode::bad_parameter);
}

TEST_CASE("response envelopes") {
  CHECK(service::ok_response("{\"b\":1,\"a\":2}") == "{\"payload\":{\"a\":2,\"b\":1},\"schema_version\":1,\"status\":\"ok\"}");
  CHECK(service::error_response(ErrorCode::empty_segment, "empty segment") ==
        "{\"error\":{\"code\":\"empty_segment\",\"message\":\"empty segment\"},\"schema_version\":1,\"status\":\"error\"}");
  CHECK(service::http_status(ErrorCode::bad_parameter) == 400);
  CHECK(service::http_status(ErrorCode::schema_mismatch) == 400);
  CHECK(service::http_status(ErrorCode::empty_segment) == 404);
  CHECK(service::http_status(ErrorCode::io) == 500);
  auto r = service::render([]() -> std::string { throw Error(ErrorCode::bad_parameter, "nope"); });
  CHECK(r.status == 400);
  CHECK(json::parse(r.body)["error"]["code"] == "bad_parameter");
}

TEST_CASE("payloads") {
  TempDir tmp("payloads");
  BenchStore store(tmp.file("s.jsonl"));
  fill(store, 12);
  auto snap = store.snapshot();

  auto segments = json::parse(service::segments_response(*snap));
  CHECK(segments["status"] == "ok");
  CHECK(segments["payload"]["records"] == 12);
  CHECK(segments["payload"]["dimensions"]["codebase_size"] == json({"Small", "Medium", "Large"}));
  CHECK(segments["payload"]["dimensions"]["company_size"] == json({"Small", "Medium", "Large", "Unknown"}));
  CHECK(segments["payload"]["dimensions"]["cluster"] == json({"C-A", "C-B", "C-C", "Unknown"}));
  CHECK(segments["payload"]["dimensions"]["language"] == json({"go"}));

  auto dist = json::parse(service::distribution_response(*snap, {Metric::avg_health, Weighting::sloc, {}}));
  CHECK(dist["payload"]["curve"]["grid"].size() == 512);
  CHECK(dist["payload"]["curve"]["density"].size() == 512);
  CHECK(dist["payload"]["curve"]["summary"]["n"] == 12);
  CHECK(dist["payload"]["query"] == json({{"metric", "avg"}, {"weighting", "sloc"}, {"filters", json::object()}}));

  auto board = json::parse(service::leaderboard_response(*snap, {}, "pepper"));
  CHECK(board["payload"]["entries"].size() == 12);
  CHECK(board["payload"]["advisories"].empty());
  CHECK(board["payload"]["query"]["metric"] == "hotspot");
  const auto& first = board["payload"]["entries"][0];
  CHECK(first["rank"] == 1);
  CHECK(first["band"] == "leader");
  CHECK(first["labels"].contains("cluster"));

  leaderboard::Query small;
  small.filter.cluster = Cluster::A;
  auto few = json::parse(service::leaderboard_response(*snap, small, "pepper"));
  CHECK(few["payload"]["advisories"] == json({"small_segment"}));
}

TEST_CASE("ingest bodies") {
  TempDir tmp("ingest");
  BenchStore store(tmp.file("s.jsonl"));
  json body = {{"analysis", json::parse(analysis::to_json(doc("web", 7.5, 6.0, 500)))},
               {"org_id", "acme"},
               {"metadata", {{"employees", 200}, {"industry_segment", "retail"}}}};
  auto receipt = json::parse(service::ingest_response(store, body.dump(), kIngest));
  CHECK(receipt["payload"]["record_id"] == "web@2024-06-30T00:00:00Z");
  CHECK(receipt["payload"]["replaced"] == false);
  CHECK(receipt["payload"]["labels"]["company_size"] == "Medium");
  CHECK(receipt["payload"]["labels"]["cluster"] == "C-A");

  auto schema_error = [&](const std::string& text) {
    return code_of([&] { service::ingest_response(store, text, kIngest); });
  };
  CHECK(schema_error("nope") == ErrorCode::schema_mismatch);
  CHECK(schema_error("[]") == ErrorCode::schema_mismatch);
  auto extra = body;
  extra["surprise"] = 1;
  CHECK(schema_error(extra.dump()) == ErrorCode::schema_mismatch);
  auto missing = body;
  missing.erase("org_id");
  CHECK(schema_error(missing.dump()) == ErrorCode::schema_mismatch);
  auto old = body;
  old["analysis"]["schema_version"] = 2;
  CHECK(schema_error(old.dump()) == ErrorCode::schema_mismatch);
  auto tiny = body;
  tiny["metadata"]["employees"] = 3;
  CHECK(schema_error(tiny.dump()) == ErrorCode::invalid_record);
}

TEST_CASE("http endpoints") {
  TempDir tmp("http");
  auto store = std::make_shared<BenchStore>(tmp.file("s.jsonl"));
  fill(*store, 11);
  RunningServer running(store, "pepper");
  httplib::Client client("127.0.0.1", running.port);

  SUBCASE("responses equal the direct library output") {
    auto snap = store->snapshot();
    auto seg = client.Get("/api/v1/segments");
    REQUIRE(seg);
    CHECK(seg->status == 200);
    CHECK(seg->get_header_value("Content-Type") == "application/json");
    CHECK(seg->body == service::segments_response(*snap));

    auto dist = client.Get("/api/v1/distribution?weighting=sloc&age=Legacy");
    REQUIRE(dist);
    CHECK(dist->status == 200);
    leaderboard::Query q{Metric::avg_health, Weighting::sloc, {}};
    q.filter.age = Age::Legacy;
    CHECK(dist->body == service::distribution_response(*snap, q));

    auto board = client.Get("/api/v1/leaderboard?metric=avg");
    REQUIRE(board);
    CHECK(board->status == 200);
    CHECK(board->body == service::leaderboard_response(*snap, {Metric::avg_health, Weighting::raw, {}}, "pepper"));
  }

  SUBCASE("errors") {
    auto bad = client.Get("/api/v1/leaderboard?weighting=banana");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body)["error"]["code"] == "bad_parameter");

    auto empty = client.Get("/api/v1/distribution?cluster=C-C");
    REQUIRE(empty);
    CHECK(empty->status == 404);
    CHECK(json::parse(empty->body)["error"]["code"] == "empty_segment");

    auto params = client.Get("/api/v1/segments?x=1");
    REQUIRE(params);
    CHECK(params->status == 400);

    auto missing = client.Get("/api/v2/segments");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body)["error"]["code"] == "not_found");
    CHECK(json::parse(missing->body)["schema_version"] == 1);

    auto junk = client.Post("/api/v1/projects", "{", "application/json");
    REQUIRE(junk);
    CHECK(junk->status == 400);
    CHECK(json::parse(junk->body)["error"]["code"] == "schema_mismatch");
  }

  SUBCASE("a posted project is visible to the next read") {
    json body = {{"analysis", json::parse(analysis::to_json(doc("fresh", 9.9, 9.9, 50)))},
                 {"org_id", "newcomer"},
                 {"ingested_at", "2024-07-02T00:00:00Z"}};
    auto posted = client.Post("/api/v1/projects", body.dump(), "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 200);
    CHECK(json::parse(posted->body)["payload"]["record_id"] == "fresh@2024-06-30T00:00:00Z");

    auto board = client.Get("/api/v1/leaderboard");
    REQUIRE(board);
    auto entries = json::parse(board->body)["payload"]["entries"];
    CHECK(entries.size() == 12);
    CHECK(entries[0]["handle"] == leaderboard::anonymize("newcomer", "pepper"));

    BenchStore reopened(store->path());
    CHECK(reopened.snapshot()->records.size() == 12);
  }

  SUBCASE("concurrent readers during writes") {
    std::vector<std::thread> readers;
    std::atomic<int> failures{0};
    for (int t = 0; t < 4; ++t) {
      readers.emplace_back([&] {
        httplib::Client c("127.0.0.1", running.port);
        for (int i = 0; i < 20; ++i) {
          auto r = c.Get("/api/v1/leaderboard?metric=avg");
          if (!r || r->status != 200) ++failures;
        }
      });
    }
    for (int i = 0; i < 10; ++i) {
      json body = {{"analysis", json::parse(analysis::to_json(doc("w" + std::to_string(i), 5, 5, 100)))},
                   {"org_id", "writer"}};
      auto r = client.Post("/api/v1/projects", body.dump(), "application/json");
      if (!r || r->status != 200) ++failures;
    }
    for (auto& t : readers) t.join();
    CHECK(failures == 0);
    CHECK(store->snapshot()->records.size() == 21);
  }
}

TEST_CASE("server refuses an empty salt") {
  TempDir tmp("nosalt");
  auto store = std::make_shared<BenchStore>(tmp.file("s.jsonl"));
  CHECK(code_of([&] { service::Server s(store, ""); }) == ErrorCode::invalid_argument);
}
