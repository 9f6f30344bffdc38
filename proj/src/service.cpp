#include "codebench/service.hpp"

#include <set>

#include <httplib.h>
#include <json.hpp>

namespace codebench::service {

using nlohmann::json;
namespace bs = codebench::benchstore;

Params parse_query_string(std::string_view query) {
  if (query.starts_with('?')) query.remove_prefix(1);
  httplib::Params params;
  httplib::detail::parse_query_text(std::string(query), params);
  return Params(params.begin(), params.end());
}

leaderboard::Query parse_query(const Params& params, bs::Metric default_metric) {
  leaderboard::Query q;
  q.metric = default_metric;
  std::set<std::string> seen;
  for (const auto& [key, value] : params) {
    bool repeated = !seen.insert(key).second;
    if (key == "metric" || key == "weighting") {
      if (repeated) throw Error(ErrorCode::bad_parameter, "parameter " + key + " given more than once");
      if (key == "metric") {
        if (value == "avg") {
          q.metric = bs::Metric::avg_health;
        } else if (value == "hotspot") {
          q.metric = bs::Metric::hotspot_health;
        } else {
          throw Error(ErrorCode::bad_parameter, "metric must be avg or hotspot, got '" + value + "'");
        }
      } else {
        if (value == "raw") {
          q.weighting = bs::Weighting::raw;
        } else if (value == "sloc") {
          q.weighting = bs::Weighting::sloc;
        } else {
          throw Error(ErrorCode::bad_parameter, "weighting must be raw or sloc, got '" + value + "'");
        }
      }
      continue;
    }
    bs::set_filter(q.filter, key, value);
  }
  if (q.filter.language && q.metric == bs::Metric::hotspot_health) {
    throw Error(ErrorCode::bad_parameter, "the language filter is available for metric=avg only");
  }
  return q;
}

namespace {

std::string envelope_error(std::string_view code, std::string_view message) {
  json doc = {{"status", "error"},
              {"schema_version", kSchemaVersion},
              {"error", {{"code", code}, {"message", message}}}};
  return doc.dump();
}

json labels_json(const bs::SegmentLabels& l) {
  return {{"codebase_size", bs::to_string(l.codebase_size)},
          {"company_size", bs::to_string(l.company_size)},
          {"age", bs::to_string(l.age)},
          {"cluster", bs::to_string(l.cluster)}};
}

json query_json(const leaderboard::Query& q) {
  json filters = json::object();
  const auto& f = q.filter;
  if (f.codebase_size) filters["codebase_size"] = bs::to_string(*f.codebase_size);
  if (f.company_size) filters["company_size"] = bs::to_string(*f.company_size);
  if (f.age) filters["age"] = bs::to_string(*f.age);
  if (f.cluster) filters["cluster"] = bs::to_string(*f.cluster);
  if (f.language) filters["language"] = *f.language;
  return {{"metric", bs::to_string(q.metric)}, {"weighting", bs::to_string(q.weighting)}, {"filters", filters}};
}

json curve_json(const stats::DensityCurve& c) {
  return {{"summary",
           {{"mode", c.mode},
            {"p10", c.p10},
            {"p90", c.p90},
            {"bandwidth", c.bandwidth},
            {"n", c.n},
            {"mass", c.mass}}},
          {"grid", c.grid},
          {"density", c.density}};
}

template <typename E>
json label_list(const bs::Bins<E>& bins, std::initializer_list<E> extra = {}) {
  json list = json::array();
  for (const auto& b : bins.bins) list.push_back(bs::to_string(b.label));
  for (E e : extra) list.push_back(bs::to_string(e));
  return list;
}

}  // namespace

std::string ok_response(const std::string& payload_json) {
  json doc = {{"status", "ok"}, {"schema_version", kSchemaVersion}, {"payload", json::parse(payload_json)}};
  return doc.dump();
}

std::string error_response(ErrorCode code, std::string_view message) {
  return envelope_error(to_string(code), message);
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_parameter:
    case ErrorCode::invalid_argument:
    case ErrorCode::schema_mismatch:
    case ErrorCode::invalid_record:
    case ErrorCode::no_weighted_mass:
      return 400;
    case ErrorCode::empty_segment:
      return 404;
    default:
      return 500;
  }
}

std::string segments_response(const bs::Snapshot& snapshot) {
  const auto& rules = snapshot.rules ? *snapshot.rules : bs::SegmentRules::builtin();
  std::set<std::string> languages;
  for (const auto& r : snapshot.records) {
    for (const auto& [language, agg] : r.per_language) languages.insert(language);
  }
  json clusters = json::object();
  for (const auto& [c, name] : rules.cluster_names) clusters[std::string(bs::to_string(c))] = name;

  json cluster_labels = json::array();
  for (const auto& [c, name] : rules.cluster_names) cluster_labels.push_back(bs::to_string(c));
  cluster_labels.push_back(bs::to_string(bs::Cluster::Unknown));

  json payload = {
      {"dimensions",
       {{"codebase_size", label_list(rules.codebase)},
        {"company_size", label_list(rules.company, {bs::CompanySize::Unknown})},
        {"age", label_list(rules.age)},
        {"cluster", cluster_labels},
        {"language", languages}}},
      {"clusters", clusters},
      {"metrics", {"avg", "hotspot"}},
      {"weightings", {"raw", "sloc"}},
      {"records", snapshot.records.size()},
  };
  return ok_response(payload.dump());
}

std::string distribution_response(const bs::Snapshot& snapshot, const leaderboard::Query& query) {
  auto rows = bs::latest_per_project(snapshot.query(query.filter, query.metric, query.weighting));
  if (rows.empty()) throw Error(ErrorCode::empty_segment, "empty segment");
  stats::Sample sample;
  for (const auto& row : rows) {
    sample.values.push_back(row.value);
    sample.weights.push_back(row.weight);
  }
  auto curve = stats::summarize(sample);
  json payload = {{"query", query_json(query)}, {"curve", curve_json(curve)}};
  return ok_response(payload.dump());
}

std::string leaderboard_response(const bs::Snapshot& snapshot, const leaderboard::Query& query,
                                 std::string_view salt) {
  auto board = leaderboard::build_leaderboard(snapshot, query, salt);
  json entries = json::array();
  for (const auto& e : board.entries) {
    entries.push_back({{"rank", e.rank},
                       {"handle", e.handle},
                       {"points", e.points},
                       {"metric_value", e.metric_value},
                       {"band", leaderboard::to_string(e.band)},
                       {"labels", labels_json(e.labels)}});
  }
  json advisories = json::array();
  if (board.small_segment) advisories.push_back("small_segment");
  json payload = {
      {"query", query_json(query)},
      {"advisories", advisories},
      {"entries", entries},
      {"thresholds", {{"p10", board.curve.p10}, {"p90", board.curve.p90}}},
      {"curve", curve_json(board.curve)},
  };
  return ok_response(payload.dump());
}

std::string receipt_response(const bs::IngestReceipt& receipt) {
  json payload = {{"record_id", receipt.record_id},
                  {"replaced", receipt.replaced},
                  {"labels", labels_json(receipt.labels)}};
  return ok_response(payload.dump());
}

std::string ingest_response(bs::BenchStore& store, std::string_view body, Instant ingested_at) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_mismatch, std::string("ingest body is not valid JSON: ") + e.what());
  }
  analysis::ProjectAnalysis pa;
  std::string org_id;
  std::optional<bs::OrgMetadata> metadata;
  try {
    if (!doc.is_object()) throw Error(ErrorCode::schema_mismatch, "ingest body must be an object");
    for (const auto& [key, value] : doc.items()) {
      if (key != "analysis" && key != "org_id" && key != "metadata" && key != "ingested_at") {
        throw Error(ErrorCode::schema_mismatch, "unknown ingest field " + key);
      }
    }
    pa = analysis::analysis_from_json(doc.at("analysis").dump());
    org_id = doc.at("org_id").get<std::string>();
    if (doc.contains("ingested_at")) ingested_at = parse_instant(doc.at("ingested_at").get<std::string>());
    if (doc.contains("metadata") && !doc.at("metadata").is_null()) {
      const auto& m = doc.at("metadata");
      bs::OrgMetadata meta;
      if (m.contains("employees") && !m.at("employees").is_null()) meta.employees = m.at("employees").get<std::int64_t>();
      if (m.contains("industry_segment") && !m.at("industry_segment").is_null()) {
        meta.industry_segment = m.at("industry_segment").get<std::string>();
      }
      metadata = meta;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_mismatch, std::string("malformed ingest body: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::schema_mismatch) throw;
    throw Error(ErrorCode::schema_mismatch, std::string("malformed ingest body: ") + e.what());
  }
  return receipt_response(store.ingest(pa, org_id, metadata, ingested_at));
}

Rendered render(const std::function<std::string()>& fn) {
  try {
    return {200, fn()};
  } catch (const Error& e) {
    return {http_status(e.code()), error_response(e.code(), e.what())};
  } catch (const std::exception& e) {
    return {500, error_response(ErrorCode::internal, e.what())};
  }
}

// ---------------------------------------------------------------------------

struct Server::Impl {
  std::shared_ptr<bs::BenchStore> store;
  std::string salt;
  httplib::Server http;
};

namespace {

Params request_params(const httplib::Request& req) { return Params(req.params.begin(), req.params.end()); }

void reply(httplib::Response& res, const Rendered& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

Server::Server(std::shared_ptr<bs::BenchStore> store, std::string salt) : impl_(std::make_unique<Impl>()) {
  if (salt.empty()) {
    throw Error(ErrorCode::invalid_argument, std::string("refusing to serve without a salt; set ") + kSaltEnv);
  }
  impl_->store = std::move(store);
  impl_->salt = std::move(salt);
  auto* impl = impl_.get();

  impl->http.Get("/api/v1/segments", [impl](const httplib::Request& req, httplib::Response& res) {
    reply(res, render([&] {
            if (!req.params.empty()) {
              throw Error(ErrorCode::bad_parameter, "segments takes no parameters, got " + req.params.begin()->first);
            }
            return segments_response(*impl->store->snapshot());
          }));
  });
  impl->http.Get("/api/v1/distribution", [impl](const httplib::Request& req, httplib::Response& res) {
    reply(res, render([&] {
            auto query = parse_query(request_params(req), kDistributionDefaultMetric);
            return distribution_response(*impl->store->snapshot(), query);
          }));
  });
  impl->http.Get("/api/v1/leaderboard", [impl](const httplib::Request& req, httplib::Response& res) {
    reply(res, render([&] {
            auto query = parse_query(request_params(req), kLeaderboardDefaultMetric);
            return leaderboard_response(*impl->store->snapshot(), query, impl->salt);
          }));
  });
  impl->http.Post("/api/v1/projects", [impl](const httplib::Request& req, httplib::Response& res) {
    reply(res, render([&] {
            auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
            return ingest_response(*impl->store, req.body, now);
          }));
  });
  impl->http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    res.set_content(envelope_error("not_found", "no route for " + req.method + " " + req.path), "application/json");
  });
  impl->http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "unexpected failure";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(error_response(ErrorCode::internal, message), "application/json");
  });
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::io, "cannot bind " + host);
    return bound;
  }
  if (!impl_->http.bind_to_port(host, port)) {
    throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace codebench::service
