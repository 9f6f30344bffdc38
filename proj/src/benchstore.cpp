#include "codebench/benchstore.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <tuple>

#include <json.hpp>

#include "builtin_config.hpp"

namespace codebench::benchstore {

using nlohmann::json;

std::string_view to_string(CodebaseSize v) {
  switch (v) {
    case CodebaseSize::Small: return "Small";
    case CodebaseSize::Medium: return "Medium";
    case CodebaseSize::Large: return "Large";
  }
  return "";
}

std::string_view to_string(CompanySize v) {
  switch (v) {
    case CompanySize::Small: return "Small";
    case CompanySize::Medium: return "Medium";
    case CompanySize::Large: return "Large";
    case CompanySize::Unknown: return "Unknown";
  }
  return "";
}

std::string_view to_string(Age v) {
  switch (v) {
    case Age::Legacy: return "Legacy";
    case Age::Brownfield: return "Brownfield";
    case Age::Greenfield: return "Greenfield";
  }
  return "";
}

std::string_view to_string(Cluster v) {
  switch (v) {
    case Cluster::A: return "C-A";
    case Cluster::B: return "C-B";
    case Cluster::C: return "C-C";
    case Cluster::Unknown: return "Unknown";
  }
  return "";
}

std::string_view to_string(Metric m) { return m == Metric::avg_health ? "avg" : "hotspot"; }
std::string_view to_string(Weighting w) { return w == Weighting::raw ? "raw" : "sloc"; }

namespace {

template <typename E, std::size_t N>
std::optional<E> label_from(std::string_view text, const E (&all)[N]) {
  for (E e : all) {
    if (to_string(e) == text) return e;
  }
  return std::nullopt;
}

constexpr CodebaseSize kCodebaseSizes[] = {CodebaseSize::Small, CodebaseSize::Medium, CodebaseSize::Large};
constexpr CompanySize kCompanySizes[] = {CompanySize::Small, CompanySize::Medium, CompanySize::Large,
                                         CompanySize::Unknown};
constexpr Age kAges[] = {Age::Legacy, Age::Brownfield, Age::Greenfield};
constexpr Cluster kClusters[] = {Cluster::A, Cluster::B, Cluster::C, Cluster::Unknown};

template <typename E, std::size_t N>
Bins<E> parse_bins(const json& j, const char* name, const E (&all)[N]) {
  Bins<E> bins;
  std::optional<std::int64_t> prev;
  const auto& list = j.at(name);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& entry = list[i];
    auto label = label_from(entry.at("label").get<std::string>(), all);
    if (!label) throw Error(ErrorCode::invalid_argument, std::string("segments: unknown label in ") + name);
    std::optional<std::int64_t> max;
    if (!entry.at("max").is_null()) max = entry.at("max").get<std::int64_t>();
    bool last = i + 1 == list.size();
    if (last != !max.has_value()) {
      throw Error(ErrorCode::invalid_argument, std::string("segments: only the last bin of ") + name + " is open");
    }
    if (max && prev && *max <= *prev) {
      throw Error(ErrorCode::invalid_argument, std::string("segments: bins of ") + name + " must ascend");
    }
    prev = max;
    bins.bins.push_back({*label, max});
  }
  if (bins.bins.empty()) throw Error(ErrorCode::invalid_argument, std::string("segments: no bins for ") + name);
  return bins;
}

}  // namespace

std::string normalize_segment(std::string_view segment) {
  std::string out;
  bool space = false;
  for (char c : segment) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isspace(u) || c == '_' || c == '-') {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

SegmentRules SegmentRules::from_json(std::string_view text) {
  SegmentRules rules;
  try {
    auto doc = json::parse(text);
    if (doc.value("schema_version", 0) != kSchemaVersion) {
      throw Error(ErrorCode::schema_mismatch, "segment rules schema_version must be 1");
    }
    rules.codebase = parse_bins(doc, "codebase_size", kCodebaseSizes);
    rules.company = parse_bins(doc, "company_size", kCompanySizes);
    rules.age = parse_bins(doc, "age", kAges);
    for (const auto& [label, description] : doc.at("clusters").items()) {
      auto c = label_from(label, kClusters);
      if (!c || *c == Cluster::Unknown) throw Error(ErrorCode::invalid_argument, "segments: bad cluster " + label);
      rules.cluster_names[*c] = description.get<std::string>();
    }
    for (const auto& [segment, label] : doc.at("cluster_map").items()) {
      auto c = label_from(label.get<std::string>(), kClusters);
      if (!c) throw Error(ErrorCode::invalid_argument, "segments: bad cluster for " + segment);
      rules.cluster_map[normalize_segment(segment)] = *c;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("segment rules: ") + e.what());
  }
  return rules;
}

SegmentRules SegmentRules::from_file(const std::string& path) { return from_json(read_file(path)); }

const SegmentRules& SegmentRules::builtin() {
  static const SegmentRules rules = from_json(builtin_config::segments);
  return rules;
}

Cluster SegmentRules::cluster_of(std::string_view industry_segment) const {
  auto it = cluster_map.find(normalize_segment(industry_segment));
  return it == cluster_map.end() ? Cluster::Unknown : it->second;
}

SegmentLabels classify(const ProjectRecord& record, const SegmentRules& rules) {
  SegmentLabels labels;
  labels.codebase_size = rules.codebase.classify(static_cast<std::int64_t>(record.total_sloc));
  labels.company_size = record.employees ? rules.company.classify(*record.employees) : CompanySize::Unknown;
  labels.age = rules.age.classify(record.inception_year);
  labels.cluster = record.industry_segment ? rules.cluster_of(*record.industry_segment) : Cluster::Unknown;
  return labels;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::invalid_argument, "metadata csv: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

std::map<std::string, OrgMetadata> parse_metadata_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "metadata csv: missing header");
  const auto& header = rows.front();
  int col_org = -1, col_emp = -1, col_seg = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto name = trim_copy(header[i]);
    if (name == "org_id") col_org = static_cast<int>(i);
    if (name == "employees") col_emp = static_cast<int>(i);
    if (name == "industry_segment") col_seg = static_cast<int>(i);
  }
  if (col_org < 0 || col_emp < 0 || col_seg < 0) {
    throw Error(ErrorCode::invalid_argument, "metadata csv: header must be org_id,employees,industry_segment");
  }
  std::map<std::string, OrgMetadata> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&](int col) { return col < static_cast<int>(row.size()) ? trim_copy(row[col]) : std::string(); };
    auto org = cell(col_org);
    if (org.empty()) {
      throw Error(ErrorCode::invalid_argument, "metadata csv: row " + std::to_string(r + 1) + " has no org_id");
    }
    OrgMetadata m;
    if (auto e = cell(col_emp); !e.empty()) {
      std::size_t used = 0;
      long long n = 0;
      try {
        n = std::stoll(e, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != e.size() || n < 0) {
        throw Error(ErrorCode::invalid_argument, "metadata csv: bad employees value '" + e + "'");
      }
      m.employees = n;
    }
    if (auto s = cell(col_seg); !s.empty()) m.industry_segment = s;
    out[org] = std::move(m);
  }
  return out;
}

// ---------------------------------------------------------------------------

void validate(const ProjectRecord& r) {
  auto bad = [&](const std::string& what) {
    throw Error(ErrorCode::invalid_record, "record " + r.record_id + ": " + what);
  };
  if (r.project_id.empty()) bad("project_id is empty");
  if (r.org_id.empty()) bad("org_id is empty");
  if (!(r.avg_health >= 1.0 && r.avg_health <= 10.0)) bad("avg_health outside [1, 10]");
  if (r.hotspot_health && !(*r.hotspot_health >= 1.0 && *r.hotspot_health <= 10.0)) {
    bad("hotspot_health outside [1, 10]");
  }
  if (r.employees && *r.employees < 10) bad("employees must be at least 10 when present");
  if (r.inception_year > year_of(r.ingested_at)) bad("inception_year is after the ingestion year");
}

namespace {

std::string dominant_language(const std::map<std::string, analysis::LanguageAggregate>& per_language) {
  std::string best;
  std::size_t best_sloc = 0;
  for (const auto& [language, agg] : per_language) {
    if (best.empty() || agg.sloc > best_sloc) {
      best = language;
      best_sloc = agg.sloc;
    }
  }
  return best.empty() ? "unknown" : best;
}

json record_json(const ProjectRecord& r) {
  json per_language = json::object();
  for (const auto& [language, agg] : r.per_language) {
    per_language[language] = {{"score", agg.score}, {"sloc", agg.sloc}};
  }
  return {
      {"record_id", r.record_id},
      {"project_id", r.project_id},
      {"as_of", format_instant(r.as_of)},
      {"org_id", r.org_id},
      {"avg_health", r.avg_health},
      {"hotspot_health", r.hotspot_health ? json(*r.hotspot_health) : json(nullptr)},
      {"total_sloc", r.total_sloc},
      {"employees", r.employees ? json(*r.employees) : json(nullptr)},
      {"industry_segment", r.industry_segment ? json(*r.industry_segment) : json(nullptr)},
      {"inception_year", r.inception_year},
      {"dominant_language", r.dominant_language},
      {"per_language", per_language},
      {"ingested_at", format_instant(r.ingested_at)},
  };
}

}  // namespace

std::string record_to_json(const ProjectRecord& record) { return record_json(record).dump(); }

ProjectRecord record_from_json(std::string_view line) {
  ProjectRecord r;
  try {
    auto j = json::parse(line);
    r.record_id = j.at("record_id").get<std::string>();
    r.project_id = j.at("project_id").get<std::string>();
    r.as_of = parse_instant(j.at("as_of").get<std::string>());
    r.org_id = j.at("org_id").get<std::string>();
    r.avg_health = j.at("avg_health").get<double>();
    if (!j.at("hotspot_health").is_null()) r.hotspot_health = j.at("hotspot_health").get<double>();
    r.total_sloc = j.at("total_sloc").get<std::size_t>();
    if (!j.at("employees").is_null()) r.employees = j.at("employees").get<std::int64_t>();
    if (!j.at("industry_segment").is_null()) r.industry_segment = j.at("industry_segment").get<std::string>();
    r.inception_year = j.at("inception_year").get<int>();
    r.dominant_language = j.at("dominant_language").get<std::string>();
    for (const auto& [language, agg] : j.at("per_language").items()) {
      r.per_language[language] = {agg.at("score").get<double>(), agg.at("sloc").get<std::size_t>()};
    }
    r.ingested_at = parse_instant(j.at("ingested_at").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_mismatch, std::string("store record: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::schema_mismatch, std::string("store record: ") + e.what());
  }
  validate(r);
  return r;
}

ProjectRecord make_record(const analysis::ProjectAnalysis& pa, const std::string& org_id,
                          const std::optional<OrgMetadata>& metadata, Instant ingested_at) {
  ProjectRecord r;
  r.project_id = pa.project_id;
  r.as_of = pa.as_of;
  r.record_id = pa.project_id + "@" + format_instant(pa.as_of);
  r.org_id = org_id;
  r.avg_health = pa.avg_health;
  r.hotspot_health = pa.hotspot_health;
  r.total_sloc = pa.total_sloc;
  if (metadata) {
    r.employees = metadata->employees;
    r.industry_segment = metadata->industry_segment;
  }
  r.inception_year = year_of(pa.inception);
  r.per_language = pa.per_language;
  r.dominant_language = dominant_language(pa.per_language);
  r.ingested_at = ingested_at;
  validate(r);
  return r;
}

void set_filter(SegmentFilter& filter, std::string_view dimension, std::string_view label) {
  auto bad_label = [&] {
    throw Error(ErrorCode::bad_parameter,
                "unknown label '" + std::string(label) + "' for dimension " + std::string(dimension));
  };
  auto assign = [&](auto& slot, auto value) {
    if (slot && *slot != value) {
      throw Error(ErrorCode::bad_parameter, "conflicting filters for dimension " + std::string(dimension));
    }
    slot = value;
  };
  if (dimension == "codebase_size") {
    auto v = label_from(label, kCodebaseSizes);
    if (!v) bad_label();
    assign(filter.codebase_size, *v);
  } else if (dimension == "company_size") {
    auto v = label_from(label, kCompanySizes);
    if (!v) bad_label();
    assign(filter.company_size, *v);
  } else if (dimension == "age") {
    auto v = label_from(label, kAges);
    if (!v) bad_label();
    assign(filter.age, *v);
  } else if (dimension == "cluster") {
    auto v = label_from(label, kClusters);
    if (!v) bad_label();
    assign(filter.cluster, *v);
  } else if (dimension == "language") {
    if (label.empty()) bad_label();
    assign(filter.language, std::string(label));
  } else {
    throw Error(ErrorCode::bad_parameter, "unknown filter dimension " + std::string(dimension));
  }
}

std::vector<QueryRow> Snapshot::query(const SegmentFilter& filter, Metric metric, Weighting weighting) const {
  if (filter.language && metric == Metric::hotspot_health) {
    throw Error(ErrorCode::bad_parameter, "the language filter is available for metric=avg only");
  }
  const auto& seg_rules = rules ? *rules : SegmentRules::builtin();
  std::vector<QueryRow> rows;
  for (const auto& r : records) {
    auto labels = classify(r, seg_rules);
    if (filter.codebase_size && *filter.codebase_size != labels.codebase_size) continue;
    if (filter.company_size && *filter.company_size != labels.company_size) continue;
    if (filter.age && *filter.age != labels.age) continue;
    if (filter.cluster && *filter.cluster != labels.cluster) continue;

    QueryRow row;
    row.labels = labels;
    row.record = &r;
    std::size_t mass = r.total_sloc;
    if (filter.language) {
      auto it = r.per_language.find(*filter.language);
      if (it == r.per_language.end()) continue;
      row.value = it->second.score;
      mass = it->second.sloc;
    } else if (metric == Metric::hotspot_health) {
      if (!r.hotspot_health) continue;
      row.value = *r.hotspot_health;
    } else {
      row.value = r.avg_health;
    }
    row.sloc = mass;
    if (weighting == Weighting::sloc) {
      if (mass == 0) continue;
      row.weight = static_cast<double>(mass);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<QueryRow> latest_per_project(const std::vector<QueryRow>& rows) {
  std::map<std::pair<std::string, std::string>, QueryRow> latest;
  for (const auto& row : rows) {
    auto [it, inserted] = latest.try_emplace(std::pair(row.record->org_id, row.record->project_id), row);
    if (inserted) continue;
    const auto& a = *row.record;
    const auto& b = *it->second.record;
    if (std::tie(a.ingested_at, a.as_of, a.record_id) > std::tie(b.ingested_at, b.as_of, b.record_id)) {
      it->second = row;
    }
  }
  std::vector<QueryRow> out;
  out.reserve(latest.size());
  for (auto& [id, row] : latest) out.push_back(row);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string header_line() {
  json h = {{"schema", kStoreSchema}, {"schema_version", kStoreSchemaVersion}};
  return h.dump();
}

std::string key_of(const ProjectRecord& r) { return r.project_id + "\n" + format_instant(r.as_of); }

// Returns true when an existing record was replaced.
bool upsert(std::vector<ProjectRecord>& records, ProjectRecord record) {
  auto key = key_of(record);
  for (auto& existing : records) {
    if (key_of(existing) == key) {
      existing = std::move(record);
      return true;
    }
  }
  records.push_back(std::move(record));
  return false;
}

}  // namespace

std::vector<ProjectRecord> BenchStore::parse(std::string_view content) {
  std::vector<ProjectRecord> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_seen = false;
  while (start < content.size()) {
    auto nl = content.find('\n', start);
    auto line = content.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      json h;
      try {
        h = json::parse(line);
      } catch (const json::exception&) {
        throw Error(ErrorCode::schema_mismatch, "store: line 1 is not a header");
      }
      if (h.value("schema", std::string()) != kStoreSchema || h.value("schema_version", 0) != kStoreSchemaVersion) {
        throw Error(ErrorCode::schema_mismatch, "store: unsupported schema (expected codebench.store version 1)");
      }
      header_seen = true;
      continue;
    }
    try {
      upsert(records, record_from_json(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::schema_mismatch, "store line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::string BenchStore::serialize(const std::vector<ProjectRecord>& records) {
  std::string out = header_line() + "\n";
  for (const auto& r : records) {
    out += record_to_json(r);
    out.push_back('\n');
  }
  return out;
}

BenchStore::BenchStore(std::string path, std::shared_ptr<const SegmentRules> rules)
    : path_(std::move(path)), rules_(std::move(rules)) {
  if (!rules_) rules_ = std::make_shared<SegmentRules>(SegmentRules::builtin());
  auto snap = std::make_shared<Snapshot>();
  snap->rules = rules_;
  std::error_code ec;
  if (std::filesystem::exists(path_, ec)) {
    snap->records = parse(read_file(path_));
  }
  snapshot_ = std::move(snap);
}

std::shared_ptr<const Snapshot> BenchStore::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

IngestReceipt BenchStore::ingest(const analysis::ProjectAnalysis& analysis, const std::string& org_id,
                                 const std::optional<OrgMetadata>& metadata, Instant ingested_at) {
  auto record = make_record(analysis, org_id, metadata, ingested_at);

  std::lock_guard writer(write_mutex_);
  auto current = snapshot();
  for (const auto& existing : current->records) {
    if (key_of(existing) == key_of(record) && existing.org_id != record.org_id) {
      throw Error(ErrorCode::invalid_record,
                  "record " + record.record_id + " already belongs to a different organization");
    }
  }
  {
    std::error_code ec;
    bool fresh = !std::filesystem::exists(path_, ec) || std::filesystem::file_size(path_, ec) == 0;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::io, "cannot open store " + path_);
    if (fresh) out << header_line() << '\n';
    out << record_to_json(record) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::io, "cannot append to store " + path_);
  }

  auto next = std::make_shared<Snapshot>(*current);
  IngestReceipt receipt;
  receipt.record_id = record.record_id;
  receipt.labels = classify(record, *rules_);
  receipt.replaced = upsert(next->records, std::move(record));
  {
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(next);
  }
  return receipt;
}

std::string BenchStore::serialize() const { return serialize(snapshot()->records); }

}  // namespace codebench::benchstore
