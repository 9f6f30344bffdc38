#include "codebench/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include <json.hpp>

namespace codebench::analysis {

using nlohmann::json;

namespace {

struct Mass {
  double weighted = 0.0;
  double sloc = 0.0;
  std::size_t count = 0;

  void add(const FileMetrics& f) {
    if (f.sloc() == 0) return;
    weighted += f.health * static_cast<double>(f.sloc());
    sloc += static_cast<double>(f.sloc());
    ++count;
  }
  double mean() const { return weighted / sloc; }
};

}  // namespace

double weighted_average_health(std::span<const FileMetrics> files) {
  Mass m;
  for (const auto& f : files) m.add(f);
  if (m.count == 0) {
    throw Error(ErrorCode::no_weighted_mass, "no weighted mass");
  }
  return m.mean();
}

std::optional<double> hotspot_health(std::span<const FileMetrics> files, const std::set<std::string>& hotspots,
                                     std::vector<std::string>* diagnostics) {
  Mass m;
  std::set<std::string> seen;
  for (const auto& f : files) {
    if (!hotspots.count(f.path)) continue;
    seen.insert(f.path);
    m.add(f);
  }
  if (diagnostics) {
    for (const auto& h : hotspots) {
      if (!seen.count(h)) diagnostics->push_back(h + ": hotspot is not an analyzed file; ignored");
    }
  }
  if (m.count == 0) return std::nullopt;
  return m.mean();
}

std::map<std::string, LanguageAggregate> per_language_aggregate(std::span<const FileMetrics> files) {
  std::map<std::string, Mass> masses;
  for (const auto& f : files) {
    if (f.language.empty()) continue;
    masses[f.language].add(f);
  }
  std::map<std::string, LanguageAggregate> out;
  for (const auto& [language, m] : masses) {
    if (m.count == 0) continue;
    out[language] = {m.mean(), static_cast<std::size_t>(m.sloc)};
  }
  return out;
}

FileMetrics analyze_file(const std::string& path, std::string_view content, const lang::LanguageProfile& profile,
                         const smells::SmellConfig& config, std::vector<std::string>* diagnostics) {
  FileMetrics f;
  f.path = path;
  f.language = profile.name;
  auto lexed = lang::lex(content, profile);
  f.lines = lang::tally(lexed.lines);
  auto extracted = smells::extract_functions(lexed.stripped, profile);
  f.function_count = extracted.functions.size();
  f.smells = smells::detect_smells(f.lines, extracted.functions, lexed.stripped, profile, config);
  auto health = smells::score_code_health(f.smells, f.lines.sloc, config);
  f.health = health.score;
  f.band = health.band;
  if (diagnostics) {
    for (const auto& d : lexed.diagnostics) {
      diagnostics->push_back(path + ":" + std::to_string(d.line) + ": " + d.message);
    }
    for (const auto& d : extracted.diagnostics) {
      diagnostics->push_back(path + ":" + std::to_string(d.line) + ": " + d.message);
    }
  }
  return f;
}

bool is_ignored(std::string_view path, const std::vector<std::string>& ignore) {
  for (const auto& pattern : ignore) {
    if (pattern.empty()) continue;
    if (pattern.back() == '/') {
      if (path.starts_with(pattern)) return true;
      std::string nested = "/" + pattern;
      if (path.find(nested) != std::string_view::npos) return true;
    } else if (path.ends_with(pattern)) {
      return true;
    }
  }
  return false;
}

namespace {

bool looks_binary(std::string_view content) {
  auto head = content.substr(0, std::min<std::size_t>(content.size(), 8000));
  return head.find('\0') != std::string_view::npos;
}

struct FileJob {
  std::string path;
  const lang::LanguageProfile* profile = nullptr;
  std::optional<FileMetrics> result;
  std::vector<std::string> diagnostics;
};

}  // namespace

ProjectAnalysis analyze_project(const std::string& repo_path, Instant as_of, const std::string& project_id,
                                const AnalysisOptions& options) {
  const auto& registry = options.languages ? *options.languages : lang::LanguageRegistry::builtin();
  const auto& smell_config = options.smells ? *options.smells : smells::SmellConfig::builtin();

  auto commits = churn::read_commits(repo_path, options.churn);
  auto tracked = churn::head_paths(repo_path);
  auto history = churn::build_history(commits, as_of, tracked, options.churn);

  ProjectAnalysis pa;
  pa.project_id = project_id;
  pa.as_of = as_of;
  pa.inception = history.inception;
  pa.churn = std::move(history.churn);
  for (const auto& d : history.diagnostics) pa.diagnostics.push_back(d.message);

  // std::set iterates in path order, which fixes the aggregation order.
  std::vector<FileJob> jobs;
  for (const auto& path : tracked) {
    if (is_ignored(path, options.ignore)) continue;
    const auto* profile = registry.detect(path);
    if (!profile) continue;
    jobs.push_back({path, profile, std::nullopt, {}});
  }

  const std::filesystem::path root(repo_path);
  auto run_job = [&](FileJob& job) {
    std::string content;
    try {
      content = read_file((root / job.path).string());
    } catch (const Error&) {
      job.diagnostics.push_back(job.path + ": tracked at HEAD but missing from the working tree; skipped");
      return;
    }
    if (looks_binary(content)) {
      job.diagnostics.push_back(job.path + ": binary content; skipped");
      return;
    }
    job.result = analyze_file(job.path, content, *job.profile, smell_config, &job.diagnostics);
  };

  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(jobs[i]);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (auto& job : jobs) {
    pa.diagnostics.insert(pa.diagnostics.end(), job.diagnostics.begin(), job.diagnostics.end());
    if (job.result && job.result->sloc() > 0) pa.files.push_back(std::move(*job.result));
  }
  if (pa.files.empty()) {
    throw Error(ErrorCode::no_analyzable_files, "no analyzable files in " + repo_path);
  }

  for (const auto& f : pa.files) pa.total_sloc += f.sloc();
  pa.avg_health = weighted_average_health(pa.files);
  // Hotspots are chosen among files that carry a health score.
  std::set<std::string> analyzed;
  for (const auto& f : pa.files) analyzed.insert(f.path);
  churn::ChurnMap analyzable = pa.churn;
  std::erase_if(analyzable.changes, [&](const auto& entry) { return !analyzed.count(entry.first); });
  pa.hotspots = churn::select_hotspots(analyzable, options.churn);
  pa.hotspot_health = hotspot_health(pa.files, pa.hotspots, &pa.diagnostics);
  pa.per_language = per_language_aggregate(pa.files);
  return pa;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kSchemaName = "codebench.analysis";

json file_to_json(const FileMetrics& f) {
  json smells = json::object();
  for (auto k : smells::kAllSmells) smells[std::string(smells::to_string(k))] = f.smells[k];
  return {
      {"path", f.path},
      {"language", f.language},
      {"total_lines", f.lines.total_lines},
      {"blank_lines", f.lines.blank_lines},
      {"comment_lines", f.lines.comment_lines},
      {"sloc", f.lines.sloc},
      {"functions", f.function_count},
      {"health", f.health},
      {"band", smells::to_string(f.band)},
      {"smells", smells},
  };
}

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::schema_mismatch, "analysis document: " + what);
}

double health_field(const json& j, const char* key) {
  double v = j.at(key).get<double>();
  if (!(v >= 1.0 && v <= 10.0)) schema_error(std::string(key) + " outside [1, 10]");
  return v;
}

}  // namespace

std::string to_json(const ProjectAnalysis& pa) {
  json per_language = json::object();
  for (const auto& [language, agg] : pa.per_language) {
    per_language[language] = {{"score", agg.score}, {"sloc", agg.sloc}};
  }
  json changes = json::object();
  for (const auto& [path, n] : pa.churn.changes) changes[path] = n;
  json files = json::array();
  for (const auto& f : pa.files) files.push_back(file_to_json(f));
  json doc = {
      {"schema", kSchemaName},
      {"schema_version", ProjectAnalysis::kSchemaVersion},
      {"project_id", pa.project_id},
      {"as_of", format_instant(pa.as_of)},
      {"inception", format_instant(pa.inception)},
      {"total_sloc", pa.total_sloc},
      {"avg_health", pa.avg_health},
      {"hotspot_health", pa.hotspot_health ? json(*pa.hotspot_health) : json(nullptr)},
      {"hotspots", pa.hotspots},
      {"per_language", per_language},
      {"churn",
       {{"window_start", format_instant(pa.churn.window_start)},
        {"window_end", format_instant(pa.churn.window_end)},
        {"changes", changes}}},
      {"files", files},
      {"diagnostics", pa.diagnostics},
  };
  return doc.dump(2) + "\n";
}

ProjectAnalysis analysis_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    schema_error(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema", std::string()) != kSchemaName) {
    schema_error("schema must be \"codebench.analysis\"");
  }
  if (!doc.contains("schema_version") || doc["schema_version"] != ProjectAnalysis::kSchemaVersion) {
    schema_error("unsupported schema_version (expected " + std::to_string(ProjectAnalysis::kSchemaVersion) + ")");
  }
  ProjectAnalysis pa;
  try {
    pa.project_id = doc.at("project_id").get<std::string>();
    if (pa.project_id.empty()) schema_error("project_id is empty");
    pa.as_of = parse_instant(doc.at("as_of").get<std::string>());
    pa.inception = parse_instant(doc.at("inception").get<std::string>());
    pa.total_sloc = doc.at("total_sloc").get<std::size_t>();
    pa.avg_health = health_field(doc, "avg_health");
    if (!doc.at("hotspot_health").is_null()) pa.hotspot_health = health_field(doc, "hotspot_health");
    for (const auto& h : doc.value("hotspots", json::array())) pa.hotspots.insert(h.get<std::string>());
    for (const auto& [language, agg] : doc.at("per_language").items()) {
      LanguageAggregate a{agg.at("score").get<double>(), agg.at("sloc").get<std::size_t>()};
      if (!(a.score >= 1.0 && a.score <= 10.0)) schema_error("per_language score outside [1, 10]");
      pa.per_language[language] = a;
    }
    if (doc.contains("churn")) {
      const auto& c = doc["churn"];
      pa.churn.window_start = parse_instant(c.at("window_start").get<std::string>());
      pa.churn.window_end = parse_instant(c.at("window_end").get<std::string>());
      for (const auto& [path, n] : c.at("changes").items()) pa.churn.changes[path] = n.get<std::size_t>();
    }
    for (const auto& fj : doc.value("files", json::array())) {
      FileMetrics f;
      f.path = fj.at("path").get<std::string>();
      f.language = fj.at("language").get<std::string>();
      f.lines.total_lines = fj.at("total_lines").get<std::size_t>();
      f.lines.blank_lines = fj.at("blank_lines").get<std::size_t>();
      f.lines.comment_lines = fj.at("comment_lines").get<std::size_t>();
      f.lines.sloc = fj.at("sloc").get<std::size_t>();
      f.function_count = fj.value("functions", std::size_t{0});
      f.health = health_field(fj, "health");
      f.band = smells::band_for(f.health);
      for (const auto& [name, n] : fj.at("smells").items()) {
        auto kind = smells::smell_from_string(name);
        if (!kind) schema_error("unknown smell " + name);
        f.smells[*kind] = n.get<std::size_t>();
      }
      pa.files.push_back(std::move(f));
    }
    for (const auto& d : doc.value("diagnostics", json::array())) pa.diagnostics.push_back(d.get<std::string>());
  } catch (const json::exception& e) {
    schema_error(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::schema_mismatch) throw;
    schema_error(e.what());
  }
  std::size_t language_sloc = 0;
  for (const auto& [_, agg] : pa.per_language) language_sloc += agg.sloc;
  if (!pa.per_language.empty() && language_sloc != pa.total_sloc) {
    schema_error("per_language sloc does not sum to total_sloc");
  }
  return pa;
}

}  // namespace codebench::analysis
