#include "codebench/churn.hpp"

#include <algorithm>
#include <filesystem>
#include <unordered_map>

#include "codebench/stats.hpp"
#include "process.hpp"

namespace codebench::churn {

namespace {

detail::ProcessResult git(const std::string& repo, std::vector<std::string> args) {
  std::vector<std::string> argv = {"git", "-C", repo, "-c", "core.quotepath=false", "-c",
                                   "log.showSignature=false"};
  argv.insert(argv.end(), std::make_move_iterator(args.begin()), std::make_move_iterator(args.end()));
  return detail::run_process(argv);
}

void check_repository(const std::string& repo) {
  std::error_code ec;
  if (!std::filesystem::is_directory(repo, ec)) {
    throw Error(ErrorCode::repo_access, "repo access: " + repo + " is not a directory");
  }
  auto probe = git(repo, {"rev-parse", "--git-dir"});
  if (probe.exit_code != 0) {
    throw Error(ErrorCode::repo_access, "repo access: " + repo + " is not a git repository");
  }
  auto head = git(repo, {"rev-parse", "--verify", "--quiet", "HEAD"});
  if (head.exit_code != 0) {
    throw Error(ErrorCode::no_history, "no history: " + repo + " has no commits");
  }
}

std::vector<std::string_view> split_nul(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\0', start);
    if (end == std::string_view::npos) {
      if (start < s.size()) parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

// Maps historical paths to the path they carry at HEAD. Commits are fed newest
// first, so a rename seen now applies to every older reference of the old path.
class RenameResolver {
 public:
  std::string resolve(const std::string& path) const {
    auto it = alias_.find(path);
    return it == alias_.end() ? path : it->second;
  }
  void renamed(const std::string& from, const std::string& to) { alias_[from] = resolve(to); }

 private:
  std::unordered_map<std::string, std::string> alias_;
};

}  // namespace

std::vector<CommitRecord> read_commits(const std::string& repo_path, const ChurnOptions& options) {
  check_repository(repo_path);
  auto log = git(repo_path, {"log", "HEAD", options.follow_renames ? "-M" : "--no-renames", "--name-status", "-z",
                             "--no-color", "--format=%x01%H%x02%P%x02%ct"});
  if (log.exit_code != 0) {
    throw Error(ErrorCode::repo_access, "repo access: git log failed: " + log.err);
  }

  std::vector<CommitRecord> commits;
  RenameResolver renames;
  std::string_view out = log.out;
  std::size_t pos = out.find('\x01');
  while (pos != std::string_view::npos) {
    auto next = out.find('\x01', pos + 1);
    auto chunk = out.substr(pos + 1, next == std::string_view::npos ? std::string_view::npos : next - pos - 1);
    pos = next;

    auto header_end = chunk.find('\0');
    auto header = chunk.substr(0, header_end);
    auto f1 = header.find('\x02');
    auto f2 = header.find('\x02', f1 + 1);
    if (f1 == std::string_view::npos || f2 == std::string_view::npos) {
      throw Error(ErrorCode::repo_access, "repo access: unexpected git log output");
    }
    CommitRecord rec;
    rec.id = std::string(header.substr(0, f1));
    auto parents = header.substr(f1 + 1, f2 - f1 - 1);
    rec.merge = parents.find(' ') != std::string_view::npos;
    rec.timestamp = Instant{std::chrono::seconds{std::stoll(std::string(header.substr(f2 + 1)))}};

    std::string_view body = header_end == std::string_view::npos ? std::string_view{} : chunk.substr(header_end + 1);
    while (!body.empty() && body.front() == '\n') body.remove_prefix(1);
    auto tokens = split_nul(body);
    for (std::size_t t = 0; t < tokens.size();) {
      auto status = tokens[t];
      if (status.empty()) {
        ++t;
        continue;
      }
      char kind = status.front();
      if ((kind == 'R' || kind == 'C') && t + 2 < tokens.size()) {
        std::string from(tokens[t + 1]);
        std::string to(tokens[t + 2]);
        std::string current = renames.resolve(to);
        if (kind == 'R') renames.renamed(from, current);
        rec.paths.push_back(current);
        t += 3;
      } else if (t + 1 < tokens.size()) {
        rec.paths.push_back(renames.resolve(std::string(tokens[t + 1])));
        t += 2;
      } else {
        break;
      }
    }
    std::sort(rec.paths.begin(), rec.paths.end());
    rec.paths.erase(std::unique(rec.paths.begin(), rec.paths.end()), rec.paths.end());
    commits.push_back(std::move(rec));
  }
  if (commits.empty()) {
    throw Error(ErrorCode::no_history, "no history: " + repo_path + " has no commits");
  }
  return commits;
}

std::set<std::string> head_paths(const std::string& repo_path) {
  auto ls = git(repo_path, {"ls-tree", "-r", "-z", "--name-only", "HEAD"});
  if (ls.exit_code != 0) {
    throw Error(ErrorCode::repo_access, "repo access: git ls-tree failed: " + ls.err);
  }
  std::set<std::string> paths;
  for (auto p : split_nul(ls.out)) {
    if (!p.empty()) paths.emplace(p);
  }
  return paths;
}

History build_history(const std::vector<CommitRecord>& commits, Instant as_of, const std::set<std::string>& alive,
                      const ChurnOptions& options) {
  if (commits.empty()) {
    throw Error(ErrorCode::no_history, "no history");
  }
  History h;
  h.churn.window_end = as_of;
  h.churn.window_start = as_of - std::chrono::days{options.window_days};
  h.inception = commits.front().timestamp;
  h.commit_count = commits.size();
  std::set<std::string> dropped;
  for (const auto& c : commits) {
    h.inception = std::min(h.inception, c.timestamp);
    if (c.timestamp < h.churn.window_start || c.timestamp > h.churn.window_end) continue;
    if (c.merge && !options.count_merges) continue;
    for (const auto& path : c.paths) {
      if (alive.count(path)) {
        ++h.churn.changes[path];
      } else {
        dropped.insert(path);
      }
    }
  }
  for (const auto& path : dropped) {
    h.diagnostics.push_back({"changed file no longer present at HEAD: " + path, 0});
  }
  return h;
}

History mine_history(const std::string& repo_path, Instant as_of, const ChurnOptions& options) {
  auto commits = read_commits(repo_path, options);
  return build_history(commits, as_of, head_paths(repo_path), options);
}

std::set<std::string> select_hotspots(const ChurnMap& churn, const ChurnOptions& options) {
  std::set<std::string> hotspots;
  if (churn.changes.empty()) return hotspots;

  std::vector<double> counts;
  counts.reserve(churn.changes.size());
  for (const auto& [path, n] : churn.changes) counts.push_back(static_cast<double>(n));
  std::vector<double> ones(counts.size(), 1.0);
  const double cutoff = stats::weighted_percentile(counts, ones, options.hotspot_percentile);

  for (const auto& [path, n] : churn.changes) {
    if (n >= options.hotspot_min_count && static_cast<double>(n) >= cutoff) hotspots.insert(path);
  }
  if (hotspots.empty()) {
    // std::map iterates paths in ascending order, so the first maximum is the smallest path.
    auto best = churn.changes.begin();
    for (auto it = churn.changes.begin(); it != churn.changes.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    hotspots.insert(best->first);
  }
  return hotspots;
}

}  // namespace codebench::churn
