#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "codebench/common.hpp"

namespace codebench::churn {

struct CommitRecord {
  std::string id;
  Instant timestamp;
  std::vector<std::string> paths;  // resolved to the path that survives at HEAD
  bool merge = false;
};

struct ChurnMap {
  Instant window_start;
  Instant window_end;
  std::map<std::string, std::size_t> changes;  // only files changed at least once

  bool operator==(const ChurnMap&) const = default;
};

struct ChurnOptions {
  int window_days = 365;
  bool follow_renames = true;
  bool count_merges = false;
  double hotspot_percentile = 0.9;
  std::size_t hotspot_min_count = 2;
};

struct History {
  ChurnMap churn;
  Instant inception;
  std::size_t commit_count = 0;
  Diagnostics diagnostics;
};

// Full history reachable from HEAD, newest first, with renames resolved.
// Throws Error(repo_access) or Error(no_history).
std::vector<CommitRecord> read_commits(const std::string& repo_path, const ChurnOptions& options = {});

// Paths tracked in the HEAD tree.
std::set<std::string> head_paths(const std::string& repo_path);

// Pure counting step. Paths absent from `alive` (deleted at HEAD) are dropped.
History build_history(const std::vector<CommitRecord>& commits, Instant as_of,
                      const std::set<std::string>& alive, const ChurnOptions& options = {});

History mine_history(const std::string& repo_path, Instant as_of, const ChurnOptions& options = {});

// Files with count >= min_count and >= the percentile of all counts; falls back
// to the single most-changed file (ties: smallest path) when that is empty.
std::set<std::string> select_hotspots(const ChurnMap& churn, const ChurnOptions& options = {});

}  // namespace codebench::churn
