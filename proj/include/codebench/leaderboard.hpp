#pragma once

#include <string>
#include <vector>

#include "codebench/benchstore.hpp"
#include "codebench/stats.hpp"

namespace codebench::leaderboard {

struct Query {
  benchstore::Metric metric = benchstore::Metric::hotspot_health;
  benchstore::Weighting weighting = benchstore::Weighting::raw;
  benchstore::SegmentFilter filter;

  bool operator==(const Query&) const = default;
};

enum class Band { leader, mid, laggard };
std::string_view to_string(Band b);

struct Entry {
  std::size_t rank = 0;
  std::string handle;
  long long points = 0;
  double metric_value = 0.0;
  Band band = Band::mid;
  benchstore::SegmentLabels labels;
};

inline constexpr std::size_t kSmallSegment = 10;

struct Board {
  Query query;
  std::vector<Entry> entries;
  stats::DensityCurve curve;  // over org values; p10/p90 are the band thresholds
  bool small_segment = false;
};

// "org-" + first 12 hex digits of HMAC-SHA256(key = salt, message = org_id).
// Throws Error(invalid_argument) for an empty salt.
std::string anonymize(std::string_view org_id, std::string_view salt);

// round half-up of value * 100
long long points_for(double value);

struct OrgValue {
  std::string org_id;
  double value = 0.0;
  double weight = 1.0;
  benchstore::SegmentLabels labels;
};

// One value per org: latest record per project, SLoC-weighted mean across the
// org's projects. Labels come from the org's largest project. Ordered by org_id.
std::vector<OrgValue> consolidate(const std::vector<benchstore::QueryRow>& rows);

// Throws Error(empty_segment) when nothing matches.
Board build_leaderboard(const benchstore::Snapshot& snapshot, const Query& query, std::string_view salt);

}  // namespace codebench::leaderboard
