#include "codebench/leaderboard.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <openssl/evp.h>
#include <openssl/hmac.h>

namespace codebench::leaderboard {

std::string_view to_string(Band b) {
  switch (b) {
    case Band::leader: return "leader";
    case Band::mid: return "mid";
    case Band::laggard: return "laggard";
  }
  return "";
}

std::string anonymize(std::string_view org_id, std::string_view salt) {
  if (salt.empty()) throw Error(ErrorCode::invalid_argument, "anonymization salt must not be empty");
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  auto* ok = HMAC(EVP_sha256(), salt.data(), static_cast<int>(salt.size()),
                  reinterpret_cast<const unsigned char*>(org_id.data()), org_id.size(), digest, &length);
  if (!ok || length < 6) throw Error(ErrorCode::internal, "HMAC-SHA256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string handle = "org-";
  for (int i = 0; i < 6; ++i) {
    handle.push_back(kHex[digest[i] >> 4]);
    handle.push_back(kHex[digest[i] & 0xF]);
  }
  return handle;
}

long long points_for(double value) { return static_cast<long long>(std::floor(value * 100.0 + 0.5)); }

std::vector<OrgValue> consolidate(const std::vector<benchstore::QueryRow>& rows) {
  struct Acc {
    double weighted = 0.0;
    double mass = 0.0;
    double plain = 0.0;
    double weight = 0.0;
    std::size_t n = 0;
    std::size_t largest_sloc = 0;
    benchstore::SegmentLabels labels;
  };
  std::map<std::string, Acc> orgs;
  for (const auto& row : benchstore::latest_per_project(rows)) {
    auto& acc = orgs[row.record->org_id];
    acc.weighted += row.value * static_cast<double>(row.sloc);
    acc.mass += static_cast<double>(row.sloc);
    acc.plain += row.value;
    acc.weight += row.weight;
    ++acc.n;
    // Rows arrive in project_id order within an org, so ties keep the smallest id.
    if (acc.n == 1 || row.sloc > acc.largest_sloc) {
      acc.largest_sloc = row.sloc;
      acc.labels = row.labels;
    }
  }
  std::vector<OrgValue> out;
  out.reserve(orgs.size());
  for (const auto& [org, acc] : orgs) {
    OrgValue v;
    v.org_id = org;
    v.value = acc.mass > 0.0 ? acc.weighted / acc.mass : acc.plain / static_cast<double>(acc.n);
    v.weight = acc.weight;
    v.labels = acc.labels;
    out.push_back(std::move(v));
  }
  return out;
}

Board build_leaderboard(const benchstore::Snapshot& snapshot, const Query& query, std::string_view salt) {
  if (salt.empty()) throw Error(ErrorCode::invalid_argument, "anonymization salt must not be empty");
  auto rows = snapshot.query(query.filter, query.metric, query.weighting);
  if (rows.empty()) throw Error(ErrorCode::empty_segment, "empty segment");
  auto orgs = consolidate(rows);
  for (auto& org : orgs) {
    if (query.weighting == benchstore::Weighting::raw) org.weight = 1.0;
  }

  stats::Sample sample;
  for (const auto& org : orgs) {
    sample.values.push_back(org.value);
    sample.weights.push_back(org.weight);
  }

  Board board;
  board.query = query;
  board.curve = stats::summarize(sample);
  board.small_segment = orgs.size() < kSmallSegment;

  for (const auto& org : orgs) {
    Entry e;
    e.handle = anonymize(org.org_id, salt);
    e.metric_value = org.value;
    e.points = points_for(org.value);
    e.labels = org.labels;
    if (org.value >= board.curve.p90) {
      e.band = Band::leader;
    } else if (org.value <= board.curve.p10) {
      e.band = Band::laggard;
    }
    board.entries.push_back(std::move(e));
  }
  std::sort(board.entries.begin(), board.entries.end(), [](const Entry& a, const Entry& b) {
    if (a.points != b.points) return a.points > b.points;
    return a.handle < b.handle;
  });
  for (std::size_t i = 0; i < board.entries.size(); ++i) board.entries[i].rank = i + 1;
  return board;
}

}  // namespace codebench::leaderboard
