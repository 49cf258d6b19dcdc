#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "echosim/graph.hpp"

namespace echosim {

// One post record from an archive line.
struct RawRecord {
  std::string user;
  std::int64_t ts = 0;
  std::string text;
  StanceLabel stance = StanceLabel::Neutral;
  std::optional<std::string> rt_user;  // handle of the account this post retweets

  bool operator==(const RawRecord&) const = default;
};

struct RejectEntry {
  int line = 0;  // 1-based line number in the source file
  std::string reason;

  bool operator==(const RejectEntry&) const = default;
};

struct LoadResult {
  std::vector<RawRecord> records;
  std::vector<RejectEntry> rejects;
};

// Reads a JSONL archive. Malformed lines are collected as rejects rather than
// aborting the load; blank lines are skipped outright. Throws IoError when the
// file cannot be opened and FormatError when more than half of the non-blank
// lines are rejected.
LoadResult load_records(const std::string& path);

struct IngestConfig {
  int top_k_users = 200;  // keep at most this many of the most active accounts
  int min_posts = 1;      // drop accounts with fewer valid posts than this
  int history_cap = 10;   // seed each account with at most this many recent posts

  void validate() const;  // throws ConfigError
};

// Builds the starting network from an archive:
//  - accounts ranked by post count (descending), handle (ascending) on ties;
//  - the top_k_users most active accounts with at least min_posts posts are
//    kept, ids assigned in rank order; fewer than two -> TooSmallError;
//  - each account is seeded with its last history_cap posts by timestamp,
//    its opinion set to the mean mapped stance of those seed posts, and its
//    ground-truth label to the majority stance over all its posts (any tie
//    -> neutral);
//  - a retweet by i of j becomes the edge (j, i): i follows j.
SocialGraph build_network(const std::vector<RawRecord>& records, const IngestConfig& config);

// Merges a "follower,followee" CSV into an existing graph: each line adds the
// edge (followee, follower). Lines naming unknown handles are skipped; returns
// the number of edges actually added. Throws IoError / FormatError.
int union_follow_edges(SocialGraph& graph, const std::string& path);

}  // namespace echosim
