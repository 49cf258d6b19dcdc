#include "echosim/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "echosim/error.hpp"

namespace echosim {

namespace {

using nlohmann::json;

// Seed posts must satisfy the graph's one-line, non-empty text invariant.
std::string clean_text(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  return out;
}

std::optional<std::string> record_error(const json& j) {
  if (!j.contains("user") || !j["user"].is_string() || j["user"].get<std::string>().empty()) {
    return "missing user";
  }
  if (!j.contains("ts") || !j["ts"].is_number_integer()) return "missing ts";
  if (!j.contains("text") || !j["text"].is_string() || j["text"].get<std::string>().empty()) {
    return "missing text";
  }
  if (!j.contains("stance") || !j["stance"].is_string()) return "missing stance";
  const std::string stance = j["stance"].get<std::string>();
  if (stance != "favor" && stance != "neutral" && stance != "oppose") {
    return "bad stance: " + stance;
  }
  if (j.contains("rt_user") && !j["rt_user"].is_null() && !j["rt_user"].is_string()) {
    return "bad rt_user";
  }
  return std::nullopt;
}

}  // namespace

LoadResult load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read archive: " + path);

  LoadResult result;
  std::string line;
  int line_no = 0;
  int considered = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++considered;

    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      result.rejects.push_back({line_no, "invalid json"});
      continue;
    }
    if (const auto reason = record_error(j)) {
      result.rejects.push_back({line_no, *reason});
      continue;
    }

    RawRecord record;
    record.user = j["user"].get<std::string>();
    record.ts = j["ts"].get<std::int64_t>();
    record.text = clean_text(j["text"].get<std::string>());
    record.stance = stance_label_from_string(j["stance"].get<std::string>());
    if (j.contains("rt_user") && j["rt_user"].is_string()) {
      const std::string rt = j["rt_user"].get<std::string>();
      if (!rt.empty()) record.rt_user = rt;
    }
    result.records.push_back(std::move(record));
  }

  if (2 * static_cast<int>(result.rejects.size()) > considered) {
    throw FormatError("archive mostly unreadable: " + std::to_string(result.rejects.size()) +
                      " of " + std::to_string(considered) + " lines rejected");
  }
  return result;
}

void IngestConfig::validate() const {
  if (top_k_users < 2) throw ConfigError("top_k_users must be at least 2");
  if (min_posts < 1) throw ConfigError("min_posts must be at least 1");
  if (history_cap < 1) throw ConfigError("history_cap must be at least 1");
}

SocialGraph build_network(const std::vector<RawRecord>& records, const IngestConfig& config) {
  config.validate();

  // Group records per handle, keeping file order within a handle.
  std::map<std::string, std::vector<const RawRecord*>> by_user;
  for (const RawRecord& r : records) by_user[r.user].push_back(&r);

  // Rank handles by activity: post count descending, handle ascending on ties.
  std::vector<std::pair<std::string, std::size_t>> ranking;
  for (const auto& [handle, posts] : by_user) {
    if (static_cast<int>(posts.size()) >= config.min_posts) {
      ranking.emplace_back(handle, posts.size());
    }
  }
  std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranking.size() > static_cast<std::size_t>(config.top_k_users)) {
    ranking.resize(config.top_k_users);
  }
  if (ranking.size() < 2) {
    throw TooSmallError("only " + std::to_string(ranking.size()) +
                        " accounts qualify; need at least 2");
  }

  SocialGraph graph;
  std::map<std::string, UserId> id_of;
  for (const auto& [handle, count] : ranking) {
    (void)count;
    std::vector<const RawRecord*> posts = by_user[handle];
    // Oldest-first by timestamp; stable so equal timestamps keep file order.
    std::stable_sort(posts.begin(), posts.end(),
                     [](const RawRecord* a, const RawRecord* b) { return a->ts < b->ts; });

    // Ground truth: majority stance over every post; any tie means neutral.
    std::size_t favor = 0, neutral = 0, oppose = 0;
    for (const RawRecord* r : posts) {
      switch (r->stance) {
        case StanceLabel::Favor: ++favor; break;
        case StanceLabel::Neutral: ++neutral; break;
        case StanceLabel::Oppose: ++oppose; break;
      }
    }
    const std::size_t top = std::max({favor, neutral, oppose});
    StanceLabel truth = StanceLabel::Neutral;
    if ((favor == top) + (neutral == top) + (oppose == top) == 1) {
      truth = favor == top ? StanceLabel::Favor
                           : (oppose == top ? StanceLabel::Oppose : StanceLabel::Neutral);
    }

    // Seed history: the last history_cap posts, and the opinion is their
    // mean mapped stance (favor +1, neutral 0, oppose -1).
    const std::size_t keep = std::min<std::size_t>(posts.size(), config.history_cap);
    const std::size_t first = posts.size() - keep;
    double sum = 0.0;
    std::vector<Post> history;
    for (std::size_t i = first; i < posts.size(); ++i) {
      sum += stance_value(posts[i]->stance);
      history.push_back(Post{0, 0, PostOrigin::Seed, clean_text(posts[i]->text),
                             OpinionValue(stance_value(posts[i]->stance))});
    }

    UserState user;
    user.handle = handle;
    user.opinion = OpinionValue(sum / static_cast<double>(keep));
    user.ground_truth = truth;
    user.history = std::move(history);
    const UserId id = graph.add_user(std::move(user));
    id_of[handle] = id;
    for (Post& p : graph.user_mut(id).history) p.author = id;
  }

  // A retweet by i of j means i follows j: edge (j, i). add_edge drops
  // duplicates and self-loops.
  for (const RawRecord& r : records) {
    if (!r.rt_user) continue;
    const auto from = id_of.find(r.user);
    const auto to = id_of.find(*r.rt_user);
    if (from == id_of.end() || to == id_of.end()) continue;
    graph.add_edge(to->second, from->second);
  }

  graph.validate();
  return graph;
}

int union_follow_edges(SocialGraph& graph, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read follow file: " + path);

  std::map<std::string, UserId> id_of;
  for (UserId id = 0; id < static_cast<UserId>(graph.user_count()); ++id) {
    id_of[graph.user(id).handle] = id;
  }

  int added = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError("bad follow line " + std::to_string(line_no) + ": " + line);
    }
    const auto trim = [](std::string s) {
      const std::size_t from = s.find_first_not_of(" \t");
      const std::size_t to = s.find_last_not_of(" \t");
      return from == std::string::npos ? std::string() : s.substr(from, to - from + 1);
    };
    const std::string follower_handle = trim(line.substr(0, comma));
    const std::string followee_handle = trim(line.substr(comma + 1));
    if (follower_handle.empty() || followee_handle.empty()) {
      throw FormatError("bad follow line " + std::to_string(line_no) + ": " + line);
    }
    const auto follower = id_of.find(follower_handle);
    const auto followee = id_of.find(followee_handle);
    if (follower == id_of.end() || followee == id_of.end()) continue;
    if (graph.add_edge(followee->second, follower->second)) ++added;
  }
  return added;
}

}  // namespace echosim
