#include "echosim/graph.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "echosim/error.hpp"

namespace echosim {

double quantize_micro(double v) {
  assert(std::isfinite(v));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return std::strtod(buf, nullptr);
}

std::string format_micro(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

OpinionValue::OpinionValue(double raw)
    : v_(quantize_micro(std::clamp(raw, -1.0, 1.0))) {}

StanceLabel stance_label_from_string(const std::string& s) {
  if (s == "favor") return StanceLabel::Favor;
  if (s == "neutral") return StanceLabel::Neutral;
  if (s == "oppose") return StanceLabel::Oppose;
  throw FormatError("unknown stance label: " + s);
}

std::string to_string(StanceLabel label) {
  switch (label) {
    case StanceLabel::Favor: return "favor";
    case StanceLabel::Neutral: return "neutral";
    case StanceLabel::Oppose: return "oppose";
  }
  return "neutral";
}

double stance_value(StanceLabel label) {
  switch (label) {
    case StanceLabel::Favor: return 1.0;
    case StanceLabel::Neutral: return 0.0;
    case StanceLabel::Oppose: return -1.0;
  }
  return 0.0;
}

UserId SocialGraph::add_user(UserState user) {
  const UserId id = static_cast<UserId>(users_.size());
  user.id = id;
  users_.push_back(std::move(user));
  in_.emplace_back();
  return id;
}

void SocialGraph::check_user(UserId id) const {
  if (id >= users_.size())
    throw NotFoundError("unknown user id " + std::to_string(id));
}

const UserState& SocialGraph::user(UserId id) const {
  check_user(id);
  return users_[id];
}

UserState& SocialGraph::user_mut(UserId id) {
  check_user(id);
  return users_[id];
}

bool SocialGraph::add_edge(UserId source, UserId target) {
  check_user(source);
  check_user(target);
  if (source == target) return false;
  auto& in = in_[target];
  auto it = std::lower_bound(in.begin(), in.end(), source);
  if (it != in.end() && *it == source) return false;
  in.insert(it, source);
  ++edge_count_;
  return true;
}

bool SocialGraph::remove_edge(UserId source, UserId target) {
  check_user(source);
  check_user(target);
  auto& in = in_[target];
  auto it = std::lower_bound(in.begin(), in.end(), source);
  if (it == in.end() || *it != source) return false;
  in.erase(it);
  --edge_count_;
  return true;
}

bool SocialGraph::has_edge(UserId source, UserId target) const {
  check_user(source);
  check_user(target);
  const auto& in = in_[target];
  return std::binary_search(in.begin(), in.end(), source);
}

const std::vector<UserId>& SocialGraph::in_neighbors(UserId id) const {
  check_user(id);
  return in_[id];
}

std::vector<std::pair<UserId, UserId>> SocialGraph::edges() const {
  std::vector<std::pair<UserId, UserId>> out;
  out.reserve(edge_count_);
  for (UserId target = 0; target < in_.size(); ++target)
    for (UserId source : in_[target]) out.emplace_back(source, target);
  std::sort(out.begin(), out.end());
  return out;
}

void SocialGraph::validate() const {
  if (in_.size() != users_.size()) throw FormatError("edge table size mismatch");
  std::size_t count = 0;
  for (UserId target = 0; target < in_.size(); ++target) {
    const auto& in = in_[target];
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (in[k] >= users_.size()) throw FormatError("edge endpoint out of range");
      if (in[k] == target) throw FormatError("self-loop on user " + std::to_string(target));
      if (k > 0 && in[k] <= in[k - 1]) throw FormatError("unsorted or duplicate edge");
    }
    count += in.size();
  }
  if (count != edge_count_) throw FormatError("edge count mismatch");
  for (UserId id = 0; id < users_.size(); ++id) {
    if (users_[id].id != id) throw FormatError("user id mismatch at index " + std::to_string(id));
    int last_step = 0;
    for (const Post& p : users_[id].history) {
      if (p.author != id) throw FormatError("post author does not own its history slot");
      if (p.text.empty()) throw FormatError("empty post text");
      if (p.step < last_step) throw FormatError("history step order violated");
      last_step = p.step;
    }
  }
}

const std::vector<UserId>& neighbors_in(const SocialGraph& graph, UserId id) {
  return graph.in_neighbors(id);
}

std::span<const Post> recent_context(const UserState& user, int window) {
  assert(window >= 1);
  const std::size_t n = user.history.size();
  const std::size_t take = std::min<std::size_t>(n, static_cast<std::size_t>(window));
  return {user.history.data() + (n - take), take};
}

namespace {

struct FeedCandidate {
  int step;
  UserId author;
  std::size_t history_pos;
};

}  // namespace

Screen build_screen(const SocialGraph& graph, UserId viewer, int size,
                    double rec_fraction, Rng& rng) {
  assert(size >= 1);
  assert(rec_fraction >= 0.0 && rec_fraction <= 1.0);
  const auto& friends = graph.in_neighbors(viewer);  // validates viewer

  const int friend_target =
      static_cast<int>(std::ceil((1.0 - rec_fraction) * size));
  const int rec_target = size - friend_target;

  // Only a friend's newest `size` posts can make the cut.
  std::vector<FeedCandidate> pool;
  for (UserId j : friends) {
    const auto& hist = graph.user(j).history;
    const std::size_t take = std::min<std::size_t>(hist.size(), static_cast<std::size_t>(size));
    for (std::size_t k = hist.size() - take; k < hist.size(); ++k)
      pool.push_back({hist[k].step, j, k});
  }
  std::sort(pool.begin(), pool.end(), [](const FeedCandidate& a, const FeedCandidate& b) {
    if (a.step != b.step) return a.step > b.step;
    if (a.author != b.author) return a.author < b.author;
    return a.history_pos > b.history_pos;
  });

  Screen screen;
  screen.viewer = viewer;
  const std::size_t n_friend = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(friend_target));
  for (std::size_t k = 0; k < n_friend; ++k) {
    screen.posts.push_back(graph.user(pool[k].author).history[pool[k].history_pos]);
    screen.sources.push_back(ScreenSource::Friend);
  }

  if (rec_target > 0) {
    std::vector<UserId> candidates;
    for (UserId u = 0; u < graph.user_count(); ++u) {
      if (u == viewer) continue;
      if (std::binary_search(friends.begin(), friends.end(), u)) continue;
      if (graph.user(u).history.empty()) continue;
      candidates.push_back(u);
    }
    const std::size_t n_rec = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(rec_target));
    rng.partial_shuffle(candidates, n_rec);
    for (std::size_t k = 0; k < n_rec; ++k) {
      screen.posts.push_back(graph.user(candidates[k]).history.back());
      screen.sources.push_back(ScreenSource::Recommended);
    }
  }
  return screen;
}

}  // namespace echosim
