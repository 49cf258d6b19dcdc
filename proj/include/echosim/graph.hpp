#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "echosim/rng.hpp"

namespace echosim {

using UserId = std::uint32_t;

// Canonical 1e-6 quantization used for every stance-like value. Defined as
// the 6-decimal string round-trip so in-memory values match the text
// protocol bit for bit.
double quantize_micro(double v);
std::string format_micro(double v);

// Scalar stance intensity, always clamped to [-1, 1] and micro-quantized.
class OpinionValue {
 public:
  OpinionValue() = default;
  explicit OpinionValue(double raw);
  double value() const { return v_; }
  bool operator==(const OpinionValue&) const = default;

 private:
  double v_ = 0.0;
};

enum class StanceLabel { Favor, Neutral, Oppose };

StanceLabel stance_label_from_string(const std::string& s);  // throws FormatError
std::string to_string(StanceLabel label);
double stance_value(StanceLabel label);  // favor +1, neutral 0, oppose -1

enum class PostOrigin { Seed, Sim };

struct Post {
  UserId author = 0;
  int step = 0;  // seed-data posts sit at step 0
  PostOrigin origin = PostOrigin::Sim;
  std::string text;
  OpinionValue stance;

  bool operator==(const Post&) const = default;
};

struct UserState {
  UserId id = 0;
  std::string handle;  // external identifier from ingest; may be empty
  OpinionValue opinion;
  std::vector<Post> history;  // every post ever authored, oldest first
  std::optional<StanceLabel> ground_truth;

  bool operator==(const UserState&) const = default;
};

// Directed social graph. An edge (j, i) means i receives j's content (i
// follows j), so the in-neighbor list of i is the set of accounts whose
// posts can reach i's screen. The container has value semantics: a copy is
// an immutable snapshot.
class SocialGraph {
 public:
  UserId add_user(UserState user);  // id is assigned, returns it
  std::size_t user_count() const { return users_.size(); }
  const UserState& user(UserId id) const;   // NotFoundError on bad id
  UserState& user_mut(UserId id);           // NotFoundError on bad id

  // Returns false (and leaves the graph unchanged) for self-loops and
  // duplicates; throws NotFoundError for unknown endpoints.
  bool add_edge(UserId source, UserId target);
  bool remove_edge(UserId source, UserId target);
  bool has_edge(UserId source, UserId target) const;
  std::size_t edge_count() const { return edge_count_; }

  // Sources j with (j, id) in the edge set, ascending.
  const std::vector<UserId>& in_neighbors(UserId id) const;

  // All edges as (source, target), sorted lexicographically.
  std::vector<std::pair<UserId, UserId>> edges() const;

  void validate() const;  // throws FormatError when an invariant is broken

  bool operator==(const SocialGraph&) const = default;

 private:
  void check_user(UserId id) const;
  std::vector<UserState> users_;
  std::vector<std::vector<UserId>> in_;  // in_[target], sorted ascending
  std::size_t edge_count_ = 0;
};

// Free-function alias for SocialGraph::in_neighbors.
const std::vector<UserId>& neighbors_in(const SocialGraph& graph, UserId id);

// The last min(window, history size) posts, most recent last. This slice is
// the context C_i handed to the engines.
std::span<const Post> recent_context(const UserState& user, int window);

enum class ScreenSource { Friend, Recommended };

// The bounded feed a user sees in one activation.
struct Screen {
  UserId viewer = 0;
  std::vector<Post> posts;
  std::vector<ScreenSource> sources;  // parallel to posts
};

// Fills ceil((1 - rec_fraction) * size) slots with the most recent posts
// authored by in-neighbors (ties by ascending author id), and the remaining
// floor(rec_fraction * size) slots with the latest post of uniformly sampled
// non-neighbors. The viewer's own posts are never shown. Fewer available
// posts produce a shorter screen.
Screen build_screen(const SocialGraph& graph, UserId viewer, int size,
                    double rec_fraction, Rng& rng);

}  // namespace echosim
