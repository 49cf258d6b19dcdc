#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "echosim/error.hpp"
#include "echosim/graph.hpp"
#include "echosim/rng.hpp"
#include "helpers.hpp"

using namespace echosim;
using testutil::make_post;
using testutil::make_user;

TEST_CASE("rng draws are deterministic per seed") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    all_equal = all_equal && x == y;
    any_diff = any_diff || x != z;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform01 stays in [0,1) and fills the range") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("bernoulli honors its edge probabilities") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));
  }
  int hits = 0;
  for (int i = 0; i < 10000; ++i) hits += rng.bernoulli(0.3);
  CHECK(std::fabs(hits / 10000.0 - 0.3) < 0.02);
}

TEST_CASE("uniform_index is in range and roughly uniform") {
  Rng rng(5);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 50000; ++i) {
    const std::size_t k = rng.uniform_index(10);
    REQUIRE(k < 10);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::fabs(c / 50000.0 - 0.1) < 0.01);
}

TEST_CASE("partial_shuffle keeps the multiset and samples without bias") {
  Rng rng(9);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  const std::vector<int> original = v;
  rng.partial_shuffle(v, 3);
  std::vector<int> sorted_after = v;
  std::sort(sorted_after.begin(), sorted_after.end());
  CHECK(sorted_after == original);

  // Every element should land in slot 0 about 1/8 of the time.
  std::vector<int> first_counts(8, 0);
  for (int i = 0; i < 40000; ++i) {
    std::vector<int> w{0, 1, 2, 3, 4, 5, 6, 7};
    rng.partial_shuffle(w, 3);
    ++first_counts[w[0]];
  }
  for (int c : first_counts) CHECK(std::fabs(c / 40000.0 - 0.125) < 0.01);
}

TEST_CASE("weighted_index follows the weights") {
  Rng rng(11);
  const std::vector<double> loaded{0.0, 0.0, 5.0, 0.0};
  for (int i = 0; i < 200; ++i) CHECK(rng.weighted_index(loaded) == 2);

  const std::vector<double> weights{1.0, 3.0};
  int ones = 0;
  for (int i = 0; i < 20000; ++i) ones += rng.weighted_index(weights) == 1;
  CHECK(std::fabs(ones / 20000.0 - 0.75) < 0.02);

  // A degenerate weight vector falls back to a uniform pick.
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  std::set<std::size_t> seen;
  for (int i = 0; i < 200; ++i) seen.insert(rng.weighted_index(zeros));
  CHECK(seen == std::set<std::size_t>{0, 1, 2});
}

TEST_CASE("micro quantization is decimal rounding to 6 places") {
  CHECK(quantize_micro(0.1234567) == doctest::Approx(0.123457).epsilon(1e-12));
  CHECK(quantize_micro(0.1234564) == doctest::Approx(0.123456).epsilon(1e-12));
  CHECK(quantize_micro(1.0) == 1.0);
  CHECK(quantize_micro(0.0) == 0.0);
  CHECK(quantize_micro(-0.5) == -0.5);
  // Idempotent: re-quantizing a quantized value changes nothing.
  for (double v : {0.333333, -0.666667, 0.1, 0.725, -0.999999}) {
    CHECK(quantize_micro(quantize_micro(v)) == quantize_micro(v));
  }
  // The printed form round-trips exactly.
  CHECK(format_micro(quantize_micro(2.0 / 3.0)) == "0.666667");
  CHECK(format_micro(-0.62) == "-0.620000");
}

TEST_CASE("opinion values clamp then quantize") {
  CHECK(OpinionValue(1.5).value() == 1.0);
  CHECK(OpinionValue(-3.0).value() == -1.0);
  CHECK(OpinionValue(0.0000004).value() == 0.0);
  CHECK(OpinionValue(0.9999996).value() == 1.0);
  CHECK(OpinionValue(2.0 / 3.0).value() == doctest::Approx(0.666667).epsilon(1e-15));
  CHECK(OpinionValue(0.1) == OpinionValue(0.1000001));
}

TEST_CASE("stance labels map to the three anchor values") {
  CHECK(stance_label_from_string("favor") == StanceLabel::Favor);
  CHECK(stance_label_from_string("neutral") == StanceLabel::Neutral);
  CHECK(stance_label_from_string("oppose") == StanceLabel::Oppose);
  CHECK_THROWS_AS(stance_label_from_string("meh"), FormatError);
  CHECK(stance_value(StanceLabel::Favor) == 1.0);
  CHECK(stance_value(StanceLabel::Neutral) == 0.0);
  CHECK(stance_value(StanceLabel::Oppose) == -1.0);
  CHECK(to_string(StanceLabel::Oppose) == "oppose");
}

TEST_CASE("graph edges: direction, dedup, self-loops, removal") {
  SocialGraph g = testutil::make_users({0.1, 0.2, 0.3});
  CHECK(g.user_count() == 3);

  CHECK(g.add_edge(0, 1));        // user 1 follows user 0
  CHECK_FALSE(g.add_edge(0, 1));  // duplicate
  CHECK_FALSE(g.add_edge(2, 2));  // self-loop
  CHECK(g.add_edge(2, 1));
  CHECK(g.edge_count() == 2);

  CHECK(g.has_edge(0, 1));
  CHECK_FALSE(g.has_edge(1, 0));
  CHECK(g.in_neighbors(1) == std::vector<UserId>{0, 2});
  CHECK(g.in_neighbors(0).empty());

  CHECK(g.remove_edge(0, 1));
  CHECK_FALSE(g.remove_edge(0, 1));
  CHECK(g.edge_count() == 1);
  CHECK(g.in_neighbors(1) == std::vector<UserId>{2});

  CHECK_THROWS_AS(g.add_edge(0, 9), NotFoundError);
  CHECK_THROWS_AS((void)g.user(9), NotFoundError);
}

TEST_CASE("edges() lists sorted source-target pairs") {
  SocialGraph g = testutil::make_users({0, 0, 0});
  g.add_edge(2, 0);
  g.add_edge(1, 2);
  g.add_edge(0, 2);
  const std::vector<std::pair<UserId, UserId>> want{{0, 2}, {1, 2}, {2, 0}};
  CHECK(g.edges() == want);
}

TEST_CASE("graph equality is structural") {
  SocialGraph a = testutil::make_users({0.5, -0.5});
  SocialGraph b = testutil::make_users({0.5, -0.5});
  CHECK(a == b);
  a.add_edge(0, 1);
  CHECK(a != b);
  b.add_edge(0, 1);
  CHECK(a == b);
  a.user_mut(0).opinion = OpinionValue(0.4);
  CHECK(a != b);
}

TEST_CASE("validate rejects broken invariants") {
  SocialGraph g = testutil::make_users({0, 0});
  g.add_edge(0, 1);
  g.user_mut(0).history.push_back(make_post(0, 1, "fine", 0.5));
  CHECK_NOTHROW(g.validate());

  SUBCASE("empty post text") {
    g.user_mut(0).history.push_back(make_post(0, 2, "", 0.0));
    CHECK_THROWS_AS(g.validate(), FormatError);
  }
  SUBCASE("history steps must not decrease") {
    g.user_mut(0).history.push_back(make_post(0, 0, "early", 0.0));
    CHECK_THROWS_AS(g.validate(), FormatError);
  }
  SUBCASE("post author must match the history owner") {
    g.user_mut(0).history.push_back(make_post(1, 3, "stolen", 0.0));
    CHECK_THROWS_AS(g.validate(), FormatError);
  }
}

TEST_CASE("recent_context slices the newest posts") {
  UserState u = make_user("x", 0.0);
  for (int s = 1; s <= 5; ++s) u.history.push_back(make_post(0, s, "p" + std::to_string(s), 0.0));
  const auto last3 = recent_context(u, 3);
  REQUIRE(last3.size() == 3);
  CHECK(last3.front().step == 3);
  CHECK(last3.back().step == 5);
  CHECK(recent_context(u, 10).size() == 5);
  CHECK(recent_context(u, 0).empty());
}

namespace {

// Five users; 0 follows 1, 2, 3; user 4 is the only recommendation source.
SocialGraph screen_fixture() {
  SocialGraph g = testutil::make_users({0.0, 0.1, 0.2, 0.3, 0.4});
  g.add_edge(1, 0);
  g.add_edge(2, 0);
  g.add_edge(3, 0);
  g.user_mut(0).history.push_back(make_post(0, 1, "own post", 0.0));
  g.user_mut(1).history.push_back(make_post(1, 1, "u1 old", 0.1));
  g.user_mut(1).history.push_back(make_post(1, 2, "u1 new", 0.1));
  g.user_mut(2).history.push_back(make_post(2, 2, "u2 old", 0.2));
  g.user_mut(2).history.push_back(make_post(2, 3, "u2 new", 0.2));
  g.user_mut(3).history.push_back(make_post(3, 5, "u3 only", 0.3));
  g.user_mut(4).history.push_back(make_post(4, 4, "u4 latest", 0.4));
  return g;
}

}  // namespace

TEST_CASE("screen fills friend slots newest-first, then recommendations") {
  const SocialGraph g = screen_fixture();
  Rng rng(1);
  const Screen screen = build_screen(g, 0, 4, 0.25, rng);

  // ceil(0.75 * 4) = 3 friend slots: steps 5, 3, 2 — and the step-2 tie
  // between u1 and u2 goes to the smaller author id.
  REQUIRE(screen.posts.size() == 4);
  CHECK(screen.viewer == 0);
  CHECK(screen.posts[0].text == "u3 only");
  CHECK(screen.posts[1].text == "u2 new");
  CHECK(screen.posts[2].text == "u1 new");
  CHECK(screen.sources[0] == ScreenSource::Friend);
  CHECK(screen.sources[2] == ScreenSource::Friend);

  // The single recommendation slot: user 4 is the only non-friend with
  // history, and its latest post is shown.
  CHECK(screen.posts[3].text == "u4 latest");
  CHECK(screen.sources[3] == ScreenSource::Recommended);
}

TEST_CASE("screen never shows the viewer's own posts") {
  const SocialGraph g = screen_fixture();
  Rng rng(2);
  const Screen screen = build_screen(g, 0, 10, 0.5, rng);
  for (const Post& p : screen.posts) CHECK(p.author != 0);
}

TEST_CASE("a step tie among friends breaks toward the smaller author id") {
  SocialGraph g = testutil::make_users({0.0, 0.1, 0.2});
  g.add_edge(1, 0);
  g.add_edge(2, 0);
  g.user_mut(1).history.push_back(make_post(1, 7, "from u1", 0.1));
  g.user_mut(2).history.push_back(make_post(2, 7, "from u2", 0.2));
  Rng rng(3);
  const Screen screen = build_screen(g, 0, 2, 0.0, rng);
  REQUIRE(screen.posts.size() == 2);
  CHECK(screen.posts[0].author == 1);
  CHECK(screen.posts[1].author == 2);
}

TEST_CASE("rec_fraction 1.0 yields a screen of recommendations only") {
  const SocialGraph g = screen_fixture();
  Rng rng(4);
  const Screen screen = build_screen(g, 0, 4, 1.0, rng);
  CHECK(!screen.posts.empty());
  for (const ScreenSource s : screen.sources) CHECK(s == ScreenSource::Recommended);
  for (const Post& p : screen.posts) CHECK(p.author == 4);  // only eligible source
}

TEST_CASE("a short supply of posts produces a short screen") {
  SocialGraph g = testutil::make_users({0.0, 0.5});
  g.add_edge(1, 0);
  Rng rng(5);
  CHECK(build_screen(g, 0, 10, 0.25, rng).posts.empty());
  g.user_mut(1).history.push_back(make_post(1, 1, "single", 0.5));
  const Screen screen = build_screen(g, 0, 10, 0.25, rng);
  CHECK(screen.posts.size() == 1);
}

TEST_CASE("screens are deterministic per rng seed") {
  SocialGraph g = testutil::make_users(std::vector<double>(30, 0.0));
  for (UserId u = 0; u < 30; ++u) {
    g.user_mut(u).history.push_back(make_post(u, 1, "post " + std::to_string(u), 0.0));
  }
  g.add_edge(1, 0);
  Rng r1(99), r2(99), r3(100);
  const Screen a = build_screen(g, 0, 10, 0.9, r1);
  const Screen b = build_screen(g, 0, 10, 0.9, r2);
  const Screen c = build_screen(g, 0, 10, 0.9, r3);
  REQUIRE(a.posts.size() == b.posts.size());
  bool same = true;
  for (std::size_t i = 0; i < a.posts.size(); ++i) same = same && a.posts[i] == b.posts[i];
  CHECK(same);
  bool differs = c.posts.size() != a.posts.size();
  for (std::size_t i = 0; !differs && i < a.posts.size(); ++i) {
    differs = !(a.posts[i] == c.posts[i]);
  }
  CHECK(differs);  // different stream, different sample (30 choose 9 ways)
}
