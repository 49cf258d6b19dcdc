#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "echosim/graph.hpp"

namespace testutil {

// Scratch directory that cleans up after itself.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           (tag + "_" + std::to_string(rd() % 1000000));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline echosim::UserState make_user(const std::string& handle, double opinion) {
  echosim::UserState u;
  u.handle = handle;
  u.opinion = echosim::OpinionValue(opinion);
  return u;
}

inline echosim::Post make_post(echosim::UserId author, int step, const std::string& text,
                               double stance) {
  return echosim::Post{author, step, echosim::PostOrigin::Seed, text,
                       echosim::OpinionValue(stance)};
}

// n users with the given opinions and no edges.
inline echosim::SocialGraph make_users(const std::vector<double>& opinions) {
  echosim::SocialGraph g;
  for (std::size_t i = 0; i < opinions.size(); ++i) {
    g.add_user(make_user("u" + std::to_string(i), opinions[i]));
  }
  return g;
}

// Every ordered pair connected (a complete directed graph).
inline echosim::SocialGraph clique(int n, double opinion = 0.0) {
  echosim::SocialGraph g = make_users(std::vector<double>(n, opinion));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a != b) g.add_edge(a, b);
    }
  }
  return g;
}

// Undirected-style edge: both directions at once.
inline void add_mutual(echosim::SocialGraph& g, echosim::UserId a, echosim::UserId b) {
  g.add_edge(a, b);
  g.add_edge(b, a);
}

// Two directed n-cliques; members of the second get ids n..2n-1.
inline echosim::SocialGraph two_cliques(int n, double left_opinion = -0.8,
                                        double right_opinion = 0.8) {
  std::vector<double> opinions(2 * n, left_opinion);
  for (int i = n; i < 2 * n; ++i) opinions[i] = right_opinion;
  echosim::SocialGraph g = make_users(opinions);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a != b) {
        g.add_edge(a, b);
        g.add_edge(n + a, n + b);
      }
    }
  }
  return g;
}

// Gives every user one seed post stating its opinion so screens are never
// empty at the start of a run.
inline void seed_posts(echosim::SocialGraph& g) {
  for (echosim::UserId id = 0; id < static_cast<echosim::UserId>(g.user_count()); ++id) {
    auto& u = g.user_mut(id);
    u.history.push_back(make_post(id, 0, "seed post by " + u.handle, u.opinion.value()));
  }
}

}  // namespace testutil
