#include "echosim/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "echosim/error.hpp"

namespace echosim {

namespace {

using nlohmann::json;

json opt_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

void to_json(json& j, const OpinionValue& v) { j = v.value(); }
void from_json(const json& j, OpinionValue& v) { v = OpinionValue(j.get<double>()); }

void to_json(json& j, const Post& p) {
  j = json{{"author", p.author},
           {"step", p.step},
           {"origin", p.origin == PostOrigin::Seed ? "seed" : "sim"},
           {"text", p.text},
           {"stance", p.stance}};
}

void from_json(const json& j, Post& p) {
  p.author = j.at("author").get<UserId>();
  p.step = j.at("step").get<int>();
  const std::string origin = j.at("origin").get<std::string>();
  if (origin != "seed" && origin != "sim") throw FormatError("bad post origin: " + origin);
  p.origin = origin == "seed" ? PostOrigin::Seed : PostOrigin::Sim;
  p.text = j.at("text").get<std::string>();
  p.stance = j.at("stance").get<OpinionValue>();
}

void to_json(json& j, const UserState& u) {
  j = json{{"id", u.id},
           {"handle", u.handle},
           {"opinion", u.opinion},
           {"history", u.history},
           {"ground_truth", u.ground_truth ? json(to_string(*u.ground_truth)) : json(nullptr)}};
}

void from_json(const json& j, UserState& u) {
  u.id = j.at("id").get<UserId>();
  u.handle = j.at("handle").get<std::string>();
  u.opinion = j.at("opinion").get<OpinionValue>();
  u.history = j.at("history").get<std::vector<Post>>();
  const json& truth = j.at("ground_truth");
  u.ground_truth = truth.is_null()
                       ? std::nullopt
                       : std::optional(stance_label_from_string(truth.get<std::string>()));
}

void to_json(json& j, const SocialGraph& g) {
  json users = json::array();
  for (UserId id = 0; id < static_cast<UserId>(g.user_count()); ++id) users.push_back(g.user(id));
  j = json{{"users", std::move(users)}, {"edges", g.edges()}};
}

void from_json(const json& j, SocialGraph& g) {
  g = SocialGraph{};
  for (const json& uj : j.at("users")) {
    auto user = uj.get<UserState>();
    const UserId stored = user.id;
    if (g.add_user(std::move(user)) != stored) {
      throw FormatError("user ids must be sequential from 0");
    }
  }
  for (const json& ej : j.at("edges")) {
    const auto edge = ej.get<std::pair<UserId, UserId>>();
    if (!g.add_edge(edge.first, edge.second)) {
      throw FormatError("duplicate or self-loop edge in graph file");
    }
  }
  g.validate();
}

void to_json(json& j, const StepEvent& e) {
  j = json{{"step", e.step},
           {"actor", e.actor},
           {"post", e.new_post},
           {"unfollowed", e.unfollowed},
           {"followed", e.followed},
           {"opinion_before", e.opinion_before},
           {"opinion_after", e.opinion_after}};
}

void from_json(const json& j, StepEvent& e) {
  e.step = j.at("step").get<int>();
  e.actor = j.at("actor").get<UserId>();
  e.new_post = j.at("post").get<Post>();
  e.unfollowed = j.at("unfollowed").get<std::vector<UserId>>();
  e.followed = j.at("followed").get<std::vector<UserId>>();
  e.opinion_before = j.at("opinion_before").get<OpinionValue>();
  e.opinion_after = j.at("opinion_after").get<OpinionValue>();
}

void to_json(json& j, const MetricsReport& m) {
  j = json{{"step", m.step},
           {"modularity", opt_to_json(m.modularity)},
           {"clustering", m.clustering},
           {"path_length", opt_to_json(m.path_length)},
           {"density", opt_to_json(m.density)},
           {"stance_accuracy", opt_to_json(m.stance_accuracy)}};
}

void from_json(const json& j, MetricsReport& m) {
  m.step = j.at("step").get<int>();
  m.modularity = opt_from_json(j.at("modularity"));
  m.clustering = j.at("clustering").get<double>();
  m.path_length = opt_from_json(j.at("path_length"));
  m.density = opt_from_json(j.at("density"));
  m.stance_accuracy = opt_from_json(j.at("stance_accuracy"));
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void save_graph(const SocialGraph& graph, const std::string& path) {
  const json j = graph;
  write_text_file(path, j.dump(2) + "\n");
}

SocialGraph load_graph(const std::string& path) {
  const json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw FormatError("not valid JSON: " + path);
  try {
    return j.get<SocialGraph>();
  } catch (const json::exception& e) {
    throw FormatError("bad graph file " + path + ": " + e.what());
  }
}

void save_events(std::span<const StepEvent> events, const std::string& path) {
  std::string out;
  for (const StepEvent& e : events) {
    out += json(e).dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<StepEvent> load_events(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<StepEvent> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("bad event at line " + std::to_string(line_no));
    try {
      events.push_back(j.get<StepEvent>());
    } catch (const json::exception& e) {
      throw FormatError("bad event at line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return events;
}

void save_metrics_csv(std::span<const MetricsReport> series, const std::string& path) {
  std::string out = "step,modularity,clustering,path_length,density,stance_accuracy\n";
  const auto cell = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  for (const MetricsReport& m : series) {
    out += std::to_string(m.step);
    out += ',';
    out += cell(m.modularity);
    out += ',';
    out += format_double(m.clustering);
    out += ',';
    out += cell(m.path_length);
    out += ',';
    out += cell(m.density);
    out += ',';
    out += cell(m.stance_accuracy);
    out += '\n';
  }
  write_text_file(path, out);
}

void save_metrics_json(std::span<const MetricsReport> series, const std::string& path) {
  const json j = std::vector<MetricsReport>(series.begin(), series.end());
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<MetricsReport> load_metrics_json(const std::string& path) {
  const json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw FormatError("bad metric series: " + path);
  try {
    return j.get<std::vector<MetricsReport>>();
  } catch (const json::exception& e) {
    throw FormatError("bad metric series " + path + ": " + e.what());
  }
}

}  // namespace echosim
