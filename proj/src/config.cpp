#include "echosim/config.hpp"

#include <cstdlib>
#include <set>
#include <sstream>

#include "echosim/error.hpp"
#include "echosim/io.hpp"

namespace echosim {

namespace {

std::string trim(const std::string& s) {
  const std::size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const std::size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int to_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ConfigError("bad value for " + key + ": " + value);
  }
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ConfigError("bad value for " + key + ": " + value);
  }
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ConfigError("bad value for " + key + ": " + value);
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("bad value for " + key + ": expected true or false, got " + value);
}

std::vector<std::uint64_t> to_seed_list(const std::string& key, const std::string& value) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::string part =
        trim(value.substr(start, comma == std::string::npos ? comma : comma - start));
    seeds.push_back(to_u64(key, part));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return seeds;
}

}  // namespace

void AppConfig::validate() const {
  sim.validate();
  ingest.validate();
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be at least 1");
  if (clusters < 2) throw ConfigError("clusters must be at least 2");
  if (llm.max_tokens < 1) throw ConfigError("max_tokens must be at least 1");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  const std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) {
    throw ConfigError("seeds must be distinct; outputs are named by seed");
  }
}

void apply_config_entry(AppConfig& config, const std::string& key, const std::string& value) {
  if (key == "seed") {
    config.sim.seed = to_u64(key, value);
  } else if (key == "seeds") {
    config.seeds = to_seed_list(key, value);
  } else if (key == "max_steps") {
    config.sim.max_steps = to_int(key, value);
  } else if (key == "screen_size") {
    config.sim.screen_size = to_int(key, value);
  } else if (key == "history_window") {
    config.sim.history_window = to_int(key, value);
  } else if (key == "rec_fraction") {
    config.sim.rec_fraction = to_double(key, value);
  } else if (key == "q_unfollow") {
    config.sim.q_unfollow = to_double(key, value);
  } else if (key == "paired_rewiring") {
    config.sim.paired_rewiring = to_bool(key, value);
  } else if (key == "mu") {
    config.sim.params.mu = to_double(key, value);
  } else if (key == "epsilon") {
    config.sim.params.epsilon = to_double(key, value);
  } else if (key == "engine") {
    config.sim.engine = engine_kind_from_string(value);
  } else if (key == "update_mode") {
    config.sim.update_mode = update_mode_from_string(value);
  } else if (key == "stability_delta") {
    config.sim.stability_delta = to_double(key, value);
  } else if (key == "stability_window") {
    config.sim.stability_window = to_int(key, value);
  } else if (key == "top_k_users") {
    config.ingest.top_k_users = to_int(key, value);
  } else if (key == "min_posts") {
    config.ingest.min_posts = to_int(key, value);
  } else if (key == "history_cap") {
    config.ingest.history_cap = to_int(key, value);
  } else if (key == "checkpoint_every") {
    config.checkpoint_every = to_int(key, value);
  } else if (key == "clusters") {
    config.clusters = to_int(key, value);
  } else if (key == "llm_url") {
    config.endpoint.url = value;
  } else if (key == "llm_key") {
    config.endpoint.key = value;
  } else if (key == "llm_model") {
    config.endpoint.model = value;
  } else if (key == "max_tokens") {
    config.llm.max_tokens = to_int(key, value);
  } else if (key == "decision_temperature") {
    config.llm.decision_temperature = to_double(key, value);
  } else if (key == "generation_temperature") {
    config.llm.generation_temperature = to_double(key, value);
  } else if (key == "compat_cache") {
    config.llm.compat_cache = to_bool(key, value);
  } else if (key == "cache_file") {
    config.cache_file = value;
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

AppConfig parse_config(const std::string& text) {
  AppConfig config;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + " is not key=value: " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key on line " + std::to_string(line_no));
    apply_config_entry(config, key, value);
  }
  return config;
}

AppConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

}  // namespace echosim
