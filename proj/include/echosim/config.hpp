#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echosim/ingest.hpp"
#include "echosim/llm_client.hpp"
#include "echosim/llm_engine.hpp"
#include "echosim/simulation.hpp"

namespace echosim {

// Everything the command-line tool can be told through a config file.
struct AppConfig {
  SimConfig sim;        // sim.seed is replaced per run by an entry of seeds
  IngestConfig ingest;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int checkpoint_every = 100;  // metric checkpoint cadence, in steps
  int clusters = 8;            // k for embedding cluster analysis
  LlmEndpointConfig endpoint;  // used only when sim.engine == Llm
  LlmEngineOptions llm;
  std::string cache_file;      // completion cache JSONL; empty = in-memory only

  void validate() const;  // throws ConfigError
};

// Applies one key=value assignment. Unknown keys and unparseable values
// throw ConfigError.
void apply_config_entry(AppConfig& config, const std::string& key, const std::string& value);

// key=value lines; blank lines and lines starting with '#' are skipped.
AppConfig parse_config(const std::string& text);

AppConfig load_config(const std::string& path);  // IoError / ConfigError

}  // namespace echosim
