// Command-line front end: ingest an archive into a starting network, run
// seeded simulations over it, aggregate the per-seed metric series, and
// cluster embedding sets.
//
// Exit codes: 0 on success, 2 for invalid input or configuration, 1 for
// runtime failures (an aborted seed, an unreachable endpoint, ...).

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "echosim/config.hpp"
#include "echosim/embedding.hpp"
#include "echosim/error.hpp"
#include "echosim/graph.hpp"
#include "echosim/ingest.hpp"
#include "echosim/io.hpp"
#include "echosim/metrics.hpp"
#include "echosim/report.hpp"
#include "echosim/rng.hpp"
#include "echosim/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace echosim;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value pairs from --set
};

AppConfig make_config(const CommonArgs& args) {
  AppConfig config = args.config_path.empty() ? AppConfig{} : load_config(args.config_path);
  for (const std::string& kv : args.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects key=value, got: " + kv);
    }
    apply_config_entry(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

// Effective-config echo written next to simulation outputs. Keys match the
// config file; the endpoint key is redacted, never persisted.
json config_json(const AppConfig& c) {
  return json{{"seeds", c.seeds},
              {"max_steps", c.sim.max_steps},
              {"screen_size", c.sim.screen_size},
              {"history_window", c.sim.history_window},
              {"rec_fraction", c.sim.rec_fraction},
              {"q_unfollow", c.sim.q_unfollow},
              {"paired_rewiring", c.sim.paired_rewiring},
              {"mu", c.sim.params.mu},
              {"epsilon", c.sim.params.epsilon},
              {"engine", to_string(c.sim.engine)},
              {"update_mode", to_string(c.sim.update_mode)},
              {"stability_delta", c.sim.stability_delta},
              {"stability_window", c.sim.stability_window},
              {"top_k_users", c.ingest.top_k_users},
              {"min_posts", c.ingest.min_posts},
              {"history_cap", c.ingest.history_cap},
              {"checkpoint_every", c.checkpoint_every},
              {"clusters", c.clusters},
              {"llm_url", c.endpoint.url},
              {"llm_key", c.endpoint.key.empty() ? "" : "<redacted>"},
              {"llm_model", c.endpoint.model},
              {"max_tokens", c.llm.max_tokens},
              {"decision_temperature", c.llm.decision_temperature},
              {"generation_temperature", c.llm.generation_temperature},
              {"compat_cache", c.llm.compat_cache},
              {"cache_file", c.cache_file}};
}

std::string out_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int cmd_ingest(const std::string& input, const std::string& follows, const std::string& out_dir,
               const CommonArgs& common) {
  const AppConfig config = make_config(common);
  fs::create_directories(out_dir);

  const LoadResult loaded = load_records(input);
  std::string rejects;
  for (const RejectEntry& r : loaded.rejects) {
    rejects += json{{"line", r.line}, {"reason", r.reason}}.dump();
    rejects += '\n';
  }
  write_text_file(out_path(out_dir, "rejects.jsonl"), rejects);

  SocialGraph graph = build_network(loaded.records, config.ingest);
  int merged = 0;
  if (!follows.empty()) merged = union_follow_edges(graph, follows);
  save_graph(graph, out_path(out_dir, "graph.json"));

  std::printf("ingested %zu records (%zu rejected) -> %zu users, %zu edges",
              loaded.records.size(), loaded.rejects.size(), graph.user_count(),
              graph.edge_count());
  if (!follows.empty()) std::printf(" (%d from follow file)", merged);
  std::printf("\n");
  return 0;
}

int cmd_simulate(const std::string& graph_path, const std::string& out_dir,
                 const CommonArgs& common) {
  const AppConfig config = make_config(common);
  const SocialGraph initial = load_graph(graph_path);
  fs::create_directories(out_dir);
  write_text_file(out_path(out_dir, "manifest.json"), config_json(config).dump(2) + "\n");

  bool any_aborted = false;
  for (const std::uint64_t seed : config.seeds) {
    SimConfig sim = config.sim;
    sim.seed = seed;
    LlmEngineOptions llm = config.llm;
    llm.seed_slot = seed;
    LlmClientOptions client_options;
    client_options.cache_path = config.cache_file;
    EngineSetup setup = make_engine(sim.engine, sim.params, llm, config.endpoint, client_options);

    std::vector<MetricsReport> checkpoints;
    const auto observer = [&](const SocialGraph& g, const StepEvent& e) {
      if (e.step % config.checkpoint_every == 0) {
        checkpoints.push_back(compute_metrics(g, e.step));
      }
    };
    const RunResult result = run(initial, sim, *setup.engine, observer);

    // Always close the series with the state the run ended in.
    if (result.events.empty()) {
      checkpoints.push_back(compute_metrics(result.final_graph, 0));
    } else if (result.events.back().step % config.checkpoint_every != 0) {
      checkpoints.push_back(compute_metrics(result.final_graph, result.events.back().step));
    }

    const std::string tag = std::to_string(seed);
    save_events(result.events, out_path(out_dir, "events_" + tag + ".jsonl"));
    save_metrics_csv(checkpoints, out_path(out_dir, "metrics_" + tag + ".csv"));
    save_metrics_json(checkpoints, out_path(out_dir, "metrics_" + tag + ".json"));
    const json run_json{{"seed", seed},
                        {"stopped_reason", to_string(result.stopped_reason)},
                        {"steps", result.events.size()},
                        {"fallback_count", result.fallback_count},
                        {"error", result.error.empty() ? json(nullptr) : json(result.error)},
                        {"final_graph", result.final_graph}};
    write_text_file(out_path(out_dir, "run_" + tag + ".json"), run_json.dump(2) + "\n");

    std::printf("seed %llu: %zu steps, stopped %s, fallbacks %d\n",
                static_cast<unsigned long long>(seed), result.events.size(),
                to_string(result.stopped_reason).c_str(), result.fallback_count);
    if (result.stopped_reason == StopReason::Aborted) {
      any_aborted = true;
      std::fprintf(stderr, "seed %llu aborted: %s\n", static_cast<unsigned long long>(seed),
                   result.error.c_str());
    }
  }
  return any_aborted ? 1 : 0;
}

int cmd_report(const std::string& runs_dir, const std::string& out_dir) {
  // Pick up every metrics_<seed>.json in the runs directory, smallest seed
  // first so alignment errors always blame the later file.
  std::vector<std::pair<std::uint64_t, std::string>> found;
  if (!fs::is_directory(runs_dir)) throw IoError("not a directory: " + runs_dir);
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("metrics_", 0) != 0 || name.size() < 14 ||
        name.substr(name.size() - 5) != ".json") {
      continue;
    }
    const std::string digits = name.substr(8, name.size() - 13);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) continue;
    found.emplace_back(std::stoull(digits), entry.path().string());
  }
  std::sort(found.begin(), found.end());
  if (found.empty()) throw ConfigError("no metrics_<seed>.json files in " + runs_dir);

  std::vector<MetricSeries> series;
  for (const auto& [seed, path] : found) series.push_back(load_series(path));
  const AggregateReport report = aggregate_series(series);

  fs::create_directories(out_dir);
  save_aggregate_csv(report, out_path(out_dir, "aggregate.csv"));
  save_aggregate_json(report, out_path(out_dir, "aggregate.json"));
  std::printf("aggregated %d series x %zu checkpoints\n", report.series_count,
              report.rows.size());
  return 0;
}

json embed_analysis(const EmbeddingSet& set, int k, std::uint64_t seed, const std::string& out_dir,
                    const std::string& csv_name) {
  Rng rng(seed);
  const ClusterAssignment clusters = kmeans(set, k, rng);
  const std::optional<double> sil = silhouette(set, clusters);
  const std::optional<ClusterDistances> dist = cluster_distances(set, clusters);

  std::string csv = "id,cluster\n";
  for (std::size_t i = 0; i < set.ids.size(); ++i) {
    csv += set.ids[i];
    csv += ',';
    csv += std::to_string(clusters.labels[i]);
    csv += '\n';
  }
  write_text_file(out_path(out_dir, csv_name), csv);

  return json{{"source", to_string(set.source)},
              {"dim", set.dim},
              {"count", set.ids.size()},
              {"k", k},
              {"inertia", clusters.inertia_history.back()},
              {"inertia_history", clusters.inertia_history},
              {"silhouette", sil ? json(*sil) : json(nullptr)},
              {"intra_cluster_distance", dist ? json(dist->intra) : json(nullptr)},
              {"inter_cluster_distance", dist ? json(dist->inter) : json(nullptr)},
              {"clusters_csv", csv_name}};
}

int cmd_embed(const std::string& input, const std::string& compare, const std::string& out_dir,
              const CommonArgs& common) {
  const AppConfig config = make_config(common);
  const EmbeddingSet primary = load_embeddings(input);
  fs::create_directories(out_dir);

  json report{{"primary", json(nullptr)}, {"compare", json(nullptr)}};
  report["primary"] =
      embed_analysis(primary, config.clusters, config.sim.seed, out_dir, "clusters.csv");
  if (!compare.empty()) {
    const EmbeddingSet other = load_embeddings(compare);
    if (other.dim != primary.dim) {
      throw DimensionError("embedding dimensions differ: " + std::to_string(primary.dim) +
                           " vs " + std::to_string(other.dim));
    }
    report["compare"] =
        embed_analysis(other, config.clusters, config.sim.seed, out_dir, "clusters_compare.csv");
  }
  write_text_file(out_path(out_dir, "embed_report.json"), report.dump(2) + "\n");
  std::printf("clustered %zu points (k=%d)%s\n", primary.ids.size(), config.clusters,
              compare.empty() ? "" : " plus comparison set");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"echo-chamber network simulator"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string input, follows, graph_path, runs_dir, compare, out_dir = ".";

  const auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "key=value config file");
    sub->add_option("--set", common.overrides, "override one config entry (key=value)");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "build a starting network from a JSONL archive");
  ingest->add_option("--input", input, "post archive (JSONL)")->required();
  ingest->add_option("--follows", follows, "optional follower,followee CSV to merge");
  ingest->add_option("--out", out_dir, "output directory")->required();
  add_common(ingest);

  CLI::App* simulate = app.add_subcommand("simulate", "run seeded simulations over a network");
  simulate->add_option("--graph", graph_path, "starting network (graph.json)")->required();
  simulate->add_option("--out", out_dir, "output directory")->required();
  add_common(simulate);

  CLI::App* report = app.add_subcommand("report", "aggregate per-seed metric series");
  report->add_option("--runs", runs_dir, "directory holding metrics_<seed>.json files")
      ->required();
  report->add_option("--out", out_dir, "output directory (default: --runs)");
  add_common(report);

  CLI::App* embed = app.add_subcommand("embed", "cluster an embedding set");
  embed->add_option("--input", input, "embedding file")->required();
  embed->add_option("--compare", compare, "second embedding file to analyze alongside");
  embed->add_option("--out", out_dir, "output directory")->required();
  add_common(embed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest) return cmd_ingest(input, follows, out_dir, common);
    if (*simulate) return cmd_simulate(graph_path, out_dir, common);
    if (*report) {
      return cmd_report(runs_dir, report->count("--out") != 0 ? out_dir : runs_dir);
    }
    if (*embed) return cmd_embed(input, compare, out_dir, common);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const AlignmentError& e) {
    std::fprintf(stderr, "alignment error: %s\n", e.what());
    return 2;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "dimension error: %s\n", e.what());
    return 2;
  } catch (const TooSmallError& e) {
    std::fprintf(stderr, "input too small: %s\n", e.what());
    return 2;
  } catch (const TooFewPointsError& e) {
    std::fprintf(stderr, "input too small: %s\n", e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
