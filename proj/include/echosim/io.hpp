#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "echosim/graph.hpp"
#include "echosim/metrics.hpp"
#include "echosim/simulation.hpp"

namespace echosim {

// nlohmann ADL hooks so `json j = value;` / `j.get<T>()` work for our types.
// Object keys serialize alphabetically, and doubles print as the shortest
// string that round-trips, so equal inputs always produce identical bytes.
void to_json(nlohmann::json& j, const OpinionValue& v);
void from_json(const nlohmann::json& j, OpinionValue& v);
void to_json(nlohmann::json& j, const Post& p);
void from_json(const nlohmann::json& j, Post& p);
void to_json(nlohmann::json& j, const UserState& u);
void from_json(const nlohmann::json& j, UserState& u);
void to_json(nlohmann::json& j, const SocialGraph& g);
void from_json(const nlohmann::json& j, SocialGraph& g);
void to_json(nlohmann::json& j, const StepEvent& e);
void from_json(const nlohmann::json& j, StepEvent& e);
void to_json(nlohmann::json& j, const MetricsReport& m);
void from_json(const nlohmann::json& j, MetricsReport& m);

// Shortest decimal string that parses back to exactly this double.
std::string format_double(double v);

// Whole-file helpers; both throw IoError.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Graph snapshots as pretty-printed JSON.
void save_graph(const SocialGraph& graph, const std::string& path);
SocialGraph load_graph(const std::string& path);  // IoError / FormatError

// Step events as JSONL, one event per line.
void save_events(std::span<const StepEvent> events, const std::string& path);
std::vector<StepEvent> load_events(const std::string& path);

// Metric series. The CSV has one column per metric; a metric that is
// undefined on a step leaves its cell empty (and is null in the JSON form).
void save_metrics_csv(std::span<const MetricsReport> series, const std::string& path);
void save_metrics_json(std::span<const MetricsReport> series, const std::string& path);
std::vector<MetricsReport> load_metrics_json(const std::string& path);

}  // namespace echosim
