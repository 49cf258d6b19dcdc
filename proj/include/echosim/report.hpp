#pragma once

#include <optional>
#include <string>
#include <vector>

#include "echosim/metrics.hpp"

namespace echosim {

// One run's metric checkpoints, tagged with where they came from so
// alignment failures can name the offending file.
struct MetricSeries {
  std::string file;
  std::vector<MetricsReport> rows;
};

MetricSeries load_series(const std::string& path);  // IoError / FormatError

struct AggregateCell {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1); 0 for a single series

  bool operator==(const AggregateCell&) const = default;
};

struct AggregateRow {
  int step = 0;
  // A cell is present only when every series defines the metric at this
  // step; one undefined value makes the aggregate undefined.
  std::optional<AggregateCell> modularity;
  std::optional<AggregateCell> clustering;
  std::optional<AggregateCell> path_length;
  std::optional<AggregateCell> density;
  std::optional<AggregateCell> stance_accuracy;

  bool operator==(const AggregateRow&) const = default;
};

struct AggregateReport {
  int series_count = 0;
  bool single_series = false;  // flags that std columns are degenerate zeros
  std::vector<AggregateRow> rows;
};

// Means and sample standard deviations across series, step by step. Every
// series must checkpoint the exact same step sequence; the first one that
// does not raises AlignmentError naming its file.
AggregateReport aggregate_series(const std::vector<MetricSeries>& series);

void save_aggregate_csv(const AggregateReport& report, const std::string& path);
void save_aggregate_json(const AggregateReport& report, const std::string& path);

}  // namespace echosim
