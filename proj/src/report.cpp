#include "echosim/report.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "echosim/error.hpp"
#include "echosim/io.hpp"

namespace echosim {

namespace {

using nlohmann::json;

std::optional<AggregateCell> aggregate_cell(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  for (const auto& v : values) {
    if (!v) return std::nullopt;  // one undefined value poisons the cell
    sum += *v;
  }
  AggregateCell cell;
  const auto n = static_cast<double>(values.size());
  cell.mean = sum / n;
  if (values.size() > 1) {
    double sq = 0.0;
    for (const auto& v : values) sq += (*v - cell.mean) * (*v - cell.mean);
    cell.std = std::sqrt(sq / (n - 1.0));
  }
  return cell;
}

std::optional<AggregateCell> aggregate_metric(
    const std::vector<MetricSeries>& series, std::size_t row,
    std::optional<double> (*pick)(const MetricsReport&)) {
  std::vector<std::optional<double>> values;
  values.reserve(series.size());
  for (const MetricSeries& s : series) values.push_back(pick(s.rows[row]));
  return aggregate_cell(values);
}

json cell_json(const std::optional<AggregateCell>& cell) {
  if (!cell) return nullptr;
  return json{{"mean", cell->mean}, {"std", cell->std}};
}

}  // namespace

MetricSeries load_series(const std::string& path) {
  return MetricSeries{path, load_metrics_json(path)};
}

AggregateReport aggregate_series(const std::vector<MetricSeries>& series) {
  if (series.empty()) throw ConfigError("nothing to aggregate");

  const MetricSeries& ref = series.front();
  for (std::size_t i = 1; i < series.size(); ++i) {
    const MetricSeries& s = series[i];
    if (s.rows.size() != ref.rows.size()) {
      throw AlignmentError(s.file, "has " + std::to_string(s.rows.size()) +
                                       " checkpoints, expected " +
                                       std::to_string(ref.rows.size()) + " as in " + ref.file);
    }
    for (std::size_t r = 0; r < ref.rows.size(); ++r) {
      if (s.rows[r].step != ref.rows[r].step) {
        throw AlignmentError(s.file, "checkpoint " + std::to_string(r) + " is step " +
                                         std::to_string(s.rows[r].step) + ", expected step " +
                                         std::to_string(ref.rows[r].step) + " as in " + ref.file);
      }
    }
  }

  AggregateReport report;
  report.series_count = static_cast<int>(series.size());
  report.single_series = series.size() == 1;
  for (std::size_t r = 0; r < ref.rows.size(); ++r) {
    AggregateRow row;
    row.step = ref.rows[r].step;
    row.modularity = aggregate_metric(
        series, r, +[](const MetricsReport& m) { return m.modularity; });
    row.clustering = aggregate_metric(
        series, r, +[](const MetricsReport& m) { return std::optional<double>(m.clustering); });
    row.path_length = aggregate_metric(
        series, r, +[](const MetricsReport& m) { return m.path_length; });
    row.density = aggregate_metric(
        series, r, +[](const MetricsReport& m) { return m.density; });
    row.stance_accuracy = aggregate_metric(
        series, r, +[](const MetricsReport& m) { return m.stance_accuracy; });
    report.rows.push_back(row);
  }
  return report;
}

void save_aggregate_csv(const AggregateReport& report, const std::string& path) {
  std::string out = "step";
  for (const char* name :
       {"modularity", "clustering", "path_length", "density", "stance_accuracy"}) {
    out += ',';
    out += name;
    out += "_mean,";
    out += name;
    out += "_std";
  }
  out += '\n';

  const auto cells = [&out](const std::optional<AggregateCell>& cell) {
    out += ',';
    if (cell) out += format_double(cell->mean);
    out += ',';
    if (cell) out += format_double(cell->std);
  };
  for (const AggregateRow& row : report.rows) {
    out += std::to_string(row.step);
    cells(row.modularity);
    cells(row.clustering);
    cells(row.path_length);
    cells(row.density);
    cells(row.stance_accuracy);
    out += '\n';
  }
  write_text_file(path, out);
}

void save_aggregate_json(const AggregateReport& report, const std::string& path) {
  json rows = json::array();
  for (const AggregateRow& row : report.rows) {
    rows.push_back(json{{"step", row.step},
                        {"modularity", cell_json(row.modularity)},
                        {"clustering", cell_json(row.clustering)},
                        {"path_length", cell_json(row.path_length)},
                        {"density", cell_json(row.density)},
                        {"stance_accuracy", cell_json(row.stance_accuracy)}});
  }
  const json j{{"series_count", report.series_count},
               {"single_series", report.single_series},
               {"rows", std::move(rows)}};
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace echosim
