#ifndef NF_BENCH_HPP
#define NF_BENCH_HPP

#include <optional>
#include <string>
#include <vector>

#include "nf/config.hpp"
#include "nf/net.hpp"
#include "nf/runner.hpp"

namespace nf::bench {

/// One (controller, wind, seed) benchmark result. Errors are in cm.
struct Cell {
  int controller = 0;  // index into the report's controller list
  int wind = 0;
  int seed = 0;
  bool ok = false;
  double rms_cm = 0.0;
  double mean_cm = 0.0;
  double fp_rmse_n = 0.0;  // force-prediction RMSE over the scored laps
  double max_a_norm = 0.0;
  std::vector<double> lap_mean_cm;
  std::string error;
};

struct TrackingReport {
  std::vector<std::string> controllers;
  std::vector<std::string> wind_labels;
  std::vector<std::uint64_t> seeds;
  int laps = 6;
  std::vector<Cell> cells;  // ordered (controller, wind, seed)

  const Cell& at(int controller, int wind, int seed) const;
  /// Mean over seeds of a per-cell metric; NaN when every seed diverged.
  double seed_mean(int controller, int wind,
                   double Cell::* metric) const;
  int controller_index(const std::string& name) const;

  void save_csv(const std::string& path) const;
  static TrackingReport load_csv(const std::string& path);
};

/// Full benchmark matrix: warmup + scored laps per cell, parallel across
/// cells with per-cell deterministic random streams, reduced in
/// (controller, wind, seed) order. A diverged cell is reported in place and
/// does not abort the matrix.
TrackingReport run_benchmark(const cfg::ExperimentConfig& config,
                             const net::Mlp* phi, int jobs = 0);

/// Fixed-column text table (method rows, wind columns, RMS and Mean in cm);
/// the per-column minimum mean is starred.
std::string summarize(const TrackingReport& report);

/// Trend checks over the report: the reproducible claims are orderings and
/// monotone tendencies, not absolute values.
struct TrendCheck {
  std::string description;
  bool passed = false;
};
struct TrendResult {
  std::vector<TrendCheck> checks;
  bool all_passed() const;
  std::string render() const;
};
TrendResult check_trends(const TrackingReport& report);

}  // namespace nf::bench

#endif  // NF_BENCH_HPP
