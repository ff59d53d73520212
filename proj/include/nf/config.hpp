#ifndef NF_CONFIG_HPP
#define NF_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nf/collect.hpp"
#include "nf/controllers.hpp"
#include "nf/daiml.hpp"
#include "nf/sim.hpp"
#include "nf/wind.hpp"

namespace nf::cfg {

/// Scalar gain knobs from the config file; expanded into ControllerGains
/// per controller (the adaptation dimension differs between variants).
struct GainSettings {
  double k = -1;           // N s/m; <0 means derive from vehicle mass
  double lambda_pos = 3.0; // 1/s
  double k_i = -1;         // N/m; <0 means derive from vehicle mass
  double q = 0.1;
  double r = -1;           // <0 means noise_sigma^2
  double lambda = 0.01;
  double filter_cutoff_hz = 5.0;
  double l1_bandwidth = 10.0;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  sim::VehicleParams vehicle;
  sim::ResidualModelParams residual;
  GainSettings gains;

  // Benchmark trajectory.
  double fig8_width = 2.5;
  double fig8_height = 1.5;
  double fig8_period = 6.28;
  Vec3 fig8_center = Vec3(0, 0, 1.5);

  data::CollectConfig collect;
  daiml::DaimlConfig daiml;

  std::vector<wind::WindCondition> bench_winds;
  std::vector<std::string> controllers;
  std::vector<std::uint64_t> bench_seeds;
  int warmup_laps = 1;
  int laps = 6;

  std::string out_dir = "nf_out";

  std::string dataset_dir() const { return out_dir + "/dataset"; }
  std::string checkpoint_path() const { return out_dir + "/phi.json"; }
  std::string training_log_path() const { return out_dir + "/training_log.csv"; }

  ctrl::ControllerGains make_gains(int n_params) const;

  /// Stable hash of the canonical serialized form (dataset provenance).
  std::uint64_t hash() const;
};

/// Parses a config file; "default" (or empty) loads the bundled defaults.
/// Schema violations are reported with their field path.
ExperimentConfig load_config(const std::string& path_or_default);

/// The bundled default configuration (JSON text).
const char* default_config_json();

}  // namespace nf::cfg

#endif  // NF_CONFIG_HPP
