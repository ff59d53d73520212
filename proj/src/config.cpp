#include "nf/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nf/dataset.hpp"

namespace nf::cfg {

using nlohmann::json;

namespace {

constexpr const char* kDefaultConfig = R"json({
  "seed": 1,
  "vehicle": {
    "mass": 2.5,
    "inertia_diag": [0.08, 0.08, 0.14],
    "thrust_max": 54.0,
    "torque_max": 5.0,
    "att_kp": 100.0,
    "att_kd": 20.0,
    "motor_time_constant": 0.03,
    "arm_length": 0.20,
    "yaw_torque_coeff": 0.02
  },
  "residual": {
    "linear_drag_diag": [0.25, 0.25, 0.40],
    "quad_drag": 0.05,
    "attitude_coupling": 0.3,
    "rotor_coupling": 0.2,
    "noise_sigma": 0.05
  },
  "gains": {
    "lambda_pos": 3.0,
    "q": 0.1,
    "lambda": 0.01,
    "filter_cutoff_hz": 5.0,
    "l1_bandwidth": 10.0
  },
  "trajectory": {
    "type": "figure8",
    "width": 2.5,
    "height": 1.5,
    "period": 6.28,
    "center": [0.0, 0.0, 1.5]
  },
  "collect": {
    "speeds": [0.0, 1.3, 2.5, 3.7, 4.9, 6.1],
    "heading_deg": 0.0,
    "duration_s": 120.0,
    "val_duration_s": 30.0,
    "bounds_lo": [-1.5, -1.5, 0.8],
    "bounds_hi": [1.5, 1.5, 2.2],
    "segment_duration": [3.0, 5.0]
  },
  "daiml": {
    "alpha": 0.1,
    "eta": 0.5,
    "gamma": 10.0,
    "damping": 1e-6,
    "batch_adapt": 128,
    "batch_train": 256,
    "lr_phi": 0.0005,
    "lr_h": 0.001,
    "momentum": 0.9,
    "epochs": 500,
    "patience": 50,
    "phi_hidden": [50, 60, 50],
    "phi_output": 4,
    "h_hidden": [128],
    "spectral_bound": 1.0
  },
  "bench": {
    "winds": [
      {"kind": "constant", "speed": 0.0},
      {"kind": "constant", "speed": 4.2},
      {"kind": "constant", "speed": 8.5},
      {"kind": "constant", "speed": 12.1},
      {"kind": "sinusoidal", "speed": 8.5, "amplitude": 2.4, "angular_freq": 1.0}
    ],
    "heading_deg": 0.0,
    "controllers": ["nonlinear", "indi", "l1", "nf-constant", "nf"],
    "seeds": [1, 2, 3, 4, 5],
    "warmup_laps": 1,
    "laps": 6
  },
  "out_dir": "nf_out"
})json";

/// Field access with path-tagged errors.
class Cursor {
 public:
  Cursor(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  bool has(const std::string& key) const {
    return node_->is_object() && node_->contains(key);
  }

  Cursor child(const std::string& key) const {
    if (!node_->is_object() || !node_->contains(key)) {
      throw ConfigError("config error at " + join(key) + ": missing field");
    }
    return Cursor((*node_)[key], join(key));
  }

  Cursor item(std::size_t i) const {
    if (!node_->is_array() || i >= node_->size()) {
      throw ConfigError("config error at " + path_ + "[" + std::to_string(i) +
                        "]: missing element");
    }
    return Cursor((*node_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t size() const {
    if (!node_->is_array()) {
      throw ConfigError("config error at " + path_ + ": expected array");
    }
    return node_->size();
  }

  double num() const {
    if (!node_->is_number()) {
      throw ConfigError("config error at " + path_ + ": expected number");
    }
    return node_->get<double>();
  }

  int integer() const {
    if (!node_->is_number_integer()) {
      throw ConfigError("config error at " + path_ + ": expected integer");
    }
    return node_->get<int>();
  }

  std::string str() const {
    if (!node_->is_string()) {
      throw ConfigError("config error at " + path_ + ": expected string");
    }
    return node_->get<std::string>();
  }

  Vec3 vec3() const {
    if (!node_->is_array() || node_->size() != 3) {
      throw ConfigError("config error at " + path_ + ": expected [x, y, z]");
    }
    return Vec3(item(0).num(), item(1).num(), item(2).num());
  }

  double num_or(const std::string& key, double fallback) const {
    return has(key) ? child(key).num() : fallback;
  }
  int int_or(const std::string& key, int fallback) const {
    return has(key) ? child(key).integer() : fallback;
  }
  std::string str_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? child(key).str() : fallback;
  }
  Vec3 vec3_or(const std::string& key, const Vec3& fallback) const {
    return has(key) ? child(key).vec3() : fallback;
  }

  const json& raw() const { return *node_; }
  const std::string& path() const { return path_; }

 private:
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  const json* node_;
  std::string path_;
};

Vec3 heading_vector(double heading_deg, double speed) {
  const double rad = heading_deg * M_PI / 180.0;
  return speed * Vec3(std::cos(rad), std::sin(rad), 0.0);
}

wind::WindCondition parse_wind(const Cursor& c, double heading_deg, int label) {
  const std::string kind = c.child("kind").str();
  const double speed = c.child("speed").num();
  if (speed < 0 || speed > 15.0) {
    throw ConfigError("config error at " + c.path() +
                      ".speed: must be in [0, 15] m/s");
  }
  const double heading = c.num_or("heading_deg", heading_deg);
  if (kind == "constant") {
    return wind::WindCondition::constant(heading_vector(heading, speed), label);
  }
  if (kind == "sinusoidal") {
    return wind::WindCondition::sinusoidal(
        heading_vector(heading, speed), c.child("amplitude").num(),
        c.num_or("angular_freq", 1.0), label);
  }
  throw ConfigError("config error at " + c.path() +
                    ".kind: expected 'constant' or 'sinusoidal'");
}

}  // namespace

const char* default_config_json() { return kDefaultConfig; }

ctrl::ControllerGains ExperimentConfig::make_gains(int n_params) const {
  ctrl::ControllerGains g = ctrl::ControllerGains::defaults(
      vehicle, residual, n_params);
  if (gains.k > 0) g.K = gains.k * Mat3::Identity();
  g.Lambda = gains.lambda_pos * Mat3::Identity();
  if (gains.k_i > 0) g.K_I = gains.k_i;
  g.Q = gains.q * Eigen::MatrixXd::Identity(n_params, n_params);
  const double r = gains.r > 0
                       ? gains.r
                       : std::max(residual.noise_sigma * residual.noise_sigma,
                                  1e-6);
  g.R = r * Mat3::Identity();
  g.lambda = gains.lambda;
  g.filter_cutoff_hz = gains.filter_cutoff_hz;
  g.l1_bandwidth = gains.l1_bandwidth;
  g.validate();
  return g;
}

std::uint64_t ExperimentConfig::hash() const {
  std::ostringstream os;
  os << seed << "|" << vehicle.mass << "|" << vehicle.thrust_max << "|"
     << residual.linear_drag.diagonal().transpose() << "|"
     << residual.quad_drag << "|" << residual.attitude_coupling << "|"
     << residual.rotor_coupling << "|" << residual.noise_sigma << "|"
     << collect.duration_per_condition << "|" << collect.conditions.size()
     << "|" << fig8_width << "x" << fig8_height << "/" << fig8_period;
  for (const auto& w : collect.conditions) {
    os << "|" << w.base_velocity.transpose();
  }
  return data::fnv1a_hash(os.str());
}

ExperimentConfig load_config(const std::string& path_or_default) {
  json doc;
  if (path_or_default.empty() || path_or_default == "default") {
    doc = json::parse(kDefaultConfig);
  } else {
    std::ifstream in(path_or_default);
    if (!in) throw IoFailure("cannot open config " + path_or_default);
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw ConfigError("config parse error in " + path_or_default + ": " +
                        e.what());
    }
  }

  ExperimentConfig out;
  const Cursor root(doc, "");
  out.seed = static_cast<std::uint64_t>(root.int_or("seed", 1));

  if (root.has("vehicle")) {
    const Cursor v = root.child("vehicle");
    out.vehicle.mass = v.num_or("mass", out.vehicle.mass);
    if (v.has("inertia_diag")) {
      out.vehicle.inertia = v.child("inertia_diag").vec3().asDiagonal();
    }
    out.vehicle.gravity = v.vec3_or("gravity", out.vehicle.gravity);
    out.vehicle.thrust_max = v.num_or("thrust_max", out.vehicle.thrust_max);
    out.vehicle.torque_max = v.num_or("torque_max", out.vehicle.torque_max);
    out.vehicle.att_kp = v.num_or("att_kp", out.vehicle.att_kp);
    out.vehicle.att_kd = v.num_or("att_kd", out.vehicle.att_kd);
    out.vehicle.motor_time_constant =
        v.num_or("motor_time_constant", out.vehicle.motor_time_constant);
    out.vehicle.arm_length = v.num_or("arm_length", out.vehicle.arm_length);
    out.vehicle.yaw_torque_coeff =
        v.num_or("yaw_torque_coeff", out.vehicle.yaw_torque_coeff);
  }
  out.vehicle.validate();

  if (root.has("residual")) {
    const Cursor r = root.child("residual");
    if (r.has("linear_drag_diag")) {
      out.residual.linear_drag = r.child("linear_drag_diag").vec3().asDiagonal();
    }
    out.residual.quad_drag = r.num_or("quad_drag", out.residual.quad_drag);
    out.residual.attitude_coupling =
        r.num_or("attitude_coupling", out.residual.attitude_coupling);
    out.residual.rotor_coupling =
        r.num_or("rotor_coupling", out.residual.rotor_coupling);
    out.residual.noise_sigma = r.num_or("noise_sigma", out.residual.noise_sigma);
    if (out.residual.noise_sigma < 0) {
      throw ConfigError("config error at residual.noise_sigma: must be >= 0");
    }
  }

  if (root.has("gains")) {
    const Cursor g = root.child("gains");
    out.gains.k = g.num_or("k", out.gains.k);
    out.gains.lambda_pos = g.num_or("lambda_pos", out.gains.lambda_pos);
    out.gains.k_i = g.num_or("k_i", out.gains.k_i);
    out.gains.q = g.num_or("q", out.gains.q);
    out.gains.r = g.num_or("r", out.gains.r);
    out.gains.lambda = g.num_or("lambda", out.gains.lambda);
    out.gains.filter_cutoff_hz =
        g.num_or("filter_cutoff_hz", out.gains.filter_cutoff_hz);
    out.gains.l1_bandwidth = g.num_or("l1_bandwidth", out.gains.l1_bandwidth);
  }

  if (root.has("trajectory")) {
    const Cursor t = root.child("trajectory");
    const std::string type = t.str_or("type", "figure8");
    if (type != "figure8") {
      throw ConfigError("config error at trajectory.type: only 'figure8' is supported");
    }
    out.fig8_width = t.num_or("width", out.fig8_width);
    out.fig8_height = t.num_or("height", out.fig8_height);
    out.fig8_period = t.num_or("period", out.fig8_period);
    out.fig8_center = t.vec3_or("center", out.fig8_center);
  }

  // Collection settings.
  out.collect.seed = out.seed;
  if (root.has("collect")) {
    const Cursor c = root.child("collect");
    const double heading = c.num_or("heading_deg", 0.0);
    if (c.has("speeds")) {
      const Cursor speeds = c.child("speeds");
      for (std::size_t i = 0; i < speeds.size(); ++i) {
        const double s = speeds.item(i).num();
        out.collect.conditions.push_back(wind::WindCondition::constant(
            heading_vector(heading, s), static_cast<int>(i)));
      }
    }
    out.collect.duration_per_condition =
        c.num_or("duration_s", out.collect.duration_per_condition);
    out.collect.val_duration = c.num_or("val_duration_s", out.collect.val_duration);
    out.collect.bounds.lo = c.vec3_or("bounds_lo", out.collect.bounds.lo);
    out.collect.bounds.hi = c.vec3_or("bounds_hi", out.collect.bounds.hi);
    if (c.has("segment_duration")) {
      const Cursor sd = c.child("segment_duration");
      if (sd.size() != 2) {
        throw ConfigError("config error at collect.segment_duration: expected [lo, hi]");
      }
      out.collect.segment_duration_lo = sd.item(0).num();
      out.collect.segment_duration_hi = sd.item(1).num();
    }
  }
  if (out.collect.conditions.empty()) {
    const double speeds[] = {0.0, 1.3, 2.5, 3.7, 4.9, 6.1};
    for (int i = 0; i < 6; ++i) {
      out.collect.conditions.push_back(wind::WindCondition::constant(
          heading_vector(0.0, speeds[i]), i));
    }
  }
  out.collect.fig8_width = out.fig8_width;
  out.collect.fig8_height = out.fig8_height;
  out.collect.fig8_period = out.fig8_period;
  out.collect.fig8_center = out.fig8_center;

  // Training settings.
  out.daiml.seed = out.seed;
  if (root.has("daiml")) {
    const Cursor d = root.child("daiml");
    out.daiml.alpha = d.num_or("alpha", out.daiml.alpha);
    out.daiml.eta = d.num_or("eta", out.daiml.eta);
    out.daiml.gamma = d.num_or("gamma", out.daiml.gamma);
    out.daiml.damping = d.num_or("damping", out.daiml.damping);
    out.daiml.batch_adapt = d.int_or("batch_adapt", out.daiml.batch_adapt);
    out.daiml.batch_train = d.int_or("batch_train", out.daiml.batch_train);
    out.daiml.lr_phi = d.num_or("lr_phi", out.daiml.lr_phi);
    out.daiml.lr_h = d.num_or("lr_h", out.daiml.lr_h);
    out.daiml.momentum = d.num_or("momentum", out.daiml.momentum);
    out.daiml.epochs = d.int_or("epochs", out.daiml.epochs);
    out.daiml.patience = d.int_or("patience", out.daiml.patience);
    out.daiml.spectral_bound = d.num_or("spectral_bound", out.daiml.spectral_bound);
    if (d.has("phi_hidden")) {
      std::vector<int> dims{data::kInputDim};
      const Cursor ph = d.child("phi_hidden");
      for (std::size_t i = 0; i < ph.size(); ++i) {
        dims.push_back(ph.item(i).integer());
      }
      dims.push_back(d.int_or("phi_output", 4));
      out.daiml.phi_dims = dims;
    }
    if (d.has("h_hidden")) {
      std::vector<int> dims;
      const Cursor hh = d.child("h_hidden");
      for (std::size_t i = 0; i < hh.size(); ++i) {
        dims.push_back(hh.item(i).integer());
      }
      out.daiml.h_hidden = dims;
    }
  }

  // Benchmark settings.
  if (root.has("bench")) {
    const Cursor b = root.child("bench");
    const double heading = b.num_or("heading_deg", 0.0);
    if (b.has("winds")) {
      const Cursor winds = b.child("winds");
      for (std::size_t i = 0; i < winds.size(); ++i) {
        out.bench_winds.push_back(
            parse_wind(winds.item(i), heading, static_cast<int>(i)));
      }
    }
    if (b.has("controllers")) {
      const Cursor cs = b.child("controllers");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        out.controllers.push_back(cs.item(i).str());
      }
    }
    if (b.has("seeds")) {
      const Cursor ss = b.child("seeds");
      for (std::size_t i = 0; i < ss.size(); ++i) {
        out.bench_seeds.push_back(
            static_cast<std::uint64_t>(ss.item(i).integer()));
      }
    }
    out.warmup_laps = b.int_or("warmup_laps", out.warmup_laps);
    out.laps = b.int_or("laps", out.laps);
  }
  if (out.bench_winds.empty()) {
    const double speeds[] = {0.0, 4.2, 8.5, 12.1};
    for (int i = 0; i < 4; ++i) {
      out.bench_winds.push_back(
          wind::WindCondition::constant(heading_vector(0.0, speeds[i]), i));
    }
    out.bench_winds.push_back(wind::WindCondition::sinusoidal(
        heading_vector(0.0, 8.5), 2.4, 1.0, 4));
  }
  if (out.controllers.empty()) {
    out.controllers = {"nonlinear", "indi", "l1", "nf-constant", "nf"};
  }
  if (out.bench_seeds.empty()) out.bench_seeds = {1, 2, 3, 4, 5};
  if (out.warmup_laps < 0 || out.laps < 1) {
    throw ConfigError("config error at bench: warmup_laps >= 0 and laps >= 1 required");
  }

  out.out_dir = root.str_or("out_dir", out.out_dir);
  out.collect.config_hash = out.hash();
  return out;
}

}  // namespace nf::cfg
