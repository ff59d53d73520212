#ifndef NF_RUNNER_HPP
#define NF_RUNNER_HPP

#include <string>
#include <vector>

#include "nf/controllers.hpp"
#include "nf/sim.hpp"
#include "nf/trajectory.hpp"
#include "nf/wind.hpp"

namespace nf::ctrl {

/// Piecewise wind profile: the condition active at time t is the last entry
/// whose start time is <= t.
struct WindSchedule {
  struct Entry {
    double t_from = 0.0;
    wind::WindCondition cond;
  };
  std::vector<Entry> entries;

  static WindSchedule constant(const wind::WindCondition& cond);
  static WindSchedule step(const wind::WindCondition& before,
                           const wind::WindCondition& after, double t_switch);
  const wind::WindCondition& at(double t) const;
};

struct RunConfig {
  double physics_dt = 1e-3;  // 1 kHz physics
  double control_dt = 0.02;  // 50 Hz control loop
  double duration = 10.0;    // s
  bool log_ticks = true;
  bool log_physics = false;  // fine-grained trace for labeling/export
  double position_sanity_bound = 1e3;  // m; beyond this the run is declared diverged
  double measurement_sanity_n = 100.0;  // N; larger causal estimates are dropped
};

/// Per-control-tick telemetry.
struct TickLog {
  double t = 0.0;
  Vec3 p_err = Vec3::Zero();
  Vec3 s = Vec3::Zero();
  Vec3 f_true = Vec3::Zero();
  Vec3 f_hat = Vec3::Zero();
  Vec3 y_meas = Vec3::Zero();
  bool meas_valid = false;
  double trace_P = 0.0;
  Eigen::VectorXd a_hat;
  Vec3 u_cmd = Vec3::Zero();
};

/// Physics-rate trace row (state sampled at the start of each physics step).
struct PhysicsLog {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Quat q = Quat::Identity();
  Vec3 omega = Vec3::Zero();
  Vec4 pwm = Vec4::Zero();
  Vec3 u_world = Vec3::Zero();  // actual rotor force in world frame
  Vec3 f_true = Vec3::Zero();
};

struct RunResult {
  std::vector<TickLog> ticks;
  std::vector<PhysicsLog> physics;
  bool diverged = false;
  std::string error;
  sim::SimState final_state;
};

/// Closed-loop flight: 50 Hz controller over 1 kHz physics. The controller
/// receives a causal residual-force measurement built from the trailing
/// 50 Hz position window (one-sided stencil), the previously commanded
/// force, and additive gaussian noise at the residual model's noise_sigma.
RunResult run_flight(Controller& controller, const traj::Trajectory& trajectory,
                     const WindSchedule& winds, const sim::Vehicle& vehicle,
                     const sim::ResidualModelParams& residual,
                     const RunConfig& cfg, const Rng& rng,
                     const sim::SimState* initial = nullptr);

/// Telemetry CSV: t, p_err, s, a_hat..., trace_P, f_true, f_hat, y.
void write_telemetry(const std::string& path, const RunResult& result);

/// State-trace CSV at the physics rate: t, p, v, q (scalar first), omega,
/// pwm, f_true, and the noisy measurement y drawn with the given stream.
void write_sim_trace(const std::string& path, const RunResult& result,
                     const sim::ResidualModelParams& residual, Rng rng);

}  // namespace nf::ctrl

#endif  // NF_RUNNER_HPP
