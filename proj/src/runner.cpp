#include "nf/runner.hpp"

#include <cmath>

#include "nf/csv.hpp"
#include "nf/stencil.hpp"

namespace nf::ctrl {

WindSchedule WindSchedule::constant(const wind::WindCondition& cond) {
  WindSchedule s;
  s.entries.push_back({0.0, cond});
  return s;
}

WindSchedule WindSchedule::step(const wind::WindCondition& before,
                                const wind::WindCondition& after,
                                double t_switch) {
  WindSchedule s;
  s.entries.push_back({0.0, before});
  s.entries.push_back({t_switch, after});
  return s;
}

const wind::WindCondition& WindSchedule::at(double t) const {
  if (entries.empty()) throw ConfigError("empty wind schedule");
  const Entry* active = &entries.front();
  for (const Entry& e : entries) {
    if (e.t_from <= t) active = &e;
  }
  return active->cond;
}

RunResult run_flight(Controller& controller,
                     const traj::Trajectory& trajectory,
                     const WindSchedule& winds, const sim::Vehicle& vehicle,
                     const sim::ResidualModelParams& residual,
                     const RunConfig& cfg, const Rng& rng,
                     const sim::SimState* initial) {
  const auto& params = vehicle.params();
  Rng rng_meas = rng.derive(1);

  RunResult result;
  sim::SimState state =
      initial ? *initial : vehicle.hover_state(trajectory.at(0.0).pos_d);
  controller.reset(state);

  const int steps_per_tick =
      static_cast<int>(std::llround(cfg.control_dt / cfg.physics_dt));
  const int n_ticks =
      static_cast<int>(std::llround(cfg.duration / cfg.control_dt));
  if (steps_per_tick < 1) throw ConfigError("control_dt below physics_dt");

  std::vector<Vec3> history;
  history.reserve(data::kStencilWidth);
  std::vector<Vec3> applied_history;  // matches `history` sample for sample
  applied_history.reserve(data::kStencilWidth);
  Quat prev_cmd_q = state.q_att;

  if (cfg.log_physics) {
    result.physics.reserve(static_cast<std::size_t>(n_ticks) * steps_per_tick +
                           1);
  }
  if (cfg.log_ticks) result.ticks.reserve(n_ticks);

  for (int tick = 0; tick < n_ticks; ++tick) {
    const double t = tick * cfg.control_dt;
    const wind::WindCondition& wind_now = winds.at(t);

    // Applied rotor force at this instant, reconstructed the way a real
    // stack would: attitude estimate times the motor-model thrust.
    Measurement meas;
    {
      double thrust_act;
      Vec3 torque_act;
      vehicle.thrust_torque_from_pwm(state.pwm, thrust_act, torque_act);
      meas.u_applied =
          state.q_att.toRotationMatrix() * Vec3(0, 0, thrust_act);
    }

    // Trailing windows at control ticks.
    if (static_cast<int>(history.size()) == data::kStencilWidth) {
      history.erase(history.begin());
      applied_history.erase(applied_history.begin());
    }
    history.push_back(state.p);
    applied_history.push_back(meas.u_applied);

    if (static_cast<int>(history.size()) == data::kStencilWidth) {
      // The causal estimate lags by kCausalDelay ticks; pair it with the
      // force applied at the same instant.
      meas.accel = data::second_derivative_causal(history, cfg.control_dt);
      const Vec3& u_lagged =
          applied_history[applied_history.size() - 1 - data::kCausalDelay];
      meas.y = params.mass * meas.accel - params.mass * params.gravity -
               u_lagged + residual.noise_sigma * rng_meas.normal3();
      // Outlier gate: a causal estimate far outside the physical force
      // range (startup transients, post-divergence thrashing) is dropped
      // rather than fed to the estimators.
      meas.valid = meas.y.norm() <= cfg.measurement_sanity_n;
    }

    const traj::DesiredState desired = trajectory.at(t);
    Vec3 u;
    sim::AttitudeThrustCmd cmd;
    try {
      u = controller.tick(state, desired, meas, cfg.control_dt);
      cmd = force_to_attitude(u, 0.0, params, &prev_cmd_q);
    } catch (const Error& e) {
      result.diverged = true;
      result.error = e.what();
      break;
    }
    prev_cmd_q = cmd.attitude_d;

    if (cfg.log_ticks) {
      TickLog log;
      log.t = t;
      log.p_err = state.p - desired.pos_d;
      log.s = controller.last_s();
      log.f_true = sim::residual_force(state, wind_now, residual);
      log.f_hat = controller.force_estimate();
      log.y_meas = meas.y;
      log.meas_valid = meas.valid;
      log.trace_P = controller.trace_P();
      log.a_hat = controller.a_hat();
      log.u_cmd = u;
      result.ticks.push_back(std::move(log));
    }

    bool failed = false;
    for (int step = 0; step < steps_per_tick; ++step) {
      if (cfg.log_physics) {
        PhysicsLog row;
        row.t = state.t;
        row.p = state.p;
        row.v = state.v;
        row.q = state.q_att;
        row.omega = state.omega;
        row.pwm = state.pwm;
        double thrust;
        Vec3 torque;
        vehicle.thrust_torque_from_pwm(state.pwm, thrust, torque);
        row.u_world = state.q_att.toRotationMatrix() * Vec3(0, 0, thrust);
        row.f_true = sim::residual_force(state, winds.at(state.t), residual);
        result.physics.push_back(std::move(row));
      }
      try {
        state = vehicle.step(state, cmd, winds.at(state.t), residual,
                             cfg.physics_dt);
      } catch (const NonFiniteState& e) {
        result.diverged = true;
        result.error = e.what();
        failed = true;
        break;
      }
      if (state.p.norm() > cfg.position_sanity_bound) {
        result.diverged = true;
        result.error = "position escaped the sanity bound";
        failed = true;
        break;
      }
    }
    if (failed) break;
  }

  result.final_state = state;
  return result;
}

void write_telemetry(const std::string& path, const RunResult& result) {
  const int n_a = result.ticks.empty()
                      ? 0
                      : static_cast<int>(result.ticks.front().a_hat.size());
  std::vector<std::string> header = {"t",       "perr_x", "perr_y", "perr_z",
                                     "s_x",     "s_y",    "s_z",    "ftrue_x",
                                     "ftrue_y", "ftrue_z", "fhat_x", "fhat_y",
                                     "fhat_z",  "y_x",    "y_y",    "y_z",
                                     "trace_P"};
  for (int i = 0; i < n_a; ++i) header.push_back("a_" + std::to_string(i + 1));
  csv::Writer w(path, header);
  std::vector<double> row(header.size());
  for (const TickLog& tl : result.ticks) {
    int c = 0;
    row[c++] = tl.t;
    for (int i = 0; i < 3; ++i) row[c++] = tl.p_err[i];
    for (int i = 0; i < 3; ++i) row[c++] = tl.s[i];
    for (int i = 0; i < 3; ++i) row[c++] = tl.f_true[i];
    for (int i = 0; i < 3; ++i) row[c++] = tl.f_hat[i];
    for (int i = 0; i < 3; ++i) row[c++] = tl.y_meas[i];
    row[c++] = tl.trace_P;
    for (int i = 0; i < n_a; ++i) {
      row[c++] = i < tl.a_hat.size() ? tl.a_hat[i] : 0.0;
    }
    w.row(row);
  }
  w.close();
}

void write_sim_trace(const std::string& path, const RunResult& result,
                     const sim::ResidualModelParams& residual, Rng rng) {
  csv::Writer w(path, {"t",     "p_x",   "p_y",   "p_z",   "v_x",   "v_y",
                       "v_z",   "q_w",   "q_x",   "q_y",   "q_z",   "omega_x",
                       "omega_y", "omega_z", "pwm_1", "pwm_2", "pwm_3", "pwm_4",
                       "ftrue_x", "ftrue_y", "ftrue_z", "y_x", "y_y", "y_z"});
  std::vector<double> row(24);
  for (const PhysicsLog& pl : result.physics) {
    const Vec3 y = pl.f_true + residual.noise_sigma * rng.normal3();
    int c = 0;
    row[c++] = pl.t;
    for (int i = 0; i < 3; ++i) row[c++] = pl.p[i];
    for (int i = 0; i < 3; ++i) row[c++] = pl.v[i];
    row[c++] = pl.q.w();
    row[c++] = pl.q.x();
    row[c++] = pl.q.y();
    row[c++] = pl.q.z();
    for (int i = 0; i < 3; ++i) row[c++] = pl.omega[i];
    for (int i = 0; i < 4; ++i) row[c++] = pl.pwm[i];
    for (int i = 0; i < 3; ++i) row[c++] = pl.f_true[i];
    for (int i = 0; i < 3; ++i) row[c++] = y[i];
    w.row(row);
  }
  w.close();
}

}  // namespace nf::ctrl
