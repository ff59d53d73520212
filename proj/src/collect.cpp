#include "nf/collect.hpp"

#include <cmath>

#include "nf/runner.hpp"
#include "nf/stencil.hpp"

namespace nf::data {

namespace {

/// Labels one logged flight. Positions and applied forces live on the
/// physics grid; labels are differentiated there and sampled mid-way between
/// control ticks, where the trace is smooth (commands switch at tick
/// boundaries). x carries the rotor signals from the previous control tick.
std::vector<Sample> label_flight(const ctrl::RunResult& run,
                                 const sim::VehicleParams& params,
                                 double noise_sigma, double physics_dt,
                                 int steps_per_tick, int k, Rng rng_noise) {
  const auto& trace = run.physics;
  if (static_cast<int>(trace.size()) < kStencilWidth) {
    throw TooShort("collect: flight trace shorter than the stencil");
  }
  std::vector<Vec3> positions(trace.size()), controls(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    positions[i] = trace[i].p;
    controls[i] = trace[i].u_world;
  }
  const std::vector<Vec3> labels =
      residual_label(positions, controls, physics_dt, params);

  std::vector<Sample> samples;
  const int offset = steps_per_tick / 2;
  const int half_stencil = kStencilWidth / 2;
  for (std::size_t tick = 0;; ++tick) {
    const std::size_t idx = tick * steps_per_tick + offset;
    if (idx + half_stencil >= trace.size()) break;
    const ctrl::PhysicsLog& row = trace[idx];
    const ctrl::PhysicsLog& at_tick = trace[tick * steps_per_tick];
    Sample s;
    s.t = row.t;
    s.k = k;
    s.x = make_input(row.v, row.q, at_tick.pwm);
    s.y = labels[idx] + noise_sigma * rng_noise.normal3();
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace

FlightDataset collect(const CollectConfig& cfg, const sim::Vehicle& vehicle,
                      const sim::ResidualModelParams& residual,
                      const ctrl::ControllerGains& baseline_gains) {
  if (cfg.conditions.size() < 2) {
    throw ConfigError("collect requires at least 2 wind conditions");
  }
  if (!(cfg.duration_per_condition > 0)) {
    throw ConfigError("collect duration must be positive");
  }
  const Rng root(cfg.seed);

  ctrl::RunConfig run_cfg;
  run_cfg.control_dt = 1.0 / cfg.sample_rate_hz;
  run_cfg.log_ticks = false;
  run_cfg.log_physics = true;
  const int steps_per_tick = static_cast<int>(
      std::llround(run_cfg.control_dt / run_cfg.physics_dt));

  FlightDataset ds;
  ds.meta.seed = cfg.seed;
  ds.meta.rate_hz = cfg.sample_rate_hz;
  ds.meta.config_hash = cfg.config_hash;

  for (std::size_t k = 0; k < cfg.conditions.size(); ++k) {
    const Rng rng_k = root.derive(k);
    Rng rng_traj = rng_k.derive(0);

    // Training flight: random spline under this condition.
    const Vec3 start(0.0, 0.0,
                     0.5 * (cfg.bounds.lo.z() + cfg.bounds.hi.z()));
    const auto spline = traj::PiecewiseSplineTrajectory::random(
        cfg.bounds, start, cfg.segment_duration_lo, cfg.segment_duration_hi,
        cfg.duration_per_condition, rng_traj);

    ctrl::NonlinearBaseline controller(vehicle.params(), baseline_gains);
    run_cfg.duration = cfg.duration_per_condition;
    const ctrl::RunResult run =
        run_flight(controller, spline,
                   ctrl::WindSchedule::constant(cfg.conditions[k]), vehicle,
                   residual, run_cfg, rng_k.derive(1));
    if (run.diverged) {
      throw SimDiverged("collection flight diverged in condition " +
                        std::to_string(k) + ": " + run.error);
    }
    ds.train.push_back(label_flight(run, vehicle.params(),
                                    residual.noise_sigma, run_cfg.physics_dt,
                                    steps_per_tick, static_cast<int>(k),
                                    rng_k.derive(2)));

    // Validation flight: benchmark figure-8 under the same condition.
    if (cfg.val_duration > 0) {
      const traj::Figure8 fig8(cfg.fig8_width, cfg.fig8_height,
                               cfg.fig8_period, cfg.fig8_center);
      ctrl::NonlinearBaseline val_controller(vehicle.params(), baseline_gains);
      ctrl::RunConfig val_cfg = run_cfg;
      val_cfg.duration = cfg.val_duration;
      const ctrl::RunResult val_run =
          run_flight(val_controller, fig8,
                     ctrl::WindSchedule::constant(cfg.conditions[k]), vehicle,
                     residual, val_cfg, rng_k.derive(3));
      if (val_run.diverged) {
        throw SimDiverged("validation flight diverged in condition " +
                          std::to_string(k) + ": " + val_run.error);
      }
      ds.validation.push_back(
          label_flight(val_run, vehicle.params(), residual.noise_sigma,
                       run_cfg.physics_dt, steps_per_tick,
                       static_cast<int>(k), rng_k.derive(4)));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace nf::data
