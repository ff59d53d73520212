#ifndef NF_COLLECT_HPP
#define NF_COLLECT_HPP

#include <cstdint>
#include <vector>

#include "nf/controllers.hpp"
#include "nf/dataset.hpp"
#include "nf/trajectory.hpp"
#include "nf/wind.hpp"

namespace nf::data {

struct CollectConfig {
  std::vector<wind::WindCondition> conditions;
  double duration_per_condition = 120.0;  // s of random-spline flight
  double val_duration = 30.0;             // s of benchmark-trajectory flight
  traj::PiecewiseSplineTrajectory::Box bounds = {Vec3(-1.5, -1.5, 0.8),
                                                 Vec3(1.5, 1.5, 2.2)};
  double segment_duration_lo = 3.0;  // s
  double segment_duration_hi = 5.0;  // s
  double sample_rate_hz = 50.0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  // Benchmark trajectory flown for the validation subdatasets.
  double fig8_width = 2.5;
  double fig8_height = 1.5;
  double fig8_period = 6.28;
  Vec3 fig8_center = Vec3(0, 0, 1.5);
};

/// Data-collection flights: for each wind condition, the baseline controller
/// tracks a fresh random spline; states are logged at the physics rate and
/// residual-force labels are recovered by numerical differentiation of the
/// position trace, sampled at 50 Hz between control ticks. A figure-8 flight
/// per condition provides the held-out validation subdataset.
/// Throws SimDiverged if any flight produces a non-finite state.
FlightDataset collect(const CollectConfig& cfg, const sim::Vehicle& vehicle,
                      const sim::ResidualModelParams& residual,
                      const ctrl::ControllerGains& baseline_gains);

}  // namespace nf::data

#endif  // NF_COLLECT_HPP
