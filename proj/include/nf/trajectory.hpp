#ifndef NF_TRAJECTORY_HPP
#define NF_TRAJECTORY_HPP

#include <array>
#include <memory>
#include <vector>

#include "nf/core.hpp"

namespace nf::traj {

/// Desired position, velocity and acceleration at one instant.
struct DesiredState {
  Vec3 pos_d = Vec3::Zero();
  Vec3 vel_d = Vec3::Zero();
  Vec3 acc_d = Vec3::Zero();
};

class Trajectory {
 public:
  virtual ~Trajectory() = default;
  virtual DesiredState at(double t) const = 0;
  /// Period of a cyclic trajectory, 0 if aperiodic.
  virtual double period() const { return 0.0; }
};

/// Vertical-plane lemniscate: x runs at the lap period, z at half of it.
///   x(t) = (width/2)  * sin(2*pi*t/T)
///   z(t) = z0 + (height/2) * sin(4*pi*t/T)
class Figure8 final : public Trajectory {
 public:
  Figure8(double width, double height, double period_s,
          const Vec3& center = Vec3(0, 0, 1.5));

  DesiredState at(double t) const override;
  double period() const override { return period_; }

 private:
  double width_, height_, period_;
  Vec3 center_;
};

/// Fixed setpoint (hover).
class ConstantTrajectory final : public Trajectory {
 public:
  explicit ConstantTrajectory(const Vec3& p) : pos_(p) {}
  DesiredState at(double) const override {
    DesiredState d;
    d.pos_d = pos_;
    return d;
  }

 private:
  Vec3 pos_;
};

/// One degree-7 polynomial piece per axis over tau in [0, duration].
/// Boundary conditions: endpoint positions as given, velocity/acceleration/
/// jerk all zero at both ends (rest-to-rest; eight conditions pin degree 7).
struct SplineSegment {
  std::array<Eigen::Matrix<double, 8, 1>, 3> coeffs;  // per axis, ascending powers
  double duration = 0.0;

  static SplineSegment rest_to_rest(const Vec3& from, const Vec3& to,
                                    double duration);
};

/// Horner evaluation of the segment polynomial and its first two derivatives.
/// Throws OutOfRange when tau is outside [0, duration].
DesiredState eval_segment(const SplineSegment& seg, double tau);

/// Chain of rest-to-rest segments between waypoints.
class PiecewiseSplineTrajectory final : public Trajectory {
 public:
  struct Box {
    Vec3 lo, hi;
  };

  PiecewiseSplineTrajectory(std::vector<Vec3> waypoints,
                            std::vector<double> durations);

  /// Random waypoints sampled uniformly inside `bounds`, each segment
  /// duration uniform in `dur_range`, chained until at least
  /// `total_duration` is covered. The first waypoint is `start`.
  static PiecewiseSplineTrajectory random(const Box& bounds, const Vec3& start,
                                          double dur_lo, double dur_hi,
                                          double total_duration, Rng& rng);

  DesiredState at(double t) const override;

  double total_duration() const { return knot_times_.back(); }
  const std::vector<Vec3>& waypoints() const { return waypoints_; }
  const std::vector<double>& knot_times() const { return knot_times_; }
  const std::vector<SplineSegment>& segments() const { return segments_; }

 private:
  std::vector<Vec3> waypoints_;
  std::vector<double> knot_times_;  // size = segments + 1, starts at 0
  std::vector<SplineSegment> segments_;
};

}  // namespace nf::traj

#endif  // NF_TRAJECTORY_HPP
