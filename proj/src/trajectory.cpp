#include "nf/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace nf::traj {

Figure8::Figure8(double width, double height, double period_s,
                 const Vec3& center)
    : width_(width), height_(height), period_(period_s), center_(center) {
  if (width <= 0 || height <= 0 || period_s <= 0) {
    throw OutOfRange("figure8 requires positive width/height/period");
  }
}

DesiredState Figure8::at(double t) const {
  const double wx = 2.0 * M_PI / period_;
  const double wz = 2.0 * wx;
  const double ax = 0.5 * width_;
  const double az = 0.5 * height_;
  DesiredState d;
  d.pos_d = center_ + Vec3(ax * std::sin(wx * t), 0.0, az * std::sin(wz * t));
  d.vel_d = Vec3(ax * wx * std::cos(wx * t), 0.0, az * wz * std::cos(wz * t));
  d.acc_d = Vec3(-ax * wx * wx * std::sin(wx * t), 0.0,
                 -az * wz * wz * std::sin(wz * t));
  return d;
}

SplineSegment SplineSegment::rest_to_rest(const Vec3& from, const Vec3& to,
                                          double duration) {
  if (duration <= 0) throw OutOfRange("segment duration must be positive");
  SplineSegment seg;
  seg.duration = duration;
  // Order-7 smoothstep sigma(s) = 35 s^4 - 84 s^5 + 70 s^6 - 20 s^7 has
  // sigma(0)=0, sigma(1)=1 and zero 1st..3rd derivatives at both ends.
  // Per axis: p(tau) = from + (to-from) * sigma(tau/T); coefficients are
  // expressed in tau directly (divide by T^k).
  static const double kSigma[8] = {0, 0, 0, 0, 35.0, -84.0, 70.0, -20.0};
  for (int axis = 0; axis < 3; ++axis) {
    const double delta = to[axis] - from[axis];
    Eigen::Matrix<double, 8, 1> c;
    double tpow = 1.0;
    for (int k = 0; k < 8; ++k) {
      c[k] = kSigma[k] * delta / tpow;
      tpow *= duration;
    }
    c[0] += from[axis];
    seg.coeffs[axis] = c;
  }
  return seg;
}

DesiredState eval_segment(const SplineSegment& seg, double tau) {
  if (tau < 0.0 || tau > seg.duration) {
    throw OutOfRange("eval_segment: tau outside [0, duration]");
  }
  DesiredState d;
  for (int axis = 0; axis < 3; ++axis) {
    const auto& c = seg.coeffs[axis];
    // Horner for p, p', p'' in one sweep.
    double p = 0.0, v = 0.0, a = 0.0;
    for (int k = 7; k >= 0; --k) {
      a = a * tau + 2.0 * v;
      v = v * tau + p;
      p = p * tau + c[k];
    }
    d.pos_d[axis] = p;
    d.vel_d[axis] = v;
    d.acc_d[axis] = a;
  }
  return d;
}

PiecewiseSplineTrajectory::PiecewiseSplineTrajectory(
    std::vector<Vec3> waypoints, std::vector<double> durations)
    : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2 || durations.size() != waypoints_.size() - 1) {
    throw OutOfRange("spline needs n>=2 waypoints and n-1 durations");
  }
  knot_times_.push_back(0.0);
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    segments_.push_back(SplineSegment::rest_to_rest(
        waypoints_[i], waypoints_[i + 1], durations[i]));
    knot_times_.push_back(knot_times_.back() + durations[i]);
  }
}

PiecewiseSplineTrajectory PiecewiseSplineTrajectory::random(
    const Box& bounds, const Vec3& start, double dur_lo, double dur_hi,
    double total_duration, Rng& rng) {
  if (dur_lo <= 0 || dur_hi < dur_lo) throw OutOfRange("bad duration range");
  std::vector<Vec3> wps{start};
  std::vector<double> durs;
  double covered = 0.0;
  while (covered < total_duration) {
    Vec3 p;
    for (int axis = 0; axis < 3; ++axis) {
      p[axis] = rng.uniform(bounds.lo[axis], bounds.hi[axis]);
    }
    const double d = rng.uniform(dur_lo, dur_hi);
    wps.push_back(p);
    durs.push_back(d);
    covered += d;
  }
  return PiecewiseSplineTrajectory(std::move(wps), std::move(durs));
}

DesiredState PiecewiseSplineTrajectory::at(double t) const {
  if (t <= 0.0) return eval_segment(segments_.front(), 0.0);
  if (t >= knot_times_.back()) {
    return eval_segment(segments_.back(), segments_.back().duration);
  }
  // knot_times_ is sorted; find the segment containing t.
  const auto it =
      std::upper_bound(knot_times_.begin(), knot_times_.end(), t);
  const std::size_t idx =
      static_cast<std::size_t>(it - knot_times_.begin()) - 1;
  return eval_segment(segments_[idx], t - knot_times_[idx]);
}

}  // namespace nf::traj
