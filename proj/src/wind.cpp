#include "nf/wind.hpp"

#include <cmath>
#include <cstdio>

namespace nf::wind {

WindCondition WindCondition::constant(const Vec3& v, int label) {
  WindCondition c;
  c.kind = Kind::Constant;
  c.base_velocity = v;
  c.amplitude = 0.0;
  c.label = label;
  return c;
}

WindCondition WindCondition::sinusoidal(const Vec3& base, double amplitude,
                                        double angular_freq, int label) {
  WindCondition c;
  c.kind = Kind::Sinusoidal;
  c.base_velocity = base;
  c.amplitude = amplitude;
  c.angular_freq = angular_freq;
  c.label = label;
  return c;
}

std::string WindCondition::describe() const {
  char buf[64];
  const double speed = base_velocity.norm();
  if (kind == Kind::Constant) {
    std::snprintf(buf, sizeof(buf), "%.3g", speed);
  } else {
    std::snprintf(buf, sizeof(buf), "%.3g+%.3gsin(%.3gt)", speed, amplitude,
                  angular_freq);
  }
  return buf;
}

Vec3 wind_velocity(const WindCondition& cond, double t) {
  if (cond.kind == WindCondition::Kind::Constant) {
    return cond.base_velocity;
  }
  const double speed = cond.base_velocity.norm();
  if (speed <= 0.0) {
    throw DegenerateDirection(
        "sinusoidal wind requires a nonzero base velocity");
  }
  const Vec3 dir = cond.base_velocity / speed;
  return dir * (speed + cond.amplitude * std::sin(cond.angular_freq * t));
}

}  // namespace nf::wind
