#ifndef NF_WIND_HPP
#define NF_WIND_HPP

#include <string>

#include "nf/core.hpp"

namespace nf::wind {

/// Hidden environment parameter: a spatially uniform wind-velocity profile,
/// either constant or sinusoidally modulated along a fixed heading.
struct WindCondition {
  enum class Kind { Constant, Sinusoidal };

  Kind kind = Kind::Constant;
  Vec3 base_velocity = Vec3::Zero();  // m/s
  double amplitude = 0.0;             // m/s, Sinusoidal only
  double angular_freq = 1.0;          // rad/s, Sinusoidal only
  int label = 0;                      // condition index k

  static WindCondition constant(const Vec3& v, int label = 0);
  static WindCondition sinusoidal(const Vec3& base, double amplitude,
                                  double angular_freq, int label = 0);

  /// Human-readable tag for reports, e.g. "4.2" or "8.5+2.4sin(t)".
  std::string describe() const;
};

/// Wind velocity at time t (m/s).
/// Constant: base_velocity. Sinusoidal: speed varies as
/// ||base|| + amplitude*sin(angular_freq*t) along the base direction.
/// Throws DegenerateDirection for a sinusoid with zero base velocity.
Vec3 wind_velocity(const WindCondition& cond, double t);

}  // namespace nf::wind

#endif  // NF_WIND_HPP
