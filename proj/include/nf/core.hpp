#ifndef NF_CORE_HPP
#define NF_CORE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace nf {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;  // note: constructor order (w,x,y,z), storage (x,y,z,w)

// Error taxonomy. Each named failure mode gets its own type so callers can
// distinguish a bad config from a numerical blow-up.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteState : Error { using Error::Error; };
struct DegenerateDirection : Error { using Error::Error; };
struct DegenerateForce : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct TooShort : Error { using Error::Error; };
struct DimMismatch : Error { using Error::Error; };
struct StaleCache : Error { using Error::Error; };
struct SingularInnovation : Error { using Error::Error; };
struct SchemaMismatch : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };
struct SimDiverged : Error { using Error::Error; };
struct DivergedLoss : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

/// Deterministic random stream. Wraps the fixed-algorithm 64-bit Mersenne
/// twister and converts to uniforms/gaussians with explicit arithmetic, so a
/// (seed, call sequence) pair yields bit-identical values on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), state_(seed) {}

  /// Uniform in [0, 1): top 53 bits of the generator output.
  double uniform() { return static_cast<double>(state_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller. Always consumes exactly two draws
  /// (the polar/rejection form would consume a data-dependent count).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], guards log(0)
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec3 normal3() {
    const double a = normal(), b = normal(), c = normal();
    return Vec3(a, b, c);
  }

  /// Integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  /// Independent child stream; hands each parallel task its own deterministic
  /// sequence regardless of scheduling.
  Rng derive(std::uint64_t stream) const {
    // splitmix64 over (seed, stream)
    std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return Rng(z ^ (z >> 31));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 state_;
};

}  // namespace nf

#endif  // NF_CORE_HPP
