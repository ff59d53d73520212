// Test-only oracles kept independent of the library implementation paths
// they check.
#ifndef NF_TESTS_SUPPORT_HPP
#define NF_TESTS_SUPPORT_HPP

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "nf/core.hpp"

namespace nf::test {

/// Second-order dual number: carries value, first and second derivative.
/// Evaluating a polynomial with Dual2{tau, 1, 0} yields p, p', p''.
struct Dual2 {
  double v = 0, d1 = 0, d2 = 0;

  Dual2 operator+(const Dual2& o) const { return {v + o.v, d1 + o.d1, d2 + o.d2}; }
  Dual2 operator*(const Dual2& o) const {
    return {v * o.v, d1 * o.v + v * o.d1, d2 * o.v + 2 * d1 * o.d1 + v * o.d2};
  }
  Dual2 operator*(double c) const { return {v * c, d1 * c, d2 * c}; }
  Dual2 operator+(double c) const { return {v + c, d1, d2}; }
};

inline Dual2 eval_poly_dual(const Eigen::Matrix<double, 8, 1>& coeffs,
                            double tau) {
  Dual2 x{tau, 1.0, 0.0};
  Dual2 acc{coeffs[7], 0.0, 0.0};
  for (int k = 6; k >= 0; --k) {
    acc = acc * x + coeffs[k];
  }
  return acc;
}

/// Central finite-difference gradient of a scalar function of a parameter
/// vector accessed through get/set callbacks.
inline double central_difference(const std::function<double()>& eval,
                                 double& param, double h) {
  const double saved = param;
  param = saved + h;
  const double up = eval();
  param = saved - h;
  const double down = eval();
  param = saved;
  return (up - down) / (2.0 * h);
}

/// Relative error with a floor guarding near-zero gradient pairs.
inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), floor);
}

/// Least-squares fit of log(e - b) over a window: returns the decay rate of
/// A exp(-alpha t) + b fitted to a positive series with known floor b.
inline double fit_decay_rate(const std::vector<double>& t,
                             const std::vector<double>& e, double floor) {
  double sum_t = 0, sum_y = 0, sum_tt = 0, sum_ty = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = e[i] - floor;
    if (v <= 1e-9) continue;
    const double y = std::log(v);
    sum_t += t[i];
    sum_y += y;
    sum_tt += t[i] * t[i];
    sum_ty += t[i] * y;
    ++n;
  }
  if (n < 3) return 0.0;
  const double denom = n * sum_tt - sum_t * sum_t;
  if (std::abs(denom) < 1e-12) return 0.0;
  return -(n * sum_ty - sum_t * sum_y) / denom;
}

}  // namespace nf::test

#endif  // NF_TESTS_SUPPORT_HPP
