#ifndef NF_STENCIL_HPP
#define NF_STENCIL_HPP

#include <vector>

#include "nf/core.hpp"
#include "nf/sim.hpp"

namespace nf::data {

/// Finite-difference weights (Fornberg recursion): weights such that
/// sum_i w_i f(grid_i) approximates the `order`-th derivative of f at x0.
Eigen::VectorXd fd_weights(double x0, const Eigen::VectorXd& grid, int order);

/// Width of the differentiation stencils used below.
inline constexpr int kStencilWidth = 7;

/// Second derivative of a uniformly sampled series. Interior points use the
/// 7-point central stencil (order 6); the first/last three points use shifted
/// 7-point stencils of order 5. Throws TooShort for series under 7 samples.
std::vector<Vec3> second_derivative(const std::vector<Vec3>& series, double h);

/// Delay introduced by the causal estimate below, in samples.
inline constexpr int kCausalDelay = kStencilWidth / 2;

/// Causal second-derivative estimate over a trailing window: the central
/// stencil evaluated kCausalDelay samples behind the newest one (the same
/// operator the offline labels use, applied causally, so the online
/// measurement lags by kCausalDelay * h). `window` must hold exactly
/// kStencilWidth samples, oldest first.
Vec3 second_derivative_causal(const std::vector<Vec3>& window, double h);

/// Residual-force labels: y_i = m qdd_i - m g - u_i, with qdd from
/// second_derivative of the position series and u the applied world-frame
/// control force at each sample.
std::vector<Vec3> residual_label(const std::vector<Vec3>& positions,
                                 const std::vector<Vec3>& controls_world,
                                 double h, const sim::VehicleParams& params);

}  // namespace nf::data

#endif  // NF_STENCIL_HPP
