#include "nf/stencil.hpp"

#include <algorithm>

namespace nf::data {

// B. Fornberg, "Generation of finite difference formulas on arbitrarily
// spaced grids", Math. Comp. 51 (1988). Computes weights for derivatives
// 0..order at x0; we return the row for `order`.
Eigen::VectorXd fd_weights(double x0, const Eigen::VectorXd& grid, int order) {
  const int n = static_cast<int>(grid.size());
  if (order < 0 || n < order + 1) {
    throw TooShort("fd_weights: need at least order+1 grid points");
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, order + 1);
  double c1 = 1.0;
  double c4 = grid[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = grid[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = grid[i] - grid[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        }
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      }
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.col(order);
}

namespace {

// Precomputed 7-point second-derivative weights for evaluation offset
// `pos` in {0..6} within the window, on a unit grid (scale by 1/h^2).
Eigen::Matrix<double, 7, 7> stencil_table() {
  Eigen::Matrix<double, 7, 7> table;
  Eigen::VectorXd grid(7);
  for (int i = 0; i < 7; ++i) grid[i] = i;
  for (int pos = 0; pos < 7; ++pos) {
    table.row(pos) = fd_weights(pos, grid, 2).transpose();
  }
  return table;
}

}  // namespace

std::vector<Vec3> second_derivative(const std::vector<Vec3>& series,
                                    double h) {
  const int n = static_cast<int>(series.size());
  if (n < kStencilWidth) {
    throw TooShort("second_derivative: series shorter than stencil width");
  }
  static const Eigen::Matrix<double, 7, 7> table = stencil_table();
  const double inv_h2 = 1.0 / (h * h);

  std::vector<Vec3> out(n);
  for (int i = 0; i < n; ++i) {
    // Window start so the stencil stays inside the series; interior points
    // land on pos == 3 (the central stencil).
    int start = i - 3;
    if (start < 0) start = 0;
    if (start > n - 7) start = n - 7;
    const int pos = i - start;
    Vec3 acc = Vec3::Zero();
    for (int j = 0; j < 7; ++j) {
      acc += table(pos, j) * series[start + j];
    }
    out[i] = acc * inv_h2;
  }
  return out;
}

Vec3 second_derivative_causal(const std::vector<Vec3>& window, double h) {
  if (static_cast<int>(window.size()) != kStencilWidth) {
    throw TooShort("second_derivative_causal: window must hold 7 samples");
  }
  static const Eigen::Matrix<double, 7, 7> table = stencil_table();
  Vec3 acc = Vec3::Zero();
  for (int j = 0; j < 7; ++j) {
    acc += table(3, j) * window[j];
  }
  return acc / (h * h);
}

std::vector<Vec3> residual_label(const std::vector<Vec3>& positions,
                                 const std::vector<Vec3>& controls_world,
                                 double h,
                                 const sim::VehicleParams& params) {
  if (positions.size() != controls_world.size()) {
    throw DimMismatch("residual_label: positions/controls length mismatch");
  }
  const std::vector<Vec3> qdd = second_derivative(positions, h);
  std::vector<Vec3> y(qdd.size());
  const Vec3 weight = params.mass * params.gravity;
  for (std::size_t i = 0; i < qdd.size(); ++i) {
    y[i] = params.mass * qdd[i] - weight - controls_world[i];
  }
  return y;
}

}  // namespace nf::data
