#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "linecover/density.hpp"
#include "linecover/metrics.hpp"

namespace linecover {

struct OptimalityReport {
  PositionState x_star;
  double phi_star = 0.0;
  std::vector<double> residuals;
  double tol = 0.0;

  double max_residual() const {
    double r = 0.0;
    for (double v : residuals) r = std::max(r, std::abs(v));
    return r;
  }
};

// The first-order conditions telescope to equal F-gaps d = F(1)/n with half
// gaps at both ends, so F(x_i*) = (2i - 1) F(1) / (2n).
inline PositionState optimal_positions(const DensityField& field, std::size_t n,
                                       double tol = kDefaultInversionTol) {
  if (n == 0) throw std::invalid_argument("agent count must be positive");
  const double total = field.total_mass();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = static_cast<double>(2 * i + 1) * total /
                          static_cast<double>(2 * n);
    x[i] = invert_antiderivative(field, target, tol);
  }
  return PositionState(std::move(x));
}

inline double optimal_phi(const DensityField& field, std::size_t n) {
  if (n == 0) throw std::invalid_argument("agent count must be positive");
  return field.total_mass() / static_cast<double>(2 * n);
}

// Residuals of the stationarity conditions of Q, one per agent. For n == 1 the
// single residual is 2F(x_1) - 2(F(1) - F(x_1)).
inline std::vector<double> first_order_residuals(const PositionState& x,
                                                 const DensityField& field) {
  const std::size_t n = x.size();
  const auto f = masses_at(x, field);
  const double total = field.total_mass();
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double left_gap = f[k] - (k == 0 ? 0.0 : f[k - 1]);
    const double right_gap = (k + 1 == n ? total : f[k + 1]) - f[k];
    const double c_left = k == 0 ? 2.0 : 1.0;
    const double c_right = k + 1 == n ? 2.0 : 1.0;
    r[k] = c_left * left_gap - c_right * right_gap;
  }
  return r;
}

inline OptimalityReport certify_optimum(const DensityField& field, std::size_t n,
                                        double tol = kDefaultInversionTol) {
  PositionState x = optimal_positions(field, n, tol);
  auto residuals = first_order_residuals(x, field);
  const double phi = coverage_phi(x, field);
  return OptimalityReport{std::move(x), phi, std::move(residuals), tol};
}

struct GradientRatio {
  std::optional<double> ratio;  // empty when at the optimum
  double bound = 0.0;
  bool pass = false;

  bool at_optimum() const { return !ratio.has_value(); }
};

inline constexpr double kAtOptimumGap = 1e-12;

// ||Q'(x)||^2 / (Q(x) - Q(x*)) against the lower bound 4/n^2.
inline GradientRatio gradient_ratio_check(const PositionState& x,
                                          const DensityField& field) {
  const std::size_t n = x.size();
  GradientRatio out;
  out.bound = 4.0 / static_cast<double>(n * n);
  const double q_star = lyapunov_q(optimal_positions(field, n), field);
  const double excess = lyapunov_q(x, field) - q_star;
  if (excess < kAtOptimumGap) return out;
  double g2 = 0.0;
  for (double g : grad_q(x, field)) g2 += g * g;
  out.ratio = g2 / excess;
  out.pass = *out.ratio >= out.bound;
  return out;
}

// v_1^2 + sum (v_{i+1} - v_i)^2 + v_n^2; bounded below by 1/n^2 on the unit
// sphere.
inline double boundary_quadratic_form(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = v.front() * v.front() + v.back() * v.back();
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double d = v[i] - v[i - 1];
    s += d * d;
  }
  return s;
}

}  // namespace linecover
