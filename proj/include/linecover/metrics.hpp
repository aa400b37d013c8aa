#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "linecover/density.hpp"

namespace linecover {

// Agent positions 0 <= x_1 <= ... <= x_n <= 1. The virtual endpoints
// x_0 = 0 and x_{n+1} = 1 are implied. Indices are zero-based.
class PositionState {
 public:
  explicit PositionState(std::vector<double> positions)
      : positions_(std::move(positions)) {
    if (positions_.empty()) {
      throw std::invalid_argument("position state needs at least one agent");
    }
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      const double x = positions_[i];
      if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("position " + std::to_string(i + 1) +
                                    " outside [0, 1]: " + std::to_string(x));
      }
      if (i > 0 && x < positions_[i - 1]) {
        throw std::invalid_argument("positions not monotone at agent " +
                                    std::to_string(i + 1));
      }
    }
  }

  static bool is_valid(std::span<const double> positions) {
    if (positions.empty()) return false;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (!(positions[i] >= 0.0 && positions[i] <= 1.0)) return false;
      if (i > 0 && positions[i] < positions[i - 1]) return false;
    }
    return true;
  }

  std::size_t size() const { return positions_.size(); }
  double operator[](std::size_t i) const { return positions_[i]; }
  // Neighbor positions with the virtual endpoints at the boundary.
  double left_of(std::size_t i) const { return i == 0 ? 0.0 : positions_[i - 1]; }
  double right_of(std::size_t i) const {
    return i + 1 == positions_.size() ? 1.0 : positions_[i + 1];
  }
  std::span<const double> values() const { return positions_; }
  auto begin() const { return positions_.begin(); }
  auto end() const { return positions_.end(); }

  friend bool operator==(const PositionState&, const PositionState&) = default;

 private:
  std::vector<double> positions_;
};

// F evaluated at each agent.
inline std::vector<double> masses_at(const PositionState& x,
                                     const DensityField& field) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = field.unchecked_antiderivative(x[i]);
  }
  return out;
}

// In F-coordinates the farthest point of an interior gap is its midpoint, so
// Phi is the larger of the boundary gaps and the half interior gaps.
inline double coverage_phi(const PositionState& x, const DensityField& field) {
  const auto f = masses_at(x, field);
  double phi = std::max(f.front(), field.total_mass() - f.back());
  for (std::size_t i = 1; i < f.size(); ++i) {
    phi = std::max(phi, 0.5 * (f[i] - f[i - 1]));
  }
  return phi;
}

// Brute-force max over an m-point grid of the distance to the nearest agent.
inline double coverage_phi_grid(const PositionState& x,
                                const DensityField& field, std::size_t m) {
  if (m < 2) throw std::invalid_argument("grid size must be at least 2");
  const auto f = masses_at(x, field);
  double phi = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double y = j + 1 == m ? 1.0 : static_cast<double>(j) / static_cast<double>(m - 1);
    const double fy = field.unchecked_antiderivative(y);
    double nearest = HUGE_VAL;
    for (double fx : f) nearest = std::min(nearest, std::abs(fy - fx));
    phi = std::max(phi, nearest);
  }
  return phi;
}

// Q = 2 F(x_1)^2 + sum (F(x_i) - F(x_{i-1}))^2 + 2 (F(1) - F(x_n))^2
inline double lyapunov_q(const PositionState& x, const DensityField& field) {
  const auto f = masses_at(x, field);
  const double tail = field.total_mass() - f.back();
  double q = 2.0 * f.front() * f.front() + 2.0 * tail * tail;
  for (std::size_t i = 1; i < f.size(); ++i) {
    const double gap = f[i] - f[i - 1];
    q += gap * gap;
  }
  return q;
}

inline std::vector<double> grad_q(const PositionState& x,
                                  const DensityField& field) {
  const std::size_t n = x.size();
  const auto f = masses_at(x, field);
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double left_gap = f[k] - (k == 0 ? 0.0 : f[k - 1]);
    const double right_gap = (k + 1 == n ? field.total_mass() : f[k + 1]) - f[k];
    const double c_left = k == 0 ? 4.0 : 2.0;
    const double c_right = k + 1 == n ? 4.0 : 2.0;
    g[k] = field.unchecked_rho(x[k]) * (c_left * left_gap - c_right * right_gap);
  }
  return g;
}

// Smallest eigenvalue of the Hessian of Q in F-coordinates: tridiagonal with
// diagonal (6, 4, ..., 4, 6) and off-diagonal -2; (8) when n == 1.
// Bisection on the Sturm count of the LDL^T pivots.
inline double g_hessian_min_eig(std::size_t n) {
  if (n == 0) throw std::invalid_argument("agent count must be positive");
  if (n == 1) return 8.0;
  auto diag = [n](std::size_t i) { return (i == 0 || i + 1 == n) ? 6.0 : 4.0; };
  constexpr double off_sq = 4.0;
  auto count_below = [&](double lambda) {
    std::size_t count = 0;
    double pivot = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      pivot = diag(i) - lambda - (i == 0 ? 0.0 : off_sq / pivot);
      if (pivot == 0.0) pivot = -1e-300;
      if (pivot < 0.0) ++count;
    }
    return count;
  };
  // Gershgorin: spectrum lies in [0, 10].
  double lo = 0.0;
  double hi = 10.0;
  while (hi - lo > 1e-15 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (count_below(mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace linecover
