#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "linecover/metrics.hpp"
#include "linecover/oracle.hpp"
#include "linecover/verify.hpp"

namespace linecover {
namespace {

PositionState state(std::vector<double> v) { return PositionState(std::move(v)); }

// Dense symmetric eigensolve of the F-coordinate Hessian.
double eigen_min_eig(std::size_t n) {
  if (n == 1) return 8.0;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    h(i, i) = (i == 0 || i == h.rows() - 1) ? 6.0 : 4.0;
    if (i > 0) h(i, i - 1) = h(i - 1, i) = -2.0;
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().minCoeff();
}

TEST(PositionStateTest, Invariants) {
  EXPECT_THROW(state({}), std::invalid_argument);
  EXPECT_THROW(state({0.5, 0.4}), std::invalid_argument);
  EXPECT_THROW(state({-0.1}), std::invalid_argument);
  EXPECT_THROW(state({1.1}), std::invalid_argument);
  const auto x = state({0.2, 0.2, 0.9});
  EXPECT_EQ(x.left_of(0), 0.0);
  EXPECT_EQ(x.right_of(2), 1.0);
  EXPECT_EQ(x.right_of(0), 0.2);
}

TEST(CoveragePhiTest, Examples) {
  const auto c = DensityField::constant(1.0);
  EXPECT_DOUBLE_EQ(coverage_phi(state({0.25, 0.75}), c), 0.25);
  EXPECT_DOUBLE_EQ(coverage_phi(state({0.1, 0.5}), c), 0.5);
  EXPECT_DOUBLE_EQ(coverage_phi(state({0.5}), DensityField::affine(1.0, 1.0)), 0.875);
}

TEST(CoveragePhiTest, GridExamples) {
  const auto c = DensityField::constant(1.0);
  EXPECT_NEAR(coverage_phi_grid(state({0.25, 0.75}), c, 1001), 0.25, 1e-3);
  EXPECT_NEAR(coverage_phi_grid(state({0.1, 0.5}), c, 1001), 0.5, 1e-3);
  EXPECT_NEAR(coverage_phi_grid(state({0.5}), DensityField::affine(1.0, 1.0), 10001), 0.875, 1e-3);
  EXPECT_THROW(coverage_phi_grid(state({0.5}), c, 1), std::invalid_argument);
}

TEST(CoveragePhiTest, ClosedFormMatchesGridOnRandomStates) {
  std::vector<std::size_t> sizes{1, 3, 8};
  const auto res = check_phi_oracle(sizes, standard_fields(), 30, 20000, 99);
  EXPECT_TRUE(res.passed) << res.counterexample;
}

TEST(LyapunovTest, Examples) {
  const auto c = DensityField::constant(1.0);
  EXPECT_NEAR(lyapunov_q(state({0.25, 0.75}), c), 0.5, 1e-15);
  EXPECT_NEAR(lyapunov_q(state({0.5}), c), 1.0, 1e-15);
  EXPECT_NEAR(lyapunov_q(state({0.2, 0.6}), c), 0.56, 1e-15);
}

TEST(LyapunovTest, OptimumValueIsOneOverN) {
  const auto c = DensityField::constant(1.0);
  for (std::size_t n = 1; n <= 20; ++n) {
    EXPECT_NEAR(lyapunov_q(optimal_positions(c, n), c), 1.0 / static_cast<double>(n), 1e-11) << n;
  }
}

TEST(LyapunovTest, OptimumIsUniqueMinimizer) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> kick(0.0, 0.02);
  for (const auto& f : standard_fields()) {
    for (std::size_t n : {1u, 2u, 6u}) {
      const auto x_star = optimal_positions(f, n);
      const double q_star = lyapunov_q(x_star, f);
      for (int i = 0; i < 200; ++i) {
        std::vector<double> v(x_star.begin(), x_star.end());
        for (double& c : v) c = std::clamp(c + kick(rng), 0.0, 1.0);
        std::sort(v.begin(), v.end());
        if (v == std::vector<double>(x_star.begin(), x_star.end())) continue;
        EXPECT_GT(lyapunov_q(state(v), f), q_star) << f.family_name();
      }
    }
  }
}

TEST(GradQTest, Examples) {
  const auto c = DensityField::constant(1.0);
  auto g = grad_q(state({0.25, 0.75}), c);
  EXPECT_NEAR(g[0], 0.0, 1e-15);
  EXPECT_NEAR(g[1], 0.0, 1e-15);
  g = grad_q(state({0.2, 0.6}), c);
  EXPECT_NEAR(g[0], 0.0, 1e-15);
  EXPECT_NEAR(g[1], -0.8, 1e-15);
  g = grad_q(state({0.5}), c);
  EXPECT_NEAR(g[0], 0.0, 1e-15);
}

// Central differences of Q with step 1e-6 at interior states.
std::vector<double> fd_gradient(const PositionState& x, const DensityField& f) {
  constexpr double h = 1e-6;
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::vector<double> up(x.begin(), x.end()), down(x.begin(), x.end());
    up[k] += h;
    down[k] -= h;
    out[k] = (lyapunov_q(state(up), f) - lyapunov_q(state(down), f)) / (2.0 * h);
  }
  return out;
}

// Sorted uniforms resampled until every gap (including the ends) exceeds 1e-4.
PositionState interior_state(std::size_t n, Rng& rng) {
  while (true) {
    auto x = random_state(n, rng);
    bool ok = true;
    for (std::size_t k = 0; k < n; ++k) ok = ok && x[k] - x.left_of(k) > 1e-4;
    if (ok && 1.0 - x[n - 1] > 1e-4) return x;
  }
}

TEST(GradQTest, MatchesFiniteDifferences) {
  Rng rng(17);
  for (const auto& f : standard_fields()) {
    for (int i = 0; i < 100; ++i) {
      const auto x = interior_state(1 + static_cast<std::size_t>(i % 7), rng);
      const auto g = grad_q(x, f);
      const auto fd = fd_gradient(x, f);
      double diff = 0.0, norm = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        diff += (g[k] - fd[k]) * (g[k] - fd[k]);
        norm += fd[k] * fd[k];
      }
      EXPECT_LE(std::sqrt(diff), 1e-5 * std::max(std::sqrt(norm), 1e-3)) << f.family_name();
    }
  }
}

TEST(HessianEigTest, Examples) {
  EXPECT_DOUBLE_EQ(g_hessian_min_eig(1), 8.0);
  EXPECT_NEAR(g_hessian_min_eig(2), 4.0, 1e-12);
  EXPECT_NEAR(g_hessian_min_eig(3), 2.0, 1e-12);
  EXPECT_THROW(g_hessian_min_eig(0), std::invalid_argument);
}

TEST(HessianEigTest, MatchesDenseSolverAndBound) {
  for (std::size_t n = 1; n <= 50; ++n) {
    const double lambda = g_hessian_min_eig(n);
    EXPECT_NEAR(lambda, eigen_min_eig(n), 1e-10) << n;
    EXPECT_GE(lambda, 2.0 / static_cast<double>(n * n)) << n;
  }
}

}  // namespace
}  // namespace linecover
