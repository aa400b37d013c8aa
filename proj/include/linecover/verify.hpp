#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "linecover/density.hpp"
#include "linecover/metrics.hpp"
#include "linecover/oracle.hpp"
#include "linecover/protocol.hpp"
#include "linecover/table.hpp"

namespace linecover {

// Invariant suites behind `linecover verify` and the acceptance tests.

using StepFunction = std::function<std::vector<double>(
    const PositionState&, const DensityField&, const NoiseModel&, double, Rng&)>;

inline std::vector<double> reference_step(const PositionState& x,
                                          const DensityField& field,
                                          const NoiseModel& noise, double alpha,
                                          Rng& rng) {
  const auto samples = measure(x, field, noise, rng);
  return updated_positions(x, samples, field.rho_max(), noise.bound(), alpha);
}

// One field per family, each with rho >= 1.
inline std::vector<DensityField> standard_fields() {
  return {DensityField::constant(1.0), DensityField::affine(1.0, 1.0),
          DensityField::piecewise_linear({0.0, 0.3, 0.7, 1.0}, {1.0, 2.5, 1.2, 1.8}),
          DensityField::bump(2.0, 0.5, 0.1)};
}

inline std::vector<NoiseModel> standard_noises() {
  return {NoiseModel::zero(), NoiseModel::uniform(0.5), NoiseModel::bernoulli(0.5),
          NoiseModel::uniform(1.0)};
}

// Sorted uniforms.
inline PositionState random_state(std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (double& v : x) v = unit_uniform(rng);
  std::sort(x.begin(), x.end());
  return PositionState(std::move(x));
}

// Sorted uniforms mixed with coincident agents and agents pinned at 0 or 1,
// to reach the degenerate-gap corners.
inline PositionState random_fuzz_state(std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (double& v : x) {
    const double mode = unit_uniform(rng);
    if (mode < 0.1) {
      v = 0.0;
    } else if (mode < 0.2) {
      v = 1.0;
    } else {
      v = unit_uniform(rng);
    }
  }
  std::sort(x.begin(), x.end());
  for (std::size_t i = 1; i < n; ++i) {
    if (unit_uniform(rng) < 0.15) x[i] = x[i - 1];
  }
  return PositionState(std::move(x));
}

inline std::string describe(std::span<const double> v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_number(v[i]);
  }
  return out + ")";
}

struct SuiteResult {
  std::string name;
  bool passed = true;
  bool extension = false;  // exercised n == 1
  std::uint64_t checks = 0;
  std::string counterexample;
};

inline bool has_single_agent(std::span<const std::size_t> sizes) {
  return std::find(sizes.begin(), sizes.end(), std::size_t{1}) != sizes.end();
}

// Ordering, [0, 1] containment and move size <= max adjacent gap / 4 after
// every fuzzed step.
inline SuiteResult check_order_preservation(std::span<const std::size_t> sizes,
                                            const std::vector<DensityField>& fields,
                                            const std::vector<NoiseModel>& noises,
                                            std::uint64_t steps_per_case,
                                            std::uint64_t seed,
                                            const StepFunction& step = reference_step) {
  SuiteResult res{"order-preservation", true, has_single_agent(sizes), 0, {}};
  std::uint64_t case_index = 0;
  for (std::size_t n : sizes) {
    for (const auto& field : fields) {
      for (const auto& noise : noises) {
        const std::uint64_t case_seed = seed + case_index++;
        Rng rng(case_seed);
        for (std::uint64_t s = 0; s < steps_per_case; ++s) {
          const PositionState x = random_fuzz_state(n, rng);
          const double alpha = unit_uniform(rng);
          const auto next = step(x, field, noise, alpha, rng);
          ++res.checks;
          bool ok = PositionState::is_valid(next);
          for (std::size_t k = 0; ok && k < n; ++k) {
            const double gap = std::max(x[k] - x.left_of(k), x.right_of(k) - x[k]);
            ok = std::abs(next[k] - x[k]) <= 0.25 * gap * (1.0 + 1e-12) + 1e-300;
          }
          if (!ok) {
            res.passed = false;
            std::ostringstream os;
            os << "n=" << n << " field=" << field.family_name()
               << " noise=" << noise.kind_name() << " seed=" << case_seed
               << " step=" << s << " alpha=" << format_number(alpha)
               << " x=" << describe(x.values()) << " -> " << describe(next);
            res.counterexample = os.str();
            return res;
          }
        }
      }
    }
  }
  return res;
}

// ||Q'||^2 / (Q - Q*) >= 4 / n^2 at random monotone states.
inline SuiteResult check_gradient_ratio(std::span<const std::size_t> sizes,
                                        const std::vector<DensityField>& fields,
                                        std::uint64_t states, std::uint64_t seed) {
  SuiteResult res{"gradient-ratio", true, has_single_agent(sizes), 0, {}};
  Rng rng(seed);
  for (std::size_t n : sizes) {
    for (const auto& field : fields) {
      for (std::uint64_t s = 0; s < states; ++s) {
        const PositionState x = random_state(n, rng);
        const GradientRatio r = gradient_ratio_check(x, field);
        if (r.at_optimum()) continue;
        ++res.checks;
        if (!r.pass) {
          res.passed = false;
          res.counterexample = "n=" + std::to_string(n) + " field=" +
                               std::string(field.family_name()) + " seed=" +
                               std::to_string(seed) + " x=" + describe(x.values()) +
                               " ratio=" + format_number(*r.ratio) +
                               " bound=" + format_number(r.bound);
          return res;
        }
      }
    }
  }
  return res;
}

// Smallest Hessian eigenvalue in F-coordinates >= 2/n^2 for n = 1..max_n and
// the requested sizes; also the boundary quadratic form >= 1/n^2 at random
// unit vectors.
inline SuiteResult check_hessian_bound(std::span<const std::size_t> sizes,
                                       std::size_t max_n,
                                       std::uint64_t unit_vectors,
                                       std::uint64_t seed) {
  SuiteResult res{"hessian-eigenvalue", true, has_single_agent(sizes), 0, {}};
  std::vector<std::size_t> all(sizes.begin(), sizes.end());
  for (std::size_t n = 1; n <= max_n; ++n) all.push_back(n);
  for (std::size_t n : all) {
    const double lambda = g_hessian_min_eig(n);
    const double bound = 2.0 / static_cast<double>(n * n);
    ++res.checks;
    if (lambda < bound) {
      res.passed = false;
      res.counterexample = "n=" + std::to_string(n) + " lambda_min=" +
                           format_number(lambda) + " < " + format_number(bound);
      return res;
    }
  }
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  for (std::size_t n : sizes) {
    std::vector<double> v(n);
    const double bound = 1.0 / static_cast<double>(n * n);
    for (std::uint64_t s = 0; s < unit_vectors; ++s) {
      double norm = 0.0;
      for (double& c : v) {
        c = gauss(rng);
        norm += c * c;
      }
      norm = std::sqrt(norm);
      for (double& c : v) c /= norm;
      ++res.checks;
      if (boundary_quadratic_form(v) < bound) {
        res.passed = false;
        res.counterexample = "n=" + std::to_string(n) + " seed=" +
                             std::to_string(seed) + " v=" + describe(v);
        return res;
      }
    }
  }
  return res;
}

struct UnbiasednessCase {
  DensityField field = DensityField::constant(1.0);
  NoiseModel noise = NoiseModel::zero();
  PositionState x = PositionState({0.5});
};

struct GradientSampleStats {
  std::vector<double> mean;
  std::vector<double> std_err;
  double max_norm_sq = 0.0;  // largest ||g_bar||^2 over all draws
  double norm_bound = 0.0;   // 64 (rho_max + M)^4
};

inline GradientSampleStats sample_gradient_stats(const UnbiasednessCase& c,
                                                 std::uint64_t draws,
                                                 std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = c.x.size();
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  GradientSampleStats out;
  const double s = c.field.rho_max() + c.noise.bound();
  out.norm_bound = 64.0 * s * s * s * s;
  for (std::uint64_t d = 0; d < draws; ++d) {
    const auto g = gradient_estimate(measure(c.x, c.field, c.noise, rng));
    double g2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum[k] += g[k];
      sum_sq[k] += g[k] * g[k];
      g2 += g[k] * g[k];
    }
    out.max_norm_sq = std::max(out.max_norm_sq, g2);
  }
  const double count = static_cast<double>(draws);
  out.mean.resize(n);
  out.std_err.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.mean[k] = sum[k] / count;
    const double var = std::max(0.0, sum_sq[k] / count - out.mean[k] * out.mean[k]);
    out.std_err[k] = std::sqrt(var / count);
  }
  return out;
}

// Index of the first component whose sample mean misses target_scale * Q'(x)
// by more than 4 standard errors (plus a roundoff floor); empty if none.
inline std::optional<std::size_t> first_biased_component(const UnbiasednessCase& c,
                                                         const GradientSampleStats& stats,
                                                         double target_scale) {
  const auto exact = grad_q(c.x, c.field);
  for (std::size_t k = 0; k < exact.size(); ++k) {
    const double target = target_scale * exact[k];
    if (std::abs(stats.mean[k] - target) >
        4.0 * stats.std_err[k] + 1e-9 * (1.0 + std::abs(target))) {
      return k;
    }
  }
  return std::nullopt;
}

inline std::string describe_case(const UnbiasednessCase& c, std::uint64_t seed) {
  std::ostringstream os;
  os << "n=" << c.x.size() << " field=" << c.field.family_name()
     << " noise=" << c.noise.kind_name() << " M=" << format_number(c.noise.bound())
     << " seed=" << seed << " x=" << describe(c.x.values());
  return os.str();
}

// Monte-Carlo mean of g_bar against target_scale * Q'(x), and
// ||g_bar||^2 <= 64 (rho_max + M)^4 on every draw.
inline SuiteResult check_unbiasedness(const std::vector<UnbiasednessCase>& cases,
                                      std::uint64_t draws, std::uint64_t seed,
                                      double target_scale = 1.0) {
  SuiteResult res{"unbiasedness", true, false, 0, {}};
  std::uint64_t case_index = 0;
  for (const auto& c : cases) {
    res.extension = res.extension || c.x.size() == 1;
    const std::uint64_t case_seed = seed + case_index++;
    const auto stats = sample_gradient_stats(c, draws, case_seed);
    res.checks += c.x.size();
    if (stats.max_norm_sq > stats.norm_bound) {
      res.passed = false;
      res.counterexample = describe_case(c, case_seed) + " ||g||^2=" +
                           format_number(stats.max_norm_sq) + " > " +
                           format_number(stats.norm_bound);
      return res;
    }
    if (auto k = first_biased_component(c, stats, target_scale)) {
      res.passed = false;
      res.counterexample = describe_case(c, case_seed) + " component=" +
                           std::to_string(*k + 1) + " mean=" +
                           format_number(stats.mean[*k]) + " target=" +
                           format_number(target_scale * grad_q(c.x, c.field)[*k]) +
                           " se=" + format_number(stats.std_err[*k]);
      return res;
    }
  }
  return res;
}

inline std::vector<UnbiasednessCase> unbiasedness_cases(
    std::span<const std::size_t> sizes, const std::vector<DensityField>& fields,
    const std::vector<NoiseModel>& noises, std::size_t states_per_combo,
    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<UnbiasednessCase> out;
  for (std::size_t n : sizes) {
    for (const auto& field : fields) {
      for (const auto& noise : noises) {
        for (std::size_t s = 0; s < states_per_combo; ++s) {
          out.push_back(UnbiasednessCase{field, noise, random_state(n, rng)});
        }
      }
    }
  }
  return out;
}

// Closed-form Phi against the m-point grid maximum, within 2 F(1) / m.
inline SuiteResult check_phi_oracle(std::span<const std::size_t> sizes,
                                    const std::vector<DensityField>& fields,
                                    std::uint64_t states, std::size_t grid,
                                    std::uint64_t seed) {
  SuiteResult res{"phi-oracle", true, has_single_agent(sizes), 0, {}};
  Rng rng(seed);
  for (std::size_t n : sizes) {
    for (const auto& field : fields) {
      const double tol = 2.0 * field.total_mass() / static_cast<double>(grid);
      for (std::uint64_t s = 0; s < states; ++s) {
        const PositionState x = random_state(n, rng);
        const double closed = coverage_phi(x, field);
        const double brute = coverage_phi_grid(x, field, grid);
        ++res.checks;
        if (std::abs(closed - brute) > tol) {
          res.passed = false;
          res.counterexample = "n=" + std::to_string(n) + " field=" +
                               std::string(field.family_name()) + " x=" +
                               describe(x.values()) + " closed=" +
                               format_number(closed) + " grid=" + format_number(brute);
          return res;
        }
      }
    }
  }
  return res;
}

// Fixed verification constants; `linecover verify` has exactly one meaning.
struct VerifyConstants {
  static constexpr std::uint64_t kSeed = 20240601;
  static constexpr std::uint64_t kFuzzStepsPerCase = 2000;
  static constexpr std::uint64_t kRatioStates = 1000;
  static constexpr std::size_t kHessianMaxN = 50;
  static constexpr std::uint64_t kUnitVectors = 10000;
  static constexpr std::size_t kUnbiasedStatesPerCombo = 2;
  static constexpr std::uint64_t kUnbiasedDraws = 100000;
  static constexpr std::uint64_t kPhiStates = 20;
  static constexpr std::size_t kPhiGrid = 10000;
};

inline std::vector<SuiteResult> run_verify(std::span<const std::size_t> sizes,
                                           const StepFunction& step = reference_step) {
  using C = VerifyConstants;
  const auto fields = standard_fields();
  std::vector<SuiteResult> out;
  out.push_back(check_order_preservation(sizes, fields, standard_noises(),
                                         C::kFuzzStepsPerCase, C::kSeed, step));
  out.push_back(check_gradient_ratio(sizes, fields, C::kRatioStates, C::kSeed + 1));
  out.push_back(check_hessian_bound(sizes, C::kHessianMaxN, C::kUnitVectors, C::kSeed + 2));
  out.push_back(check_unbiasedness(
      unbiasedness_cases(sizes, fields, {NoiseModel::zero(), NoiseModel::uniform(0.5)},
                         C::kUnbiasedStatesPerCombo, C::kSeed + 3),
      C::kUnbiasedDraws, C::kSeed + 4));
  out.push_back(check_phi_oracle(sizes, fields, C::kPhiStates, C::kPhiGrid, C::kSeed + 5));
  return out;
}

}  // namespace linecover
