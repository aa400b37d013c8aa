#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "linecover/density.hpp"
#include "linecover/metrics.hpp"

namespace linecover {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of a 64-bit generator. Used
// instead of std::uniform_real_distribution so streams match across
// standard libraries.
template <typename Urbg>
double unit_uniform(Urbg& rng) {
  static_assert(Urbg::min() == 0 &&
                    Urbg::max() == std::numeric_limits<std::uint64_t>::max(),
                "unit_uniform needs a full-range 64-bit generator");
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

enum class NoiseKind { kZero, kUniform, kBernoulli };

// Zero-mean measurement noise with support in [-M, M], M <= 1 so that noisy
// samples of a density >= 1 stay nonnegative.
class NoiseModel {
 public:
  static NoiseModel zero() { return NoiseModel(NoiseKind::kZero, 0.0); }
  static NoiseModel uniform(double m) { return NoiseModel(NoiseKind::kUniform, m); }
  static NoiseModel bernoulli(double m) {
    return NoiseModel(NoiseKind::kBernoulli, m);
  }

  NoiseKind kind() const { return kind_; }
  double bound() const { return m_; }

  std::string_view kind_name() const {
    switch (kind_) {
      case NoiseKind::kZero: return "zero";
      case NoiseKind::kUniform: return "uniform";
      default: return "bernoulli";
    }
  }

  template <typename Urbg>
  double draw(Urbg& rng) const {
    switch (kind_) {
      case NoiseKind::kZero: return 0.0;
      case NoiseKind::kUniform: return m_ * (2.0 * unit_uniform(rng) - 1.0);
      default: return (rng() >> 63) != 0 ? m_ : -m_;
    }
  }

 private:
  NoiseModel(NoiseKind kind, double m) : kind_(kind), m_(m) {
    if (!(m >= 0.0)) throw std::invalid_argument("noise.m must be ≥ 0");
    if (m > 1.0) throw std::invalid_argument("noise.m must be ≤ 1");
  }

  NoiseKind kind_;
  double m_;
};

// alpha(t) = A / (A + t), A = 8 U^2 (rho_max + M)^2
struct TheoremSchedule {
  double u = 1.0;
  double scale = 8.0;
};
// alpha(t) = 1 / (t + 1)^p
struct PowerSchedule {
  double exponent = 1.0;
};
// alpha(t) = 1 for t < T/2, 1/sqrt(t) afterwards
struct HybridSchedule {
  std::uint64_t horizon = 2;
};

class StepSchedule {
 public:
  using Rule = std::variant<TheoremSchedule, PowerSchedule, HybridSchedule>;

  static StepSchedule theorem(double u, double rho_max, double noise_bound) {
    if (!(u >= 1.0)) throw std::invalid_argument("schedule.u must be ≥ 1");
    const double s = rho_max + noise_bound;
    return StepSchedule(TheoremSchedule{u, 8.0 * u * u * s * s});
  }
  static StepSchedule power(double p) {
    if (!(p > 0.5 && p <= 1.0)) {
      throw std::invalid_argument("schedule.p must lie in (1/2, 1]");
    }
    return StepSchedule(PowerSchedule{p});
  }
  static StepSchedule hybrid(std::uint64_t horizon) {
    if (horizon < 2) throw std::invalid_argument("schedule horizon must be ≥ 2");
    return StepSchedule(HybridSchedule{horizon});
  }

  const Rule& rule() const { return rule_; }

 private:
  explicit StepSchedule(Rule r) : rule_(r) {}
  Rule rule_;
};

inline double alpha_at(const StepSchedule& schedule, std::uint64_t t) {
  const double td = static_cast<double>(t);
  struct Visitor {
    double td;
    std::uint64_t t;
    double operator()(const TheoremSchedule& s) const { return s.scale / (s.scale + td); }
    double operator()(const PowerSchedule& s) const {
      return 1.0 / std::pow(td + 1.0, s.exponent);
    }
    double operator()(const HybridSchedule& s) const {
      return 2 * t < s.horizon ? 1.0 : 1.0 / std::sqrt(td);
    }
  };
  return std::visit(Visitor{td, t}, schedule.rule());
}

// rho(z) + w
template <typename Urbg>
double sample_density(const DensityField& field, const NoiseModel& noise,
                      double z, Urbg& rng) {
  return rho(field, z) + noise.draw(rng);
}

// One agent's three samples for a single step.
struct Measurement {
  double left_point = 0.0;    // l_k, uniform in [x_{k-1}, x_k]
  double left_sample = 0.0;   // rho^(l_k)
  double own_sample = 0.0;    // rho^(x_k)
  double right_point = 0.0;   // r_k, uniform in [x_k, x_{k+1}]
  double right_sample = 0.0;  // rho^(r_k)
  double left_mass = 0.0;     // L_k = rho^(l_k) (x_k - x_{k-1})
  double right_mass = 0.0;    // R_k = rho^(r_k) (x_{k+1} - x_k)
};

// Draws from a single stream in the fixed order (l_k, own, r_k) for k = 1..n.
// A zero-length interval yields its endpoint as the sample point and a zero
// mass.
template <typename Urbg>
std::vector<Measurement> measure(const PositionState& x, const DensityField& field,
                                 const NoiseModel& noise, Urbg& rng) {
  std::vector<Measurement> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double left = x.left_of(k);
    const double right = x.right_of(k);
    Measurement& m = out[k];
    m.left_point = std::min(left + unit_uniform(rng) * (x[k] - left), x[k]);
    m.left_sample = sample_density(field, noise, m.left_point, rng);
    m.own_sample = sample_density(field, noise, x[k], rng);
    m.right_point = std::min(x[k] + unit_uniform(rng) * (right - x[k]), right);
    m.right_sample = sample_density(field, noise, m.right_point, rng);
    m.left_mass = m.left_sample * (x[k] - left);
    m.right_mass = m.right_sample * (right - x[k]);
  }
  return out;
}

namespace detail {

// (left, right) weights of the update direction. Boundary agents double the
// weight on the gap to the virtual endpoint; a single agent doubles both.
inline std::pair<double, double> update_weights(std::size_t k, std::size_t n) {
  return {k == 0 ? 2.0 : 1.0, k + 1 == n ? 2.0 : 1.0};
}

}  // namespace detail

// g_bar with E[g_bar] = Q'(x); the synchronous update is
// x' = x - alpha / (16 (rho_max + M)^2) * g_bar.
inline std::vector<double> gradient_estimate(
    const std::vector<Measurement>& samples) {
  const std::size_t n = samples.size();
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [wl, wr] = detail::update_weights(k, n);
    const Measurement& m = samples[k];
    g[k] = m.own_sample * (2.0 * wl * m.left_mass - 2.0 * wr * m.right_mass);
  }
  return g;
}

struct StochasticGradient {
  std::vector<double> g_bar;
  std::vector<Measurement> samples;
};

template <typename Urbg>
StochasticGradient stochastic_gradient(const PositionState& x,
                                       const DensityField& field,
                                       const NoiseModel& noise, Urbg& rng) {
  auto samples = measure(x, field, noise, rng);
  auto g = gradient_estimate(samples);
  return StochasticGradient{std::move(g), std::move(samples)};
}

// New positions from time-t positions and measurements; every agent moves by
// alpha rho^(x_k) / (8 (rho_max + M)^2) times its weighted L/R imbalance.
inline std::vector<double> updated_positions(const PositionState& x,
                                             const std::vector<Measurement>& samples,
                                             double rho_max, double noise_bound,
                                             double alpha) {
  const std::size_t n = x.size();
  const double s = rho_max + noise_bound;
  const double denom = 8.0 * s * s;
  std::vector<double> next(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [wl, wr] = detail::update_weights(k, n);
    const Measurement& m = samples[k];
    const double gain = alpha * m.own_sample / denom;
    next[k] = x[k] - gain * (wl * m.left_mass - wr * m.right_mass);
  }
  return next;
}

template <typename Urbg>
PositionState protocol_step(const PositionState& x, const DensityField& field,
                            const NoiseModel& noise, double alpha, Urbg& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("stepsize must lie in [0, 1]");
  }
  const auto samples = measure(x, field, noise, rng);
  auto next = updated_positions(x, samples, field.rho_max(), noise.bound(), alpha);
  if (!PositionState::is_valid(next)) {
    throw std::logic_error("protocol step broke agent ordering");
  }
  return PositionState(std::move(next));
}

}  // namespace linecover
