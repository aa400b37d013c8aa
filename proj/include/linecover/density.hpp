#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "linecover/quadrature.hpp"

namespace linecover {

// Density families on [0, 1]. Fields are expected to satisfy 1 <= rho <= rho_max;
// validate_field() reports fields that do not.

struct ConstantDensity {
  double level = 1.0;
};

// rho(z) = intercept + slope * z
struct AffineDensity {
  double intercept = 1.0;
  double slope = 0.0;
};

// Linear interpolation between (breakpoints[i], values[i]); breakpoints run
// from 0 to 1, strictly increasing.
struct PiecewiseLinearDensity {
  std::vector<double> breakpoints;
  std::vector<double> values;
};

// rho(z) = 1 + amplitude * exp(-(z - center)^2 / (2 width^2))
struct BumpDensity {
  double amplitude = 0.0;
  double center = 0.5;
  double width = 0.1;
};

inline constexpr double kBumpQuadratureTol = 1e-10;
inline constexpr double kDefaultInversionTol = 1e-12;
inline constexpr int kValidationGridSize = 10000;

class DensityField {
 public:
  using Family = std::variant<ConstantDensity, AffineDensity,
                              PiecewiseLinearDensity, BumpDensity>;

  static DensityField constant(double level) {
    return DensityField(ConstantDensity{level});
  }
  static DensityField affine(double intercept, double slope) {
    return DensityField(AffineDensity{intercept, slope});
  }
  static DensityField piecewise_linear(std::vector<double> breakpoints,
                                       std::vector<double> values) {
    return DensityField(
        PiecewiseLinearDensity{std::move(breakpoints), std::move(values)});
  }
  static DensityField bump(double amplitude, double center, double width) {
    return DensityField(BumpDensity{amplitude, center, width});
  }

  explicit DensityField(Family family) : family_(std::move(family)) {
    std::visit([this](const auto& f) { init(f); }, family_);
  }

  // Replaces the analytic bounds with user-declared ones. validate_field()
  // checks the declaration against grid samples.
  DensityField with_declared_bounds(double rho_max, double rho_prime_sup) const {
    DensityField out = *this;
    out.rho_max_ = rho_max;
    out.rho_prime_sup_ = rho_prime_sup;
    return out;
  }

  const Family& family() const { return family_; }
  double rho_max() const { return rho_max_; }
  double rho_prime_sup() const { return rho_prime_sup_; }
  // F(1)
  double total_mass() const { return total_mass_; }

  std::string_view family_name() const {
    switch (family_.index()) {
      case 0: return "constant";
      case 1: return "affine";
      case 2: return "piecewise-linear";
      default: return "smooth-bump";
    }
  }

  bool is_smooth() const {
    return !std::holds_alternative<PiecewiseLinearDensity>(family_);
  }

  double unchecked_rho(double z) const {
    return std::visit([z](const auto& f) { return eval(f, z); }, family_);
  }

  double unchecked_antiderivative(double z) const {
    return std::visit(
        [this, z](const auto& f) { return integrate_to(f, z); }, family_);
  }

 private:
  static constexpr int kBumpPanels = 64;

  static double eval(const ConstantDensity& f, double) { return f.level; }
  static double eval(const AffineDensity& f, double z) {
    return f.intercept + f.slope * z;
  }
  static double eval(const PiecewiseLinearDensity& f, double z) {
    const auto& bp = f.breakpoints;
    auto it = std::upper_bound(bp.begin(), bp.end(), z);
    std::size_t hi = static_cast<std::size_t>(it - bp.begin());
    if (hi >= bp.size()) return f.values.back();
    if (hi == 0) return f.values.front();
    const std::size_t lo = hi - 1;
    const double w = (z - bp[lo]) / (bp[hi] - bp[lo]);
    return f.values[lo] + w * (f.values[hi] - f.values[lo]);
  }
  static double eval(const BumpDensity& f, double z) {
    const double d = z - f.center;
    return 1.0 + f.amplitude * std::exp(-d * d / (2.0 * f.width * f.width));
  }

  double integrate_to(const ConstantDensity& f, double z) const {
    return f.level * z;
  }
  double integrate_to(const AffineDensity& f, double z) const {
    return f.intercept * z + 0.5 * f.slope * z * z;
  }
  double integrate_to(const PiecewiseLinearDensity& f, double z) const {
    const auto& bp = f.breakpoints;
    auto it = std::upper_bound(bp.begin(), bp.end(), z);
    std::size_t seg = it == bp.begin() ? 0 : static_cast<std::size_t>(it - bp.begin()) - 1;
    if (seg >= bp.size() - 1) return cumulative_.back();
    const double dz = z - bp[seg];
    const double slope =
        (f.values[seg + 1] - f.values[seg]) / (bp[seg + 1] - bp[seg]);
    return cumulative_[seg] + f.values[seg] * dz + 0.5 * slope * dz * dz;
  }
  double integrate_to(const BumpDensity& f, double z) const {
    const int panel = std::clamp(static_cast<int>(z * kBumpPanels), 0,
                                 kBumpPanels - 1);
    const double start = static_cast<double>(panel) / kBumpPanels;
    return cumulative_[static_cast<std::size_t>(panel)] +
           adaptive_simpson([&f](double s) { return eval(f, s); }, start, z,
                            kBumpQuadratureTol / kBumpPanels);
  }

  void init(const ConstantDensity& f) {
    rho_max_ = f.level;
    rho_prime_sup_ = 0.0;
    total_mass_ = f.level;
  }

  void init(const AffineDensity& f) {
    rho_max_ = std::max(f.intercept, f.intercept + f.slope);
    rho_prime_sup_ = std::abs(f.slope);
    total_mass_ = integrate_to(f, 1.0);
  }

  void init(const PiecewiseLinearDensity& f) {
    const auto& bp = f.breakpoints;
    if (bp.size() < 2 || bp.size() != f.values.size()) {
      throw std::invalid_argument(
          "piecewise-linear density needs >= 2 breakpoints and one value per "
          "breakpoint");
    }
    if (bp.front() != 0.0 || bp.back() != 1.0) {
      throw std::invalid_argument(
          "piecewise-linear breakpoints must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < bp.size(); ++i) {
      if (!(bp[i] > bp[i - 1])) {
        throw std::invalid_argument(
            "piecewise-linear breakpoints must be strictly increasing");
      }
    }
    cumulative_.assign(bp.size(), 0.0);
    rho_max_ = *std::max_element(f.values.begin(), f.values.end());
    rho_prime_sup_ = 0.0;
    for (std::size_t i = 1; i < bp.size(); ++i) {
      const double h = bp[i] - bp[i - 1];
      cumulative_[i] = cumulative_[i - 1] + 0.5 * h * (f.values[i] + f.values[i - 1]);
      rho_prime_sup_ =
          std::max(rho_prime_sup_, std::abs(f.values[i] - f.values[i - 1]) / h);
    }
    total_mass_ = cumulative_.back();
  }

  void init(const BumpDensity& f) {
    if (!(f.width > 0.0)) {
      throw std::invalid_argument("bump width must be positive");
    }
    const double peak_at = std::clamp(f.center, 0.0, 1.0);
    rho_max_ = std::max({eval(f, 0.0), eval(f, 1.0), eval(f, peak_at)});
    // |rho'| peaks at center +- width on each flank; otherwise at an endpoint.
    auto slope_mag = [&f](double z) {
      const double d = z - f.center;
      return std::abs(f.amplitude) * std::abs(d) / (f.width * f.width) *
             std::exp(-d * d / (2.0 * f.width * f.width));
    };
    rho_prime_sup_ = std::max(slope_mag(0.0), slope_mag(1.0));
    for (double c : {f.center - f.width, f.center + f.width}) {
      if (c >= 0.0 && c <= 1.0) rho_prime_sup_ = std::max(rho_prime_sup_, slope_mag(c));
    }
    cumulative_.assign(kBumpPanels + 1, 0.0);
    for (int p = 0; p < kBumpPanels; ++p) {
      const double a = static_cast<double>(p) / kBumpPanels;
      const double b = static_cast<double>(p + 1) / kBumpPanels;
      cumulative_[static_cast<std::size_t>(p) + 1] =
          cumulative_[static_cast<std::size_t>(p)] +
          adaptive_simpson([&f](double s) { return eval(f, s); }, a, b,
                           kBumpQuadratureTol / kBumpPanels);
    }
    total_mass_ = cumulative_.back();
  }

  Family family_;
  double rho_max_ = 1.0;
  double rho_prime_sup_ = 0.0;
  double total_mass_ = 1.0;
  std::vector<double> cumulative_;
};

namespace detail {

inline void require_unit_interval(double z, const char* what) {
  if (!(z >= 0.0 && z <= 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in [0, 1], got " +
                            std::to_string(z));
  }
}

}  // namespace detail

inline double rho(const DensityField& field, double z) {
  detail::require_unit_interval(z, "position");
  return field.unchecked_rho(z);
}

// F(z) = integral of rho over [0, z].
inline double antiderivative(const DensityField& field, double z) {
  detail::require_unit_interval(z, "position");
  return field.unchecked_antiderivative(z);
}

// Bisection for z with |F(z) - mass| <= tol.
inline double invert_antiderivative(const DensityField& field, double mass,
                                    double tol = kDefaultInversionTol) {
  const double total = field.total_mass();
  if (!(mass >= 0.0 && mass <= total)) {
    throw std::domain_error("mass " + std::to_string(mass) +
                            " outside [0, F(1)]");
  }
  if (mass == 0.0) return 0.0;
  if (mass == total) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double value = field.unchecked_antiderivative(mid);
    if (std::abs(value - mass) <= tol) return mid;
    if (mid <= lo || mid >= hi) break;
    (value < mass ? lo : hi) = mid;
  }
  const double z = 0.5 * (lo + hi);
  if (std::abs(field.unchecked_antiderivative(z) - mass) > tol) {
    throw std::runtime_error("antiderivative inversion did not reach tolerance");
  }
  return z;
}

// rho-weighted distance |F(b) - F(a)|.
inline double rho_distance(const DensityField& field, double a, double b) {
  return std::abs(antiderivative(field, b) - antiderivative(field, a));
}

inline std::vector<std::string> validate_field(const DensityField& field) {
  auto fmt = [](double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.6g", v);
    return std::string(buf.data());
  };
  std::vector<std::string> violations;
  const int m = kValidationGridSize;
  const double h = 1.0 / (m - 1);
  double min_rho = HUGE_VAL, min_at = 0.0;
  double max_rho = -HUGE_VAL;
  double max_slope = 0.0;
  double prev = field.unchecked_rho(0.0);
  for (int j = 0; j < m; ++j) {
    const double z = j == m - 1 ? 1.0 : j * h;
    const double r = field.unchecked_rho(z);
    if (!std::isfinite(r)) {
      violations.push_back("ρ(" + fmt(z) + ") is not finite");
      return violations;
    }
    if (r < min_rho) {
      min_rho = r;
      min_at = z;
    }
    max_rho = std::max(max_rho, r);
    if (j > 0) max_slope = std::max(max_slope, std::abs(r - prev) / h);
    prev = r;
  }
  if (min_rho < 1.0) {
    violations.push_back("ρ(" + fmt(min_at) + ")=" + fmt(min_rho) + " < 1");
  }
  if (field.rho_max() < 1.0) {
    violations.push_back("declared rho_max=" + fmt(field.rho_max()) + " < 1");
  }
  constexpr double rel = 1e-9;
  if (max_rho > field.rho_max() * (1.0 + rel)) {
    violations.push_back("grid max ρ=" + fmt(max_rho) +
                         " exceeds declared rho_max=" + fmt(field.rho_max()));
  }
  if (max_slope > field.rho_prime_sup() * (1.0 + rel) + rel) {
    violations.push_back("finite-difference |ρ′|=" + fmt(max_slope) +
                         " exceeds declared rho_prime_sup=" +
                         fmt(field.rho_prime_sup()));
  }
  return violations;
}

}  // namespace linecover
