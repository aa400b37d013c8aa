#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "linecover/density.hpp"
#include "linecover/metrics.hpp"
#include "linecover/oracle.hpp"
#include "linecover/protocol.hpp"

namespace linecover {

// A configuration problem tied to a config key path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& reason)
      : std::invalid_argument(key + (reason.starts_with("must") ? " " : ": ") + reason),
        key_(std::move(key)),
        reason_(reason) {}
  const std::string& key() const { return key_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string key_;
  std::string reason_;
};

enum class ScheduleKind { kTheorem, kPower, kHybrid };

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::kHybrid;
  double u = 1.0;                         // theorem
  double exponent = 1.0;                  // power
  std::optional<std::uint64_t> horizon;   // hybrid; defaults to the run length
};

enum class InitKind { kUniformRandom, kAllAtOne, kExplicit };

struct InitSpec {
  InitKind kind = InitKind::kUniformRandom;
  std::vector<double> positions;  // explicit only
};

struct SimConfig {
  std::size_t n = 1;
  std::uint64_t iters = 1;
  std::uint64_t seed = 1;
  std::uint64_t record_every = 10;
  DensityField field = DensityField::constant(1.0);
  NoiseModel noise = NoiseModel::zero();
  ScheduleSpec schedule;
  InitSpec init;
};

inline StepSchedule make_schedule(const SimConfig& config) {
  const ScheduleSpec& s = config.schedule;
  switch (s.kind) {
    case ScheduleKind::kTheorem:
      return StepSchedule::theorem(s.u, config.field.rho_max(), config.noise.bound());
    case ScheduleKind::kPower:
      return StepSchedule::power(s.exponent);
    default:
      return StepSchedule::hybrid(s.horizon.value_or(config.iters));
  }
}

inline void validate_config(const SimConfig& config) {
  if (config.n < 1) throw ConfigError("n", "must be ≥ 1");
  if (config.iters < 1) throw ConfigError("iters", "must be ≥ 1");
  if (config.record_every < 1) throw ConfigError("record_every", "must be ≥ 1");
  if (config.noise.bound() > 1.0) throw ConfigError("noise.m", "must be ≤ 1");
  if (auto v = validate_field(config.field); !v.empty()) {
    throw ConfigError("density", v.front());
  }
  try {
    (void)make_schedule(config);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("schedule", e.what());
  }
  if (config.init.kind == InitKind::kExplicit) {
    if (config.init.positions.size() != config.n) {
      throw ConfigError("init.positions", "expected " + std::to_string(config.n) +
                                              " positions");
    }
    if (!PositionState::is_valid(config.init.positions)) {
      throw ConfigError("init.positions", "must be nondecreasing in [0, 1]");
    }
  }
}

struct RunRow {
  std::uint64_t t = 0;
  std::vector<double> positions;
  double q = 0.0;
  double phi = 0.0;
  double err_sq = 0.0;  // ||x - x*||^2 / n
};

struct RunRecord {
  SimConfig config;
  PositionState optimum;
  std::vector<RunRow> rows;
  PositionState final_positions;
};

inline double per_node_squared_error(const PositionState& x, const PositionState& x_star) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_star[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

template <typename Urbg>
PositionState initial_positions(const SimConfig& config, Urbg& rng) {
  switch (config.init.kind) {
    case InitKind::kAllAtOne:
      return PositionState(std::vector<double>(config.n, 1.0));
    case InitKind::kExplicit:
      return PositionState(config.init.positions);
    default: {
      std::vector<double> x(config.n);
      for (double& v : x) v = unit_uniform(rng);
      std::sort(x.begin(), x.end());
      return PositionState(std::move(x));
    }
  }
}

inline RunRecord run(const SimConfig& config) {
  validate_config(config);
  Rng rng(config.seed);
  const StepSchedule schedule = make_schedule(config);
  PositionState x_star = optimal_positions(config.field, config.n);
  PositionState x = initial_positions(config, rng);

  std::vector<RunRow> rows;
  rows.reserve(static_cast<std::size_t>(config.iters / config.record_every) + 2);
  auto record = [&](std::uint64_t t) {
    rows.push_back(RunRow{t,
                          std::vector<double>(x.begin(), x.end()),
                          lyapunov_q(x, config.field),
                          coverage_phi(x, config.field),
                          per_node_squared_error(x, x_star)});
  };
  record(0);
  for (std::uint64_t t = 0; t < config.iters; ++t) {
    x = protocol_step(x, config.field, config.noise, alpha_at(schedule, t), rng);
    const std::uint64_t done = t + 1;
    if (done % config.record_every == 0 || done == config.iters) record(done);
  }
  return RunRecord{config, std::move(x_star), std::move(rows), std::move(x)};
}

struct EnsemblePoint {
  std::uint64_t t = 0;
  double mean_err = 0.0;
  double std_err = 0.0;
};

// Runs one trajectory per seed (concurrently when threads allow) and averages
// the per-node squared error at each recorded t. Aggregation is in seed order.
inline std::vector<EnsemblePoint> ensemble(const SimConfig& config,
                                           std::span<const std::uint64_t> seeds,
                                           unsigned threads = std::thread::hardware_concurrency()) {
  if (seeds.size() < 2) throw ConfigError("seeds", "need ≥ 2 seeds");
  validate_config(config);
  std::vector<std::vector<double>> curves(seeds.size());
  std::vector<std::uint64_t> times;
  auto run_one = [&](std::size_t i) {
    SimConfig c = config;
    c.seed = seeds[i];
    const RunRecord rec = run(c);
    curves[i].reserve(rec.rows.size());
    for (const RunRow& row : rec.rows) curves[i].push_back(row.err_sq);
    if (i == 0) {
      for (const RunRow& row : rec.rows) times.push_back(row.t);
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, seeds.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < seeds.size(); i += workers) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  const double count = static_cast<double>(seeds.size());
  std::vector<EnsemblePoint> out(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c[j];
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& c : curves) ss += (c[j] - mean) * (c[j] - mean);
    out[j] = EnsemblePoint{times[j], mean, std::sqrt(ss / (count - 1.0) / count)};
  }
  return out;
}

// Right-hand side of the expected-error bound for the A/(A + t) schedule.
inline double theorem_bound(std::size_t n, double u, double rho_max,
                            double noise_bound, double rho_prime_sup, double t) {
  if (n < 1) throw std::invalid_argument("agent count must be positive");
  if (u < static_cast<double>(n)) {
    throw std::invalid_argument("U must be an upper bound on n");
  }
  const double s = rho_max + noise_bound;
  const double s2 = s * s;
  const double numerator = 16.0 * static_cast<double>(n) * u * u * u * u * s2 * s2 *
                           (4.0 * rho_max * rho_max + 2.0 * rho_prime_sup * rho_max);
  return numerator / (8.0 * u * u * s2 + t);
}

// Least-squares slope of log(err) against log(t) over the last tail_fraction
// of the points.
inline double rate_fit(std::span<const double> t, std::span<const double> err,
                       double tail_fraction) {
  if (t.size() != err.size()) throw std::invalid_argument("curve length mismatch");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw std::invalid_argument("tail fraction must lie in (0, 1]");
  }
  const std::size_t total = t.size();
  const auto tail = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(total)));
  if (tail < 10) throw std::domain_error("need at least 10 points in the tail window");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = total - tail; i < total; ++i) {
    if (!(t[i] > 0.0) || !(err[i] > 0.0)) {
      throw std::domain_error("rate fit undefined: non-positive value in tail window");
    }
    const double lx = std::log(t[i]);
    const double ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(tail);
  const double denom = m * sxx - sx * sx;
  if (!(denom > 0.0)) throw std::domain_error("rate fit undefined: degenerate abscissae");
  return (m * sxy - sx * sy) / denom;
}

inline constexpr double kSweepTailFraction = 0.5;

struct SweepRow {
  std::uint64_t t = 0;
  double mean_err = 0.0;
  double std_err = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  double slope_so_far = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<double> final_slope;
  std::optional<bool> bound_held;  // set for the theorem schedule only
};

// Ensemble over seeds base, base + 1, ... with the bound column (theorem
// schedule only) and a running tail-slope fit.
inline SweepResult sweep(const SimConfig& config, std::size_t seed_count,
                         unsigned threads = std::thread::hardware_concurrency()) {
  if (seed_count < 2) throw ConfigError("seeds", "need ≥ 2 seeds");
  std::vector<std::uint64_t> seeds(seed_count);
  for (std::size_t i = 0; i < seed_count; ++i) seeds[i] = config.seed + i;
  const auto curve = ensemble(config, seeds, threads);

  const bool has_bound = config.schedule.kind == ScheduleKind::kTheorem &&
                         config.schedule.u >= static_cast<double>(config.n);
  SweepResult out;
  out.rows.resize(curve.size());
  // Prefix sums over (log t, log err) for the running fit; points with t == 0
  // or err <= 0 are tracked so windows containing them report NaN.
  std::vector<double> px(curve.size() + 1), py(px.size()), pxx(px.size()), pxy(px.size());
  std::vector<std::size_t> bad(px.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const bool ok = curve[i].t > 0 && curve[i].mean_err > 0.0;
    const double lx = ok ? std::log(static_cast<double>(curve[i].t)) : 0.0;
    const double ly = ok ? std::log(curve[i].mean_err) : 0.0;
    px[i + 1] = px[i] + lx;
    py[i + 1] = py[i] + ly;
    pxx[i + 1] = pxx[i] + lx * lx;
    pxy[i + 1] = pxy[i] + lx * ly;
    bad[i + 1] = bad[i] + (ok ? 0 : 1);
  }
  bool held = true;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    SweepRow& row = out.rows[i];
    row.t = curve[i].t;
    row.mean_err = curve[i].mean_err;
    row.std_err = curve[i].std_err;
    if (has_bound) {
      row.bound = theorem_bound(config.n, config.schedule.u, config.field.rho_max(),
                                config.noise.bound(), config.field.rho_prime_sup(),
                                static_cast<double>(row.t));
      held = held && row.mean_err <= row.bound;
    }
    const std::size_t len = i + 1;
    const auto tail = static_cast<std::size_t>(
        std::ceil(kSweepTailFraction * static_cast<double>(len)));
    const std::size_t lo = len - tail;
    if (tail >= 10 && bad[len] == bad[lo]) {
      const double m = static_cast<double>(tail);
      const double sx = px[len] - px[lo], sy = py[len] - py[lo];
      const double sxx = pxx[len] - pxx[lo], sxy = pxy[len] - pxy[lo];
      const double denom = m * sxx - sx * sx;
      if (denom > 0.0) row.slope_so_far = (m * sxy - sx * sy) / denom;
    }
  }
  if (has_bound) out.bound_held = held;
  std::vector<double> ts, es;
  for (const auto& p : curve) {
    ts.push_back(static_cast<double>(p.t));
    es.push_back(p.mean_err);
  }
  try {
    out.final_slope = rate_fit(ts, es, kSweepTailFraction);
  } catch (const std::domain_error&) {
  }
  return out;
}

}  // namespace linecover
