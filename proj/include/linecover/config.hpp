#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "linecover/sim.hpp"

namespace linecover {

// Config documents are plain text, one `key = value` per line; `#` starts a
// comment. Lists are comma-separated. Example:
//
//   n = 20
//   iters = 10000
//   seed = 42
//   density.family = smooth-bump
//   density.amplitude = 2
//   noise.kind = uniform
//   noise.m = 0.5
//   schedule.kind = hybrid
//   init.kind = all-at-one

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class KeyValues {
 public:
  void set(const std::string& key, std::string value, int line) {
    if (!values_.emplace(key, std::move(value)).second) {
      throw ConfigError(key, "duplicate key (line " + std::to_string(line) + ")");
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& raw(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "missing required key");
    used_.insert(key);
    return it->second;
  }

  double number(const std::string& key) {
    const std::string& v = raw(key);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError(key, "not a number: '" + v + "'");
    }
    return out;
  }

  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t count(const std::string& key) {
    const std::string& v = raw(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError(key, "not a nonnegative integer: '" + v + "'");
    }
    return out;
  }

  std::uint64_t count_or(const std::string& key, std::uint64_t fallback) {
    return has(key) ? count(key) : fallback;
  }

  std::vector<double> list(const std::string& key) {
    const std::string& v = raw(key);
    std::vector<double> out;
    std::string_view rest = v;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
      if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
        throw ConfigError(key, "not a comma-separated list of numbers: '" + v + "'");
      }
      out.push_back(x);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  // Every key must have been consumed by the parser.
  void reject_unused(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_) {
      if (used_.count(key)) continue;
      if (known.count(key)) {
        throw ConfigError(key, "not used by the selected kind/family");
      }
      throw ConfigError(key, "unknown key");
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "n", "iters", "seed", "record_every",
      "density.family", "density.level", "density.intercept", "density.slope",
      "density.breakpoints", "density.values", "density.amplitude",
      "density.center", "density.width", "density.rho_max",
      "density.rho_prime_sup",
      "noise.kind", "noise.m",
      "schedule.kind", "schedule.u", "schedule.p", "schedule.horizon",
      "init.kind", "init.positions"};
  return keys;
}

inline DensityField parse_density(KeyValues& kv) {
  const std::string& family = kv.raw("density.family");
  DensityField field = DensityField::constant(1.0);
  try {
    if (family == "constant") {
      field = DensityField::constant(kv.number_or("density.level", 1.0));
    } else if (family == "affine") {
      field = DensityField::affine(kv.number("density.intercept"),
                                   kv.number("density.slope"));
    } else if (family == "piecewise-linear") {
      field = DensityField::piecewise_linear(kv.list("density.breakpoints"),
                                             kv.list("density.values"));
    } else if (family == "smooth-bump") {
      field = DensityField::bump(kv.number("density.amplitude"),
                                 kv.number_or("density.center", 0.5),
                                 kv.number_or("density.width", 0.1));
    } else {
      throw ConfigError("density.family",
                        "expected constant, affine, piecewise-linear or "
                        "smooth-bump, got '" + family + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("density", e.what());
  }
  if (kv.has("density.rho_max") || kv.has("density.rho_prime_sup")) {
    field = field.with_declared_bounds(
        kv.number_or("density.rho_max", field.rho_max()),
        kv.number_or("density.rho_prime_sup", field.rho_prime_sup()));
  }
  return field;
}

inline NoiseModel parse_noise(KeyValues& kv) {
  const std::string& kind = kv.raw("noise.kind");
  if (kind == "zero") {
    if (kv.has("noise.m") && kv.number("noise.m") != 0.0) {
      throw ConfigError("noise.m", "must be 0 for noise.kind=zero");
    }
    return NoiseModel::zero();
  }
  const double m = kv.number("noise.m");
  if (m > 1.0) throw ConfigError("noise.m", "must be ≤ 1");
  if (!(m >= 0.0)) throw ConfigError("noise.m", "must be ≥ 0");
  if (kind == "uniform") return NoiseModel::uniform(m);
  if (kind == "bernoulli") return NoiseModel::bernoulli(m);
  throw ConfigError("noise.kind",
                    "expected uniform, bernoulli or zero, got '" + kind + "'");
}

inline ScheduleSpec parse_schedule(KeyValues& kv) {
  const std::string& kind = kv.raw("schedule.kind");
  ScheduleSpec spec;
  if (kind == "theorem") {
    spec.kind = ScheduleKind::kTheorem;
    spec.u = kv.number("schedule.u");
    if (!(spec.u >= 1.0)) throw ConfigError("schedule.u", "must be ≥ 1");
  } else if (kind == "power") {
    spec.kind = ScheduleKind::kPower;
    spec.exponent = kv.number("schedule.p");
    if (!(spec.exponent > 0.5 && spec.exponent <= 1.0)) {
      throw ConfigError("schedule.p", "must lie in (1/2, 1]");
    }
  } else if (kind == "hybrid") {
    spec.kind = ScheduleKind::kHybrid;
    if (kv.has("schedule.horizon")) {
      spec.horizon = kv.count("schedule.horizon");
      if (*spec.horizon < 2) throw ConfigError("schedule.horizon", "must be ≥ 2");
    }
  } else {
    throw ConfigError("schedule.kind",
                      "expected theorem, power or hybrid, got '" + kind + "'");
  }
  return spec;
}

inline InitSpec parse_init(KeyValues& kv) {
  InitSpec spec;
  const std::string kind = kv.has("init.kind") ? kv.raw("init.kind") : "uniform-random";
  if (kind == "uniform-random") {
    spec.kind = InitKind::kUniformRandom;
  } else if (kind == "all-at-one") {
    spec.kind = InitKind::kAllAtOne;
  } else if (kind == "explicit") {
    spec.kind = InitKind::kExplicit;
    spec.positions = kv.list("init.positions");
  } else {
    throw ConfigError("init.kind",
                      "expected uniform-random, all-at-one or explicit, got '" +
                          kind + "'");
  }
  return spec;
}

}  // namespace detail

inline SimConfig parse_config(std::string_view text) {
  detail::KeyValues kv;
  int line_no = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    ++line_no;
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no), "empty key");
    }
    kv.set(key, std::string(detail::trim(line.substr(eq + 1))), line_no);
  }

  SimConfig config;
  config.n = static_cast<std::size_t>(kv.count("n"));
  config.iters = kv.count_or("iters", 1000);
  config.seed = kv.count_or("seed", 1);
  config.record_every = kv.count_or("record_every", 10);
  config.field = detail::parse_density(kv);
  config.noise = detail::parse_noise(kv);
  config.schedule = detail::parse_schedule(kv);
  config.init = detail::parse_init(kv);
  kv.reject_unused(detail::known_keys());
  validate_config(config);
  return config;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace linecover
