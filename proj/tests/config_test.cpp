#include <gtest/gtest.h>

#include <sstream>

#include "linecover/config.hpp"
#include "linecover/table.hpp"
#include "linecover/verify.hpp"

namespace linecover {
namespace {

constexpr const char* kBasic = R"(# two agents
n = 2
iters = 400
seed = 42
record_every = 100
density.family = constant
noise.kind = uniform
noise.m = 0.5
schedule.kind = hybrid
init.kind = uniform-random
)";

std::string error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(ConfigTest, ParsesBasicDocument) {
  const auto c = parse_config(kBasic);
  EXPECT_EQ(c.n, 2u);
  EXPECT_EQ(c.iters, 400u);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.record_every, 100u);
  EXPECT_EQ(c.field.family_name(), "constant");
  EXPECT_EQ(c.noise.kind(), NoiseKind::kUniform);
  EXPECT_EQ(c.noise.bound(), 0.5);
  EXPECT_EQ(c.schedule.kind, ScheduleKind::kHybrid);
  EXPECT_FALSE(c.schedule.horizon.has_value());
}

TEST(ConfigTest, ParsesEveryFamily) {
  auto c = parse_config(
      "n=3\ndensity.family=piecewise-linear\ndensity.breakpoints=0, 0.5, 1\n"
      "density.values=1,2,1.5\nnoise.kind=zero\nschedule.kind=power\nschedule.p=0.75\n"
      "init.kind=explicit\ninit.positions=0.1,0.2,0.3\n");
  EXPECT_EQ(c.field.family_name(), "piecewise-linear");
  EXPECT_EQ(c.init.positions, (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_EQ(c.schedule.exponent, 0.75);

  c = parse_config(
      "n=1\ndensity.family=smooth-bump\ndensity.amplitude=2\ndensity.center=0.4\n"
      "density.width=0.2\nnoise.kind=bernoulli\nnoise.m=1\nschedule.kind=theorem\n"
      "schedule.u=3\ninit.kind=all-at-one\n");
  EXPECT_EQ(c.field.family_name(), "smooth-bump");
  EXPECT_EQ(c.noise.kind(), NoiseKind::kBernoulli);
  EXPECT_EQ(c.schedule.u, 3.0);

  c = parse_config(
      "n=2\ndensity.family=affine\ndensity.intercept=1\ndensity.slope=1\n"
      "density.rho_max=2.5\nnoise.kind=zero\nschedule.kind=hybrid\nschedule.horizon=50\n");
  EXPECT_EQ(c.field.rho_max(), 2.5);
  EXPECT_EQ(c.field.rho_prime_sup(), 1.0);
  EXPECT_EQ(*c.schedule.horizon, 50u);
}

TEST(ConfigTest, RejectsLargeNoise) {
  std::string text = kBasic;
  text.replace(text.find("noise.m = 0.5"), 13, "noise.m = 1.5");
  EXPECT_EQ(error_of(text), "noise.m must be ≤ 1");
}

TEST(ConfigTest, ReportsKeyPaths) {
  EXPECT_EQ(error_of(std::string(kBasic) + "density.levle = 2\n"), "density.levle: unknown key");
  EXPECT_EQ(error_of(std::string(kBasic) + "density.slope = 2\n"),
            "density.slope: not used by the selected kind/family");
  EXPECT_EQ(error_of(std::string(kBasic) + "n = 3\n"), "n: duplicate key (line 11)");
  EXPECT_EQ(error_of("iters = 5\n"), "n: missing required key");
  EXPECT_EQ(error_of(std::string(kBasic) + "oops\n"), "line 11: expected key = value");

  std::string bad = kBasic;
  bad.replace(bad.find("n = 2"), 5, "n = two");
  EXPECT_EQ(error_of(bad), "n: not a nonnegative integer: 'two'");
}

TEST(ConfigTest, EnforcesSimInvariants) {
  EXPECT_NE(error_of(std::string(kBasic).replace(std::string(kBasic).find("constant"), 8,
                                                 "affine\ndensity.intercept=0.5\ndensity.slope=1"))
                .find("ρ(0)=0.5 < 1"),
            std::string::npos);
  EXPECT_EQ(error_of("n=2\ndensity.family=constant\nnoise.kind=zero\nschedule.kind=hybrid\n"
                     "init.kind=explicit\ninit.positions=0.5,0.2\n"),
            "init.positions must be nondecreasing in [0, 1]");
  EXPECT_EQ(error_of("n=0\ndensity.family=constant\nnoise.kind=zero\nschedule.kind=hybrid\n"),
            "n must be ≥ 1");
  EXPECT_EQ(error_of("n=2\ndensity.family=constant\nnoise.kind=zero\nschedule.kind=power\n"
                     "schedule.p=0.4\n"),
            "schedule.p must lie in (1/2, 1]");
}

TEST(TableTest, RunHeaderAndRows) {
  const auto rec = run(parse_config(kBasic));
  std::ostringstream out;
  write_run_table(out, rec);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x_1,x_2,Q,phi,err_sq");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  }
  EXPECT_EQ(rows, 5);
}

TEST(TableTest, NumbersUseTwelveDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(0.25), "0.25");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(TableTest, RunOutputIsReproducible) {
  const auto c = parse_config(kBasic);
  std::ostringstream a, b;
  write_run_table(a, run(c));
  write_run_table(b, run(c));
  EXPECT_EQ(a.str(), b.str());
}

TEST(TableTest, SweepHeader) {
  auto c = parse_config(kBasic);
  std::ostringstream out;
  write_sweep_table(out, sweep(c, 2));
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "t,mean_err,stderr,bound,slope_so_far");
}

TEST(VerifyTest, DefaultSizesPass) {
  const std::vector<std::size_t> sizes{2, 5, 10};
  for (const auto& suite : run_verify(sizes)) {
    EXPECT_TRUE(suite.passed) << suite.name << ": " << suite.counterexample;
    EXPECT_FALSE(suite.extension) << suite.name;
    EXPECT_GT(suite.checks, 0u);
  }
}

TEST(VerifyTest, SingleAgentIsFlaggedAsExtension) {
  const std::vector<std::size_t> sizes{1};
  for (const auto& suite : run_verify(sizes)) {
    EXPECT_TRUE(suite.passed) << suite.name << ": " << suite.counterexample;
    EXPECT_TRUE(suite.extension) << suite.name;
  }
}

TEST(VerifyTest, InjectedSignFlipFails) {
  const StepFunction flipped = [](const PositionState& x, const DensityField& f,
                                  const NoiseModel& noise, double alpha, Rng& rng) {
    auto samples = measure(x, f, noise, rng);
    for (auto& m : samples) m.right_mass = -m.right_mass;
    return updated_positions(x, samples, f.rho_max(), noise.bound(), alpha);
  };
  const std::vector<std::size_t> sizes{2, 5, 10};
  const auto results = run_verify(sizes, flipped);
  EXPECT_FALSE(results.front().passed);
  EXPECT_NE(results.front().counterexample.find("seed="), std::string::npos);
}

}  // namespace
}  // namespace linecover
