#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dp2s/two_sample_test.hpp"

using dp2s::BaseMeasure;
using dp2s::RngStream;
using dp2s::TestConfig;
using dp2s::ThresholdMode;
using dp2s::ThresholdSpec;

namespace {

std::vector<double> draw(const BaseMeasure& m, std::size_t count, std::uint64_t seed) {
  RngStream rng(seed, 1234);
  std::vector<double> v(count);
  for (double& x : v) x = m.sample(rng);
  return v;
}

TestConfig small_config() {
  TestConfig c;
  c.n = 200;
  c.r = 200;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(ThresholdTable, PrintedValues) {
  EXPECT_DOUBLE_EQ(dp2s::threshold_table(5, 5), 0.69);
  EXPECT_DOUBLE_EQ(dp2s::threshold_table(20, 19), 0.42);
  EXPECT_DOUBLE_EQ(dp2s::threshold_table(3, 2), 0.82);
  EXPECT_DOUBLE_EQ(dp2s::threshold_table(2, 3), 0.82);
  EXPECT_DOUBLE_EQ(dp2s::threshold_table(1, 1), 0.93);
  EXPECT_DOUBLE_EQ(dp2s::threshold_table(10, 5), 0.62);
}

TEST(ThresholdTable, SymmetricBoundedAndDecreasingOnDiagonal) {
  for (std::size_t i = 1; i <= 20; ++i) {
    for (std::size_t j = 1; j <= 20; ++j) {
      const double v = dp2s::threshold_table(i, j);
      ASSERT_EQ(v, dp2s::threshold_table(j, i));
      ASSERT_GT(v, 0.0);
      ASSERT_LT(v, 1.0);
    }
    if (i > 1) EXPECT_LE(dp2s::threshold_table(i, i), dp2s::threshold_table(i - 1, i - 1));
  }
}

TEST(ThresholdTable, RangeErrors) {
  EXPECT_THROW(dp2s::threshold_table(21, 5), std::out_of_range);
  EXPECT_THROW(dp2s::threshold_table(0, 5), std::out_of_range);
}

TEST(ThresholdTable, ParseRejectsMalformedGrid) {
  EXPECT_THROW(dp2s::ThresholdTable::parse_csv("m2,1\n1,0.9\n"), std::invalid_argument);
  EXPECT_THROW(dp2s::ThresholdTable::parse_csv("m2,1\n1,1.5\n"), std::invalid_argument);
}

TEST(ThresholdFormula, Values) {
  EXPECT_NEAR(dp2s::threshold_formula(100, 100), 0.1994, 5e-5);
  EXPECT_NEAR(dp2s::threshold_formula(50, 50), 0.2820, 5e-5);
  EXPECT_NEAR(dp2s::threshold_formula(20, 20), 0.4459, 5e-5);
  EXPECT_THROW(dp2s::threshold_formula(0, 10), std::invalid_argument);
  EXPECT_TRUE(dp2s::formula_in_range(20, 20));
  EXPECT_FALSE(dp2s::formula_in_range(19, 200));
}

TEST(ThresholdSpec, Parse) {
  EXPECT_EQ(ThresholdSpec::parse("table").mode, ThresholdMode::Table);
  EXPECT_EQ(ThresholdSpec::parse("simulate").mode, ThresholdMode::Simulate);
  const auto f = ThresholdSpec::parse("fixed:0.25");
  EXPECT_EQ(f.mode, ThresholdMode::Fixed);
  EXPECT_DOUBLE_EQ(f.fixed_value, 0.25);
  EXPECT_EQ(ThresholdSpec::parse(f.describe()).fixed_value, 0.25);
  EXPECT_THROW(ThresholdSpec::parse("fixed:"), std::invalid_argument);
  EXPECT_THROW(ThresholdSpec::parse("fixed:abc"), std::invalid_argument);
  EXPECT_THROW(ThresholdSpec::parse("median"), std::invalid_argument);
}

TEST(TestConfig, Validation) {
  TestConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TestConfig{};
  c.r = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TestConfig{};
  c.tail = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TestConfig{};
  c.a = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(TrimmedUpperBound, RemovesTheTopTail) {
  std::vector<double> v(40);
  std::iota(v.begin(), v.end(), 1.0);
  std::reverse(v.begin(), v.end());
  EXPECT_EQ(dp2s::trimmed_upper_bound(v, 0.025), 39.0);
  std::vector<double> w(2000);
  std::iota(w.begin(), w.end(), 1.0);
  EXPECT_EQ(dp2s::trimmed_upper_bound(w, 0.025), 1950.0);
  EXPECT_THROW(dp2s::trimmed_upper_bound({}, 0.025), std::invalid_argument);
}

TEST(ThresholdSimulate, TailFractionAndErrors) {
  TestConfig c = small_config();
  c.r = 400;
  const auto d0 = dp2s::prior_distances(4, 7, c);
  const double u = dp2s::threshold_simulate(4, 7, c);
  const auto above = std::count_if(d0.begin(), d0.end(), [&](double d) { return d > u; });
  EXPECT_LE(static_cast<double>(above) / 400.0, c.tail + 1.0 / 400.0);
  c.r = 39;
  EXPECT_THROW(dp2s::threshold_simulate(4, 7, c), std::invalid_argument);
}

TEST(PriorDistance, IndependentOfBaseMeasure) {
  TestConfig normal = small_config();
  TestConfig uniform = normal;
  uniform.base = BaseMeasure::uniform(0.0, 1.0);
  TestConfig expo = normal;
  expo.base = BaseMeasure::exponential(3.0);
  const auto a = dp2s::prior_distances(6, 9, normal);
  EXPECT_EQ(a, dp2s::prior_distances(6, 9, uniform));
  EXPECT_EQ(a, dp2s::prior_distances(6, 9, expo));
  EXPECT_EQ(dp2s::threshold_simulate(6, 9, normal), dp2s::threshold_simulate(6, 9, uniform));
}

TEST(PriorDistance, FiveByFiveUpperPercentile) {
  TestConfig c;
  c.r = 2000;
  c.seed = 21;
  EXPECT_NEAR(dp2s::threshold_simulate(5, 5, c), 0.69, 0.03);
}

TEST(PosteriorDistance, SampleMatchesBatchAndIsThreadInvariant) {
  const auto x = draw(BaseMeasure::normal(0, 1), 30, 1);
  const auto y = draw(BaseMeasure::normal(1, 1), 25, 2);
  TestConfig c = small_config();
  const auto batch = dp2s::posterior_distances(x, y, c);
  EXPECT_EQ(dp2s::posterior_distance_sample(x, y, c, 17), batch[17]);
  c.threads = 4;
  EXPECT_EQ(dp2s::posterior_distances(x, y, c), batch);
  EXPECT_EQ(dp2s::prior_distance_sample(3, 4, c, 9), dp2s::prior_distances(3, 4, c)[9]);
}

TEST(PosteriorDistance, SingletonSamplesAreBounded) {
  const std::vector<double> x = {0.0};
  TestConfig c = small_config();
  for (double d : dp2s::posterior_distances(x, x, c)) {
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, 1.0);
  }
}

TEST(PosteriorDistance, IdenticalSamplesOfSizeHundred) {
  const auto x = draw(BaseMeasure::normal(0, 1), 100, 3);
  TestConfig c;
  c.seed = 3;
  const auto d = dp2s::posterior_distances(x, x, c);
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  EXPECT_NEAR(mean, 0.15, 0.04);
}

TEST(RunTest, DecisionFollowsMeanAndThreshold) {
  const auto x = draw(BaseMeasure::normal(0, 1), 100, 4);
  const auto y = draw(BaseMeasure::normal(1, 1), 100, 5);
  TestConfig c;
  c.seed = 4;
  const auto rep = dp2s::run_test(x, y, c);
  EXPECT_EQ(rep.reject, rep.mean_d > rep.threshold);
  EXPECT_TRUE(rep.reject);
  EXPECT_EQ(rep.threshold_source, ThresholdMode::Formula);
  EXPECT_NEAR(rep.threshold, 0.1994, 1e-4);
  EXPECT_LE(rep.d_quantiles.lower, rep.d_quantiles.median);
  EXPECT_LE(rep.d_quantiles.median, rep.d_quantiles.upper);
  EXPECT_GT(rep.mean_d_se, 0.0);
  EXPECT_EQ(rep.m1, 100u);
}

TEST(RunTest, IdenticalSamplesDoNotReject) {
  const auto x = draw(BaseMeasure::normal(0, 1), 200, 6);
  TestConfig c;
  c.seed = 6;
  const auto rep = dp2s::run_test(x, x, c);
  EXPECT_FALSE(rep.reject);
  EXPECT_LT(rep.mean_d, rep.threshold);
}

TEST(RunTest, ThresholdModes) {
  const auto x = draw(BaseMeasure::normal(0, 1), 10, 7);
  const auto y = draw(BaseMeasure::normal(0, 1), 8, 8);
  TestConfig c = small_config();
  EXPECT_EQ(dp2s::run_test(x, y, c).threshold, dp2s::threshold_table(10, 8));
  c.threshold = ThresholdSpec::parse("fixed:0.3");
  const auto fixed = dp2s::run_test(x, y, c);
  EXPECT_EQ(fixed.threshold, 0.3);
  EXPECT_EQ(fixed.threshold_source, ThresholdMode::Fixed);
  c.threshold = ThresholdSpec::parse("formula");
  const auto formula = dp2s::run_test(x, y, c);
  EXPECT_FALSE(formula.threshold_note.empty());
  c.threshold = ThresholdSpec::parse("simulate");
  EXPECT_EQ(dp2s::run_test(x, y, c).threshold, dp2s::threshold_simulate(10, 8, c));
}

TEST(RunTest, AutoSimulatesOutsideCalibratedSetting) {
  TestConfig c = small_config();
  c.a = 50.0;
  const auto u = dp2s::resolve_threshold(100, 100, c);
  EXPECT_EQ(u.source, ThresholdMode::Simulate);
  c.a = 1.0;
  EXPECT_EQ(dp2s::resolve_threshold(10, 30, c).source, ThresholdMode::Simulate);
  EXPECT_EQ(dp2s::resolve_threshold(20, 30, c).source, ThresholdMode::Formula);
  EXPECT_EQ(dp2s::resolve_threshold(20, 20, c).source, ThresholdMode::Table);
}

TEST(RunTest, Errors) {
  const std::vector<double> x(30, 1.0);
  const std::vector<double> empty;
  TestConfig c = small_config();
  EXPECT_THROW(dp2s::run_test(x, empty, c), std::invalid_argument);
  c.threshold = ThresholdSpec::parse("table");
  EXPECT_THROW(dp2s::run_test(x, x, c), std::invalid_argument);
}

TEST(Regression, Errors) {
  TestConfig c = small_config();
  const std::vector<std::pair<std::size_t, std::size_t>> single = {{50, 50}};
  EXPECT_THROW(dp2s::fit_threshold_regression(single, c), std::invalid_argument);
  const std::vector<std::pair<std::size_t, std::size_t>> repeated = {{50, 50}, {50, 50}};
  EXPECT_THROW(dp2s::fit_threshold_regression(repeated, c), std::invalid_argument);
  const std::vector<std::pair<std::size_t, std::size_t>> small = {{10, 10}, {50, 50}};
  EXPECT_THROW(dp2s::fit_threshold_regression(small, c), std::invalid_argument);
}

TEST(Regression, ThroughOrigin) {
  TestConfig c = small_config();
  const std::vector<std::pair<std::size_t, std::size_t>> grid = {{20, 20}, {40, 40}, {80, 80}};
  const auto fit = dp2s::fit_threshold_regression(grid, c);
  ASSERT_EQ(fit.thresholds.size(), 3u);
  double zu = 0.0;
  double zz = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double z = std::sqrt(2.0 / static_cast<double>(grid[i].first));
    zu += z * fit.thresholds[i];
    zz += z * z;
  }
  EXPECT_NEAR(fit.slope, zu / zz, 1e-12);
  EXPECT_GT(fit.r_squared, 0.9);
  EXPECT_LE(fit.r_squared, 1.0);
}

// Reference U from tests/oracles/stick_breaking_threshold.py (20000 draws).
TEST(ThresholdSimulate, AgreesWithStickBreaking) {
  const std::pair<std::size_t, double> reference[] = {{5, 0.6969}, {20, 0.4151}, {50, 0.2791}, {100, 0.2012}};
  TestConfig c;
  c.seed = 31;
  for (const auto& [m, u] : reference) EXPECT_NEAR(dp2s::threshold_simulate(m, m, c), u, 0.02) << "m=" << m;
}
