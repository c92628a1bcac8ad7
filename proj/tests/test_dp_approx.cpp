#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dp2s/distance.hpp"
#include "dp2s/dp_approx.hpp"

using dp2s::BaseMeasure;
using dp2s::DpParams;
using dp2s::RealizationSampler;
using dp2s::RngStream;
using dp2s::WeightedDiscreteMeasure;

namespace {

std::vector<double> normal_data(std::size_t m, std::uint64_t seed, double mu = 0.0) {
  RngStream rng(seed, 99);
  const BaseMeasure h = BaseMeasure::normal(mu, 1.0);
  std::vector<double> v(m);
  for (double& x : v) x = h.sample(rng);
  return v;
}

void expect_valid(const WeightedDiscreteMeasure& m) {
  ASSERT_FALSE(m.empty());
  double total = 0.0;
  for (double lw : m.log_weights()) total += std::exp(lw);
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (std::size_t i = 1; i < m.size(); ++i) {
    ASSERT_LT(m.atoms()[i - 1], m.atoms()[i]);
    ASSERT_LE(m.cum_weights()[i - 1], m.cum_weights()[i]);
  }
  EXPECT_NEAR(m.cum_weights().back(), 1.0, 1e-12);
}

}  // namespace

TEST(PosteriorParams, ConjugateUpdate) {
  const DpParams prior(1.0, BaseMeasure());
  const auto post = dp2s::posterior_params(prior, normal_data(100, 1));
  EXPECT_DOUBLE_EQ(post.concentration(), 101.0);
  EXPECT_DOUBLE_EQ(post.base_weight(), 1.0 / 101.0);
  EXPECT_DOUBLE_EQ(post.base_weight() + post.data_weight(), 1.0);

  const auto post50 = dp2s::posterior_params(DpParams(50.0, BaseMeasure()), normal_data(100, 1));
  EXPECT_DOUBLE_EQ(post50.concentration(), 150.0);
  EXPECT_DOUBLE_EQ(post50.base_weight(), 1.0 / 3.0);

  const auto same = dp2s::posterior_params(prior, std::vector<double>{});
  EXPECT_TRUE(same.is_prior());
  EXPECT_DOUBLE_EQ(same.concentration(), 1.0);
  EXPECT_DOUBLE_EQ(same.base_weight(), 1.0);
}

TEST(PosteriorParams, Errors) {
  const DpParams prior(1.0, BaseMeasure());
  EXPECT_THROW(dp2s::posterior_params(prior, std::vector<double>{1.0, std::nan("")}), std::invalid_argument);
  EXPECT_THROW(dp2s::posterior_params(prior, std::vector<double>{std::numeric_limits<double>::infinity()}),
               std::invalid_argument);
  const auto post = dp2s::posterior_params(prior, std::vector<double>{1.0});
  EXPECT_THROW(dp2s::posterior_params(post, std::vector<double>{2.0}), std::invalid_argument);
  EXPECT_THROW(DpParams(0.0, BaseMeasure()), std::invalid_argument);
}

TEST(GammaArrivals, IncreasingAndLawOfLargeNumbers) {
  RngStream rng(2, 0);
  const auto one = dp2s::gamma_arrivals(1, rng);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_GT(one[0], 0.0);
  const std::size_t n = 100000;
  const auto g = dp2s::gamma_arrivals(n + 1, rng);
  for (std::size_t i = 1; i < g.size(); ++i) ASSERT_LT(g[i - 1], g[i]);
  EXPECT_NEAR(g.back() / static_cast<double>(n + 1), 1.0, 0.02);
}

TEST(Measure, FromLogWeightsSortsAndMergesTies) {
  const auto m = WeightedDiscreteMeasure::from_log_weights({2.0, 0.0, 2.0, 1.0},
                                                           {std::log(0.1), std::log(0.2), std::log(0.3), std::log(0.4)});
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m.atoms()[0], 0.0);
  EXPECT_EQ(m.atoms()[2], 2.0);
  EXPECT_NEAR(std::exp(m.log_weights()[2]), 0.4, 1e-15);
  expect_valid(m);
  EXPECT_THROW(WeightedDiscreteMeasure::from_log_weights({}, {}), std::invalid_argument);
  EXPECT_THROW(WeightedDiscreteMeasure::from_log_weights({1.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(WeightedDiscreteMeasure::from_weights({1.0}, std::vector<double>{-1.0}), std::invalid_argument);
}

TEST(Measure, CdfAt) {
  const auto m = WeightedDiscreteMeasure::from_weights({0.0, 2.0}, std::vector<double>{0.5, 0.5});
  EXPECT_EQ(dp2s::cdf_at(m, -1.0), 0.0);
  EXPECT_DOUBLE_EQ(dp2s::cdf_at(m, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(dp2s::cdf_at(m, 0.0), 0.5);
  EXPECT_NEAR(dp2s::cdf_at(m, 2.0), 1.0, 1e-12);
  EXPECT_NEAR(dp2s::cdf_at(m, 1e9), 1.0, 1e-12);
}

TEST(Measure, EmpiricalWeights) {
  const auto m = WeightedDiscreteMeasure::empirical(std::vector<double>{3.0, 1.0, 3.0, 2.0});
  ASSERT_EQ(m.size(), 3u);
  EXPECT_NEAR(dp2s::cdf_at(m, 2.5), 0.5, 1e-15);
  EXPECT_NEAR(std::exp(m.log_weights()[2]), 0.5, 1e-15);
}

TEST(DrawRealization, SingleAtom) {
  const auto m = dp2s::draw_realization(DpParams(1.0, BaseMeasure()), 1, RngStream(1, 1));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.log_weights()[0], 0.0);
  EXPECT_EQ(m.cum_weights()[0], 1.0);
}

TEST(DrawRealization, NormalizedAcrossSettings) {
  const auto data = normal_data(50, 3);
  std::vector<double> tied = {0.0, 0.0, 1.0, 1.0, 1.0, 2.5};
  for (double a : {0.01, 1.0, 50.0}) {
    for (std::size_t n : {1u, 2u, 10u, 1000u, 5000u}) {
      const DpParams prior(a, BaseMeasure());
      for (const auto& params : {prior, dp2s::posterior_params(prior, data), dp2s::posterior_params(prior, tied)}) {
        const RealizationSampler sampler(params, n);
        for (std::uint64_t rep = 0; rep < 3; ++rep) {
          const auto m = sampler.draw(RngStream(4, rep));
          expect_valid(m);
          ASSERT_LE(m.size(), n);
        }
      }
    }
  }
}

TEST(DrawRealization, MatchesGenericConstruction) {
  // The sampler's bucketed assembly must equal sorting all n atoms.
  const auto data = std::vector<double>{-1.0, 0.5, 0.5, 2.0, 3.0};
  const auto params = dp2s::posterior_params(DpParams(1.0, BaseMeasure()), data);
  const RealizationSampler sampler(params, 200);
  const RngStream rng(5, 5);
  const auto fast = sampler.draw(rng);

  const auto logw = sampler.series_log_weights(rng);
  RngStream atom_rng = rng.lane(1);
  std::vector<double> atoms(200);
  for (double& x : atoms) {
    if (atom_rng.uniform() < params.base_weight()) {
      x = params.base().sample(atom_rng);
    } else {
      x = data[atom_rng.below(data.size())];
    }
  }
  const auto slow = WeightedDiscreteMeasure::from_log_weights(atoms, logw);
  ASSERT_EQ(fast.size(), slow.size());
  for (std::size_t i = 0; i < fast.size(); ++i) {
    ASSERT_EQ(fast.atoms()[i], slow.atoms()[i]);
    ASSERT_NEAR(fast.log_weights()[i], slow.log_weights()[i], 1e-12 * std::max(1.0, std::abs(slow.log_weights()[i])));
    ASSERT_NEAR(fast.cum_weights()[i], slow.cum_weights()[i], 1e-13);
  }
}

TEST(DrawRealization, UnderflowedTiesKeepTheirMass) {
  // a*/n tiny: most weights are far below the double range after
  // normalization, and many atoms land on the same observation.
  const auto params = dp2s::posterior_params(DpParams(1e-3, BaseMeasure()), std::vector<double>{0.0, 1.0});
  const RealizationSampler sampler(params, 3000);
  for (std::uint64_t rep = 0; rep < 5; ++rep) {
    const auto m = sampler.draw(RngStream(6, rep));
    expect_valid(m);
    for (double lw : m.log_weights()) ASSERT_TRUE(std::isfinite(lw));
  }
}

TEST(DrawRealization, Reproducible) {
  const auto params = dp2s::posterior_params(DpParams(1.0, BaseMeasure()), normal_data(30, 7));
  const auto a = dp2s::draw_realization(params, 500, RngStream(8, 1));
  const auto b = dp2s::draw_realization(params, 500, RngStream(8, 1));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a.atoms()[i], b.atoms()[i]);
    ASSERT_EQ(a.cum_weights()[i], b.cum_weights()[i]);
  }
}

TEST(DrawRealization, SeriesWeightsStrictlyDecrease) {
  for (double a : {1.0, 101.0}) {
    const RealizationSampler sampler(DpParams(a, BaseMeasure()), 1000);
    const auto lw = sampler.series_log_weights(RngStream(9, 0));
    for (std::size_t i = 1; i < lw.size(); ++i) ASSERT_LT(lw[i], lw[i - 1]) << "a=" << a << " i=" << i;
  }
}

TEST(DrawRealization, PriorMeanMatchesBaseMean) {
  const RealizationSampler sampler(DpParams(1.0, BaseMeasure()), 1000);
  double total = 0.0;
  for (std::uint64_t rep = 0; rep < 500; ++rep) {
    const auto m = sampler.draw(RngStream(10, rep));
    double mean = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) mean += m.atoms()[i] * std::exp(m.log_weights()[i]);
    total += mean;
  }
  EXPECT_NEAR(total / 500.0, 0.0, 0.15);
}

TEST(DrawRealization, PriorMassFraction) {
  const auto params = dp2s::posterior_params(DpParams(1.0, BaseMeasure()), normal_data(100, 11));
  const RealizationSampler sampler(params, 1000);
  const int reps = 4000;
  double sum = 0.0;
  double ss = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    dp2s::RealizationStats stats;
    (void)sampler.draw(RngStream(12, static_cast<std::uint64_t>(rep)), &stats);
    sum += stats.base_mass;
    ss += stats.base_mass * stats.base_mass;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((ss / reps - mean * mean) / reps);
  EXPECT_NEAR(mean, 1.0 / 101.0, 4.0 * se);
}

TEST(DrawRealization, PosteriorApproachesEmpiricalAsDataGrow) {
  double last = 1.0;
  for (std::size_t m : {10u, 100u, 1000u}) {
    const auto data = normal_data(m, 13 + m);
    const auto empirical = WeightedDiscreteMeasure::empirical(data);
    const RealizationSampler sampler(dp2s::posterior_params(DpParams(1.0, BaseMeasure()), data), 1000);
    double total = 0.0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
      total += dp2s::kolmogorov_distance(sampler.draw(RngStream(14, rep)), empirical);
    }
    const double mean = total / 100.0;
    EXPECT_LT(mean, last) << "m=" << m;
    last = mean;
  }
}

TEST(DrawRealization, BaseMeasureDoesNotMoveWeights) {
  const RealizationSampler normal(DpParams(5.0, BaseMeasure::normal(0, 1)), 400);
  const RealizationSampler uniform(DpParams(5.0, BaseMeasure::uniform(0, 1)), 400);
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto a = normal.draw(RngStream(15, rep));
    const auto b = uniform.draw(RngStream(15, rep));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.cum_weights()[i], b.cum_weights()[i]);
  }
}

TEST(PathsCsv, Format) {
  const auto m = WeightedDiscreteMeasure::from_weights({0.0, 2.0}, std::vector<double>{0.25, 0.75});
  std::vector<dp2s::LabeledPath> paths = {{"x", 1, m}};
  std::ostringstream os;
  dp2s::write_paths_csv(os, paths);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sample,path,atom,cumulative_weight");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 6), "x,1,0,");
  EXPECT_NEAR(std::stod(line.substr(6)), 0.25, 1e-15);
  std::getline(in, line);
  EXPECT_EQ(line, "x,1,2,1");
  EXPECT_FALSE(std::getline(in, line));
}
