#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dp2s/gamma_quantile.hpp"
#include "dp2s/rng.hpp"

namespace {

struct Reference {
  double shape;
  double y;
  double log_x;
};

// 50-digit solutions of Q(shape, exp(log_x)) = y from
// tests/oracles/gamma_tail_quantile.py.
const Reference kReference[] = {
  {1e-4, 1e-6, 1.1664790572538493066},
  {1e-4, 0.01, -101.08049195721918807},
  {1e-4, 0.5, -6932.0489390216578704},
  {1e-4, 0.99, -46052.278993303118457},
  {1e-4, 0.999999, -138155.68271306494582},
  {1e-3, 1e-6, 1.6331593382170596544},
  {1e-3, 0.01, -10.626705216738380315},
  {1e-3, 0.5, -693.72357415822867896},
  {1e-3, 0.99, -4605.7465795863747376},
  {1e-3, 0.999999, -13816.086951562557474},
  {1e-2, 1e-6, 1.9672876529644697717},
  {1e-2, 0.01, -1.3278271698191642713},
  {1e-2, 0.5, -69.883748850601495494},
  {1e-2, 0.99, -461.08604939341610136},
  {1e-2, 0.999999, -1382.120086591034375},
  {0.1, 1e-6, 2.2467580694529765535},
  {0.1, 0.01, 0.46277621046846415197},
  {0.1, 0.5, -7.4296568410183217081},
  {0.1, 0.99, -46.550426272479310922},
  {0.1, 0.999999, -138.65382999224113828},
  {1, 1e-6, 2.6257919144760108006},
  {1, 0.01, 1.5271796258079011092},
  {1, 0.5, -0.36651292058166432701},
  {1, 0.99, -4.6001492267765799977},
  {1, 0.999999, -13.815510057964065771},
  {10, 1e-6, 3.4876912516924968431},
  {10, 0.01, 2.9329584553884610859},
  {10, 0.5, 2.268895375574469214},
  {10, 0.99, 1.4183256300894131791},
  {10, 0.999999, 0.2443716624112295157},
  {100, 1e-6, 5.0429026965785264501},
  {100, 0.01, 4.8260917624693519661},
  {100, 0.5, 4.601833273877609958},
  {100, 0.99, 4.3594740135442976798},
  {100, 0.999999, 4.0849054990677281179},
};

// Independent upper incomplete gamma at x = exp(log_x). Where x underflows,
// the leading term of the lower series x^s / Gamma(s + 1) is exact to double
// precision.
double oracle_upper(double shape, double log_x) {
  if (log_x < -700.0) return -std::expm1(shape * log_x - std::lgamma(1.0 + shape));
  return boost::math::gamma_q(shape, std::exp(log_x));
}

const double kShapes[] = {1e-3, 1e-2, 0.1, 1.0, 10.0};
const double kProbs[] = {1e-6, 0.01, 0.5, 0.99, 1.0 - 1e-6};

}  // namespace

TEST(GammaTailQuantile, MatchesHighPrecisionReference) {
  for (const auto& r : kReference) {
    const double got = dp2s::gamma_tail_quantile_log(r.shape, r.y);
    EXPECT_NEAR(got, r.log_x, 1e-10 * std::max(1.0, std::abs(r.log_x))) << "shape=" << r.shape << " y=" << r.y;
  }
}

TEST(GammaTailQuantile, TabulatedSolverMatchesReference) {
  for (const auto& r : kReference) {
    const auto solver = dp2s::shared_gamma_tail_quantile(r.shape);
    EXPECT_NEAR(solver->log_quantile(r.y), r.log_x, 1e-10 * std::max(1.0, std::abs(r.log_x)))
        << "shape=" << r.shape << " y=" << r.y;
  }
}

TEST(GammaTailQuantile, ExponentialCase) {
  EXPECT_NEAR(dp2s::gamma_tail_quantile_log(1.0, 0.5), std::log(std::log(2.0)), 1e-14);
  for (double y : {1e-12, 0.1, 0.9, 1.0 - 1e-12}) {
    EXPECT_NEAR(dp2s::gamma_tail_quantile_log(1.0, y), std::log(-std::log(y)), 1e-10) << y;
  }
}

TEST(GammaTailQuantile, TinyShapeMedian) {
  const double u = dp2s::gamma_tail_quantile_log(0.001, 0.5);
  EXPECT_NEAR(u, -693.7, 0.05);
  EXPECT_NEAR(u, (std::lgamma(1.001) + std::log(0.5)) / 0.001, 1e-3);
}

TEST(GammaTailQuantile, GoesToMinusInfinityAsMassApproachesOne) {
  double last = dp2s::gamma_tail_quantile_log(1.0, 0.9);
  for (double gap : {1e-2, 1e-4, 1e-8, 1e-12, 1e-15}) {
    const double u = dp2s::gamma_tail_quantile_log(1.0, 1.0 - gap);
    EXPECT_LT(u, last);
    last = u;
  }
  EXPECT_LT(last, -30.0);
}

TEST(GammaTailQuantile, RoundTripAgainstIndependentIncompleteGamma) {
  for (double s : kShapes) {
    for (double y : kProbs) {
      const double u = dp2s::gamma_tail_quantile_log(s, y);
      EXPECT_NEAR(oracle_upper(s, u), y, 1e-9) << "shape=" << s << " y=" << y;
    }
  }
}

TEST(GammaTailQuantile, StrictlyDecreasingInY) {
  for (double s : {1e-4, 1e-3, 0.1, 1.0, 10.0, 100.0}) {
    const auto solver = dp2s::shared_gamma_tail_quantile(s);
    double last = std::numeric_limits<double>::infinity();
    double last_y = 0.0;
    for (int k = -300; k <= 300; ++k) {
      const double w = k * 0.12;
      const double y = 1.0 / (1.0 + std::exp(-w));
      if (!(y > last_y && y < 1.0)) continue;
      last_y = y;
      const double u = solver->log_quantile(y);
      ASSERT_LT(u, last) << "shape=" << s << " y=" << y;
      last = u;
    }
  }
}

TEST(GammaTailQuantile, TableAgreesWithDirectSolve) {
  dp2s::RngStream rng(17, 0);
  for (double s : {1e-4, 1e-3, 0.0101, 0.5, 1.0, 7.3, 150.0}) {
    const dp2s::GammaTailQuantile tab(s, true);
    const dp2s::GammaTailQuantile direct(s, false);
    ASSERT_TRUE(tab.tabulated());
    ASSERT_FALSE(direct.tabulated());
    for (int i = 0; i < 2000; ++i) {
      const double w = -40.0 + 80.0 * rng.uniform();
      const double y = 1.0 / (1.0 + std::exp(-w));
      if (!(y > 0.0 && y < 1.0)) continue;
      const double a = tab.log_quantile(y);
      const double b = direct.log_quantile(y);
      ASSERT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(b))) << "shape=" << s << " y=" << y;
    }
  }
}

TEST(GammaTailQuantile, DomainErrors) {
  EXPECT_THROW(dp2s::gamma_tail_quantile_log(1.0, 0.0), std::domain_error);
  EXPECT_THROW(dp2s::gamma_tail_quantile_log(1.0, 1.0), std::domain_error);
  EXPECT_THROW(dp2s::gamma_tail_quantile_log(1.0, -0.5), std::domain_error);
  EXPECT_THROW(dp2s::gamma_tail_quantile_log(1.0, std::nan("")), std::domain_error);
  EXPECT_THROW(dp2s::gamma_tail_quantile_log(0.0, 0.5), std::domain_error);
  EXPECT_THROW(dp2s::gamma_tail_quantile_log(-1.0, 0.5), std::domain_error);
  EXPECT_THROW(dp2s::GammaTailQuantile(0.0), std::domain_error);
}

TEST(GammaTailQuantile, SharedSolverIsReused) {
  const auto a = dp2s::shared_gamma_tail_quantile(0.00123);
  const auto b = dp2s::shared_gamma_tail_quantile(0.00123);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_DOUBLE_EQ(a->shape(), 0.00123);
}

TEST(IncompleteGammaLog, ComplementsAndMatchesBoost) {
  for (double s : {1e-3, 0.3, 1.0, 4.0, 60.0}) {
    for (double log_x : {-20.0, -3.0, -0.2, 0.0, 1.0, 2.5, 4.5}) {
      const auto g = dp2s::incomplete_gamma_log(s, log_x);
      EXPECT_NEAR(std::exp(g.log_lower) + std::exp(g.log_upper), 1.0, 1e-13);
      const double x = std::exp(log_x);
      EXPECT_NEAR(std::exp(g.log_upper), boost::math::gamma_q(s, x), 1e-13);
      const double log_xf = s * log_x - x - std::lgamma(s);
      EXPECT_NEAR(g.log_density, log_xf, 1e-10 * std::max(1.0, std::abs(log_xf)));
    }
  }
}
