#include "dp2s/gamma_quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace dp2s {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLentzTiny = 1e-300;

// Knots are uniform in w = logit(y) over [-kTableHalfWidth, kTableHalfWidth].
constexpr int kTableKnots = 1024;
constexpr double kTableHalfWidth = 36.0;

// Newton steps below this (relative to max(1, |log x|)) end the iteration;
// quadratic convergence puts the remaining error near the square of it.
constexpr double kStepTolerance = 1e-8;

struct ShapeConstants {
  double shape;
  double lgamma;     // log Gamma(shape)
  double lgamma_p1;  // log Gamma(shape + 1)
};

ShapeConstants make_constants(double shape) {
  if (!(std::isfinite(shape) && shape > 0.0)) throw std::domain_error("gamma quantile: shape must be positive");
  // tgamma1pm1 keeps log Gamma(1 + s) accurate as s -> 0.
  const double lg1 = std::log1p(boost::math::tgamma1pm1(shape));
  return {shape, lg1 - std::log(shape), lg1};
}

IncompleteGammaLog evaluate(const ShapeConstants& c, double log_x) {
  const double s = c.shape;
  const double x = std::exp(log_x);
  if (std::isinf(x)) return {0.0, -kInf, -kInf};
  const double log_density = s * log_x - x - c.lgamma;

  if (x < s + 1.0) {
    // P by its power series; Q through expm1 so it stays accurate when P ~ 1.
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 100000; ++k) {
      term *= x / (s + k);
      sum += term;
      if (term <= sum * 1e-17) break;
    }
    const double log_lower = std::min(s * log_x - x - c.lgamma_p1 + std::log(sum), 0.0);
    return {log_lower, std::log(-std::expm1(log_lower)), log_density};
  }

  // Q by the Legendre continued fraction, modified Lentz evaluation.
  double b = x + 1.0 - s;
  double cf_c = 1.0 / kLentzTiny;
  double cf_d = 1.0 / b;
  double h = cf_d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    cf_d = an * cf_d + b;
    if (std::abs(cf_d) < kLentzTiny) cf_d = kLentzTiny;
    cf_c = b + an / cf_c;
    if (std::abs(cf_c) < kLentzTiny) cf_c = kLentzTiny;
    cf_d = 1.0 / cf_d;
    const double del = cf_d * cf_c;
    h *= del;
    if (std::abs(del - 1.0) <= 1e-16) break;
  }
  const double log_upper = std::min(log_density + std::log(h), 0.0);
  return {std::log(-std::expm1(log_upper)), log_upper, log_density};
}

void check_probability(double y) {
  if (!(y > 0.0 && y < 1.0)) throw std::domain_error("gamma quantile: y must lie in (0, 1)");
}

}  // namespace

IncompleteGammaLog incomplete_gamma_log(double shape, double log_x) {
  return evaluate(make_constants(shape), log_x);
}

GammaTailQuantile::GammaTailQuantile(double shape, bool tabulate) : shape_(shape) {
  const ShapeConstants c = make_constants(shape);
  lgamma_shape_ = c.lgamma;
  lgamma_shape_p1_ = c.lgamma_p1;
  if (!tabulate) return;

  const double h = 2.0 * kTableHalfWidth / (kTableKnots - 1);
  std::vector<Knot> knots(kTableKnots);
  for (int k = 0; k < kTableKnots; ++k) {
    const double w = -kTableHalfWidth + k * h;
    const double y = 1.0 / (1.0 + std::exp(-w));
    const double log_x = solve(y, std::numeric_limits<double>::quiet_NaN());
    const double log_y = -std::log1p(std::exp(-w));
    const double log_1my = -std::log1p(std::exp(w));
    // dy/dw = y (1 - y) and dy/dlog_x = -x f(x).
    knots[k] = {log_x, -std::exp(log_y + log_1my - evaluate(c, log_x).log_density)};
  }
  // Fritsch-Carlson limiter keeps each cubic piece monotone.
  for (int k = 0; k + 1 < kTableKnots; ++k) {
    const double secant = (knots[k + 1].log_x - knots[k].log_x) / h;
    if (secant == 0.0) {
      knots[k].slope = knots[k + 1].slope = 0.0;
      continue;
    }
    const double alpha = knots[k].slope / secant;
    const double beta = knots[k + 1].slope / secant;
    if (alpha < 0.0) knots[k].slope = 0.0;
    if (beta < 0.0) knots[k + 1].slope = 0.0;
    const double norm = alpha * alpha + beta * beta;
    if (norm > 9.0) {
      const double tau = 3.0 / std::sqrt(norm);
      knots[k].slope = tau * alpha * secant;
      knots[k + 1].slope = tau * beta * secant;
    }
  }
  knots_ = std::move(knots);
}

double GammaTailQuantile::interpolate(double w) const {
  const double h = 2.0 * kTableHalfWidth / (kTableKnots - 1);
  const double t = (w + kTableHalfWidth) / h;
  const int j = std::clamp(static_cast<int>(t), 0, kTableKnots - 2);
  const double tau = t - j;
  const double one_m = 1.0 - tau;
  const Knot& a = knots_[j];
  const Knot& b = knots_[j + 1];
  return (1.0 + 2.0 * tau) * one_m * one_m * a.log_x + tau * one_m * one_m * h * a.slope +
         tau * tau * (3.0 - 2.0 * tau) * b.log_x - tau * tau * one_m * h * b.slope;
}

double GammaTailQuantile::log_quantile(double y) const {
  check_probability(y);
  if (knots_.empty()) return solve(y, std::numeric_limits<double>::quiet_NaN());
  const double w = std::log(y) - std::log1p(-y);
  if (std::abs(w) > kTableHalfWidth) return solve(y, std::numeric_limits<double>::quiet_NaN());
  return solve(y, interpolate(w));
}

double GammaTailQuantile::log_quantile_direct(double y) const {
  check_probability(y);
  return solve(y, std::numeric_limits<double>::quiet_NaN());
}

// Safeguarded Newton on u = log x.
//
// For y > 0.5 the residual is log P(e^u) - log(1 - y), otherwise
// log y - log Q(e^u); both increase in u. The bracket uses two bounds valid
// for every shape: P(s, x) <= x^s / Gamma(s + 1) gives the lower end, and the
// Chernoff bound Q(s, x) <= 2^s e^(-x/2) gives the upper end.
double GammaTailQuantile::solve(double y, double start) const {
  const double s = shape_;
  const bool use_lower = y > 0.5;
  const double log_y = std::log(y);
  const double log_p = std::log1p(-y);
  double lo = (log_p + lgamma_shape_p1_) / s;
  double hi = std::log(2.0 * (s * std::numbers::ln2 - log_y));
  if (!(lo < hi)) return lo;

  const ShapeConstants c{s, lgamma_shape_, lgamma_shape_p1_};
  double u = std::isnan(start) ? lo : std::clamp(start, lo, hi);
  for (int iter = 0; iter < 2000; ++iter) {
    const IncompleteGammaLog g = evaluate(c, u);
    double f, slope;
    if (use_lower) {
      f = g.log_lower - log_p;
      slope = std::exp(g.log_density - g.log_lower);
    } else {
      f = log_y - g.log_upper;
      slope = std::exp(g.log_density - g.log_upper);
    }
    if (f == 0.0) return u;
    if (f < 0.0) {
      lo = u;
    } else {
      hi = u;
    }
    const double delta = f / slope;
    if (std::isfinite(delta) && std::abs(delta) <= kStepTolerance * std::max(1.0, std::abs(u))) {
      return u - delta;
    }
    double next = u - delta;
    if (!(next > lo && next < hi)) next = lo + 0.5 * (hi - lo);
    if (next == u || hi - lo <= 1e-15 * std::max(1.0, std::abs(u))) return next;
    u = next;
  }
  return u;
}

double gamma_tail_quantile_log(double shape, double y) {
  check_probability(y);
  return GammaTailQuantile(shape, false).log_quantile_direct(y);
}

std::shared_ptr<const GammaTailQuantile> shared_gamma_tail_quantile(double shape) {
  static std::mutex mutex;
  static std::map<double, std::shared_ptr<const GammaTailQuantile>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(shape); it != cache.end()) return it->second;
  }
  auto solver = std::make_shared<const GammaTailQuantile>(shape, true);
  std::lock_guard lock(mutex);
  if (cache.size() >= 512) cache.clear();
  return cache.emplace(shape, std::move(solver)).first->second;
}

}  // namespace dp2s
