#pragma once

#include <memory>
#include <vector>

namespace dp2s {

/// Regularized incomplete gamma functions of Gamma(shape, 1) at x = exp(log_x),
/// returned in log domain so that tiny shapes and tiny x stay representable.
struct IncompleteGammaLog {
  double log_lower;    ///< log P(shape, x)
  double log_upper;    ///< log Q(shape, x) = log(1 - P)
  double log_density;  ///< log(x * f(x)), f the Gamma(shape, 1) density
};

IncompleteGammaLog incomplete_gamma_log(double shape, double log_x);

/// log x where x solves Q(shape, x) = y, i.e. the upper-tail quantile of
/// Gamma(shape, 1). Requires shape > 0 and 0 < y < 1 (std::domain_error
/// otherwise). The result is strictly decreasing in y and accurate to about
/// 1e-12 relative; it is returned as a logarithm because for shape ~ 1e-3 the
/// quantile itself is far below the smallest double.
double gamma_tail_quantile_log(double shape, double y);

/// Upper-tail quantile solver for one fixed shape.
///
/// Construction caches the log-gamma constants and, when `tabulate` is set,
/// a 1024-knot monotone cubic table of log x over logit(y). The table only
/// provides the starting point; every query still ends with Newton steps on
/// the exact log-CDF, so tabulated and direct answers agree to the solver
/// tolerance.
class GammaTailQuantile {
 public:
  explicit GammaTailQuantile(double shape, bool tabulate = true);

  [[nodiscard]] double shape() const { return shape_; }
  [[nodiscard]] bool tabulated() const { return !knots_.empty(); }

  /// log x with Q(shape, x) = y.
  [[nodiscard]] double log_quantile(double y) const;

  /// Same, skipping the table.
  [[nodiscard]] double log_quantile_direct(double y) const;

 private:
  struct Knot {
    double log_x;
    double slope;  // d log_x / d logit(y)
  };

  [[nodiscard]] double solve(double y, double start) const;
  [[nodiscard]] double interpolate(double w) const;

  double shape_;
  double lgamma_shape_;
  double lgamma_shape_p1_;
  std::vector<Knot> knots_;
};

/// Process-wide memo of tabulated solvers keyed by shape. Thread-safe; the
/// returned solver is immutable.
std::shared_ptr<const GammaTailQuantile> shared_gamma_tail_quantile(double shape);

}  // namespace dp2s
