#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dp2s/rng.hpp"

namespace dp2s {

struct NormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};
struct UniformParams {
  double lo = 0.0;
  double hi = 1.0;
};
struct ExponentialParams {
  double rate = 1.0;
};
struct StudentTParams {
  double df = 1.0;
};
struct LogNormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};
struct MixtureComponent {
  double weight;
  double mu;
  double sigma;
};
struct NormalMixtureParams {
  std::vector<MixtureComponent> components;
};

/// A continuous distribution on the real line: sampler, CDF and quantile.
/// Serves both as the base measure of a Dirichlet process and as a data
/// generator for the simulation studies. Parameters are validated on
/// construction, so every live instance is usable.
class BaseMeasure {
 public:
  using Params = std::variant<NormalParams, UniformParams, ExponentialParams, StudentTParams,
                              LogNormalParams, NormalMixtureParams>;

  /// Standard normal.
  BaseMeasure();
  explicit BaseMeasure(Params params);

  static BaseMeasure normal(double mu, double sigma);
  static BaseMeasure uniform(double lo, double hi);
  static BaseMeasure exponential(double rate);
  static BaseMeasure student_t(double df);
  static BaseMeasure log_normal(double mu, double sigma);
  static BaseMeasure normal_mixture(std::vector<MixtureComponent> components);

  /// Parses "normal", "normal:0,1", "uniform:0,1", "exponential:2",
  /// "studentt:3", "lognormal:0,1" or "mixture:0.5/-2/1,0.5/2/1".
  static BaseMeasure parse(std::string_view text);

  [[nodiscard]] const Params& params() const { return params_; }

  /// Canonical text form; parse(describe()) reproduces the measure.
  [[nodiscard]] std::string describe() const;

  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double quantile(double p) const;

  /// One draw. Normal, uniform, exponential and log-normal draws are
  /// increasing functions of a single uniform, so two such measures driven by
  /// the same stream produce order-coupled samples.
  double sample(RngStream& rng) const;

 private:
  Params params_;
};

double sample(const BaseMeasure& base, RngStream& rng);

/// Standard normal draw by inversion of one open uniform.
double sample_standard_normal(RngStream& rng);

/// Gamma(shape, scale 1) draw (Marsaglia-Tsang, with the U^(1/shape) boost
/// for shape < 1).
double sample_gamma(double shape, RngStream& rng);

/// Unit-mean exponential draw.
double sample_exponential(RngStream& rng);

}  // namespace dp2s
