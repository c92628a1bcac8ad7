#include "dp2s/base_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

namespace dp2s {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void validate(const BaseMeasure::Params& params) {
  std::visit(
      Overloaded{
          [](const NormalParams& p) {
            require(std::isfinite(p.mu) && positive_finite(p.sigma), "normal: need finite mu, sigma > 0");
          },
          [](const UniformParams& p) {
            require(std::isfinite(p.lo) && std::isfinite(p.hi) && p.lo < p.hi, "uniform: need lo < hi");
          },
          [](const ExponentialParams& p) { require(positive_finite(p.rate), "exponential: need rate > 0"); },
          [](const StudentTParams& p) { require(positive_finite(p.df), "student t: need df > 0"); },
          [](const LogNormalParams& p) {
            require(std::isfinite(p.mu) && positive_finite(p.sigma), "lognormal: need finite mu, sigma > 0");
          },
          [](const NormalMixtureParams& p) {
            require(!p.components.empty(), "mixture: need at least one component");
            double total = 0.0;
            for (const auto& c : p.components) {
              require(positive_finite(c.weight), "mixture: weights must be positive");
              require(std::isfinite(c.mu) && positive_finite(c.sigma), "mixture: need finite mu, sigma > 0");
              total += c.weight;
            }
            require(std::abs(total - 1.0) <= 1e-12, "mixture: weights must sum to 1");
          },
      },
      params);
}

double standard_normal_quantile(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> parse_numbers(std::string_view text, char sep) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto cut = text.find(sep);
    const std::string token(text.substr(0, cut));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size()) {
      throw std::invalid_argument("base measure: cannot parse number '" + token + "'");
    }
    out.push_back(value);
    if (cut == std::string_view::npos) break;
    text.remove_prefix(cut + 1);
  }
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

BaseMeasure::BaseMeasure() : BaseMeasure(NormalParams{}) {}

BaseMeasure::BaseMeasure(Params params) : params_(std::move(params)) { validate(params_); }

BaseMeasure BaseMeasure::normal(double mu, double sigma) { return BaseMeasure(NormalParams{mu, sigma}); }
BaseMeasure BaseMeasure::uniform(double lo, double hi) { return BaseMeasure(UniformParams{lo, hi}); }
BaseMeasure BaseMeasure::exponential(double rate) { return BaseMeasure(ExponentialParams{rate}); }
BaseMeasure BaseMeasure::student_t(double df) { return BaseMeasure(StudentTParams{df}); }
BaseMeasure BaseMeasure::log_normal(double mu, double sigma) {
  return BaseMeasure(LogNormalParams{mu, sigma});
}
BaseMeasure BaseMeasure::normal_mixture(std::vector<MixtureComponent> components) {
  return BaseMeasure(NormalMixtureParams{std::move(components)});
}

BaseMeasure BaseMeasure::parse(std::string_view text) {
  const auto colon = text.find(':');
  std::string kind(text.substr(0, colon));
  std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char c) { return std::tolower(c); });
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  auto numbers = [&](std::size_t expected, std::vector<double> defaults) {
    if (colon == std::string_view::npos) return defaults;
    auto values = parse_numbers(args, ',');
    if (values.size() != expected) {
      throw std::invalid_argument("base measure '" + kind + "' takes " + std::to_string(expected) +
                                  " parameter(s)");
    }
    return values;
  };

  if (kind == "normal") {
    const auto v = numbers(2, {0.0, 1.0});
    return normal(v[0], v[1]);
  }
  if (kind == "uniform") {
    const auto v = numbers(2, {0.0, 1.0});
    return uniform(v[0], v[1]);
  }
  if (kind == "exponential") {
    const auto v = numbers(1, {1.0});
    return exponential(v[0]);
  }
  if (kind == "studentt" || kind == "t") {
    const auto v = numbers(1, {1.0});
    return student_t(v[0]);
  }
  if (kind == "lognormal") {
    const auto v = numbers(2, {0.0, 1.0});
    return log_normal(v[0], v[1]);
  }
  if (kind == "mixture") {
    if (args.empty()) throw std::invalid_argument("mixture needs components weight/mu/sigma,...");
    std::vector<MixtureComponent> components;
    std::string_view rest = args;
    while (!rest.empty()) {
      const auto cut = rest.find(',');
      const auto v = parse_numbers(rest.substr(0, cut), '/');
      if (v.size() != 3) throw std::invalid_argument("mixture component must be weight/mu/sigma");
      components.push_back({v[0], v[1], v[2]});
      if (cut == std::string_view::npos) break;
      rest.remove_prefix(cut + 1);
    }
    return normal_mixture(std::move(components));
  }
  throw std::invalid_argument("unknown base measure '" + kind + "'");
}

std::string BaseMeasure::describe() const {
  return std::visit(
      Overloaded{
          [](const NormalParams& p) { return "normal:" + format_number(p.mu) + "," + format_number(p.sigma); },
          [](const UniformParams& p) { return "uniform:" + format_number(p.lo) + "," + format_number(p.hi); },
          [](const ExponentialParams& p) { return "exponential:" + format_number(p.rate); },
          [](const StudentTParams& p) { return "studentt:" + format_number(p.df); },
          [](const LogNormalParams& p) {
            return "lognormal:" + format_number(p.mu) + "," + format_number(p.sigma);
          },
          [](const NormalMixtureParams& p) {
            std::string out = "mixture:";
            for (std::size_t i = 0; i < p.components.size(); ++i) {
              const auto& c = p.components[i];
              if (i > 0) out += ",";
              out += format_number(c.weight) + "/" + format_number(c.mu) + "/" + format_number(c.sigma);
            }
            return out;
          },
      },
      params_);
}

double BaseMeasure::cdf(double x) const {
  return std::visit(
      Overloaded{
          [x](const NormalParams& p) { return standard_normal_cdf((x - p.mu) / p.sigma); },
          [x](const UniformParams& p) { return std::clamp((x - p.lo) / (p.hi - p.lo), 0.0, 1.0); },
          [x](const ExponentialParams& p) { return x <= 0.0 ? 0.0 : -std::expm1(-p.rate * x); },
          [x](const StudentTParams& p) {
            if (std::isinf(x)) return x < 0 ? 0.0 : 1.0;
            return boost::math::cdf(boost::math::students_t_distribution<double>(p.df), x);
          },
          [x](const LogNormalParams& p) {
            return x <= 0.0 ? 0.0 : standard_normal_cdf((std::log(x) - p.mu) / p.sigma);
          },
          [x](const NormalMixtureParams& p) {
            double total = 0.0;
            for (const auto& c : p.components) total += c.weight * standard_normal_cdf((x - c.mu) / c.sigma);
            return std::min(total, 1.0);
          },
      },
      params_);
}

double BaseMeasure::quantile(double prob) const {
  if (!(prob > 0.0 && prob < 1.0)) {
    if (prob == 0.0 || prob == 1.0) {
      // Support endpoints.
      return std::visit(
          Overloaded{
              [prob](const UniformParams& p) { return prob == 0.0 ? p.lo : p.hi; },
              [prob](const ExponentialParams&) {
                return prob == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
              },
              [prob](const LogNormalParams&) {
                return prob == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
              },
              [prob](const auto&) {
                return prob == 0.0 ? -std::numeric_limits<double>::infinity()
                                   : std::numeric_limits<double>::infinity();
              },
          },
          params_);
    }
    throw std::domain_error("quantile: probability outside [0, 1]");
  }
  return std::visit(
      Overloaded{
          [prob](const NormalParams& p) { return p.mu + p.sigma * standard_normal_quantile(prob); },
          [prob](const UniformParams& p) { return p.lo + (p.hi - p.lo) * prob; },
          [prob](const ExponentialParams& p) { return -std::log1p(-prob) / p.rate; },
          [prob](const StudentTParams& p) {
            return boost::math::quantile(boost::math::students_t_distribution<double>(p.df), prob);
          },
          [prob](const LogNormalParams& p) {
            return std::exp(p.mu + p.sigma * standard_normal_quantile(prob));
          },
          [prob, this](const NormalMixtureParams& p) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto& c : p.components) {
              lo = std::min(lo, c.mu + c.sigma * standard_normal_quantile(prob));
              hi = std::max(hi, c.mu + c.sigma * standard_normal_quantile(prob));
            }
            if (lo == hi) return lo;
            auto f = [&](double x) { return cdf(x) - prob; };
            boost::uintmax_t iterations = 200;
            const auto root = boost::math::tools::toms748_solve(
                f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
            return 0.5 * (root.first + root.second);
          },
      },
      params_);
}

double BaseMeasure::sample(RngStream& rng) const {
  return std::visit(
      Overloaded{
          [&rng](const NormalParams& p) { return p.mu + p.sigma * sample_standard_normal(rng); },
          [&rng](const UniformParams& p) { return p.lo + (p.hi - p.lo) * rng.uniform_open(); },
          [&rng](const ExponentialParams& p) { return -std::log1p(-rng.uniform_open()) / p.rate; },
          [&rng](const StudentTParams& p) {
            const double z = sample_standard_normal(rng);
            const double v = 2.0 * sample_gamma(0.5 * p.df, rng);
            return z / std::sqrt(v / p.df);
          },
          [&rng](const LogNormalParams& p) { return std::exp(p.mu + p.sigma * sample_standard_normal(rng)); },
          [&rng](const NormalMixtureParams& p) {
            const double pick = rng.uniform();
            double acc = 0.0;
            const MixtureComponent* chosen = &p.components.back();
            for (const auto& c : p.components) {
              acc += c.weight;
              if (pick < acc) {
                chosen = &c;
                break;
              }
            }
            return chosen->mu + chosen->sigma * sample_standard_normal(rng);
          },
      },
      params_);
}

double sample(const BaseMeasure& base, RngStream& rng) { return base.sample(rng); }

double sample_standard_normal(RngStream& rng) { return standard_normal_quantile(rng.uniform_open()); }

double sample_exponential(RngStream& rng) { return -std::log(rng.uniform_open()); }

double sample_gamma(double shape, RngStream& rng) {
  if (!positive_finite(shape)) throw std::invalid_argument("sample_gamma: shape must be positive");
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(rng.uniform_open(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = sample_standard_normal(rng);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace dp2s
