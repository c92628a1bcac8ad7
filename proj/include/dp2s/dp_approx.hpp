#pragma once

#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dp2s/base_measure.hpp"
#include "dp2s/gamma_quantile.hpp"
#include "dp2s/rng.hpp"

namespace dp2s {

/// Parameters of a Dirichlet process DP(a + m, H*), where
/// H* = a/(a+m) H + m/(a+m) (empirical measure of the data).
/// With no data this is the prior DP(a, H).
class DpParams {
 public:
  DpParams(double concentration, BaseMeasure base);

  /// Total concentration a + m.
  [[nodiscard]] double concentration() const { return prior_concentration_ + static_cast<double>(data_.size()); }
  [[nodiscard]] double prior_concentration() const { return prior_concentration_; }
  [[nodiscard]] const BaseMeasure& base() const { return base_; }
  [[nodiscard]] std::span<const double> data() const { return data_; }
  [[nodiscard]] bool is_prior() const { return data_.empty(); }

  /// Mixture weight on H, a/(a+m).
  [[nodiscard]] double base_weight() const { return prior_concentration_ / concentration(); }
  /// Mixture weight on the empirical measure, m/(a+m).
  [[nodiscard]] double data_weight() const { return static_cast<double>(data_.size()) / concentration(); }

 private:
  friend DpParams posterior_params(const DpParams& prior, std::span<const double> observations);

  double prior_concentration_;
  BaseMeasure base_;
  std::vector<double> data_;
};

/// Conjugate update: concentration a + m, base mixture a/(a+m) H + m/(a+m) F_m.
/// The prior must not already carry data; observations must be finite.
DpParams posterior_params(const DpParams& prior, std::span<const double> observations);

/// A discrete probability measure with strictly ascending atoms.
class WeightedDiscreteMeasure {
 public:
  WeightedDiscreteMeasure() = default;

  /// Normalizes the weights (log_sum_exp), sorts by atom and merges ties.
  static WeightedDiscreteMeasure from_log_weights(std::vector<double> atoms, std::vector<double> log_weights);

  /// Linear-domain convenience; weights must be nonnegative with positive sum.
  static WeightedDiscreteMeasure from_weights(std::vector<double> atoms, std::span<const double> weights);

  /// Equal weight on every value (ties merged). The empirical measure.
  static WeightedDiscreteMeasure empirical(std::span<const double> values);

  [[nodiscard]] std::size_t size() const { return atoms_.size(); }
  [[nodiscard]] bool empty() const { return atoms_.empty(); }
  [[nodiscard]] std::span<const double> atoms() const { return atoms_; }
  [[nodiscard]] std::span<const double> log_weights() const { return log_weights_; }
  /// cum_weights()[i] = total weight of atoms 0..i.
  [[nodiscard]] std::span<const double> cum_weights() const { return cum_weights_; }

  /// Right-continuous step CDF.
  [[nodiscard]] double cdf(double x) const;

  /// Applies a strictly increasing map to every atom; weights unchanged.
  template <class F>
  [[nodiscard]] WeightedDiscreteMeasure transformed(F&& increasing) const {
    WeightedDiscreteMeasure out = *this;
    for (double& a : out.atoms_) a = increasing(a);
    return out;
  }

 private:
  friend class RealizationSampler;

  std::vector<double> atoms_;
  std::vector<double> log_weights_;
  std::vector<double> cum_weights_;
};

double cdf_at(const WeightedDiscreteMeasure& measure, double x);

/// Partial sums E_1, E_1 + E_2, ... of `count` unit exponentials.
std::vector<double> gamma_arrivals(std::size_t count, RngStream& rng);

/// Per-draw diagnostics.
struct RealizationStats {
  double base_mass = 0.0;            ///< total weight on atoms drawn from H
  std::size_t base_atom_count = 0;   ///< number of the n atoms drawn from H
};

/// Draws truncated realizations of one DP with the normalized
/// Gamma-tail-quantile series: n atoms from the base mixture, n + 1 gamma
/// arrivals, and log weight i = log G^{-1}(Gamma_i / Gamma_{n+1}) for the
/// Gamma(concentration/n, 1) tail quantile G^{-1}.
///
/// Immutable after construction; draw() may run concurrently. Lane 0 of the
/// stream feeds the arrivals and lane 1 the atoms, so changing the base
/// measure never perturbs the weights.
class RealizationSampler {
 public:
  RealizationSampler(DpParams params, std::size_t truncation);

  [[nodiscard]] const DpParams& params() const { return params_; }
  [[nodiscard]] std::size_t truncation() const { return truncation_; }

  [[nodiscard]] WeightedDiscreteMeasure draw(const RngStream& rng, RealizationStats* stats = nullptr) const;

  /// The unnormalized log weights in series order (decreasing), from the
  /// arrivals of `rng`. Exposed for testing.
  [[nodiscard]] std::vector<double> series_log_weights(const RngStream& rng) const;

 private:
  DpParams params_;
  std::size_t truncation_;
  std::shared_ptr<const GammaTailQuantile> quantile_;
  std::vector<double> unique_values_;      // sorted distinct data values
  std::vector<std::uint32_t> bucket_of_;   // data index -> unique value index
};

WeightedDiscreteMeasure draw_realization(const DpParams& params, std::size_t truncation, const RngStream& rng);

/// One realization for path export.
struct LabeledPath {
  std::string sample;
  std::size_t path;
  WeightedDiscreteMeasure measure;
};

/// CSV with header "sample,path,atom,cumulative_weight", one row per atom.
void write_paths_csv(std::ostream& out, std::span<const LabeledPath> paths);

}  // namespace dp2s
