#include "dp2s/dp_approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dp2s/kernels.hpp"
#include "dp2s/log_sum_exp.hpp"

namespace dp2s {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this a linear-domain bucket sum has lost precision to underflow and
// its log weight is recomputed from the members' log weights.
constexpr double kLinearFloor = 1e-290;

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace

DpParams::DpParams(double concentration, BaseMeasure base)
    : prior_concentration_(concentration), base_(std::move(base)) {
  if (!(std::isfinite(concentration) && concentration > 0.0)) {
    throw std::invalid_argument("DpParams: concentration must be positive");
  }
}

DpParams posterior_params(const DpParams& prior, std::span<const double> observations) {
  if (!prior.is_prior()) throw std::invalid_argument("posterior_params: prior already conditioned on data");
  for (double v : observations) {
    if (!std::isfinite(v)) throw std::invalid_argument("posterior_params: observations must be finite");
  }
  DpParams out = prior;
  out.data_.assign(observations.begin(), observations.end());
  return out;
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::from_log_weights(std::vector<double> atoms,
                                                                  std::vector<double> log_weights) {
  if (atoms.size() != log_weights.size()) throw std::invalid_argument("measure: atoms/weights size mismatch");
  if (atoms.empty()) throw std::invalid_argument("measure: no atoms");
  for (double a : atoms) {
    if (std::isnan(a)) throw std::invalid_argument("measure: NaN atom");
  }
  const double total = log_sum_exp(log_weights);
  if (!std::isfinite(total)) throw std::invalid_argument("measure: weights must have a positive finite sum");

  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return atoms[i] < atoms[j]; });

  WeightedDiscreteMeasure m;
  for (std::size_t idx : order) {
    const double lw = log_weights[idx] - total;
    if (!m.atoms_.empty() && m.atoms_.back() == atoms[idx]) {
      m.log_weights_.back() = log_add_exp(m.log_weights_.back(), lw);
    } else {
      m.atoms_.push_back(atoms[idx]);
      m.log_weights_.push_back(lw);
    }
  }
  m.cum_weights_.resize(m.atoms_.size());
  double run = 0.0;
  for (std::size_t i = 0; i < m.atoms_.size(); ++i) {
    run += std::exp(m.log_weights_[i]);
    m.cum_weights_[i] = std::min(run, 1.0);
  }
  if (!m.cum_weights_.empty()) m.cum_weights_.back() = 1.0;
  return m;
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::from_weights(std::vector<double> atoms,
                                                              std::span<const double> weights) {
  std::vector<double> logs(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("measure: negative weight");
    logs[i] = std::log(weights[i]);
  }
  return from_log_weights(std::move(atoms), std::move(logs));
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::empirical(std::span<const double> values) {
  std::vector<double> atoms(values.begin(), values.end());
  std::vector<double> logs(values.size(), 0.0);
  return from_log_weights(std::move(atoms), std::move(logs));
}

double WeightedDiscreteMeasure::cdf(double x) const {
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
  if (it == atoms_.begin()) return 0.0;
  return cum_weights_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

double cdf_at(const WeightedDiscreteMeasure& measure, double x) { return measure.cdf(x); }

std::vector<double> gamma_arrivals(std::size_t count, RngStream& rng) {
  std::vector<double> out(count);
  double run = 0.0;
  for (double& g : out) {
    run += sample_exponential(rng);
    g = run;
  }
  return out;
}

RealizationSampler::RealizationSampler(DpParams params, std::size_t truncation)
    : params_(std::move(params)), truncation_(truncation) {
  if (truncation_ < 1) throw std::invalid_argument("RealizationSampler: truncation must be >= 1");
  quantile_ = shared_gamma_tail_quantile(params_.concentration() / static_cast<double>(truncation_));

  const auto data = params_.data();
  unique_values_.assign(data.begin(), data.end());
  std::sort(unique_values_.begin(), unique_values_.end());
  unique_values_.erase(std::unique(unique_values_.begin(), unique_values_.end()), unique_values_.end());
  bucket_of_.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    bucket_of_[i] = static_cast<std::uint32_t>(
        std::lower_bound(unique_values_.begin(), unique_values_.end(), data[i]) - unique_values_.begin());
  }
}

std::vector<double> RealizationSampler::series_log_weights(const RngStream& rng) const {
  RngStream arrivals_rng = rng.lane(0);
  const std::vector<double> arrivals = gamma_arrivals(truncation_ + 1, arrivals_rng);
  const double last = arrivals.back();
  std::vector<double> log_weights(truncation_);
  for (std::size_t i = 0; i < truncation_; ++i) log_weights[i] = quantile_->log_quantile(arrivals[i] / last);
  return log_weights;
}

WeightedDiscreteMeasure RealizationSampler::draw(const RngStream& rng, RealizationStats* stats) const {
  const std::size_t n = truncation_;
  const std::vector<double> log_weights = series_log_weights(rng);

  // Atoms: from H with probability a/(a+m), otherwise a uniformly chosen
  // observation. Data atoms are accumulated per distinct value.
  RngStream atom_rng = rng.lane(1);
  const std::size_t m = bucket_of_.size();
  const double base_weight = params_.base_weight();
  constexpr std::uint32_t kFromBase = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> source(n);
  std::vector<std::pair<double, std::size_t>> base_atoms;
  for (std::size_t i = 0; i < n; ++i) {
    if (m == 0 || atom_rng.uniform() < base_weight) {
      source[i] = kFromBase;
      base_atoms.emplace_back(params_.base().sample(atom_rng), i);
    } else {
      source[i] = bucket_of_[atom_rng.below(m)];
    }
  }
  std::sort(base_atoms.begin(), base_atoms.end());

  const double total = log_sum_exp(log_weights);
  std::vector<double> weights(n);
  kernels::exp_shifted(log_weights, weights, total);

  const std::size_t buckets = unique_values_.size();
  std::vector<double> bucket_sum(buckets, 0.0);
  std::vector<std::uint32_t> bucket_hits(buckets, 0);
  std::vector<std::size_t> bucket_single(buckets, 0);
  double base_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (source[i] == kFromBase) {
      base_mass += weights[i];
      continue;
    }
    bucket_sum[source[i]] += weights[i];
    ++bucket_hits[source[i]];
    bucket_single[source[i]] = i;
  }

  // Log weight of each data bucket. Sums that underflowed are redone by a
  // max-shifted pass over their members.
  std::vector<double> bucket_log(buckets, -kInf);
  std::vector<char> redo(buckets, 0);
  bool any_redo = false;
  for (std::size_t b = 0; b < buckets; ++b) {
    if (bucket_hits[b] == 1) {
      bucket_log[b] = log_weights[bucket_single[b]] - total;
    } else if (bucket_hits[b] > 1 && bucket_sum[b] >= kLinearFloor) {
      bucket_log[b] = std::log(bucket_sum[b]);
    } else if (bucket_hits[b] > 1) {
      redo[b] = 1;
      any_redo = true;
    }
  }
  if (any_redo) {
    std::vector<double> top(buckets, -kInf);
    std::vector<double> shifted(buckets, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (source[i] != kFromBase && redo[source[i]]) top[source[i]] = std::max(top[source[i]], log_weights[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (source[i] != kFromBase && redo[source[i]]) shifted[source[i]] += std::exp(log_weights[i] - top[source[i]]);
    }
    for (std::size_t b = 0; b < buckets; ++b) {
      if (redo[b]) bucket_log[b] = top[b] + std::log(shifted[b]) - total;
    }
  }

  // Merge the occupied data values with the sorted base atoms.
  WeightedDiscreteMeasure out;
  out.atoms_.reserve(n);
  out.log_weights_.reserve(n);
  out.cum_weights_.reserve(n);
  std::vector<double> linear;
  linear.reserve(n);
  auto push = [&](double atom, double log_w, double lin_w) {
    if (!out.atoms_.empty() && out.atoms_.back() == atom) {
      out.log_weights_.back() = log_add_exp(out.log_weights_.back(), log_w);
      linear.back() += lin_w;
      return;
    }
    out.atoms_.push_back(atom);
    out.log_weights_.push_back(log_w);
    linear.push_back(lin_w);
  };
  std::size_t b = 0;
  std::size_t k = 0;
  while (b < buckets || k < base_atoms.size()) {
    if (b < buckets && bucket_hits[b] == 0) {
      ++b;
      continue;
    }
    if (k == base_atoms.size() || (b < buckets && unique_values_[b] <= base_atoms[k].first)) {
      push(unique_values_[b], bucket_log[b], bucket_sum[b]);
      ++b;
    } else {
      const std::size_t i = base_atoms[k].second;
      push(base_atoms[k].first, log_weights[i] - total, weights[i]);
      ++k;
    }
  }
  double run = 0.0;
  for (double w : linear) {
    run += w;
    out.cum_weights_.push_back(std::min(run, 1.0));
  }
  if (!out.cum_weights_.empty()) out.cum_weights_.back() = 1.0;

  if (stats != nullptr) {
    stats->base_mass = base_mass;
    stats->base_atom_count = base_atoms.size();
  }
  return out;
}

WeightedDiscreteMeasure draw_realization(const DpParams& params, std::size_t truncation, const RngStream& rng) {
  return RealizationSampler(params, truncation).draw(rng);
}

void write_paths_csv(std::ostream& out, std::span<const LabeledPath> paths) {
  const auto old_precision = out.precision(17);
  out << "sample,path,atom,cumulative_weight\n";
  for (const auto& p : paths) {
    const auto atoms = p.measure.atoms();
    const auto cum = p.measure.cum_weights();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      out << p.sample << ',' << p.path << ',' << atoms[i] << ',' << cum[i] << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace dp2s
