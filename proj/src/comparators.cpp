#include "dp2s/comparators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dp2s/distance.hpp"
#include "dp2s/dp_approx.hpp"
#include "dp2s/kernels.hpp"
#include "dp2s/rng.hpp"

namespace dp2s {

namespace {

struct Pooled {
  std::vector<double> values;         // sorted
  std::vector<std::uint8_t> from_x;   // label per sorted position
  std::vector<std::size_t> group_end; // end index of each tie group
};

Pooled pool(std::span<const double> x, std::span<const double> y) {
  std::vector<std::pair<double, std::uint8_t>> all;
  all.reserve(x.size() + y.size());
  for (double v : x) all.emplace_back(v, 1);
  for (double v : y) all.emplace_back(v, 0);
  std::sort(all.begin(), all.end());
  Pooled p;
  for (std::size_t i = 0; i < all.size(); ++i) {
    p.values.push_back(all[i].first);
    p.from_x.push_back(all[i].second);
    if (i + 1 == all.size() || all[i + 1].first != all[i].first) p.group_end.push_back(i + 1);
  }
  return p;
}

void check_samples(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("comparator: both samples must be nonempty");
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("comparator: non-finite value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("comparator: non-finite value");
  }
}

// m1 * m2 * D for the labeling `from_x` over the tie groups of the pool.
std::int64_t scaled_statistic(const Pooled& p, std::span<const std::uint8_t> from_x, std::int32_t m1,
                              std::int32_t m2, std::vector<std::int32_t>& steps,
                              const kernels::KernelTable& table) {
  steps.clear();
  std::size_t begin = 0;
  for (std::size_t end : p.group_end) {
    std::int64_t s = 0;
    for (std::size_t i = begin; i < end; ++i) s += from_x[i] ? m2 : -m1;
    if (s > INT32_MAX || s < INT32_MIN) throw std::invalid_argument("classical_ks_test: tie group too large");
    steps.push_back(static_cast<std::int32_t>(s));
    begin = end;
  }
  return table.max_abs_prefix_sum(steps.data(), steps.size());
}

double normal_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

ComparatorResult classical_ks_test(std::span<const double> x, std::span<const double> y, const KsOptions& options) {
  check_samples(x, y);
  ComparatorResult result;
  result.statistic =
      kolmogorov_distance(WeightedDiscreteMeasure::empirical(x), WeightedDiscreteMeasure::empirical(y));
  if (options.permutations == 0) return result;

  const Pooled p = pool(x, y);
  const auto m1 = static_cast<std::int32_t>(x.size());
  const auto m2 = static_cast<std::int32_t>(y.size());
  // Partial sums reach m1 * m2; the wide kernels accumulate in 32 bits.
  const bool fits = static_cast<std::int64_t>(m1) * m2 < (std::int64_t{1} << 31);
  const kernels::KernelTable& table = fits ? kernels::active_table() : kernels::scalar_table();

  std::vector<std::int32_t> steps;
  const std::int64_t observed = scaled_statistic(p, p.from_x, m1, m2, steps, table);
  RngStream rng(options.seed, options.stream_id);
  std::vector<std::uint8_t> labels = p.from_x;
  std::size_t extreme = 0;
  for (std::size_t b = 0; b < options.permutations; ++b) {
    for (std::size_t i = labels.size() - 1; i > 0; --i) std::swap(labels[i], labels[rng.below(i + 1)]);
    if (scaled_statistic(p, labels, m1, m2, steps, table) >= observed) ++extreme;
  }
  result.p_value = static_cast<double>(1 + extreme) / static_cast<double>(options.permutations + 1);
  return result;
}

ComparatorResult wilcoxon_test(std::span<const double> x, std::span<const double> y) {
  check_samples(x, y);
  const Pooled p = pool(x, y);
  const std::size_t m1 = x.size();
  const std::size_t m2 = y.size();
  const std::size_t total = m1 + m2;

  double w = 0.0;
  double tie_term = 0.0;
  std::size_t begin = 0;
  for (std::size_t end : p.group_end) {
    const double mid_rank = 0.5 * static_cast<double>(begin + 1 + end);
    for (std::size_t i = begin; i < end; ++i) {
      if (p.from_x[i]) w += mid_rank;
    }
    const double t = static_cast<double>(end - begin);
    tie_term += t * t * t - t;
    begin = end;
  }

  ComparatorResult result;
  result.statistic = w;
  const bool ties = p.group_end.size() < total;

  if (total <= 10 && !ties) {
    // count[k][s]: subsets of size k of ranks 1..N with rank sum s.
    const std::size_t max_sum = total * (total + 1) / 2;
    std::vector<std::vector<double>> count(m1 + 1, std::vector<double>(max_sum + 1, 0.0));
    count[0][0] = 1.0;
    for (std::size_t rank = 1; rank <= total; ++rank) {
      for (std::size_t k = std::min(rank, m1); k >= 1; --k) {
        for (std::size_t s = max_sum; s >= rank; --s) count[k][s] += count[k - 1][s - rank];
      }
    }
    const auto observed = static_cast<std::size_t>(std::lround(w));
    double all = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      all += count[m1][s];
      if (s <= observed) lower += count[m1][s];
      if (s >= observed) upper += count[m1][s];
    }
    result.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    return result;
  }

  const double n1 = static_cast<double>(m1);
  const double n2 = static_cast<double>(m2);
  const double n = static_cast<double>(total);
  const double z = w - n1 * (n1 + 1.0) / 2.0 - n1 * n2 / 2.0;
  const double sigma = std::sqrt(n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0))));
  if (!(sigma > 0.0)) {
    result.p_value = 1.0;
    return result;
  }
  const double correction = z > 0.0 ? 0.5 : (z < 0.0 ? -0.5 : 0.0);
  const double zc = (z - correction) / sigma;
  result.p_value = std::min(1.0, 2.0 * normal_upper(std::abs(zc)));
  return result;
}

}  // namespace dp2s
