#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace dp2s {

struct ComparatorResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

struct KsOptions {
  std::size_t permutations = 1000;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// Two-sample Kolmogorov-Smirnov test. The statistic is the Kolmogorov
/// distance between the two empirical measures; the two-sided p-value is
/// (1 + #{permutations with statistic >= observed}) / (permutations + 1)
/// over random relabelings of the pooled sample.
ComparatorResult classical_ks_test(std::span<const double> x, std::span<const double> y, const KsOptions& options = {});

/// Wilcoxon rank-sum test. The statistic is the sum of the mid-ranks of x in
/// the pooled sample. Two-sided p-value: exact enumeration when
/// m1 + m2 <= 10 and there are no ties, otherwise the normal approximation
/// with tie and continuity correction.
ComparatorResult wilcoxon_test(std::span<const double> x, std::span<const double> y);

}  // namespace dp2s
