#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace dp2s::kernels {

// Data-parallel inner loops of the simulation. Every entry has a scalar
// reference implementation; wider variants are picked at runtime from the
// CPU feature set and are checked against the reference in
// tests/test_kernels.cpp.

struct KernelTable {
  std::string_view name;

  // max of n values; -inf for n == 0. NaN-free input assumed.
  double (*reduce_max)(const double* values, std::size_t n);

  // sum of exp(values[i] - shift). Entries of -inf contribute zero.
  double (*sum_exp_shifted)(const double* values, std::size_t n, double shift);

  // out[i] = exp(values[i] - shift).
  void (*exp_shifted)(const double* values, double* out, std::size_t n, double shift);

  // max over k of |increments[0] + ... + increments[k]|, 0 for n == 0.
  // Integer arithmetic, so every variant returns the same value.
  std::int64_t (*max_abs_prefix_sum)(const std::int32_t* increments, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the variant was not compiled in or the CPU lacks the features.
const KernelTable* avx2_table();

/// Best table for this CPU. Setting DP2S_KERNELS=scalar in the environment
/// forces the reference implementation.
const KernelTable& active_table();

inline double reduce_max(std::span<const double> v) { return active_table().reduce_max(v.data(), v.size()); }

inline double sum_exp_shifted(std::span<const double> v, double shift) {
  return active_table().sum_exp_shifted(v.data(), v.size(), shift);
}

inline void exp_shifted(std::span<const double> v, std::span<double> out, double shift) {
  active_table().exp_shifted(v.data(), out.data(), v.size(), shift);
}

inline std::int64_t max_abs_prefix_sum(std::span<const std::int32_t> v) {
  return active_table().max_abs_prefix_sum(v.data(), v.size());
}

}  // namespace dp2s::kernels
