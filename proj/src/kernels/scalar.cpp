#include <cmath>
#include <cstdlib>
#include <limits>

#include "dp2s/kernels.hpp"

namespace dp2s::kernels {

namespace {

double reduce_max_scalar(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = v[i] > m ? v[i] : m;
  return m;
}

double sum_exp_shifted_scalar(const double* v, std::size_t n, double shift) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - shift);
  return s;
}

void exp_shifted_scalar(const double* v, double* out, std::size_t n, double shift) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(v[i] - shift);
}

std::int64_t max_abs_prefix_sum_scalar(const std::int32_t* v, std::size_t n) {
  std::int64_t run = 0;
  std::int64_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    run += v[i];
    const std::int64_t a = run < 0 ? -run : run;
    best = a > best ? a : best;
  }
  return best;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", reduce_max_scalar, sum_exp_shifted_scalar, exp_shifted_scalar,
                                 max_abs_prefix_sum_scalar};
  return table;
}

}  // namespace dp2s::kernels
