#include "dp2s/log_sum_exp.hpp"

#include <cmath>
#include <stdexcept>

#include "dp2s/kernels.hpp"

namespace dp2s {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const double top = kernels::reduce_max(values);
  if (std::isinf(top)) return top;
  return top + std::log(kernels::sum_exp_shifted(values, top));
}

}  // namespace dp2s
