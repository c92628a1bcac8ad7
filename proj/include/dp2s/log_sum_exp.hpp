#pragma once

#include <span>

namespace dp2s {

/// log(sum exp(v_i)) by max shift. Entries may be -inf; the result is -inf
/// only if all of them are. Throws std::invalid_argument on an empty span.
double log_sum_exp(std::span<const double> values);

}  // namespace dp2s
