#pragma once

#include "dp2s/dp_approx.hpp"

namespace dp2s {

/// Kolmogorov distance sup_x |P(x) - Q(x)| between two discrete measures.
///
/// Both CDFs are constant between consecutive atoms of the merged atom list,
/// so the supremum is a maximum over merged atoms. One linear sweep; an atom
/// present in both measures is evaluated once with both CDFs including it.
double kolmogorov_distance(const WeightedDiscreteMeasure& p, const WeightedDiscreteMeasure& q);

/// Test oracle: evaluates |cdf_at(p, z) - cdf_at(q, z)| independently at
/// every atom z of either measure. O((n1 + n2) log(n1 + n2)).
double kolmogorov_distance_bruteforce(const WeightedDiscreteMeasure& p, const WeightedDiscreteMeasure& q);

}  // namespace dp2s
