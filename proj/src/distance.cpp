#include "dp2s/distance.hpp"

#include <algorithm>
#include <cmath>

namespace dp2s {

double kolmogorov_distance(const WeightedDiscreteMeasure& p, const WeightedDiscreteMeasure& q) {
  const auto pa = p.atoms();
  const auto qa = q.atoms();
  const auto pc = p.cum_weights();
  const auto qc = q.cum_weights();
  const std::size_t np = pa.size();
  const std::size_t nq = qa.size();

  std::size_t i = 0;
  std::size_t j = 0;
  double cp = 0.0;
  double cq = 0.0;
  double best = 0.0;
  while (i < np || j < nq) {
    if (j == nq || (i < np && pa[i] < qa[j])) {
      cp = pc[i++];
    } else if (i == np || qa[j] < pa[i]) {
      cq = qc[j++];
    } else {
      cp = pc[i++];
      cq = qc[j++];
    }
    best = std::max(best, std::abs(cp - cq));
  }
  return best;
}

double kolmogorov_distance_bruteforce(const WeightedDiscreteMeasure& p, const WeightedDiscreteMeasure& q) {
  double best = 0.0;
  for (const auto* m : {&p, &q}) {
    for (double z : m->atoms()) best = std::max(best, std::abs(cdf_at(p, z) - cdf_at(q, z)));
  }
  return best;
}

}  // namespace dp2s
