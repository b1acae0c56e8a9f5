#pragma once

// Reference computations shared by the unit and acceptance tests. They avoid
// the library's own code paths on purpose.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "fairdef/data.hpp"

namespace oracle {

// Euclidean projection onto the simplex by enumerating supports: on support S
// the constrained minimizer is v_S - (sum v_S - 1)/|S|; the answer is the
// nearest candidate that is nonnegative.
inline Eigen::VectorXd brute_force_projection(const Eigen::VectorXd& v) {
  const int k = static_cast<int>(v.size());
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    double sum = 0;
    int size = 0;
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) {
        sum += v(i);
        ++size;
      }
    }
    const double shift = (sum - 1.0) / size;
    Eigen::VectorXd cand = Eigen::VectorXd::Zero(k);
    bool feasible = true;
    for (int i = 0; i < k; ++i) {
      if (!(mask & (1u << i))) continue;
      cand(i) = v(i) - shift;
      if (cand(i) < -1e-15) feasible = false;
    }
    if (!feasible) continue;
    const double d = (cand - v).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = cand.cwiseMax(0.0);
    }
  }
  return best;
}

// Positive-rate difference between s=1 and s=0 by plain counting, optionally
// restricted to y=+1 samples.
inline double counting_gap(const fairdef::Dataset& pts, const Eigen::VectorXd& theta,
                           bool positives_only) {
  long hit[2] = {0, 0}, tot[2] = {0, 0};
  for (const auto& p : pts) {
    if (positives_only && p.y != 1) continue;
    double z = 0;
    for (Eigen::Index i = 0; i < p.x.size(); ++i) z += p.x(i) * theta(i);
    z += p.s * theta(p.x.size());
    ++tot[p.s];
    if (z >= 0) ++hit[p.s];
  }
  return static_cast<double>(hit[1]) / static_cast<double>(tot[1]) -
         static_cast<double>(hit[0]) / static_cast<double>(tot[0]);
}

}  // namespace oracle
