#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "fairdef/data.hpp"
#include "fairdef/logit.hpp"
#include "fairdef/rng.hpp"

namespace testutil {

using fairdef::DataPoint;
using fairdef::Dataset;

// x = (features..., 1); a = (x, s).
inline DataPoint point(std::vector<double> features, int s, int y) {
  DataPoint p;
  p.x.resize(static_cast<Eigen::Index>(features.size()) + 1);
  for (std::size_t i = 0; i < features.size(); ++i) p.x(static_cast<Eigen::Index>(i)) = features[i];
  p.x(p.x.size() - 1) = 1.0;
  p.s = s;
  p.y = y;
  return p;
}

// Gaussian features, s and y weakly tied to the first feature.
inline Dataset random_points(std::size_t n, int features, fairdef::Rng& rng) {
  Dataset out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> f(static_cast<std::size_t>(features));
    for (auto& v : f) v = fairdef::standard_normal(rng);
    const int s = fairdef::uniform_real(rng) < 0.5 + 0.2 * std::tanh(f[0]) ? 1 : 0;
    const int y = f[0] + 0.5 * s + 0.8 * fairdef::standard_normal(rng) > 0 ? 1 : -1;
    out.push_back(point(f, s, y));
  }
  return out;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, fairdef::Rng& rng, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * fairdef::standard_normal(rng);
  return v;
}

inline Eigen::VectorXd random_simplex(Eigen::Index k, fairdef::Rng& rng) {
  Eigen::VectorXd w(k);
  for (Eigen::Index i = 0; i < k; ++i) w(i) = 0.1 + fairdef::uniform_real(rng);
  return w / w.sum();
}

inline double uniform_ab(fairdef::Rng& rng, double lo = -2.0, double hi = 2.0) {
  return lo + (hi - lo) * fairdef::uniform_real(rng);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, std::max(a.cwiseAbs().maxCoeff(),
                                                                b.cwiseAbs().maxCoeff()));
}

}  // namespace testutil
