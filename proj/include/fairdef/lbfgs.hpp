#pragma once

#include <functional>

#include <Eigen/Dense>

namespace fairdef {

struct LbfgsOptions {
  int memory = 10;
  int max_iter = 1000;
  // stop when |grad|_inf <= grad_tol
  double grad_tol = 1e-7;
  // strong-Wolfe constants
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_linesearch = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_inf = 0.0;
  int iterations = 0;
  bool converged = false;
  bool linesearch_failed = false;
};

// Returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Limited-memory BFGS with a strong-Wolfe line search (bracketing + zoom with
// cubic interpolation). Deterministic for a given objective and start point.
LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options);

}  // namespace fairdef
