#include "fairdef/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace fairdef {

namespace {

struct LinePoint {
  double alpha = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative
};

// Minimizer of the cubic matching values and slopes at both ends, or the
// bisection point when the cubic is degenerate.
double cubic_min(const LinePoint& lo, const LinePoint& hi) {
  const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
  const double disc = d1 * d1 - lo.d * hi.d;
  if (disc < 0.0 || !std::isfinite(disc)) return 0.5 * (lo.alpha + hi.alpha);
  const double sign = hi.alpha > lo.alpha ? 1.0 : -1.0;
  const double d2 = sign * std::sqrt(disc);
  const double denom = hi.d - lo.d + 2.0 * d2;
  if (denom == 0.0) return 0.5 * (lo.alpha + hi.alpha);
  const double t = hi.alpha - (hi.alpha - lo.alpha) * (hi.d + d2 - d1) / denom;
  return std::isfinite(t) ? t : 0.5 * (lo.alpha + hi.alpha);
}

class LineSearch {
 public:
  LineSearch(const Objective& obj, const Eigen::VectorXd& x, const Eigen::VectorXd& dir, double f0,
             double d0, const LbfgsOptions& opt)
      : obj_(obj), x_(x), dir_(dir), f0_(f0), d0_(d0), opt_(opt) {}

  // On success x_new/g_new/f_new hold the accepted point.
  bool run(double alpha_init) {
    LinePoint prev{0.0, f0_, d0_};
    double alpha = alpha_init;
    for (int i = 0; i < opt_.max_linesearch; ++i) {
      LinePoint cur = eval(alpha);
      if (!std::isfinite(cur.f)) {
        // Back off until the objective is finite again.
        alpha = 0.5 * (prev.alpha + alpha);
        continue;
      }
      if (cur.f > f0_ + opt_.c1 * cur.alpha * d0_ || (i > 0 && cur.f >= prev.f)) {
        return zoom(prev, cur);
      }
      if (wolfe_curvature(cur)) return true;
      if (cur.d >= 0.0) return zoom(cur, prev);
      if (approx_wolfe(cur)) return true;
      prev = cur;
      alpha *= 2.0;
    }
    return false;
  }

  Eigen::VectorXd x_new;
  Eigen::VectorXd g_new;
  double f_new = 0.0;

 private:
  LinePoint eval(double alpha) {
    x_new = x_ + alpha * dir_;
    f_new = obj_(x_new, g_new);
    ++evals_;
    return {alpha, f_new, g_new.dot(dir_)};
  }

  bool wolfe_curvature(const LinePoint& p) const { return std::abs(p.d) <= -opt_.c2 * d0_; }

  // Approximate Wolfe conditions; used once function differences fall below
  // round-off and the exact sufficient-decrease test becomes noise.
  bool approx_wolfe(const LinePoint& p) const {
    const double noise = 1e-14 * std::max(1.0, std::abs(f0_));
    return p.f <= f0_ + noise && p.d <= (2.0 * opt_.c1 - 1.0) * d0_ && p.d >= opt_.c2 * d0_;
  }

  bool zoom(LinePoint lo, LinePoint hi) {
    for (int j = 0; j < opt_.max_linesearch; ++j) {
      const double a = std::min(lo.alpha, hi.alpha);
      const double b = std::max(lo.alpha, hi.alpha);
      const double width = b - a;
      double alpha = cubic_min(lo, hi);
      if (!(alpha > a + 0.1 * width && alpha < b - 0.1 * width)) alpha = 0.5 * (a + b);
      LinePoint cur = eval(alpha);
      if (!std::isfinite(cur.f) || cur.f > f0_ + opt_.c1 * cur.alpha * d0_ || cur.f >= lo.f) {
        if (approx_wolfe(cur)) return true;
        hi = cur;
      } else {
        if (wolfe_curvature(cur)) return true;
        if (cur.d * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
      if (width <= std::numeric_limits<double>::epsilon() * std::max(1.0, b)) break;
    }
    // Fall back to the best point found if it decreases the objective.
    if (lo.alpha > 0.0 && lo.f < f0_) {
      eval(lo.alpha);
      return true;
    }
    return false;
  }

  const Objective& obj_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& dir_;
  double f0_;
  double d0_;
  const LbfgsOptions& opt_;
  int evals_ = 0;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options) {
  LbfgsResult result;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(x.size());
  double f = objective(x, g);
  result.x = x;
  result.f = f;
  result.grad_inf = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  if (!std::isfinite(f) || !g.allFinite()) return result;
  if (result.grad_inf <= options.grad_tol) {
    result.converged = true;
    return result;
  }

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;
  std::vector<double> alpha_buf;
  bool restarted = false;

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    // Two-loop recursion for d = -H g.
    Eigen::VectorXd q = g;
    const std::size_t m = s_hist.size();
    alpha_buf.assign(m, 0.0);
    for (std::size_t k = m; k-- > 0;) {
      alpha_buf[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha_buf[k] * y_hist[k];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha_buf[k] - beta) * s_hist[k];
    }
    Eigen::VectorXd dir = -q;
    double d0 = g.dot(dir);
    if (!(d0 < 0.0)) {
      dir = -g;
      d0 = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;

    LineSearch ls(objective, x, dir, f, d0, options);
    if (!ls.run(alpha0)) {
      if (!s_hist.empty() && !restarted) {
        // Drop curvature history and retry along steepest descent.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        restarted = true;
        --iter;
        continue;
      }
      result.linesearch_failed = true;
      result.iterations = iter - 1;
      break;
    }
    restarted = false;

    Eigen::VectorXd s = ls.x_new - x;
    Eigen::VectorXd yv = ls.g_new - g;
    x = std::move(ls.x_new);
    g = std::move(ls.g_new);
    f = ls.f_new;
    result.iterations = iter;

    const double sy = s.dot(yv);
    if (sy > std::numeric_limits<double>::epsilon() * yv.squaredNorm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    if (!std::isfinite(f) || !x.allFinite()) break;
    if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
      result.converged = true;
      break;
    }
  }

  result.x = x;
  result.f = f;
  result.grad_inf = g.lpNorm<Eigen::Infinity>();
  return result;
}

}  // namespace fairdef
