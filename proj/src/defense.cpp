#include "fairdef/defense.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "fairdef/error.hpp"

namespace fairdef {

SimplexWeights::SimplexWeights(Eigen::VectorXd w, double tol) : w_(std::move(w)) {
  if (w_.size() == 0) throw Error(ErrorKind::kShape, "simplex weights must be nonempty");
  if (!w_.allFinite() || (w_.array() < 0.0).any() || std::abs(w_.sum() - 1.0) > tol) {
    throw Error(ErrorKind::kShape, "vector is not on the probability simplex");
  }
}

SimplexWeights SimplexWeights::uniform(Eigen::Index k) {
  return SimplexWeights(Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k)));
}

SimplexWeights SimplexWeights::one_hot(Eigen::Index k, Eigen::Index c) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
  w(c) = 1.0;
  return SimplexWeights(std::move(w));
}

SimplexWeights project_simplex(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index k = v.size();
  if (k == 0) throw Error(ErrorKind::kShape, "cannot project an empty vector");
  if (!v.allFinite()) throw Error(ErrorKind::kShape, "cannot project a non-finite vector");

  std::vector<double> u(v.data(), v.data() + k);
  std::sort(u.begin(), u.end(), std::greater<>());
  double prefix = 0.0;
  double tau = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    prefix += u[static_cast<std::size_t>(j)];
    const double tau_j = (prefix - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - tau_j > 0.0) tau = tau_j;
  }
  Eigen::VectorXd w = (v.array() - tau).max(0.0);
  // Round-off can leave the sum a few ulps away from 1; fold it into the
  // largest entry, which is always strictly positive.
  Eigen::Index top = 0;
  w.maxCoeff(&top);
  w(top) += 1.0 - w.sum();
  return SimplexWeights(std::move(w));
}

void PenaltyConfig::validate() const {
  inner.validate();
  if (rho_schedule.empty()) throw Error(ErrorKind::kConfig, "empty rho schedule");
  for (std::size_t i = 0; i < rho_schedule.size(); ++i) {
    if (!(rho_schedule[i].rho >= 0.0)) throw Error(ErrorKind::kConfig, "rho must be >= 0");
    if (i > 0 && (rho_schedule[i].rho < rho_schedule[i - 1].rho ||
                  rho_schedule[i].start_iter <= rho_schedule[i - 1].start_iter)) {
      throw Error(ErrorKind::kConfig, "rho schedule must be nondecreasing in iteration order");
    }
  }
  if (!(nu >= 0.0 && nu <= 1.0)) throw Error(ErrorKind::kConfig, "nu must lie in [0,1]");
  if (t_max < 0) throw Error(ErrorKind::kConfig, "t_max must be >= 0");
  if (!(outer_lr > 0.0)) throw Error(ErrorKind::kConfig, "outer learning rate must be > 0");
}

double PenaltyConfig::rho_at(int t) const {
  double rho = rho_schedule.front().rho;
  for (const auto& step : rho_schedule) {
    if (t >= step.start_iter) rho = step.rho;
  }
  return rho;
}

std::vector<RhoStep> PenaltyConfig::geometric_schedule(double rho_start, double factor, int every,
                                                       double cap) {
  std::vector<RhoStep> out;
  double rho = rho_start;
  int start = 1;
  while (true) {
    out.push_back({start, std::min(rho, cap)});
    if (rho >= cap || factor <= 1.0 || every <= 0) break;
    rho *= factor;
    start += every;
  }
  return out;
}

std::vector<RhoStep> PenaltyConfig::constant_schedule(double rho) { return {{1, rho}}; }

DefenseProblem::DefenseProblem(std::span<const Dataset> proxies, std::span<const Dataset> roots,
                               double nu, InnerSolveConfig inner)
    : nu_(nu), inner_(inner) {
  Eigen::Index dim = 0;
  for (const auto& list : proxies) {
    if (!list.empty()) {
      dim = list.front().x.size() + 1;
      break;
    }
  }
  proxies_ = to_grouped(proxies, dim);
  roots_ = to_grouped(roots, dim);
  init();
}

DefenseProblem::DefenseProblem(GroupedSamples proxies, GroupedSamples roots, double nu,
                               InnerSolveConfig inner)
    : proxies_(std::move(proxies)), roots_(std::move(roots)), nu_(nu), inner_(inner) {
  init();
}

void DefenseProblem::init() {
  inner_.validate();
  if (proxies_.empty()) throw Error(ErrorKind::kShape, "defense needs at least one client");
  if (proxies_.size() != roots_.size()) {
    throw Error(ErrorKind::kShape, std::to_string(proxies_.size()) + " proxy sets but " +
                                       std::to_string(roots_.size()) + " root sets");
  }
  if (!(nu_ >= 0.0 && nu_ <= 1.0)) throw Error(ErrorKind::kConfig, "nu must lie in [0,1]");
  dim_ = 0;
  for (const auto& block : proxies_) {
    if (block.size() > 0) dim_ = block.dim();
  }
  if (dim_ == 0) throw Error(ErrorKind::kEmptyInput, "every proxy dataset is empty");
  for (std::size_t c = 0; c < roots_.size(); ++c) {
    if (roots_[c].size() == 0) {
      throw Error(ErrorKind::kEmptyInput, "client " + std::to_string(c) + " has no root data");
    }
    root_total_ += roots_[c].size();
  }
  q_sp_ = dbc_terms(roots_, Metric::kSP);
  q_eo_ = dbc_terms(roots_, Metric::kEO);
  if (q_sp_.rows() != dim_) throw Error(ErrorKind::kShape, "root and proxy dimensions differ");
}

InnerSolveResult DefenseProblem::solve_inner(const Eigen::Ref<const Eigen::VectorXd>& w,
                                             const std::optional<ModelParams>& warm_start) const {
  return fairdef::solve_inner(proxies_, w, inner_, warm_start);
}

PenaltyEval DefenseProblem::objective_at(const Eigen::Ref<const Eigen::VectorXd>& w, double rho,
                                         const ModelParams& theta) const {
  PenaltyEval out;
  out.theta = theta;
  out.root_loss = regularized_loss(roots_, w, theta, inner_);
  out.dbc_sp = theta.dot(q_sp_ * w);
  out.dbc_eo = theta.dot(q_eo_ * w);
  out.value = out.root_loss + (1.0 - nu_) * 0.5 * rho * out.dbc_sp * out.dbc_sp +
              nu_ * 0.5 * rho * out.dbc_eo * out.dbc_eo;
  return out;
}

PenaltyEval DefenseProblem::objective(const Eigen::Ref<const Eigen::VectorXd>& w, double rho,
                                      const std::optional<ModelParams>& warm_start) const {
  const InnerSolveResult inner = solve_inner(w, warm_start);
  PenaltyEval out = objective_at(w, rho, inner.theta);
  out.inner_iterations = inner.iterations;
  out.inner_converged = inner.converged;
  return out;
}

Eigen::VectorXd DefenseProblem::hypergradient_at(const Eigen::Ref<const Eigen::VectorXd>& w,
                                                 double rho, const ModelParams& theta) const {
  const Eigen::MatrixXd h = hess_theta(proxies_, w, theta, inner_);
  const Eigen::MatrixXd mixed = mixed_partial(proxies_, w, theta, inner_);
  const Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "inner Hessian is not positive definite");
  }
  // dtheta/dw, one factorization and K right-hand sides.
  const Eigen::MatrixXd dtheta_dw = llt.solve(-mixed);

  const Eigen::VectorXd qsp_w = q_sp_ * w;
  const Eigen::VectorXd qeo_w = q_eo_ * w;
  const double d_sp = theta.dot(qsp_w);
  const double d_eo = theta.dot(qeo_w);
  const double k_sp = (1.0 - nu_) * rho * d_sp;
  const double k_eo = nu_ * rho * d_eo;

  const Eigen::VectorXd dp_dtheta =
      grad_theta(roots_, w, theta, inner_) + k_sp * qsp_w + k_eo * qeo_w;
  const Eigen::VectorXd dp_dw = client_loss_shares(roots_, theta) +
                                k_sp * (q_sp_.transpose() * theta) +
                                k_eo * (q_eo_.transpose() * theta);
  return dtheta_dw.transpose() * dp_dtheta + dp_dw;
}

Hypergradient DefenseProblem::hypergradient(const Eigen::Ref<const Eigen::VectorXd>& w, double rho,
                                            const std::optional<ModelParams>& warm_start) const {
  Hypergradient out;
  out.eval = objective(w, rho, warm_start);
  out.gradient = hypergradient_at(w, rho, out.eval.theta);
  return out;
}

PenaltyEval penalty_objective(const SimplexWeights& w, std::span<const Dataset> proxies,
                              std::span<const Dataset> roots, const PenaltyConfig& cfg,
                              double rho) {
  const DefenseProblem problem(proxies, roots, cfg.nu, cfg.inner);
  return problem.objective(w.vector(), rho);
}

Eigen::VectorXd hypergradient(const SimplexWeights& w, std::span<const Dataset> proxies,
                              std::span<const Dataset> roots, const PenaltyConfig& cfg,
                              double rho) {
  const DefenseProblem problem(proxies, roots, cfg.nu, cfg.inner);
  return problem.hypergradient(w.vector(), rho).gradient;
}

DefenseResult run_defense(const DefenseProblem& problem, const PenaltyConfig& cfg) {
  cfg.validate();
  const Eigen::Index k = problem.num_clients();
  DefenseResult result{SimplexWeights::uniform(k), ModelParams(), DefenseTrace(), false};
  result.trace.records.reserve(static_cast<std::size_t>(cfg.t_max));

  Eigen::VectorXd w = result.weights.vector();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
  std::optional<ModelParams> warm;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  for (int t = 1; t <= cfg.t_max; ++t) {
    const double rho = cfg.rho_at(t);
    if (cfg.reset_moments && t > 1 && rho != cfg.rho_at(t - 1)) {
      m.setZero();
      v.setZero();
      beta1_pow = 1.0;
      beta2_pow = 1.0;
    }
    const Hypergradient hg = problem.hypergradient(w, rho, warm);

    TraceRecord rec;
    rec.iter = t;
    rec.w = w;
    rec.objective = hg.eval.value;
    rec.rho = rho;
    rec.dbc_sp = hg.eval.dbc_sp;
    rec.dbc_eo = hg.eval.dbc_eo;
    rec.root_loss = hg.eval.root_loss;
    rec.inner_iterations = hg.eval.inner_iterations;
    rec.inner_converged = hg.eval.inner_converged;
    result.trace.records.push_back(std::move(rec));

    if (!std::isfinite(hg.eval.value) || !hg.gradient.allFinite()) {
      throw DefenseDivergence("non-finite penalty objective at outer iteration " +
                                  std::to_string(t),
                              std::move(result.trace));
    }
    warm = hg.eval.theta;

    beta1_pow *= cfg.adam_beta1;
    beta2_pow *= cfg.adam_beta2;
    Eigen::VectorXd g = hg.gradient;
    if (cfg.tangent_gradient) g.array() -= g.mean();
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseAbs2();
    const Eigen::VectorXd m_hat = m / (1.0 - beta1_pow);
    const Eigen::VectorXd v_hat = v / (1.0 - beta2_pow);
    const Eigen::VectorXd step =
        (cfg.outer_lr * m_hat.array() / (v_hat.array().sqrt() + cfg.adam_eps)).matrix();
    w = project_simplex(w - step).vector();
  }

  result.weights = SimplexWeights(w);
  const InnerSolveResult final_fit = problem.solve_inner(w, warm);
  result.theta = final_fit.theta;
  result.final_inner_converged = final_fit.converged;
  return result;
}

DefenseResult run_defense(std::span<const Dataset> proxies, std::span<const Dataset> roots,
                          const PenaltyConfig& cfg) {
  const DefenseProblem problem(proxies, roots, cfg.nu, cfg.inner);
  return run_defense(problem, cfg);
}

}  // namespace fairdef
