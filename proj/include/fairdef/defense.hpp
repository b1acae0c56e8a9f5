#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairdef/data.hpp"
#include "fairdef/error.hpp"
#include "fairdef/fairness.hpp"
#include "fairdef/logit.hpp"

namespace fairdef {

// Client aggregation weights on the probability simplex.
class SimplexWeights {
 public:
  // Throws a shape error unless the entries are nonnegative and sum to 1
  // within `tol`.
  explicit SimplexWeights(Eigen::VectorXd w, double tol = 1e-12);

  static SimplexWeights uniform(Eigen::Index k);
  static SimplexWeights one_hot(Eigen::Index k, Eigen::Index c);

  const Eigen::VectorXd& vector() const { return w_; }
  Eigen::Index size() const { return w_.size(); }
  double operator[](Eigen::Index c) const { return w_(c); }

 private:
  Eigen::VectorXd w_;
};

// Euclidean projection onto {w : sum w = 1, w >= 0} by the sort-and-threshold
// rule: with u sorted descending, tau_k = (sum_{i<=k} u_i - 1)/k and
// rho = max{k : u_k > tau_k}, the projection is max(v - tau_rho, 0).
SimplexWeights project_simplex(const Eigen::Ref<const Eigen::VectorXd>& v);

struct RhoStep {
  int start_iter = 1;
  double rho = 10.0;
};

struct PenaltyConfig {
  std::vector<RhoStep> rho_schedule = {{1, 10.0}, {401, 100.0}, {801, 1000.0}, {1201, 10000.0}};
  // 0 -> SP penalty only, 1 -> EO penalty only.
  double nu = 0.0;
  int t_max = 2000;
  double outer_lr = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Feed the moments with the hypergradient minus its mean (its component in
  // the simplex's tangent plane). A common offset across clients does not move
  // the projected iterate but would dominate the per-coordinate scaling.
  bool tangent_gradient = true;
  // Zero the moment estimates whenever rho changes.
  bool reset_moments = false;
  InnerSolveConfig inner;

  void validate() const;
  // Penalty weight in force at outer iteration t (1-based).
  double rho_at(int t) const;

  // rho_start, multiplied by `factor` every `every` iterations up to `cap`.
  static std::vector<RhoStep> geometric_schedule(double rho_start, double factor, int every,
                                                 double cap);
  static std::vector<RhoStep> constant_schedule(double rho);
};

struct PenaltyEval {
  double value = 0.0;
  double root_loss = 0.0;
  double dbc_sp = 0.0;
  double dbc_eo = 0.0;
  ModelParams theta;
  int inner_iterations = 0;
  bool inner_converged = false;
};

struct Hypergradient {
  Eigen::VectorXd gradient;
  PenaltyEval eval;
};

// Server-side bilevel problem: inner weighted logistic fit on the proxies,
// outer w-weighted regularized root loss plus DBC penalties on the roots.
class DefenseProblem {
 public:
  DefenseProblem(std::span<const Dataset> proxies, std::span<const Dataset> roots, double nu,
                 InnerSolveConfig inner);
  DefenseProblem(GroupedSamples proxies, GroupedSamples roots, double nu, InnerSolveConfig inner);

  Eigen::Index num_clients() const { return static_cast<Eigen::Index>(proxies_.size()); }
  Eigen::Index dim() const { return dim_; }
  const GroupedSamples& proxies() const { return proxies_; }
  const GroupedSamples& roots() const { return roots_; }
  const InnerSolveConfig& inner_config() const { return inner_; }
  double nu() const { return nu_; }

  InnerSolveResult solve_inner(const Eigen::Ref<const Eigen::VectorXd>& w,
                               const std::optional<ModelParams>& warm_start = std::nullopt) const;

  // P(w) = rootloss(w, theta_w) + (1-nu) rho/2 DBC_SP^2 + nu rho/2 DBC_EO^2.
  PenaltyEval objective(const Eigen::Ref<const Eigen::VectorXd>& w, double rho,
                        const std::optional<ModelParams>& warm_start = std::nullopt) const;

  // Outer objective at a given theta, without solving the inner problem.
  PenaltyEval objective_at(const Eigen::Ref<const Eigen::VectorXd>& w, double rho,
                           const ModelParams& theta) const;

  // grad P(w) = (dtheta/dw)^T dP/dtheta + dP/dw, with dtheta/dw from
  // H dtheta/dw = -d2l/(dtheta dw).
  Hypergradient hypergradient(const Eigen::Ref<const Eigen::VectorXd>& w, double rho,
                              const std::optional<ModelParams>& warm_start = std::nullopt) const;

  // Hypergradient at a supplied inner solution theta.
  Eigen::VectorXd hypergradient_at(const Eigen::Ref<const Eigen::VectorXd>& w, double rho,
                                   const ModelParams& theta) const;

 private:
  void init();

  GroupedSamples proxies_;
  GroupedSamples roots_;
  double nu_ = 0.0;
  InnerSolveConfig inner_;
  Eigen::Index dim_ = 0;
  Eigen::Index root_total_ = 0;
  Eigen::MatrixXd q_sp_;
  Eigen::MatrixXd q_eo_;
};

PenaltyEval penalty_objective(const SimplexWeights& w, std::span<const Dataset> proxies,
                              std::span<const Dataset> roots, const PenaltyConfig& cfg, double rho);

Eigen::VectorXd hypergradient(const SimplexWeights& w, std::span<const Dataset> proxies,
                              std::span<const Dataset> roots, const PenaltyConfig& cfg, double rho);

struct TraceRecord {
  int iter = 0;
  Eigen::VectorXd w;
  double objective = 0.0;
  double rho = 0.0;
  double dbc_sp = 0.0;
  double dbc_eo = 0.0;
  double root_loss = 0.0;
  int inner_iterations = 0;
  bool inner_converged = false;
};

struct DefenseTrace {
  std::vector<TraceRecord> records;
};

// Divergence of the outer loop; carries the trace up to the failing iteration.
class DefenseDivergence : public Error {
 public:
  DefenseDivergence(const std::string& what, DefenseTrace trace)
      : Error(ErrorKind::kDivergence, what), trace_(std::move(trace)) {}

  const DefenseTrace& trace() const { return trace_; }

 private:
  DefenseTrace trace_;
};

struct DefenseResult {
  SimplexWeights weights;
  ModelParams theta;
  DefenseTrace trace;
  bool final_inner_converged = false;
};

// Projected adaptive-moment descent on P(w) from uniform weights, followed by
// the global fit on the proxies with the final weights.
DefenseResult run_defense(std::span<const Dataset> proxies, std::span<const Dataset> roots,
                          const PenaltyConfig& cfg);
DefenseResult run_defense(const DefenseProblem& problem, const PenaltyConfig& cfg);

}  // namespace fairdef
