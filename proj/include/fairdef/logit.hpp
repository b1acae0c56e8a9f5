#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fairdef/data.hpp"

namespace fairdef {

using ModelParams = Eigen::VectorXd;

// Samples of one client in matrix form: row i of `a` is (x_i, s_i), so the
// sensitive attribute is the last column.
struct ClientSamples {
  Eigen::MatrixXd a;
  Eigen::VectorXd y;

  Eigen::Index size() const { return a.rows(); }
  Eigen::Index dim() const { return a.cols(); }
  auto s() const { return a.col(a.cols() - 1); }
};

// Per-client sample blocks; the block index is the client id.
using GroupedSamples = std::vector<ClientSamples>;

ClientSamples to_samples(std::span<const DataPoint> points);
// Empty lists produce 0-row blocks of width `dim`.
GroupedSamples to_grouped(std::span<const Dataset> per_client, Eigen::Index dim);
GroupedSamples to_grouped(std::span<const Dataset> per_client);

struct InnerSolveConfig {
  double lambda_theta = 1e-4;
  // sup-norm of the gradient at which the solver stops
  double tol = 1e-7;
  int max_iter = 1000;
  int memory = 10;

  void validate() const;
};

// log(1 + e^z) without overflow.
double softplus(double z);
// 1 / (1 + e^-z) without overflow.
double sigmoid(double z);

double weighted_loss(const GroupedSamples& samples, const Eigen::Ref<const Eigen::VectorXd>& w,
                     const Eigen::Ref<const ModelParams>& theta);

// lambda/(2 n^2) * |theta|^2
double regularizer(const Eigen::Ref<const ModelParams>& theta, double lambda_theta);

double regularized_loss(const GroupedSamples& samples, const Eigen::Ref<const Eigen::VectorXd>& w,
                        const Eigen::Ref<const ModelParams>& theta, const InnerSolveConfig& cfg);

Eigen::VectorXd grad_theta(const GroupedSamples& samples, const Eigen::Ref<const Eigen::VectorXd>& w,
                           const Eigen::Ref<const ModelParams>& theta, const InnerSolveConfig& cfg);

Eigen::MatrixXd hess_theta(const GroupedSamples& samples, const Eigen::Ref<const Eigen::VectorXd>& w,
                           const Eigen::Ref<const ModelParams>& theta, const InnerSolveConfig& cfg);

// n x K; column c is the theta-gradient of client c's unweighted loss share.
// Independent of w, which is accepted for symmetry with the other derivatives.
Eigen::MatrixXd mixed_partial(const GroupedSamples& samples,
                              const Eigen::Ref<const Eigen::VectorXd>& w,
                              const Eigen::Ref<const ModelParams>& theta,
                              const InnerSolveConfig& cfg);

// Per-client unweighted loss shares (1/N) sum_i softplus(-y a^T theta).
Eigen::VectorXd client_loss_shares(const GroupedSamples& samples,
                                   const Eigen::Ref<const ModelParams>& theta);

struct InnerSolveResult {
  ModelParams theta;
  double loss = 0.0;
  double grad_inf = 0.0;
  int iterations = 0;
  // false when max_iter was reached or the line search stalled; theta is then
  // the last iterate.
  bool converged = false;
};

InnerSolveResult solve_inner(const GroupedSamples& samples,
                             const Eigen::Ref<const Eigen::VectorXd>& w,
                             const InnerSolveConfig& cfg,
                             const std::optional<ModelParams>& warm_start = std::nullopt);

// +1 iff a^T theta >= 0.
int predict(const Eigen::Ref<const ModelParams>& theta, const Eigen::Ref<const Eigen::VectorXd>& a);
int predict(const Eigen::Ref<const ModelParams>& theta, const DataPoint& point);

}  // namespace fairdef
