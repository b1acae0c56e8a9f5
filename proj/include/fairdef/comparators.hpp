#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fairdef/data.hpp"
#include "fairdef/defense.hpp"
#include "fairdef/logit.hpp"

namespace fairdef {

struct LocalModelSet {
  std::vector<ModelParams> models;
  // Mean unregularized logistic loss of each local model on its own proxy.
  Eigen::VectorXd losses;
};

LocalModelSet train_local_models(std::span<const Dataset> proxies, const InnerSolveConfig& cfg);

// Replaces each client's loss with the mean loss of its local model on the
// pooled root data (sensitivity variant of the loss signal).
Eigen::VectorXd pooled_root_losses(const LocalModelSet& models, std::span<const Dataset> roots);

struct FedAslParams {
  double alpha = 0.9;
  double beta = 0.2;
  // Keeps the decay scale positive when beta * sigma underflows.
  double eps = 1e-12;
};

// Median-centred "good region" weighting: clients within alpha * sigma of the
// median loss get unit score, the rest decay exponentially with the excess
// distance measured in units of beta * sigma.
SimplexWeights fedasl_weights(const Eigen::Ref<const Eigen::VectorXd>& losses,
                              const FedAslParams& params = {});

// w_c = (1 - L_c / sum L) / (K - 1).
SimplexWeights fednolowe_weights(const Eigen::Ref<const Eigen::VectorXd>& losses);

ModelParams aggregate_models(const LocalModelSet& models, const SimplexWeights& w);

// Pooled fit on all proxies with uniform client weights.
InnerSolveResult baseline_global(std::span<const Dataset> proxies, const InnerSolveConfig& cfg);

}  // namespace fairdef
