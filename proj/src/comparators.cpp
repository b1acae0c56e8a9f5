#include "fairdef/comparators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairdef/error.hpp"

namespace fairdef {

namespace {

double median(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  const Eigen::Index k = v.size();
  return k % 2 == 1 ? v(k / 2) : 0.5 * (v(k / 2 - 1) + v(k / 2));
}

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& losses) {
  if (losses.size() == 0) throw Error(ErrorKind::kShape, "empty loss vector");
  if (!losses.allFinite()) throw Error(ErrorKind::kConfig, "client losses must be finite");
}

}  // namespace

LocalModelSet train_local_models(std::span<const Dataset> proxies, const InnerSolveConfig& cfg) {
  LocalModelSet out;
  out.losses.resize(static_cast<Eigen::Index>(proxies.size()));
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  for (std::size_t c = 0; c < proxies.size(); ++c) {
    if (proxies[c].empty()) {
      throw Error(ErrorKind::kEmptyInput, "client " + std::to_string(c) + " has an empty proxy");
    }
    const GroupedSamples own{to_samples(proxies[c])};
    const InnerSolveResult fit = solve_inner(own, one, cfg);
    out.losses(static_cast<Eigen::Index>(c)) = weighted_loss(own, one, fit.theta);
    out.models.push_back(fit.theta);
  }
  return out;
}

Eigen::VectorXd pooled_root_losses(const LocalModelSet& models, std::span<const Dataset> roots) {
  Dataset pooled;
  for (const auto& r : roots) pooled.insert(pooled.end(), r.begin(), r.end());
  if (pooled.empty()) throw Error(ErrorKind::kEmptyInput, "no root data to evaluate losses on");
  const GroupedSamples samples{to_samples(pooled)};
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd out(static_cast<Eigen::Index>(models.models.size()));
  for (std::size_t c = 0; c < models.models.size(); ++c) {
    out(static_cast<Eigen::Index>(c)) = weighted_loss(samples, one, models.models[c]);
  }
  return out;
}

SimplexWeights fedasl_weights(const Eigen::Ref<const Eigen::VectorXd>& losses,
                              const FedAslParams& params) {
  require_finite(losses);
  const Eigen::Index k = losses.size();
  const double med = median(losses);
  const double mean = losses.mean();
  const double sigma = std::sqrt((losses.array() - mean).square().mean());
  if (sigma == 0.0) return SimplexWeights::uniform(k);

  const double radius = params.alpha * sigma;
  const double scale = params.beta * sigma + params.eps;
  Eigen::VectorXd u(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double dist = std::abs(losses(c) - med);
    u(c) = dist <= radius ? 1.0 : std::exp(-(dist - radius) / scale);
  }
  Eigen::VectorXd w = u / u.sum();
  // exact normalization against round-off
  Eigen::Index top = 0;
  w.maxCoeff(&top);
  w(top) += 1.0 - w.sum();
  return SimplexWeights(std::move(w));
}

SimplexWeights fednolowe_weights(const Eigen::Ref<const Eigen::VectorXd>& losses) {
  require_finite(losses);
  const Eigen::Index k = losses.size();
  if ((losses.array() < 0.0).any()) {
    throw Error(ErrorKind::kConfig, "client losses must be nonnegative");
  }
  const double total = losses.sum();
  if (k == 1 || total <= 0.0) return SimplexWeights::uniform(k);
  Eigen::VectorXd w = (1.0 - losses.array() / total) / static_cast<double>(k - 1);
  Eigen::Index top = 0;
  w.maxCoeff(&top);
  w(top) += 1.0 - w.sum();
  return SimplexWeights(std::move(w));
}

ModelParams aggregate_models(const LocalModelSet& models, const SimplexWeights& w) {
  if (static_cast<Eigen::Index>(models.models.size()) != w.size() || models.models.empty()) {
    throw Error(ErrorKind::kShape, "aggregation needs one weight per local model");
  }
  const Eigen::Index dim = models.models.front().size();
  ModelParams out = ModelParams::Zero(dim);
  for (std::size_t c = 0; c < models.models.size(); ++c) {
    if (models.models[c].size() != dim) {
      throw Error(ErrorKind::kShape, "local models differ in dimension");
    }
    out += w[static_cast<Eigen::Index>(c)] * models.models[c];
  }
  return out;
}

InnerSolveResult baseline_global(std::span<const Dataset> proxies, const InnerSolveConfig& cfg) {
  const GroupedSamples samples = to_grouped(proxies);
  const auto k = static_cast<Eigen::Index>(samples.size());
  if (k == 0) throw Error(ErrorKind::kEmptyInput, "baseline needs at least one client");
  return solve_inner(samples, Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k)), cfg);
}

}  // namespace fairdef
