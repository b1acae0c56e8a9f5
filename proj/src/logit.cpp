#include "fairdef/logit.hpp"

#include <cmath>
#include <string>

#include "fairdef/error.hpp"
#include "fairdef/lbfgs.hpp"

namespace fairdef {

namespace {

Eigen::Index total_count(const GroupedSamples& samples) {
  Eigen::Index n = 0;
  for (const auto& block : samples) n += block.size();
  return n;
}

void check_shapes(const GroupedSamples& samples, Eigen::Index num_weights, Eigen::Index dim) {
  if (static_cast<Eigen::Index>(samples.size()) != num_weights) {
    throw Error(ErrorKind::kShape, std::to_string(samples.size()) + " client blocks but " +
                                       std::to_string(num_weights) + " weights");
  }
  for (std::size_t c = 0; c < samples.size(); ++c) {
    if (samples[c].size() > 0 && samples[c].dim() != dim) {
      throw Error(ErrorKind::kShape, "client " + std::to_string(c) + " has feature dimension " +
                                         std::to_string(samples[c].dim()) + ", model has " +
                                         std::to_string(dim));
    }
  }
}

double reg_scale(Eigen::Index n, double lambda_theta) {
  const double nn = static_cast<double>(n);
  return lambda_theta / (nn * nn);
}

}  // namespace

void InnerSolveConfig::validate() const {
  if (!(lambda_theta > 0.0) || !(tol > 0.0) || max_iter < 1 || memory < 1) {
    throw Error(ErrorKind::kConfig, "inner solver needs lambda_theta > 0, tol > 0, max_iter >= 1");
  }
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ClientSamples to_samples(std::span<const DataPoint> points) {
  ClientSamples out;
  const Eigen::Index dim = points.empty() ? 0 : points.front().x.size() + 1;
  out.a.resize(static_cast<Eigen::Index>(points.size()), dim);
  out.y.resize(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.x.size() + 1 != dim) {
      throw Error(ErrorKind::kShape, "inconsistent feature dimension at sample " + std::to_string(i));
    }
    const auto row = static_cast<Eigen::Index>(i);
    out.a.row(row).head(dim - 1) = p.x.transpose();
    out.a(row, dim - 1) = static_cast<double>(p.s);
    out.y(row) = static_cast<double>(p.y);
  }
  return out;
}

GroupedSamples to_grouped(std::span<const Dataset> per_client, Eigen::Index dim) {
  GroupedSamples out;
  out.reserve(per_client.size());
  for (const auto& points : per_client) {
    if (points.empty()) {
      ClientSamples empty;
      empty.a.resize(0, dim);
      empty.y.resize(0);
      out.push_back(std::move(empty));
    } else {
      out.push_back(to_samples(points));
      if (out.back().dim() != dim) {
        throw Error(ErrorKind::kShape, "client block has dimension " +
                                           std::to_string(out.back().dim()) + ", expected " +
                                           std::to_string(dim));
      }
    }
  }
  return out;
}

GroupedSamples to_grouped(std::span<const Dataset> per_client) {
  Eigen::Index dim = 0;
  for (const auto& points : per_client) {
    if (!points.empty()) {
      dim = points.front().x.size() + 1;
      break;
    }
  }
  return to_grouped(per_client, dim);
}

double weighted_loss(const GroupedSamples& samples, const Eigen::Ref<const Eigen::VectorXd>& w,
                     const Eigen::Ref<const ModelParams>& theta) {
  check_shapes(samples, w.size(), theta.size());
  const Eigen::Index total = total_count(samples);
  if (total == 0) throw Error(ErrorKind::kEmptyInput, "loss over zero samples");
  double sum = 0.0;
  for (std::size_t c = 0; c < samples.size(); ++c) {
    const auto& block = samples[c];
    if (block.size() == 0) continue;
    const Eigen::VectorXd margin = block.y.cwiseProduct(block.a * theta);
    double client_sum = 0.0;
    for (Eigen::Index i = 0; i < margin.size(); ++i) client_sum += softplus(-margin(i));
    sum += w(static_cast<Eigen::Index>(c)) * client_sum;
  }
  return sum / static_cast<double>(total);
}

double regularizer(const Eigen::Ref<const ModelParams>& theta, double lambda_theta) {
  return 0.5 * reg_scale(theta.size(), lambda_theta) * theta.squaredNorm();
}

double regularized_loss(const GroupedSamples& samples, const Eigen::Ref<const Eigen::VectorXd>& w,
                        const Eigen::Ref<const ModelParams>& theta, const InnerSolveConfig& cfg) {
  return weighted_loss(samples, w, theta) + regularizer(theta, cfg.lambda_theta);
}

Eigen::MatrixXd mixed_partial(const GroupedSamples& samples,
                              const Eigen::Ref<const Eigen::VectorXd>& w,
                              const Eigen::Ref<const ModelParams>& theta,
                              const InnerSolveConfig& /*cfg*/) {
  check_shapes(samples, w.size(), theta.size());
  const Eigen::Index total = total_count(samples);
  // no samples: only the regularizer contributes, so the data part is zero
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(theta.size(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t c = 0; c < samples.size(); ++c) {
    const auto& block = samples[c];
    if (block.size() == 0) continue;
    const Eigen::VectorXd margin = block.y.cwiseProduct(block.a * theta);
    Eigen::VectorXd r(margin.size());
    for (Eigen::Index i = 0; i < margin.size(); ++i) r(i) = -block.y(i) * sigmoid(-margin(i));
    out.col(static_cast<Eigen::Index>(c)) = block.a.transpose() * r / static_cast<double>(total);
  }
  return out;
}

Eigen::VectorXd grad_theta(const GroupedSamples& samples, const Eigen::Ref<const Eigen::VectorXd>& w,
                           const Eigen::Ref<const ModelParams>& theta, const InnerSolveConfig& cfg) {
  const Eigen::MatrixXd per_client = mixed_partial(samples, w, theta, cfg);
  return per_client * w + reg_scale(theta.size(), cfg.lambda_theta) * theta;
}

Eigen::MatrixXd hess_theta(const GroupedSamples& samples, const Eigen::Ref<const Eigen::VectorXd>& w,
                           const Eigen::Ref<const ModelParams>& theta, const InnerSolveConfig& cfg) {
  check_shapes(samples, w.size(), theta.size());
  const Eigen::Index n = theta.size();
  const Eigen::Index total = total_count(samples);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  if (total > 0) {
    for (std::size_t c = 0; c < samples.size(); ++c) {
      const auto& block = samples[c];
      const double wc = w(static_cast<Eigen::Index>(c));
      if (block.size() == 0 || wc == 0.0) continue;
      const Eigen::VectorXd z = block.a * theta;
      Eigen::VectorXd root_curv(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double p = sigmoid(z(i));
        root_curv(i) = std::sqrt(p * (1.0 - p));
      }
      const Eigen::MatrixXd scaled = root_curv.asDiagonal() * block.a;
      h.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(),
                                                   wc / static_cast<double>(total));
    }
  }
  h.diagonal().array() += reg_scale(n, cfg.lambda_theta);
  Eigen::MatrixXd full = h.selfadjointView<Eigen::Lower>();
  return full;
}

Eigen::VectorXd client_loss_shares(const GroupedSamples& samples,
                                   const Eigen::Ref<const ModelParams>& theta) {
  const Eigen::Index total = total_count(samples);
  if (total == 0) throw Error(ErrorKind::kEmptyInput, "loss over zero samples");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t c = 0; c < samples.size(); ++c) {
    const auto& block = samples[c];
    if (block.size() == 0) continue;
    if (block.dim() != theta.size()) throw Error(ErrorKind::kShape, "loss dimension mismatch");
    const Eigen::VectorXd margin = block.y.cwiseProduct(block.a * theta);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < margin.size(); ++i) sum += softplus(-margin(i));
    out(static_cast<Eigen::Index>(c)) = sum / static_cast<double>(total);
  }
  return out;
}

InnerSolveResult solve_inner(const GroupedSamples& samples,
                             const Eigen::Ref<const Eigen::VectorXd>& w,
                             const InnerSolveConfig& cfg,
                             const std::optional<ModelParams>& warm_start) {
  cfg.validate();
  Eigen::Index dim = 0;
  bool has_data = false;
  for (std::size_t c = 0; c < samples.size(); ++c) {
    if (samples[c].size() == 0) continue;
    dim = samples[c].dim();
    if (c < static_cast<std::size_t>(w.size()) && w(static_cast<Eigen::Index>(c)) > 0.0) {
      has_data = true;
    }
  }
  if (!has_data) {
    throw Error(ErrorKind::kUnderdetermined, "no client with positive weight holds samples");
  }
  check_shapes(samples, w.size(), dim);
  const double total = static_cast<double>(total_count(samples));
  const double reg = reg_scale(dim, cfg.lambda_theta);

  // Fused loss + gradient; zero-weight clients contribute nothing.
  Eigen::VectorXd r;
  Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    double sum = 0.0;
    grad.setZero(theta.size());
    for (std::size_t c = 0; c < samples.size(); ++c) {
      const auto& block = samples[c];
      const double wc = w(static_cast<Eigen::Index>(c));
      if (block.size() == 0 || wc == 0.0) continue;
      const Eigen::VectorXd margin = block.y.cwiseProduct(block.a * theta);
      r.resize(margin.size());
      double client_sum = 0.0;
      for (Eigen::Index i = 0; i < margin.size(); ++i) {
        client_sum += softplus(-margin(i));
        r(i) = -block.y(i) * sigmoid(-margin(i));
      }
      sum += wc * client_sum;
      grad.noalias() += (wc / total) * (block.a.transpose() * r);
    }
    grad += reg * theta;
    return sum / total + 0.5 * reg * theta.squaredNorm();
  };

  ModelParams x0 = ModelParams::Zero(dim);
  if (warm_start && warm_start->size() == dim && warm_start->allFinite()) x0 = *warm_start;

  LbfgsOptions opt;
  opt.memory = cfg.memory;
  opt.max_iter = cfg.max_iter;
  opt.grad_tol = cfg.tol;
  const LbfgsResult res = lbfgs_minimize(objective, std::move(x0), opt);
  if (!res.x.allFinite() || !std::isfinite(res.f)) {
    throw Error(ErrorKind::kDivergence, "inner solve produced a non-finite iterate");
  }
  InnerSolveResult out;
  out.theta = res.x;
  out.loss = res.f;
  out.grad_inf = res.grad_inf;
  out.iterations = res.iterations;
  out.converged = res.converged;
  return out;
}

int predict(const Eigen::Ref<const ModelParams>& theta, const Eigen::Ref<const Eigen::VectorXd>& a) {
  if (a.size() != theta.size()) {
    throw Error(ErrorKind::kShape, "input has dimension " + std::to_string(a.size()) +
                                       ", model has " + std::to_string(theta.size()));
  }
  return a.dot(theta) >= 0.0 ? 1 : -1;
}

int predict(const Eigen::Ref<const ModelParams>& theta, const DataPoint& point) {
  return predict(theta, point.a());
}

}  // namespace fairdef
