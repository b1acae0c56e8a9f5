#include "fairdef/fairness.hpp"

#include <cmath>
#include <string>

#include "fairdef/error.hpp"

namespace fairdef {

std::string_view to_string(Metric metric) { return metric == Metric::kSP ? "sp" : "eo"; }

Metric parse_metric(std::string_view text) {
  if (text == "sp" || text == "SP") return Metric::kSP;
  if (text == "eo" || text == "EO") return Metric::kEO;
  throw Error(ErrorKind::kConfig, "unknown fairness metric '" + std::string(text) + "'");
}

FairnessBudget FairnessBudget::unbounded(Metric metric) {
  FairnessBudget b;
  b.eps_sp = std::numeric_limits<double>::infinity();
  b.eps_eo = std::numeric_limits<double>::infinity();
  b.metric = metric;
  return b;
}

Eigen::MatrixXd dbc_terms(const GroupedSamples& roots, Metric metric) {
  Eigen::Index total = 0;
  Eigen::Index dim = 0;
  double s_sum = 0.0;
  for (const auto& block : roots) {
    total += block.size();
    if (block.size() > 0) {
      dim = block.dim();
      s_sum += block.s().sum();
    }
  }
  if (total == 0) throw Error(ErrorKind::kMetric, "DBC over empty root data");
  const double s_avg = s_sum / static_cast<double>(total);

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(roots.size()));
  for (std::size_t c = 0; c < roots.size(); ++c) {
    const auto& block = roots[c];
    if (block.size() == 0) continue;
    if (block.dim() != dim) throw Error(ErrorKind::kShape, "root blocks differ in dimension");
    Eigen::VectorXd coef = block.s().array() - s_avg;
    if (metric == Metric::kEO) coef.array() *= (1.0 + block.y.array()) * 0.5;
    q.col(static_cast<Eigen::Index>(c)) = block.a.transpose() * coef / static_cast<double>(total);
  }
  return q;
}

double dbc(const GroupedSamples& roots, const Eigen::Ref<const Eigen::VectorXd>& w,
           const Eigen::Ref<const ModelParams>& theta, Metric metric) {
  if (static_cast<Eigen::Index>(roots.size()) != w.size()) {
    throw Error(ErrorKind::kShape, "DBC weights do not match the number of root blocks");
  }
  const Eigen::MatrixXd q = dbc_terms(roots, metric);
  if (q.rows() != theta.size()) throw Error(ErrorKind::kShape, "DBC dimension mismatch");
  return theta.dot(q * w);
}

double dbc_sp(const GroupedSamples& roots, const Eigen::Ref<const Eigen::VectorXd>& w,
              const Eigen::Ref<const ModelParams>& theta) {
  return dbc(roots, w, theta, Metric::kSP);
}

double dbc_eo(const GroupedSamples& roots, const Eigen::Ref<const Eigen::VectorXd>& w,
              const Eigen::Ref<const ModelParams>& theta) {
  return dbc(roots, w, theta, Metric::kEO);
}

double spd(std::span<const DataPoint> points, const Eigen::Ref<const ModelParams>& theta) {
  long pos[2] = {0, 0};
  long count[2] = {0, 0};
  for (const auto& p : points) {
    ++count[p.s];
    if (predict(theta, p) == 1) ++pos[p.s];
  }
  if (count[0] == 0 || count[1] == 0) {
    throw Error(ErrorKind::kMetric, "SPD undefined: a sensitive group is empty");
  }
  return static_cast<double>(pos[1]) / static_cast<double>(count[1]) -
         static_cast<double>(pos[0]) / static_cast<double>(count[0]);
}

double eod(std::span<const DataPoint> points, const Eigen::Ref<const ModelParams>& theta) {
  long tp[2] = {0, 0};
  long positives[2] = {0, 0};
  for (const auto& p : points) {
    if (p.y != 1) continue;
    ++positives[p.s];
    if (predict(theta, p) == 1) ++tp[p.s];
  }
  if (positives[0] == 0 || positives[1] == 0) {
    throw Error(ErrorKind::kMetric, "EOD undefined: a sensitive group has no positive samples");
  }
  return static_cast<double>(tp[1]) / static_cast<double>(positives[1]) -
         static_cast<double>(tp[0]) / static_cast<double>(positives[0]);
}

double fairness_gap(std::span<const DataPoint> points, const Eigen::Ref<const ModelParams>& theta,
                    Metric metric) {
  return metric == Metric::kSP ? spd(points, theta) : eod(points, theta);
}

double accuracy(std::span<const DataPoint> points, const Eigen::Ref<const ModelParams>& theta) {
  if (points.empty()) throw Error(ErrorKind::kMetric, "accuracy over zero samples");
  long correct = 0;
  for (const auto& p : points) correct += predict(theta, p) == p.y ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(points.size());
}

FairProxyReport check_fair_proxy(std::span<const DataPoint> proxy,
                                 std::span<const DataPoint> original,
                                 const FairnessBudget& budget, const InnerSolveConfig& cfg) {
  if (proxy.empty() || original.empty()) {
    throw Error(ErrorKind::kEmptyInput, "fair-proxy check needs nonempty proxy and original data");
  }
  if (proxy.front().x.size() != original.front().x.size()) {
    throw Error(ErrorKind::kShape, "proxy and original data differ in dimension");
  }
  FairProxyReport report;
  report.epsilon = budget.epsilon();
  report.ridge = kFairProxyRidge;

  InnerSolveConfig proxy_cfg = cfg;
  proxy_cfg.lambda_theta = kFairProxyRidge;
  const GroupedSamples proxy_samples{to_samples(proxy)};
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  InnerSolveResult fit;
  try {
    fit = solve_inner(proxy_samples, one, proxy_cfg);
  } catch (const Error& e) {
    throw Error(ErrorKind::kCheck, std::string("proxy-only model failed: ") + e.what());
  }
  report.solver_converged = fit.converged;

  const GroupedSamples original_samples{to_samples(original)};
  report.dbc = dbc(original_samples, one, fit.theta, budget.metric);
  report.fair = std::abs(report.dbc) <= report.epsilon;
  return report;
}

}  // namespace fairdef
