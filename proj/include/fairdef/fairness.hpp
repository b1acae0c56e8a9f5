#pragma once

#include <limits>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "fairdef/data.hpp"
#include "fairdef/logit.hpp"

namespace fairdef {

enum class Metric { kSP, kEO };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

struct FairnessBudget {
  double eps_sp = 0.05;
  double eps_eo = 0.05;
  Metric metric = Metric::kSP;

  double epsilon() const { return metric == Metric::kSP ? eps_sp : eps_eo; }
  static FairnessBudget unbounded(Metric metric);
};

// Decision-boundary covariance as a bilinear form: DBC(w, theta) = theta^T Q w.
// Column c of Q is (1/N^R) sum_i (s_i - s_avg) m_i a_i over client c's roots,
// where m_i = 1 for SP and (1 + y_i)/2 for EO, and s_avg is the unweighted mean
// of s over all roots.
Eigen::MatrixXd dbc_terms(const GroupedSamples& roots, Metric metric);

// Signed empirical DBC; callers take |.| at constraint and penalty sites.
double dbc(const GroupedSamples& roots, const Eigen::Ref<const Eigen::VectorXd>& w,
           const Eigen::Ref<const ModelParams>& theta, Metric metric);
double dbc_sp(const GroupedSamples& roots, const Eigen::Ref<const Eigen::VectorXd>& w,
              const Eigen::Ref<const ModelParams>& theta);
double dbc_eo(const GroupedSamples& roots, const Eigen::Ref<const Eigen::VectorXd>& w,
              const Eigen::Ref<const ModelParams>& theta);

// P(yhat=1 | s=1) - P(yhat=1 | s=0).
double spd(std::span<const DataPoint> points, const Eigen::Ref<const ModelParams>& theta);
// TPR(s=1) - TPR(s=0).
double eod(std::span<const DataPoint> points, const Eigen::Ref<const ModelParams>& theta);
double fairness_gap(std::span<const DataPoint> points, const Eigen::Ref<const ModelParams>& theta,
                    Metric metric);

double accuracy(std::span<const DataPoint> points, const Eigen::Ref<const ModelParams>& theta);

struct FairProxyReport {
  bool fair = false;
  double dbc = 0.0;
  double epsilon = 0.0;
  // Ridge weight used for the proxy-only model in place of the plain argmin.
  double ridge = 0.0;
  bool solver_converged = false;
};

// Ridge weight for the proxy-only model of the fair-proxy check.
inline constexpr double kFairProxyRidge = 1e-8;

// Trains a model on the proxy alone and measures its DBC on the client's
// original data; the proxy is fair when |DBC| <= budget.epsilon().
FairProxyReport check_fair_proxy(std::span<const DataPoint> proxy,
                                 std::span<const DataPoint> original,
                                 const FairnessBudget& budget, const InnerSolveConfig& cfg);

}  // namespace fairdef
