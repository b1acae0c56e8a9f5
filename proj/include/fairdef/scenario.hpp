#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fairdef/comparators.hpp"
#include "fairdef/data.hpp"
#include "fairdef/defense.hpp"
#include "fairdef/fairness.hpp"
#include "fairdef/proxy.hpp"

namespace fairdef {

enum class ScenarioMode { kIdeal, kRealistic };

std::string_view to_string(ScenarioMode mode);
ScenarioMode parse_mode(std::string_view text);

struct ScenarioSpec {
  std::string dataset;
  Metric metric = Metric::kSP;
  double unreliable_frac = 0.4;
  ScenarioMode mode = ScenarioMode::kRealistic;
  int num_clients = 5;
  std::uint64_t seed = 0;
  double root_frac = 0.005;
  double train_frac = 0.8;
  FairnessBudget budget;
  PenaltyConfig penalty;

  void validate() const;
  // round-half-up(unreliable_frac * K)
  int num_unreliable() const;
  // Identifies the scenario cell without the seed, e.g. "law_school-sp-realistic-u40".
  std::string cell_key() const;
};

struct ScenarioInstance {
  ScenarioSpec spec;
  std::vector<ClientDataset> clients;
  std::vector<ClientKind> kinds;
  // Unfairness scores, most unfair first.
  std::vector<ClientUnfairness> ranking;
  // Per client: |SPD| or |EOD| on the client's test split of a plain model
  // trained on its proxy.
  std::vector<double> proxy_fairness;
  // Per client diagnostics of proxy generation (default for passthrough).
  std::vector<ProxyResult> proxy_reports;
  std::uint64_t content_hash = 0;

  std::vector<Dataset> proxies() const;
  std::vector<Dataset> roots() const;
  Dataset reliable_test() const;
  std::vector<int> unreliable_ids() const;
};

ScenarioInstance build_scenario(const ScenarioSpec& spec, const Dataset& data,
                                const InnerSolveConfig& cfg);

std::uint64_t hash_instance(const ScenarioInstance& instance);

struct EvalReport {
  std::string method;
  double accuracy_pct = 0.0;
  double spd_abs = 0.0;
  double eod_abs = 0.0;
  Eigen::VectorXd weights;
  std::vector<double> per_client_proxy_fairness;
  double runtime_sec = 0.0;
  std::uint64_t seed = 0;

  double fair_abs(Metric metric) const { return metric == Metric::kSP ? spd_abs : eod_abs; }
};

// Scores theta on the pooled test splits of the reliable clients.
EvalReport evaluate(const ModelParams& theta, const ScenarioInstance& instance,
                    std::string method = {});

}  // namespace fairdef
