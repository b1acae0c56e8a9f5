#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairdef/comparators.hpp"
#include "fairdef/data.hpp"
#include "fairdef/defense.hpp"
#include "fairdef/scenario.hpp"

namespace fairdef {

enum class Method { kBaseline, kOurs, kOursRho0, kFedAsl, kFedNolowe };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);
std::vector<Method> parse_methods(std::string_view csv);

enum class LossSource { kOwnProxy, kPooledRoot };

std::string_view to_string(LossSource source);
LossSource parse_loss_source(std::string_view text);

struct ComparatorConfig {
  FedAslParams fedasl;
  LossSource loss_source = LossSource::kOwnProxy;
};

struct RunRecord {
  std::string cell_key;
  std::string dataset;
  Metric metric = Metric::kSP;
  ScenarioMode mode = ScenarioMode::kRealistic;
  double unreliable_frac = 0.0;
  int num_clients = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::uint64_t scenario_hash = 0;
  std::vector<int> unreliable_clients;
  bool ok = false;
  std::string error;
  EvalReport report;
  // Outer-loop diagnostics for the defense methods.
  std::optional<DefenseTrace> trace;
  double final_root_dbc = 0.0;
};

struct AggregateRow {
  std::string cell_key;
  std::string dataset;
  Metric metric = Metric::kSP;
  ScenarioMode mode = ScenarioMode::kRealistic;
  double unreliable_frac = 0.0;
  std::string method;
  int runs = 0;
  int failures = 0;
  double accuracy_pct = 0.0;
  double spd_abs = 0.0;
  double eod_abs = 0.0;
  // |SPD| or |EOD| according to the cell's metric.
  double fair_abs = 0.0;
  Eigen::VectorXd weights;
  // Mean per-client proxy fairness (heatmap data).
  std::vector<double> proxy_fairness;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<AggregateRow> aggregates;
};

struct ExperimentOptions {
  std::vector<Method> methods = {Method::kBaseline, Method::kOurs, Method::kFedAsl,
                                 Method::kFedNolowe};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  ComparatorConfig comparators;
  bool keep_traces = false;
  // Called after every finished run.
  std::function<void(const RunRecord&)> on_run;
};

// Runs one method on a built scenario.
RunRecord run_method(Method method, const ScenarioInstance& instance,
                     const ComparatorConfig& comparators, bool keep_trace);

// For every spec and seed builds the scenario once and runs every method on
// it. Failures are recorded per run without aborting the sweep.
ExperimentResult run_experiment(const std::vector<ScenarioSpec>& specs,
                                const std::map<std::string, Dataset>& datasets,
                                const ExperimentOptions& options);

// Arithmetic means over successful runs per (cell, method), ordered by cell key
// and then method.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs);

}  // namespace fairdef
