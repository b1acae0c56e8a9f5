#include "fairdef/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <tuple>

#include "fairdef/error.hpp"

namespace fairdef {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kBaseline: return "baseline";
    case Method::kOurs: return "ours";
    case Method::kOursRho0: return "ours-rho0";
    case Method::kFedAsl: return "fedasl";
    case Method::kFedNolowe: return "fednolowe";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::kBaseline, Method::kOurs, Method::kOursRho0, Method::kFedAsl,
                   Method::kFedNolowe}) {
    if (text == to_string(m)) return m;
  }
  if (text == "defense") return Method::kOurs;
  throw Error(ErrorKind::kConfig, "unknown method '" + std::string(text) + "'");
}

std::vector<Method> parse_methods(std::string_view csv) {
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t end = csv.find(',', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view item = csv.substr(pos, end - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(parse_method(item));
    pos = end + 1;
  }
  return out;
}

std::string_view to_string(LossSource source) {
  return source == LossSource::kOwnProxy ? "own_proxy" : "pooled_root";
}

LossSource parse_loss_source(std::string_view text) {
  if (text == "own_proxy") return LossSource::kOwnProxy;
  if (text == "pooled_root") return LossSource::kPooledRoot;
  throw Error(ErrorKind::kConfig, "unknown loss source '" + std::string(text) + "'");
}

namespace {

struct MethodOutcome {
  ModelParams theta;
  Eigen::VectorXd weights;
  std::optional<DefenseTrace> trace;
  double root_dbc = 0.0;
};

MethodOutcome run_defense_method(const ScenarioInstance& inst, const PenaltyConfig& penalty,
                                 bool keep_trace) {
  const auto proxies = inst.proxies();
  const auto roots = inst.roots();
  const DefenseProblem problem(proxies, roots, penalty.nu, penalty.inner);
  DefenseResult res = run_defense(problem, penalty);
  MethodOutcome out;
  out.theta = res.theta;
  out.weights = res.weights.vector();
  out.root_dbc = dbc(problem.roots(), out.weights, out.theta, inst.spec.metric);
  if (keep_trace) out.trace = std::move(res.trace);
  return out;
}

MethodOutcome run_weighting_method(Method method, const ScenarioInstance& inst,
                                   const ComparatorConfig& comparators) {
  const auto proxies = inst.proxies();
  const LocalModelSet local = train_local_models(proxies, inst.spec.penalty.inner);
  Eigen::VectorXd losses = local.losses;
  if (comparators.loss_source == LossSource::kPooledRoot) {
    losses = pooled_root_losses(local, inst.roots());
  }
  const SimplexWeights w = method == Method::kFedAsl ? fedasl_weights(losses, comparators.fedasl)
                                                     : fednolowe_weights(losses);
  MethodOutcome out;
  out.theta = aggregate_models(local, w);
  out.weights = w.vector();
  return out;
}

}  // namespace

RunRecord run_method(Method method, const ScenarioInstance& instance,
                     const ComparatorConfig& comparators, bool keep_trace) {
  RunRecord rec;
  const auto& spec = instance.spec;
  rec.cell_key = spec.cell_key();
  rec.dataset = spec.dataset;
  rec.metric = spec.metric;
  rec.mode = spec.mode;
  rec.unreliable_frac = spec.unreliable_frac;
  rec.num_clients = spec.num_clients;
  rec.seed = spec.seed;
  rec.method = std::string(to_string(method));
  rec.scenario_hash = instance.content_hash;
  rec.unreliable_clients = instance.unreliable_ids();

  const auto start = std::chrono::steady_clock::now();
  try {
    MethodOutcome outcome;
    switch (method) {
      case Method::kBaseline: {
        const auto k = static_cast<Eigen::Index>(instance.clients.size());
        outcome.theta = baseline_global(instance.proxies(), spec.penalty.inner).theta;
        outcome.weights = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
        break;
      }
      case Method::kOurs:
        outcome = run_defense_method(instance, spec.penalty, keep_trace);
        break;
      case Method::kOursRho0: {
        PenaltyConfig penalty = spec.penalty;
        penalty.rho_schedule = PenaltyConfig::constant_schedule(0.0);
        outcome = run_defense_method(instance, penalty, keep_trace);
        break;
      }
      case Method::kFedAsl:
      case Method::kFedNolowe:
        outcome = run_weighting_method(method, instance, comparators);
        break;
    }
    rec.report = evaluate(outcome.theta, instance, rec.method);
    rec.report.weights = outcome.weights;
    rec.trace = std::move(outcome.trace);
    rec.final_root_dbc = outcome.root_dbc;
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.report.method = rec.method;
    rec.report.seed = spec.seed;
    rec.report.per_client_proxy_fairness = instance.proxy_fairness;
  }
  rec.report.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

ExperimentResult run_experiment(const std::vector<ScenarioSpec>& specs,
                                const std::map<std::string, Dataset>& datasets,
                                const ExperimentOptions& options) {
  if (options.seeds.empty()) throw Error(ErrorKind::kConfig, "need at least one seed");
  ExperimentResult result;
  for (const auto& base : specs) {
    const auto it = datasets.find(base.dataset);
    for (std::uint64_t seed : options.seeds) {
      ScenarioSpec spec = base;
      spec.seed = seed;
      std::optional<ScenarioInstance> instance;
      std::string build_error;
      if (it == datasets.end()) {
        build_error = "dataset '" + base.dataset + "' is not loaded";
      } else {
        try {
          instance = build_scenario(spec, it->second, spec.penalty.inner);
        } catch (const std::exception& e) {
          build_error = e.what();
        }
      }
      for (Method method : options.methods) {
        RunRecord rec;
        if (instance) {
          rec = run_method(method, *instance, options.comparators, options.keep_traces);
        } else {
          rec.cell_key = spec.cell_key();
          rec.dataset = spec.dataset;
          rec.metric = spec.metric;
          rec.mode = spec.mode;
          rec.unreliable_frac = spec.unreliable_frac;
          rec.num_clients = spec.num_clients;
          rec.seed = seed;
          rec.method = std::string(to_string(method));
          rec.error = build_error;
          rec.report.method = rec.method;
          rec.report.seed = seed;
        }
        if (options.on_run) options.on_run(rec);
        result.runs.push_back(std::move(rec));
      }
    }
  }
  result.aggregates = aggregate_runs(result.runs);
  return result;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs) {
  auto method_rank = [](const std::string& name) {
    try {
      return static_cast<int>(parse_method(name));
    } catch (const Error&) {
      return 100;
    }
  };
  std::vector<const RunRecord*> sorted;
  for (const auto& r : runs) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [&](const RunRecord* a, const RunRecord* b) {
    return std::make_tuple(a->cell_key, method_rank(a->method), a->method, a->seed) <
           std::make_tuple(b->cell_key, method_rank(b->method), b->method, b->seed);
  });

  std::vector<AggregateRow> rows;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j]->cell_key == sorted[i]->cell_key &&
           sorted[j]->method == sorted[i]->method) {
      ++j;
    }
    const RunRecord& first = *sorted[i];
    AggregateRow row;
    row.cell_key = first.cell_key;
    row.dataset = first.dataset;
    row.metric = first.metric;
    row.mode = first.mode;
    row.unreliable_frac = first.unreliable_frac;
    row.method = first.method;
    std::vector<const RunRecord*> ok;
    for (std::size_t t = i; t < j; ++t) {
      if (sorted[t]->ok) ok.push_back(sorted[t]);
      else ++row.failures;
    }
    row.runs = static_cast<int>(ok.size());
    if (!ok.empty()) {
      const double n = static_cast<double>(ok.size());
      const std::size_t k = ok.front()->report.per_client_proxy_fairness.size();
      row.weights = Eigen::VectorXd::Zero(ok.front()->report.weights.size());
      row.proxy_fairness.assign(k, 0.0);
      for (const RunRecord* r : ok) {
        row.accuracy_pct += r->report.accuracy_pct;
        row.spd_abs += r->report.spd_abs;
        row.eod_abs += r->report.eod_abs;
        if (r->report.weights.size() == row.weights.size()) row.weights += r->report.weights;
        for (std::size_t c = 0; c < k && c < r->report.per_client_proxy_fairness.size(); ++c) {
          row.proxy_fairness[c] += r->report.per_client_proxy_fairness[c];
        }
      }
      row.accuracy_pct /= n;
      row.spd_abs /= n;
      row.eod_abs /= n;
      row.weights /= n;
      for (auto& v : row.proxy_fairness) v /= n;
      row.fair_abs = row.metric == Metric::kSP ? row.spd_abs : row.eod_abs;
    } else {
      row.accuracy_pct = row.spd_abs = row.eod_abs = row.fair_abs = std::nan("");
    }
    rows.push_back(std::move(row));
    i = j;
  }
  return rows;
}

}  // namespace fairdef
