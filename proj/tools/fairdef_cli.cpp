// fairdef: command-line front end for scenario sweeps and the server defense.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairdef/config.hpp"
#include "fairdef/defense.hpp"
#include "fairdef/error.hpp"
#include "fairdef/experiment.hpp"
#include "fairdef/report.hpp"
#include "fairdef/scenario.hpp"
#include "fairdef/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fairdef;

namespace {

// Flags shared by run, rank-clients and defend; empty means "keep config value".
struct Overrides {
  std::string config;
  std::vector<std::string> datasets;
  std::string data;
  std::string metric;
  std::optional<double> unreliable_frac;
  std::string mode;
  std::string seeds;
  std::string methods;
  std::optional<int> t_max;
  std::string out;
  bool trace = false;
};

void add_common(CLI::App* app, Overrides& o, bool with_methods) {
  app->add_option("--config", o.config, "INI config file")->check(CLI::ExistingFile);
  app->add_option("--dataset", o.datasets, "dataset name(s): law_school, dutch")->delimiter(',');
  app->add_option("--data", o.data, "CSV path for the (single) selected dataset");
  app->add_option("--metric", o.metric, "sp|eo (comma list allowed)");
  app->add_option("--unreliable-frac", o.unreliable_frac, "share of unreliable clients");
  app->add_option("--mode", o.mode, "ideal|realistic (comma list allowed)");
  app->add_option("--seeds", o.seeds, "comma-separated seeds");
  if (with_methods) app->add_option("--methods", o.methods, "e.g. baseline,ours,fedasl,fednolowe");
  app->add_option("--t-max", o.t_max, "outer iterations of the defense");
  app->add_option("--out", o.out, "output directory");
  app->add_flag("--trace", o.trace, "write per-iteration defense traces");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.datasets.empty()) select_datasets(cfg, o.datasets);
  if (!o.data.empty()) {
    if (cfg.datasets.size() != 1) {
      throw Error(ErrorKind::kConfig, "--data needs exactly one dataset (use --dataset)");
    }
    cfg.datasets.front().path = o.data;
  }
  if (!o.metric.empty()) {
    const auto metrics = parse_metric_list(o.metric);
    for (auto& d : cfg.datasets) d.metrics = metrics;
  }
  if (o.unreliable_frac) cfg.unreliable_fracs = {*o.unreliable_frac};
  if (!o.mode.empty()) {
    cfg.modes.clear();
    std::string rest = o.mode;
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      std::size_t end = rest.find(',', pos);
      if (end == std::string::npos) end = rest.size();
      if (end > pos) cfg.modes.push_back(parse_mode(rest.substr(pos, end - pos)));
      pos = end + 1;
    }
  }
  if (!o.seeds.empty()) cfg.experiment.seeds = parse_seed_list(o.seeds);
  if (!o.methods.empty()) cfg.experiment.methods = parse_methods(o.methods);
  if (o.t_max) cfg.penalty.t_max = *o.t_max;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.trace) cfg.trace = true;
  cfg.experiment.keep_traces = cfg.trace;
  cfg.penalty.validate();
  return cfg;
}

void print_weights(const Eigen::VectorXd& w) {
  for (Eigen::Index c = 0; c < w.size(); ++c) std::printf("%s%.4f", c ? " " : "", w(c));
  std::printf("\n");
}

int cmd_run(const Overrides& o) {
  const RunConfig cfg = resolve(o);
  const auto specs = expand_specs(cfg);
  const auto data = load_datasets(cfg);
  ExperimentOptions opts = cfg.experiment;
  opts.on_run = [](const RunRecord& r) {
    if (r.ok) {
      std::fprintf(stderr, "%s seed=%llu %-10s acc=%.2f spd=%.4f eod=%.4f (%.1fs)\n",
                   r.cell_key.c_str(), static_cast<unsigned long long>(r.seed), r.method.c_str(),
                   r.report.accuracy_pct, r.report.spd_abs, r.report.eod_abs,
                   r.report.runtime_sec);
    } else {
      std::fprintf(stderr, "%s seed=%llu %-10s FAILED: %s\n", r.cell_key.c_str(),
                   static_cast<unsigned long long>(r.seed), r.method.c_str(), r.error.c_str());
    }
  };
  const ExperimentResult result = run_experiment(specs, data, opts);
  emit_report(result.runs, cfg.out_dir);
  std::printf("%-34s %-10s %4s %8s %8s %8s\n", "cell", "method", "runs", "acc%", "|SPD|", "|EOD|");
  for (const auto& a : result.aggregates) {
    std::printf("%-34s %-10s %4d %8.2f %8.4f %8.4f\n", a.cell_key.c_str(), a.method.c_str(),
                a.runs, a.accuracy_pct, a.spd_abs, a.eod_abs);
  }
  std::printf("wrote %s\n", cfg.out_dir.string().c_str());
  int failures = 0;
  for (const auto& r : result.runs) failures += r.ok ? 0 : 1;
  return failures == 0 ? 0 : 3;
}

// Single-scenario commands use the first configured dataset/metric/mode/frac/seed.
ScenarioSpec first_spec(const RunConfig& cfg) {
  const auto specs = expand_specs(cfg);
  if (specs.empty()) throw Error(ErrorKind::kConfig, "configuration yields no scenario");
  ScenarioSpec spec = specs.front();
  spec.seed = cfg.experiment.seeds.front();
  return spec;
}

int cmd_rank(const Overrides& o) {
  const RunConfig cfg = resolve(o);
  const ScenarioSpec spec = first_spec(cfg);
  const auto data = load_datasets(cfg);
  const ScenarioInstance inst = build_scenario(spec, data.at(spec.dataset), spec.penalty.inner);
  std::printf("scenario %s seed=%llu\n", spec.cell_key().c_str(),
              static_cast<unsigned long long>(spec.seed));
  std::printf("%4s %6s %12s %12s\n", "rank", "client", "unfairness", "status");
  for (std::size_t i = 0; i < inst.ranking.size(); ++i) {
    const auto& r = inst.ranking[i];
    const bool bad = inst.kinds[static_cast<std::size_t>(r.client_id)] ==
                     ClientKind::kUnreliablePassthrough;
    std::printf("%4zu %6d %12.4f %12s\n", i + 1, r.client_id + 1, r.unfairness,
                bad ? "unreliable" : "reliable");
  }
  return 0;
}

int cmd_defend(const Overrides& o) {
  const RunConfig cfg = resolve(o);
  const ScenarioSpec spec = first_spec(cfg);
  const auto data = load_datasets(cfg);
  const ScenarioInstance inst = build_scenario(spec, data.at(spec.dataset), spec.penalty.inner);
  const RunRecord rec = run_method(Method::kOurs, inst, cfg.experiment.comparators, cfg.trace);
  if (!rec.ok) throw std::runtime_error(rec.error);
  std::printf("scenario %s seed=%llu\n", spec.cell_key().c_str(),
              static_cast<unsigned long long>(spec.seed));
  std::printf("weights: ");
  print_weights(rec.report.weights);
  std::printf("accuracy %.2f%%  |SPD| %.4f  |EOD| %.4f  root DBC %.3g\n", rec.report.accuracy_pct,
              rec.report.spd_abs, rec.report.eod_abs, rec.final_root_dbc);
  if (!o.out.empty() || cfg.trace) {
    emit_report({rec}, cfg.out_dir);
    std::printf("wrote %s\n", cfg.out_dir.string().c_str());
  }
  return 0;
}

int cmd_project(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorKind::kShape, "project needs at least one value");
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                              static_cast<Eigen::Index>(values.size()));
  print_weights(project_simplex(v).vector());
  return 0;
}

int cmd_report(const std::string& out) {
  const auto files = reaggregate_report(out);
  for (const auto& f : files.written) std::printf("wrote %s\n", f.string().c_str());
  return 0;
}

int cmd_synth(const std::string& kind, std::size_t rows, std::uint64_t seed, const std::string& out) {
  std::string text;
  if (kind == "law_school") text = make_law_like_csv(rows, seed);
  else if (kind == "dutch") text = make_dutch_like_csv(rows, seed);
  else throw Error(ErrorKind::kConfig, "unknown synthetic kind '" + kind + "'");
  if (out.empty() || out == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f || !(f << text)) throw Error(ErrorKind::kIo, "cannot write '" + out + "'");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Server-side fairness defense for one-shot collaborative learning"};
  app.require_subcommand(1);

  Overrides run_o, rank_o, defend_o;
  auto* run = app.add_subcommand("run", "full sweep from config and flags");
  add_common(run, run_o, true);
  auto* rank = app.add_subcommand("rank-clients", "rank clients of one scenario by unfairness");
  add_common(rank, rank_o, false);
  auto* defend = app.add_subcommand("defend", "run the defense on one scenario");
  add_common(defend, defend_o, false);

  std::vector<double> proj_values;
  auto* project = app.add_subcommand("project", "Euclidean projection onto the simplex");
  project->add_option("values", proj_values, "vector entries (space or comma separated)")
      ->required()
      ->delimiter(',');

  std::string report_dir = "out";
  auto* report = app.add_subcommand("report", "re-aggregate runs/*.json in an output directory");
  report->add_option("--out", report_dir, "output directory")->check(CLI::ExistingDirectory);

  std::string synth_kind = "law_school", synth_out;
  std::size_t synth_rows = 6000;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "write a synthetic CSV with a benchmark layout");
  synth->add_option("--dataset", synth_kind, "law_school|dutch");
  synth->add_option("--rows", synth_rows, "row count");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_o);
    if (*rank) return cmd_rank(rank_o);
    if (*defend) return cmd_defend(defend_o);
    if (*project) return cmd_project(proj_values);
    if (*report) return cmd_report(report_dir);
    if (*synth) return cmd_synth(synth_kind, synth_rows, synth_seed, synth_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fairdef: %s\n", e.what());
    return 2;
  }
  return 0;
}
