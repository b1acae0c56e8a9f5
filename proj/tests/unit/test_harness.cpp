#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fairdef/config.hpp"
#include "fairdef/error.hpp"
#include "fairdef/experiment.hpp"
#include "fairdef/report.hpp"
#include "fairdef/scenario.hpp"
#include "fairdef/synthetic.hpp"
#include "helpers.hpp"

using namespace fairdef;
namespace fs = std::filesystem;

namespace {

const Dataset& small_law() {
  static const Dataset data = parse_dataset(make_law_like_csv(3000, 7), law_school_spec());
  return data;
}

ScenarioSpec small_spec(double frac, ScenarioMode mode) {
  ScenarioSpec s;
  s.dataset = "law_school";
  s.unreliable_frac = frac;
  s.mode = mode;
  s.root_frac = 0.05;
  s.seed = 3;
  s.penalty.t_max = 5;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fairdef_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("scenario spec") {
  ScenarioSpec s = small_spec(0.4, ScenarioMode::kRealistic);
  CHECK(s.num_unreliable() == 2);
  s.unreliable_frac = 0.2;
  CHECK(s.num_unreliable() == 1);
  s.unreliable_frac = 0.6;
  CHECK(s.num_unreliable() == 3);
  CHECK(s.cell_key() == "law_school-sp-realistic-u60");
  s.unreliable_frac = 1.0;
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK(parse_mode("ideal") == ScenarioMode::kIdeal);
  CHECK_THROWS_AS(parse_mode("wild"), Error);
}

TEST_CASE("build scenario") {
  const InnerSolveConfig cfg;
  const ScenarioInstance inst =
      build_scenario(small_spec(0.4, ScenarioMode::kRealistic), small_law(), cfg);
  REQUIRE(inst.clients.size() == 5);
  const auto bad = inst.unreliable_ids();
  REQUIRE(bad.size() == 2);
  std::vector<int> top{inst.ranking[0].client_id, inst.ranking[1].client_id};
  std::sort(top.begin(), top.end());
  CHECK(bad == top);
  for (int c : bad) CHECK(inst.clients[static_cast<std::size_t>(c)].proxy ==
                          inst.clients[static_cast<std::size_t>(c)].original_train);
  for (std::size_t c = 0; c < 5; ++c) {
    if (inst.kinds[c] == ClientKind::kReliableFairProxy) CHECK(inst.proxy_reports[c].check.fair);
  }
  const ScenarioInstance again =
      build_scenario(small_spec(0.4, ScenarioMode::kRealistic), small_law(), cfg);
  CHECK(again.content_hash == inst.content_hash);

  const ScenarioInstance none =
      build_scenario(small_spec(0.0, ScenarioMode::kRealistic), small_law(), cfg);
  CHECK(none.unreliable_ids().empty());

  const ScenarioInstance ideal = build_scenario(small_spec(0.4, ScenarioMode::kIdeal), small_law(), cfg);
  const Dataset* first = nullptr;
  for (std::size_t c = 0; c < 5; ++c) {
    if (ideal.kinds[c] != ClientKind::kReliableFairProxy) continue;
    if (!first) first = &ideal.clients[c].proxy;
    CHECK(ideal.clients[c].proxy == *first);
  }
}

TEST_CASE("evaluate") {
  const ScenarioInstance inst =
      build_scenario(small_spec(0.2, ScenarioMode::kRealistic), small_law(), InnerSolveConfig{});
  const Eigen::Index n = inst.clients[0].proxy.front().a().size();
  const EvalReport zero = evaluate(ModelParams::Zero(n), inst, "zero");
  const Dataset test = inst.reliable_test();
  double pos = 0;
  for (const auto& p : test) pos += p.y == 1 ? 1 : 0;
  CHECK(zero.accuracy_pct == doctest::Approx(100.0 * pos / static_cast<double>(test.size())));
  CHECK(zero.spd_abs == 0.0);
  CHECK(zero.eod_abs == 0.0);
}

TEST_CASE("experiment aggregates and determinism") {
  std::map<std::string, Dataset> data{{"law_school", small_law()}};
  ExperimentOptions opts;
  opts.seeds = {0, 1};
  opts.methods = {Method::kBaseline, Method::kOurs, Method::kFedAsl, Method::kFedNolowe};
  opts.keep_traces = true;
  ScenarioSpec spec = small_spec(0.4, ScenarioMode::kRealistic);
  const ExperimentResult a = run_experiment({spec}, data, opts);
  REQUIRE(a.runs.size() == 8);
  for (const auto& r : a.runs) CHECK_MESSAGE(r.ok, r.error);
  REQUIRE(a.aggregates.size() == 4);
  for (const auto& row : a.aggregates) {
    double acc = 0;
    int n = 0;
    for (const auto& r : a.runs) {
      if (r.method == row.method) {
        acc += r.report.accuracy_pct;
        ++n;
      }
    }
    CHECK(row.runs == 2);
    CHECK(row.accuracy_pct == doctest::Approx(acc / n).epsilon(1e-14));
  }
  const ExperimentResult b = run_experiment({spec}, data, opts);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(run_record_to_json(a.runs[i]) == run_record_to_json(b.runs[i]));
  }

  opts.seeds = {0};
  const ExperimentResult one = run_experiment({spec}, data, opts);
  for (const auto& row : one.aggregates) {
    for (const auto& r : one.runs) {
      if (r.method == row.method) CHECK(row.spd_abs == r.report.spd_abs);
    }
  }
}

TEST_CASE("report files") {
  const fs::path empty_dir = fresh_dir("empty");
  emit_report({}, empty_dir);
  CHECK(count_lines(slurp(empty_dir / "tables" / "summary.csv")) == 1);
  CHECK(count_lines(slurp(empty_dir / "bicriteria.csv")) == 1);
  CHECK(count_lines(slurp(empty_dir / "heatmap.csv")) == 1);

  std::map<std::string, Dataset> data{{"law_school", small_law()}};
  ExperimentOptions opts;
  opts.seeds = {0};
  opts.methods = {Method::kOurs};
  opts.keep_traces = true;
  const ExperimentResult res = run_experiment({small_spec(0.2, ScenarioMode::kRealistic)}, data, opts);
  const fs::path dir = fresh_dir("one");
  emit_report(res.runs, dir);
  CHECK(count_lines(slurp(dir / "tables" / "summary.csv")) == 2);
  CHECK(count_lines(slurp(dir / "bicriteria.csv")) == 2);
  CHECK(count_lines(slurp(dir / "heatmap.csv")) == 6);
  const std::string stem = run_file_stem(res.runs[0]);
  CHECK(count_lines(slurp(dir / "trace" / (stem + ".jsonl"))) == 5);

  const std::string json = slurp(dir / "runs" / (stem + ".json"));
  const RunRecord back = run_record_from_json(json);
  CHECK(run_record_to_json(back) == json);
  CHECK(read_run_records(dir).size() == 1);

  const std::string before = slurp(dir / "tables" / "summary.csv");
  fs::remove(dir / "tables" / "summary.csv");
  reaggregate_report(dir);
  CHECK(slurp(dir / "tables" / "summary.csv") == before);
  CHECK_THROWS_AS(run_record_from_json("{"), Error);
}

TEST_CASE("config parsing") {
  const RunConfig def = parse_config("");
  REQUIRE(def.datasets.size() == 2);
  CHECK(def.datasets[0].name == "law_school");
  CHECK(def.experiment.seeds.size() == 5);
  CHECK(def.penalty.tangent_gradient);
  CHECK_FALSE(def.penalty.reset_moments);
  CHECK(parse_config("[penalty]\nreset_moments = true\n").penalty.reset_moments);

  const RunConfig cfg = parse_config(
      "[dataset]\nnames = dutch\npath_dutch = data/d.csv\nmetrics_dutch = sp,eo\n"
      "[scenario]\nunreliable_fracs = 0.6\nmodes = ideal, realistic\nseeds = 4,5\n"
      "[penalty]\nt_max = 400\nnu = auto\n"
      "[comparators]\nmethods = baseline,ours\nfedasl_alpha = 0.8\n"
      "[output]\ndir = res\ntrace = true\n",
      "/base");
  REQUIRE(cfg.datasets.size() == 1);
  CHECK(cfg.datasets[0].path == fs::path("/base/data/d.csv"));
  CHECK(cfg.penalty.t_max == 400);
  CHECK(cfg.out_dir == fs::path("/base/res"));
  CHECK(cfg.trace);
  CHECK(cfg.experiment.comparators.fedasl.alpha == 0.8);
  const auto specs = expand_specs(cfg);
  REQUIRE(specs.size() == 4);
  int eo_specs = 0;
  for (const auto& s : specs) {
    if (s.metric == Metric::kEO) {
      ++eo_specs;
      CHECK(s.penalty.nu == 1.0);
    } else {
      CHECK(s.penalty.nu == 0.0);
    }
  }
  CHECK(eo_specs == 2);

  CHECK_THROWS_AS(parse_config("[scenario]\nunreliable_frac = 0.2\n"), Error);
  CHECK_THROWS_AS(parse_config("[extra]\na = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("[penalty]\nt_max = many\n"), Error);
  CHECK_THROWS_AS(parse_config("[dataset]\nnames = adult\n"), Error);
  CHECK(parse_seed_list("1, 2,3") == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(parse_methods("ours,fednolowe") == std::vector<Method>{Method::kOurs, Method::kFedNolowe});
}

}
