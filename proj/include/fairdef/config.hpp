#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairdef/data.hpp"
#include "fairdef/experiment.hpp"
#include "fairdef/scenario.hpp"

namespace fairdef {

struct DatasetEntry {
  std::string name;
  std::filesystem::path path;
  std::vector<Metric> metrics;
};

// Sweep description read from an INI file. Every field has a default, so an
// empty file describes the full Law School + Dutch realistic sweep.
struct RunConfig {
  std::vector<DatasetEntry> datasets;
  std::vector<double> unreliable_fracs = {0.2, 0.4, 0.6};
  std::vector<ScenarioMode> modes = {ScenarioMode::kRealistic};
  int num_clients = 5;
  double root_frac = 0.005;
  double train_frac = 0.8;
  FairnessBudget budget;
  PenaltyConfig penalty;
  // nu follows the metric (0 for sp, 1 for eo) unless set explicitly.
  std::optional<double> nu;
  ExperimentOptions experiment;
  std::filesystem::path out_dir = "out";
  bool trace = false;

  RunConfig();
};

DatasetSpec dataset_spec(std::string_view name);
std::vector<Metric> default_metrics(std::string_view dataset);

// Relative dataset paths resolve against base_dir.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Keeps only the named datasets, adding built-in entries for unknown ones.
void select_datasets(RunConfig& cfg, const std::vector<std::string>& names);

std::vector<Metric> parse_metric_list(std::string_view csv);
std::vector<double> parse_real_list(std::string_view csv);
std::vector<std::uint64_t> parse_seed_list(std::string_view csv);

// Cartesian product dataset x metric x mode x fraction (seed left at 0).
std::vector<ScenarioSpec> expand_specs(const RunConfig& cfg);

// Loads each configured dataset that the specs reference.
std::map<std::string, Dataset> load_datasets(const RunConfig& cfg);

}  // namespace fairdef
