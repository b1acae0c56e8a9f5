#include "fairdef/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fairdef/error.hpp"

namespace fairdef {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv(std::string_view csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(csv)};
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double to_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kConfig, "'" + key + "' expects a number, got '" + text + "'");
  }
}

long long to_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kConfig, "'" + key + "' expects an integer, got '" + text + "'");
  }
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error(ErrorKind::kConfig, "'" + key + "' expects a boolean, got '" + text + "'");
}

// Section reader that rejects keys nobody consumed (typos).
class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(pt::ptree::path_type(name_, '\0'))) {
      for (const auto& [k, v] : *child) values_[k] = v.data();
    }
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string v = it->second;
    values_.erase(it);
    return v;
  }
  // Removes and returns every key with the given prefix (prefix stripped).
  std::map<std::string, std::string> take_prefixed(const std::string& prefix) {
    std::map<std::string, std::string> out;
    for (auto it = values_.begin(); it != values_.end();) {
      if (it->first.rfind(prefix, 0) == 0) {
        out[it->first.substr(prefix.size())] = it->second;
        it = values_.erase(it);
      } else {
        ++it;
      }
    }
    return out;
  }
  std::string key(const std::string& k) const { return name_ + "." + k; }

  void real(const std::string& k, double& out) {
    if (auto v = take(k)) out = to_real(key(k), *v);
  }
  void integer(const std::string& k, int& out) {
    if (auto v = take(k)) out = static_cast<int>(to_int(key(k), *v));
  }
  void boolean(const std::string& k, bool& out) {
    if (auto v = take(k)) out = to_bool(key(k), *v);
  }

  void finish() const {
    if (!values_.empty()) {
      throw Error(ErrorKind::kConfig, "unknown key '" + key(values_.begin()->first) + "'");
    }
  }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
};

const std::set<std::string> kSections = {"dataset", "scenario", "penalty", "comparators",
                                         "output"};

}  // namespace

RunConfig::RunConfig() {
  datasets.push_back({"law_school", "fixtures/law_like.csv", default_metrics("law_school")});
  datasets.push_back({"dutch", "fixtures/dutch_like.csv", default_metrics("dutch")});
}

DatasetSpec dataset_spec(std::string_view name) {
  if (name == "law_school") return law_school_spec();
  if (name == "dutch") return dutch_spec();
  throw Error(ErrorKind::kConfig, "unknown dataset '" + std::string(name) +
                                      "' (known: law_school, dutch)");
}

// Dutch already has a small |EOD|, so only SP is swept there by default.
std::vector<Metric> default_metrics(std::string_view dataset) {
  if (dataset == "dutch") return {Metric::kSP};
  return {Metric::kSP, Metric::kEO};
}

std::vector<Metric> parse_metric_list(std::string_view csv) {
  std::vector<Metric> out;
  for (const auto& item : split_csv(csv)) out.push_back(parse_metric(item));
  if (out.empty()) throw Error(ErrorKind::kConfig, "empty metric list");
  return out;
}

std::vector<double> parse_real_list(std::string_view csv) {
  std::vector<double> out;
  for (const auto& item : split_csv(csv)) out.push_back(to_real("list", item));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view csv) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_csv(csv)) {
    const long long v = to_int("seeds", item);
    if (v < 0) throw Error(ErrorKind::kConfig, "seeds must be nonnegative");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty()) throw Error(ErrorKind::kConfig, "empty seed list");
  return out;
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed config: ") + e.message() + " (line " +
                                        std::to_string(e.line()) + ")");
  }
  for (const auto& [name, child] : tree) {
    if (!kSections.count(name)) throw Error(ErrorKind::kConfig, "unknown section [" + name + "]");
    if (child.empty() && !child.data().empty()) {
      throw Error(ErrorKind::kConfig, "key '" + name + "' outside any section");
    }
  }

  RunConfig cfg;

  Section ds(tree, "dataset");
  const auto paths = ds.take_prefixed("path_");
  const auto metrics = ds.take_prefixed("metrics_");
  if (auto names = ds.take("names")) {
    cfg.datasets.clear();
    for (const auto& n : split_csv(*names)) {
      dataset_spec(n);
      cfg.datasets.push_back({n, {}, default_metrics(n)});
    }
    if (cfg.datasets.empty()) throw Error(ErrorKind::kConfig, "dataset.names is empty");
  }
  for (auto& entry : cfg.datasets) {
    if (auto it = paths.find(entry.name); it != paths.end()) {
      entry.path = it->second;
      if (entry.path.is_relative() && !base_dir.empty()) entry.path = base_dir / entry.path;
    }
    if (auto it = metrics.find(entry.name); it != metrics.end()) {
      entry.metrics = parse_metric_list(it->second);
    }
  }
  for (const auto& [name, _] : paths) dataset_spec(name);
  for (const auto& [name, _] : metrics) dataset_spec(name);
  ds.finish();

  Section sc(tree, "scenario");
  if (auto v = sc.take("unreliable_fracs")) cfg.unreliable_fracs = parse_real_list(*v);
  if (auto v = sc.take("modes")) {
    cfg.modes.clear();
    for (const auto& m : split_csv(*v)) cfg.modes.push_back(parse_mode(m));
  }
  if (auto v = sc.take("seeds")) cfg.experiment.seeds = parse_seed_list(*v);
  sc.integer("num_clients", cfg.num_clients);
  sc.real("root_frac", cfg.root_frac);
  sc.real("train_frac", cfg.train_frac);
  sc.real("eps_sp", cfg.budget.eps_sp);
  sc.real("eps_eo", cfg.budget.eps_eo);
  sc.finish();

  Section pe(tree, "penalty");
  std::vector<double> rho_values, rho_starts;
  for (const auto& s : cfg.penalty.rho_schedule) {
    rho_values.push_back(s.rho);
    rho_starts.push_back(s.start_iter);
  }
  if (auto v = pe.take("rho_values")) rho_values = parse_real_list(*v);
  if (auto v = pe.take("rho_starts")) rho_starts = parse_real_list(*v);
  if (rho_values.size() != rho_starts.size() || rho_values.empty()) {
    throw Error(ErrorKind::kConfig, "penalty.rho_values and penalty.rho_starts differ in length");
  }
  cfg.penalty.rho_schedule.clear();
  for (std::size_t i = 0; i < rho_values.size(); ++i) {
    cfg.penalty.rho_schedule.push_back({static_cast<int>(rho_starts[i]), rho_values[i]});
  }
  if (auto v = pe.take("nu"); v && *v != "auto") cfg.nu = to_real("penalty.nu", *v);
  pe.integer("t_max", cfg.penalty.t_max);
  pe.real("outer_lr", cfg.penalty.outer_lr);
  pe.real("adam_beta1", cfg.penalty.adam_beta1);
  pe.real("adam_beta2", cfg.penalty.adam_beta2);
  pe.real("adam_eps", cfg.penalty.adam_eps);
  pe.boolean("tangent_gradient", cfg.penalty.tangent_gradient);
  pe.boolean("reset_moments", cfg.penalty.reset_moments);
  pe.real("lambda_theta", cfg.penalty.inner.lambda_theta);
  pe.real("inner_tol", cfg.penalty.inner.tol);
  pe.integer("inner_max_iter", cfg.penalty.inner.max_iter);
  pe.integer("lbfgs_memory", cfg.penalty.inner.memory);
  pe.finish();
  if (cfg.nu) cfg.penalty.nu = *cfg.nu;
  cfg.penalty.validate();

  Section co(tree, "comparators");
  if (auto v = co.take("methods")) cfg.experiment.methods = parse_methods(*v);
  co.real("fedasl_alpha", cfg.experiment.comparators.fedasl.alpha);
  co.real("fedasl_beta", cfg.experiment.comparators.fedasl.beta);
  if (auto v = co.take("loss_source")) cfg.experiment.comparators.loss_source = parse_loss_source(*v);
  co.finish();

  Section out(tree, "output");
  if (auto v = out.take("dir")) {
    cfg.out_dir = *v;
    if (cfg.out_dir.is_relative() && !base_dir.empty()) cfg.out_dir = base_dir / cfg.out_dir;
  }
  out.boolean("trace", cfg.trace);
  out.finish();

  cfg.experiment.keep_traces = cfg.trace;
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), path.parent_path());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void select_datasets(RunConfig& cfg, const std::vector<std::string>& names) {
  std::vector<DatasetEntry> kept;
  for (const auto& n : names) {
    auto it = std::find_if(cfg.datasets.begin(), cfg.datasets.end(),
                           [&](const DatasetEntry& e) { return e.name == n; });
    if (it != cfg.datasets.end()) {
      kept.push_back(*it);
    } else {
      dataset_spec(n);
      kept.push_back({n, {}, default_metrics(n)});
    }
  }
  cfg.datasets = std::move(kept);
}

std::vector<ScenarioSpec> expand_specs(const RunConfig& cfg) {
  std::vector<ScenarioSpec> out;
  for (const auto& entry : cfg.datasets) {
    for (Metric metric : entry.metrics) {
      for (ScenarioMode mode : cfg.modes) {
        for (double frac : cfg.unreliable_fracs) {
          ScenarioSpec spec;
          spec.dataset = entry.name;
          spec.metric = metric;
          spec.mode = mode;
          spec.unreliable_frac = frac;
          spec.num_clients = cfg.num_clients;
          spec.root_frac = cfg.root_frac;
          spec.train_frac = cfg.train_frac;
          spec.budget = cfg.budget;
          spec.budget.metric = metric;
          spec.penalty = cfg.penalty;
          spec.penalty.nu = cfg.nu ? *cfg.nu : (metric == Metric::kSP ? 0.0 : 1.0);
          spec.validate();
          out.push_back(std::move(spec));
        }
      }
    }
  }
  return out;
}

std::map<std::string, Dataset> load_datasets(const RunConfig& cfg) {
  std::map<std::string, Dataset> out;
  for (const auto& entry : cfg.datasets) {
    if (entry.path.empty()) {
      throw Error(ErrorKind::kConfig, "no path configured for dataset '" + entry.name + "'");
    }
    out[entry.name] = load_dataset(entry.path, dataset_spec(entry.name));
  }
  return out;
}

}  // namespace fairdef
