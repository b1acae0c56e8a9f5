#include "fairdef/scenario.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "fairdef/error.hpp"

namespace fairdef {

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void dataset(const Dataset& d) {
    u64(d.size());
    for (const auto& p : d) {
      u64(static_cast<std::uint64_t>(p.x.size()));
      bytes(p.x.data(), sizeof(double) * static_cast<std::size_t>(p.x.size()));
      u64(static_cast<std::uint64_t>(p.s));
      u64(static_cast<std::uint64_t>(p.y + 1));
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

}  // namespace

std::string_view to_string(ScenarioMode mode) {
  return mode == ScenarioMode::kIdeal ? "ideal" : "realistic";
}

ScenarioMode parse_mode(std::string_view text) {
  if (text == "ideal") return ScenarioMode::kIdeal;
  if (text == "realistic") return ScenarioMode::kRealistic;
  throw Error(ErrorKind::kConfig, "unknown scenario mode '" + std::string(text) + "'");
}

void ScenarioSpec::validate() const {
  if (num_clients < 1) throw Error(ErrorKind::kConfig, "need at least one client");
  if (!(unreliable_frac >= 0.0 && unreliable_frac < 1.0)) {
    throw Error(ErrorKind::kConfig, "unreliable fraction must lie in [0,1)");
  }
  if (num_unreliable() >= num_clients) {
    throw Error(ErrorKind::kConfig, "scenario leaves no reliable client");
  }
  if (!(root_frac > 0.0 && root_frac <= 1.0)) {
    throw Error(ErrorKind::kConfig, "root fraction must lie in (0,1]");
  }
  if (!(budget.eps_sp >= 0.0 && budget.eps_eo >= 0.0)) {
    throw Error(ErrorKind::kConfig, "fairness budgets must be nonnegative");
  }
  penalty.validate();
}

int ScenarioSpec::num_unreliable() const {
  return static_cast<int>(round_half_up(unreliable_frac * static_cast<double>(num_clients)));
}

std::string ScenarioSpec::cell_key() const {
  const int pct = static_cast<int>(std::lround(unreliable_frac * 100.0));
  return dataset + "-" + std::string(to_string(metric)) + "-" + std::string(to_string(mode)) +
         "-u" + std::to_string(pct);
}

std::vector<Dataset> ScenarioInstance::proxies() const {
  std::vector<Dataset> out;
  for (const auto& c : clients) out.push_back(c.proxy);
  return out;
}

std::vector<Dataset> ScenarioInstance::roots() const {
  std::vector<Dataset> out;
  for (const auto& c : clients) out.push_back(c.root);
  return out;
}

Dataset ScenarioInstance::reliable_test() const {
  Dataset out;
  for (std::size_t c = 0; c < clients.size(); ++c) {
    if (kinds[c] == ClientKind::kReliableFairProxy) {
      out.insert(out.end(), clients[c].test.begin(), clients[c].test.end());
    }
  }
  return out;
}

std::vector<int> ScenarioInstance::unreliable_ids() const {
  std::vector<int> out;
  for (std::size_t c = 0; c < kinds.size(); ++c) {
    if (kinds[c] == ClientKind::kUnreliablePassthrough) out.push_back(static_cast<int>(c));
  }
  return out;
}

std::uint64_t hash_instance(const ScenarioInstance& instance) {
  Fnv1a h;
  h.u64(instance.clients.size());
  for (std::size_t c = 0; c < instance.clients.size(); ++c) {
    const auto& client = instance.clients[c];
    h.u64(static_cast<std::uint64_t>(instance.kinds[c]));
    h.dataset(client.original_train);
    h.dataset(client.test);
    h.dataset(client.root);
    h.dataset(client.proxy);
  }
  return h.value();
}

ScenarioInstance build_scenario(const ScenarioSpec& spec, const Dataset& data,
                                const InnerSolveConfig& cfg) {
  spec.validate();
  ScenarioInstance inst;
  inst.spec = spec;
  inst.spec.budget.metric = spec.metric;

  Rng partition_rng = make_stream(spec.seed, "partition");
  auto shards = partition_clients(data, spec.num_clients, partition_rng);
  for (auto& client : shards) {
    const auto c = static_cast<std::uint64_t>(client.client_id);
    Rng split_rng = make_stream(spec.seed, "split", c);
    client = split_train_test(std::move(client), spec.train_frac, split_rng);
    Rng root_rng = make_stream(spec.seed, "root", c);
    sample_root(client, spec.root_frac, root_rng);
  }
  inst.clients = std::move(shards);
  const std::size_t k = inst.clients.size();

  inst.ranking = score_clients_by_unfairness(inst.clients, spec.metric, cfg);
  inst.kinds.assign(k, ClientKind::kReliableFairProxy);
  const int n_unreliable = spec.num_unreliable();
  for (int i = 0; i < n_unreliable; ++i) {
    inst.kinds[static_cast<std::size_t>(inst.ranking[static_cast<std::size_t>(i)].client_id)] =
        ClientKind::kUnreliablePassthrough;
  }

  inst.proxy_reports.assign(k, ProxyResult{});
  ProxyGeneratorParams gen_params;
  gen_params.budget = inst.spec.budget;
  const MassagingProxyGenerator generator;

  auto generate = [&](std::size_t c) {
    Rng proxy_rng = make_stream(spec.seed, "proxy", c);
    try {
      return generator.generate(inst.clients[c], gen_params, cfg, proxy_rng);
    } catch (const Error& e) {
      throw Error(ErrorKind::kScenario,
                  "proxy generation failed for client " + std::to_string(c) + ": " + e.what());
    }
  };

  if (spec.mode == ScenarioMode::kIdeal) {
    // Replicas of the most reliable client's fair proxy.
    const auto most_reliable = static_cast<std::size_t>(inst.ranking.back().client_id);
    const ProxyResult shared = generate(most_reliable);
    for (std::size_t c = 0; c < k; ++c) {
      if (inst.kinds[c] == ClientKind::kReliableFairProxy) {
        inst.clients[c].proxy = shared.proxy;
        inst.proxy_reports[c] = shared;
        inst.proxy_reports[c].proxy.clear();
      }
    }
  } else {
    for (std::size_t c = 0; c < k; ++c) {
      if (inst.kinds[c] != ClientKind::kReliableFairProxy) continue;
      ProxyResult res = generate(c);
      inst.clients[c].proxy = std::move(res.proxy);
      res.proxy.clear();
      inst.proxy_reports[c] = std::move(res);
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (inst.kinds[c] == ClientKind::kUnreliablePassthrough) {
      inst.clients[c].proxy = passthrough_proxy(inst.clients[c]);
    }
  }

  inst.proxy_fairness.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const ModelParams theta = fit_plain(inst.clients[c].proxy, cfg).theta;
    try {
      inst.proxy_fairness[c] = std::abs(fairness_gap(inst.clients[c].test, theta, spec.metric));
    } catch (const Error&) {
      inst.proxy_fairness[c] = std::nan("");
    }
  }
  inst.content_hash = hash_instance(inst);
  return inst;
}

EvalReport evaluate(const ModelParams& theta, const ScenarioInstance& instance,
                    std::string method) {
  const Dataset pooled = instance.reliable_test();
  if (pooled.empty()) throw Error(ErrorKind::kEvaluation, "no reliable client test data");
  EvalReport report;
  report.method = std::move(method);
  report.seed = instance.spec.seed;
  report.per_client_proxy_fairness = instance.proxy_fairness;
  try {
    report.accuracy_pct = 100.0 * accuracy(pooled, theta);
    report.spd_abs = std::abs(spd(pooled, theta));
    report.eod_abs = std::abs(eod(pooled, theta));
  } catch (const Error& e) {
    throw Error(ErrorKind::kEvaluation, e.what());
  }
  return report;
}

}  // namespace fairdef
