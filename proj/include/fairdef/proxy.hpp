#pragma once

#include <memory>
#include <vector>

#include "fairdef/data.hpp"
#include "fairdef/fairness.hpp"
#include "fairdef/logit.hpp"
#include "fairdef/rng.hpp"

namespace fairdef {

enum class ClientKind { kReliableFairProxy, kUnreliablePassthrough };

struct ProxyGeneratorParams {
  FairnessBudget budget;
  // Upper bound on the share of labels a generator may change.
  double max_relabel_fraction = 0.5;
};

struct ClientBehavior {
  ClientKind kind = ClientKind::kReliableFairProxy;
  ProxyGeneratorParams generator_params;
};

struct ProxyResult {
  Dataset proxy;
  FairProxyReport check;
  // Labels changed relative to the original training data.
  std::size_t flips = 0;
  double relabel_fraction = 0.0;
};

// Client-side proxy construction. Implementations must return a proxy of the
// same size as client.original_train that passes check_fair_proxy.
class ProxyGenerator {
 public:
  virtual ~ProxyGenerator() = default;
  virtual ProxyResult generate(const ClientDataset& client, const ProxyGeneratorParams& params,
                               const InnerSolveConfig& cfg, Rng& rng) const = 0;
};

// Label massaging: candidates for promotion (disadvantaged group, negative
// label) and demotion (advantaged group, positive label) are ranked by the
// score of a plain model on the client's training data, the k most borderline
// ones are flipped (alternating promote/demote), and k is found by bisection
// on the sign of the proxy model's DBC until the fair-proxy check passes.
// Features and sensitive attributes are kept.
class MassagingProxyGenerator final : public ProxyGenerator {
 public:
  ProxyResult generate(const ClientDataset& client, const ProxyGeneratorParams& params,
                       const InnerSolveConfig& cfg, Rng& rng) const override;
};

Dataset passthrough_proxy(const ClientDataset& client);

ProxyResult generate_fair_proxy(const ClientDataset& client, const FairnessBudget& budget,
                                const InnerSolveConfig& cfg, Rng& rng);


// Plain regularized logistic model on one dataset (single client, w = 1).
InnerSolveResult fit_plain(std::span<const DataPoint> points, const InnerSolveConfig& cfg);

struct ClientUnfairness {
  int client_id = 0;
  double unfairness = 0.0;
};

// Most unfair first; ties broken by ascending client id.
std::vector<ClientUnfairness> score_clients_by_unfairness(const std::vector<ClientDataset>& clients,
                                                          Metric metric,
                                                          const InnerSolveConfig& cfg);
std::vector<int> rank_clients_by_unfairness(const std::vector<ClientDataset>& clients,
                                            Metric metric, const InnerSolveConfig& cfg);

}  // namespace fairdef
