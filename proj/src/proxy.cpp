#include "fairdef/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fairdef/error.hpp"

namespace fairdef {

namespace {

void require_both_groups_and_classes(const ClientDataset& client) {
  const auto& train = client.original_train;
  if (train.empty()) {
    throw Error(ErrorKind::kEmptyInput,
                "client " + std::to_string(client.client_id) + " has no training data");
  }
  bool seen_s[2] = {false, false};
  bool seen_y[2] = {false, false};
  for (const auto& p : train) {
    seen_s[p.s] = true;
    seen_y[p.y > 0 ? 1 : 0] = true;
  }
  if (!seen_y[0] || !seen_y[1]) {
    throw Error(ErrorKind::kDegenerateInput,
                "client " + std::to_string(client.client_id) + " training data has a single class");
  }
  if (!seen_s[0] || !seen_s[1]) {
    throw Error(ErrorKind::kDegenerateInput, "client " + std::to_string(client.client_id) +
                                                 " training data has a single sensitive group");
  }
}

}  // namespace

InnerSolveResult fit_plain(std::span<const DataPoint> points, const InnerSolveConfig& cfg) {
  const GroupedSamples samples{to_samples(points)};
  return solve_inner(samples, Eigen::VectorXd::Ones(1), cfg);
}

Dataset passthrough_proxy(const ClientDataset& client) {
  if (client.original_train.empty()) {
    throw Error(ErrorKind::kEmptyInput,
                "client " + std::to_string(client.client_id) + " has no training data");
  }
  return client.original_train;
}

ProxyResult MassagingProxyGenerator::generate(const ClientDataset& client,
                                              const ProxyGeneratorParams& params,
                                              const InnerSolveConfig& cfg, Rng& /*rng*/) const {
  require_both_groups_and_classes(client);
  const auto& train = client.original_train;
  const double eps = params.budget.epsilon();

  auto evaluate = [&](Dataset proxy, std::size_t flips) {
    ProxyResult out;
    out.check = check_fair_proxy(proxy, train, params.budget, cfg);
    out.proxy = std::move(proxy);
    out.flips = flips;
    out.relabel_fraction = static_cast<double>(flips) / static_cast<double>(train.size());
    return out;
  };

  ProxyResult start = evaluate(train, 0);
  if (start.check.fair) return start;

  // Positive DBC means the s=1 group scores higher, so s=0 gets promoted.
  const int advantaged = start.check.dbc > 0.0 ? 1 : 0;
  const ModelParams ranker = fit_plain(train, cfg).theta;
  std::vector<std::pair<double, std::size_t>> promote, demote;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double score = train[i].a().dot(ranker);
    if (train[i].s != advantaged && train[i].y < 0) promote.push_back({-score, i});
    if (train[i].s == advantaged && train[i].y > 0) demote.push_back({score, i});
  }
  std::sort(promote.begin(), promote.end());
  std::sort(demote.begin(), demote.end());

  const auto cap = static_cast<std::size_t>(params.max_relabel_fraction *
                                            static_cast<double>(train.size()));
  const std::size_t k_max = std::min({2 * std::min(promote.size(), demote.size()), cap});

  // First ceil(k/2) promotions and floor(k/2) demotions.
  auto massaged = [&](std::size_t k) {
    Dataset proxy = train;
    for (std::size_t j = 0; j < (k + 1) / 2; ++j) proxy[promote[j].second].y = 1;
    for (std::size_t j = 0; j < k / 2; ++j) proxy[demote[j].second].y = -1;
    return proxy;
  };
  const double sign = start.check.dbc > 0.0 ? 1.0 : -1.0;
  double best_dbc = std::abs(start.check.dbc);

  std::size_t lo = 0, hi = k_max;
  if (k_max > 0) {
    ProxyResult top = evaluate(massaged(k_max), k_max);
    if (top.check.fair) {
      // Fall through to bisection for the smallest-change proxy found.
    } else if (sign * top.check.dbc > 0.0) {
      best_dbc = std::min(best_dbc, std::abs(top.check.dbc));
      hi = 0;
    }
    while (hi > lo + 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      ProxyResult cand = evaluate(massaged(mid), mid);
      if (cand.check.fair) return cand;
      best_dbc = std::min(best_dbc, std::abs(cand.check.dbc));
      if (sign * cand.check.dbc > 0.0) lo = mid;
      else hi = mid;
    }
    if (hi == k_max && top.check.fair) return top;
  }
  throw Error(ErrorKind::kGeneration,
              "client " + std::to_string(client.client_id) +
                  ": fairness budget unreachable; best proxy DBC " + std::to_string(best_dbc) +
                  " vs budget " + std::to_string(eps));
}

ProxyResult generate_fair_proxy(const ClientDataset& client, const FairnessBudget& budget,
                                const InnerSolveConfig& cfg, Rng& rng) {
  ProxyGeneratorParams params;
  params.budget = budget;
  return MassagingProxyGenerator().generate(client, params, cfg, rng);
}

std::vector<ClientUnfairness> score_clients_by_unfairness(const std::vector<ClientDataset>& clients,
                                                          Metric metric,
                                                          const InnerSolveConfig& cfg) {
  std::vector<ClientUnfairness> scores;
  scores.reserve(clients.size());
  for (const auto& client : clients) {
    try {
      if (client.original_train.empty() || client.test.empty()) {
        throw Error(ErrorKind::kEmptyInput, "empty train or test split");
      }
      const ModelParams theta = fit_plain(client.original_train, cfg).theta;
      scores.push_back({client.client_id, std::abs(fairness_gap(client.test, theta, metric))});
    } catch (const Error& e) {
      throw Error(ErrorKind::kRanking,
                  "client " + std::to_string(client.client_id) + ": " + e.what());
    }
  }
  std::sort(scores.begin(), scores.end(), [](const ClientUnfairness& a, const ClientUnfairness& b) {
    if (a.unfairness != b.unfairness) return a.unfairness > b.unfairness;
    return a.client_id < b.client_id;
  });
  return scores;
}

std::vector<int> rank_clients_by_unfairness(const std::vector<ClientDataset>& clients,
                                            Metric metric, const InnerSolveConfig& cfg) {
  std::vector<int> order;
  for (const auto& s : score_clients_by_unfairness(clients, metric, cfg)) {
    order.push_back(s.client_id);
  }
  return order;
}

}  // namespace fairdef
