#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dspopt/common.hpp"
#include "dspopt/instance.hpp"

namespace dspopt {

// Dual side of the planning problem: the budget constraints are relaxed with
// multipliers lambda in [0,1]^K, under which the inner maximization separates
// per edge (bid truthfully at the shaded value (1 - lambda_k) r_ik) and per
// impression type (pick the best positive score, or nothing).

struct OracleOutput {
  std::vector<double> bid_prices;   // per edge: (1 - lambda_k) * r_ik
  std::vector<double> edge_scores;  // per edge: [b* - beta(b*)] s_i rho(b*)
  std::vector<double> allocation;   // per edge, 0 or 1
  std::vector<double> subgradient;  // per campaign: m_k - shaded spend
  double dual_value = 0.0;
};

namespace detail {

inline void check_multipliers(const Instance& instance, const std::vector<double>& lambda) {
  if (lambda.size() != instance.n_campaigns()) {
    throw InputError("multiplier vector size does not match campaign count");
  }
  for (double v : lambda) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InputError("multipliers must lie in the box [0, 1]");
    }
  }
}

}  // namespace detail

/// Evaluates the dual function at lambda and returns the maximizing bids and
/// allocation, the exact dual value, and a subgradient. O(|E|) total.
inline OracleOutput oracle(const Instance& instance, const std::vector<double>& lambda) {
  detail::check_multipliers(instance, lambda);

  const std::size_t n_edges = instance.edges.size();
  OracleOutput out;
  out.bid_prices.resize(n_edges);
  out.edge_scores.resize(n_edges);
  out.allocation.assign(n_edges, 0.0);
  out.subgradient.resize(instance.n_campaigns());

  double selected_total = 0.0;
  for (std::size_t i = 0; i < instance.n_types(); ++i) {
    const auto& spec = instance.impression_types[i];
    const Landscape& landscape = instance.landscape_of(static_cast<int>(i));

    int best_edge = -1;
    int best_campaign = -1;
    double best_score = 0.0;
    for (int e : instance.edges_by_type[i]) {
      const Edge& edge = instance.edges[e];
      const double bid = (1.0 - lambda[edge.campaign]) * edge.ecpi;
      const double p = win_prob(landscape, bid);
      // [b - beta(b)] rho(b) written as b rho(b) - E[B 1(B <= b)], which is
      // well defined even when rho(b) = 0.
      const double score =
          spec.expected_supply * (bid * p - partial_expectation(landscape, bid));
      out.bid_prices[e] = bid;
      out.edge_scores[e] = score;
      if (best_edge < 0 || score > best_score ||
          (score == best_score && edge.campaign < best_campaign)) {
        best_edge = e;
        best_campaign = edge.campaign;
        best_score = score;
      }
    }
    if (best_edge >= 0 && best_score > 0.0) {
      out.allocation[best_edge] = 1.0;
      selected_total += best_score;
    }
  }

  double multiplier_term = 0.0;
  for (std::size_t k = 0; k < instance.n_campaigns(); ++k) {
    double shaded_spend = 0.0;
    for (int e : instance.edges_by_campaign[k]) {
      if (out.allocation[e] == 0.0) continue;
      const Edge& edge = instance.edges[e];
      const auto& spec = instance.impression_types[edge.type];
      shaded_spend += edge.ecpi * spec.expected_supply *
                      win_prob(instance.landscape_of(edge.type), out.bid_prices[e]);
    }
    out.subgradient[k] = instance.campaigns[k].budget - shaded_spend;
    multiplier_term += lambda[k] * instance.campaigns[k].budget;
  }
  out.dual_value = selected_total + multiplier_term;
  return out;
}

inline double dual_value(const Instance& instance, const std::vector<double>& lambda) {
  return oracle(instance, lambda).dual_value;
}

struct SolverConfig {
  int max_iters = 1000;
  // <= 0 means auto: sqrt(|K|) / ||g(lambda^0)||_2, the classical radius /
  // gradient-bound ratio for the unit box. Scale-invariant in budget units.
  double step_scale = 0.0;
  std::uint64_t seed = 0;  // reserved; the descent itself is deterministic
};

struct TrajectoryRow {
  int iteration = 0;
  double dual_value = 0.0;
  double step_size = 0.0;
  double subgradient_norm = 0.0;
};

struct DualState {
  std::vector<double> lambda;       // last evaluated iterate
  std::vector<double> subgradient;  // at that iterate
  double dual_value = 0.0;
  std::vector<double> best_lambda;  // incumbent minimizer
  double best_value = 0.0;
  int iteration = 0;
  std::vector<TrajectoryRow> trajectory;
};

/// Projected subgradient descent over the box [0,1]^K with step sizes
/// step_scale / sqrt(t + 1), starting from lambda = 0 (truthful bidding).
/// Returns the best iterate seen, not the last one.
inline DualState solve_dual(const Instance& instance, const SolverConfig& config = {}) {
  if (config.max_iters <= 0) throw InputError("max_iters must be positive");

  const std::size_t n = instance.n_campaigns();
  std::vector<double> lambda(n, 0.0);

  DualState state;
  state.trajectory.reserve(config.max_iters);

  double step_scale = config.step_scale;
  for (int t = 0; t < config.max_iters; ++t) {
    OracleOutput out = oracle(instance, lambda);

    double norm_sq = 0.0;
    for (double g : out.subgradient) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);
    if (t == 0 && step_scale <= 0.0) {
      step_scale = norm > 0.0 ? std::sqrt(static_cast<double>(n)) / norm : 1.0;
    }
    const double step = step_scale / std::sqrt(static_cast<double>(t) + 1.0);

    if (t == 0 || out.dual_value < state.best_value) {
      state.best_value = out.dual_value;
      state.best_lambda = lambda;
    }
    state.trajectory.push_back({t, out.dual_value, step, norm});
    state.lambda = lambda;
    state.dual_value = out.dual_value;
    state.subgradient = std::move(out.subgradient);

    for (std::size_t k = 0; k < n; ++k) {
      lambda[k] = std::clamp(lambda[k] - step * state.subgradient[k], 0.0, 1.0);
    }
  }
  state.iteration = config.max_iters;
  return state;
}

}  // namespace dspopt
