#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "dspopt/common.hpp"
#include "dspopt/dual.hpp"
#include "dspopt/instance.hpp"
#include "dspopt/lp.hpp"

namespace dspopt {

// Phase 2: freeze bid prices from the dual solution, then solve the remaining
// linear program in the allocation probabilities.

/// Per impression type, put weight 1 on the highest-scoring edge if its score
/// is strictly positive, otherwise allocate nothing. Lowest campaign index
/// wins ties. O(|E|).
inline std::vector<double> greedy_allocate(const Instance& instance,
                                           const std::vector<double>& scores) {
  if (scores.size() != instance.edges.size()) {
    throw InputError("score vector size does not match edge count");
  }
  std::vector<double> allocation(instance.edges.size(), 0.0);
  for (std::size_t i = 0; i < instance.n_types(); ++i) {
    int best_edge = -1;
    int best_campaign = -1;
    double best_score = 0.0;
    for (int e : instance.edges_by_type[i]) {
      const double score = scores[e];
      const int campaign = instance.edges[e].campaign;
      if (best_edge < 0 || score > best_score ||
          (score == best_score && campaign < best_campaign)) {
        best_edge = e;
        best_campaign = campaign;
        best_score = score;
      }
    }
    if (best_edge >= 0 && best_score > 0.0) allocation[best_edge] = 1.0;
  }
  return allocation;
}

// The structured allocation LP: |E| variables, one supply row per impression
// type, one budget row per campaign. Objective coefficients use the true
// revenue r_ik (not the lambda-shaded score): the bids are fixed, the profit
// objective is not rescaled.
struct StructuredLp {
  std::vector<double> objective;    // per edge: s_i (r rho(b) - E[B 1(B<=b)])
  std::vector<double> budget_coef;  // per edge: r s_i rho(b)
  std::vector<double> bid_prices;   // per edge
};

inline StructuredLp build_phase2_lp(const Instance& instance,
                                    const std::vector<double>& lambda_hat) {
  detail::check_multipliers(instance, lambda_hat);
  StructuredLp out;
  const std::size_t n_edges = instance.edges.size();
  out.objective.resize(n_edges);
  out.budget_coef.resize(n_edges);
  out.bid_prices.resize(n_edges);
  for (std::size_t e = 0; e < n_edges; ++e) {
    const Edge& edge = instance.edges[e];
    const auto& spec = instance.impression_types[edge.type];
    const Landscape& landscape = instance.landscape_of(edge.type);
    const double bid = (1.0 - lambda_hat[edge.campaign]) * edge.ecpi;
    const double p = win_prob(landscape, bid);
    out.bid_prices[e] = bid;
    out.objective[e] =
        spec.expected_supply * (edge.ecpi * p - partial_expectation(landscape, bid));
    out.budget_coef[e] = edge.ecpi * spec.expected_supply * p;
  }
  return out;
}

/// Rows 0..|I|-1 are the supply constraints (rhs 1), rows |I|..|I|+|K|-1 the
/// budget constraints (rhs m_k).
inline lp::SparseLp to_sparse_lp(const Instance& instance, const StructuredLp& structured) {
  lp::SparseLp out;
  const int n_types = static_cast<int>(instance.n_types());
  out.n_rows = n_types + static_cast<int>(instance.n_campaigns());
  out.rhs.assign(out.n_rows, 1.0);
  for (std::size_t k = 0; k < instance.n_campaigns(); ++k) {
    out.rhs[n_types + k] = instance.campaigns[k].budget;
  }
  out.columns.resize(instance.edges.size());
  for (std::size_t e = 0; e < instance.edges.size(); ++e) {
    const Edge& edge = instance.edges[e];
    lp::Column& col = out.columns[e];
    col.objective = structured.objective[e];
    col.entries.push_back({edge.type, 1.0});
    if (structured.budget_coef[e] != 0.0) {
      col.entries.push_back({n_types + edge.campaign, structured.budget_coef[e]});
    }
  }
  return out;
}

struct Phase2Solution {
  std::vector<double> x;  // per edge
  lp::Solution raw;       // duals and reduced costs for the structured rows
};

inline Phase2Solution solve_lp(const Instance& instance, const StructuredLp& structured) {
  Phase2Solution out;
  out.raw = lp::solve(to_sparse_lp(instance, structured));
  out.x = out.raw.x;
  return out;
}

/// The planning objective: expected profit of allocation x at bid prices b.
inline double profit_objective(const Instance& instance, const std::vector<double>& x,
                               const std::vector<double>& bids) {
  double total = 0.0;
  for (std::size_t e = 0; e < instance.edges.size(); ++e) {
    if (x[e] == 0.0) continue;
    const Edge& edge = instance.edges[e];
    const auto& spec = instance.impression_types[edge.type];
    const Landscape& landscape = instance.landscape_of(edge.type);
    const double p = win_prob(landscape, bids[e]);
    total += spec.expected_supply * x[e] *
             (edge.ecpi * p - partial_expectation(landscape, bids[e]));
  }
  return total;
}

/// Expected CPC revenue charged to each campaign by the plan.
inline std::vector<double> planned_spend(const Instance& instance,
                                         const std::vector<double>& x,
                                         const std::vector<double>& bids) {
  std::vector<double> spend(instance.n_campaigns(), 0.0);
  for (std::size_t e = 0; e < instance.edges.size(); ++e) {
    if (x[e] == 0.0) continue;
    const Edge& edge = instance.edges[e];
    spend[edge.campaign] += edge.ecpi * instance.impression_types[edge.type].expected_supply *
                            x[e] * win_prob(instance.landscape_of(edge.type), bids[e]);
  }
  return spend;
}

struct PlanSolution {
  std::vector<double> lambda;      // per campaign
  std::vector<double> x;           // per edge, in [0, 1]
  std::vector<double> bid_prices;  // per edge
  double primal_value = 0.0;
  double dual_bound = 0.0;
  double gap = 0.0;           // (dual_bound - primal) / primal; NaN if primal <= 0
  double gap_absolute = 0.0;  // dual_bound - primal
  std::vector<double> spend;  // per campaign, planned CPC revenue
};

struct TwoPhaseConfig {
  SolverConfig dual;
};

namespace detail {

// The online policy samples campaigns from each supply row, so the rows must
// be exact sub-distributions: clamp stray values into [0,1] and rescale rows
// that exceed one by no more than the solver tolerance.
inline void clean_allocation(const Instance& instance, std::vector<double>& x) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
  for (std::size_t i = 0; i < instance.n_types(); ++i) {
    double row = 0.0;
    for (int e : instance.edges_by_type[i]) row += x[e];
    if (row > 1.0) {
      if (row > 1.0 + 1e-9) {
        throw InternalError("phase-2 allocation row exceeds 1 beyond tolerance");
      }
      for (int e : instance.edges_by_type[i]) x[e] /= row;
    }
  }
}

}  // namespace detail

/// The full two-phase scheme: subgradient descent on the dual box, then the
/// structured LP at the recovered bid prices. The output always satisfies
/// primal_value <= dual_bound (weak duality). `dual_out`, when given,
/// receives the full descent state (trajectory included).
inline PlanSolution two_phase(const Instance& instance, const TwoPhaseConfig& config = {},
                              DualState* dual_out = nullptr) {
  DualState dual_state = solve_dual(instance, config.dual);
  const StructuredLp structured = build_phase2_lp(instance, dual_state.best_lambda);
  Phase2Solution phase2 = solve_lp(instance, structured);
  detail::clean_allocation(instance, phase2.x);

  PlanSolution plan;
  plan.lambda = dual_state.best_lambda;
  plan.x = std::move(phase2.x);
  plan.bid_prices = structured.bid_prices;
  plan.primal_value = profit_objective(instance, plan.x, plan.bid_prices);
  plan.dual_bound = dual_state.best_value;
  plan.gap_absolute = plan.dual_bound - plan.primal_value;
  plan.gap = plan.primal_value > 0.0 ? plan.gap_absolute / plan.primal_value
                                     : std::numeric_limits<double>::quiet_NaN();
  plan.spend = planned_spend(instance, plan.x, plan.bid_prices);

  if (plan.primal_value > plan.dual_bound + 1e-9) {
    throw InternalError("primal value exceeded the dual bound");
  }
  if (dual_out) *dual_out = std::move(dual_state);
  return plan;
}

// Plan files carry the allocation sparsely as (type index, campaign index,
// value) triples; the bid vector is positional in instance edge order, so a
// plan is only meaningful next to the instance it was solved for.
inline json plan_to_json(const Instance& instance, const PlanSolution& plan) {
  json doc;
  doc["lambda"] = plan.lambda;
  json entries = json::array();
  for (std::size_t e = 0; e < plan.x.size(); ++e) {
    if (plan.x[e] == 0.0) continue;
    entries.push_back({{"i", instance.edges[e].type},
                       {"k", instance.edges[e].campaign},
                       {"v", plan.x[e]}});
  }
  doc["x"] = std::move(entries);
  doc["b"] = plan.bid_prices;
  doc["primal"] = plan.primal_value;
  doc["dual_bound"] = plan.dual_bound;
  if (std::isnan(plan.gap)) {
    doc["gap"] = nullptr;
  } else {
    doc["gap"] = plan.gap;
  }
  return doc;
}

inline PlanSolution plan_from_json(const Instance& instance, const json& doc) {
  require_keys(doc, {"lambda", "x", "b", "primal", "dual_bound", "gap"}, "plan");
  PlanSolution plan;
  plan.lambda = doc.at("lambda").get<std::vector<double>>();
  if (plan.lambda.size() != instance.n_campaigns()) {
    throw InputError("plan: lambda size does not match the instance");
  }
  plan.bid_prices = doc.at("b").get<std::vector<double>>();
  if (plan.bid_prices.size() != instance.edges.size()) {
    throw InputError("plan: bid vector size does not match the instance");
  }

  std::map<std::pair<int, int>, int> edge_of;
  for (std::size_t e = 0; e < instance.edges.size(); ++e) {
    edge_of[{instance.edges[e].type, instance.edges[e].campaign}] = static_cast<int>(e);
  }
  plan.x.assign(instance.edges.size(), 0.0);
  for (const json& entry : doc.at("x")) {
    require_keys(entry, {"i", "k", "v"}, "plan.x entry");
    const auto it = edge_of.find({entry.at("i").get<int>(), entry.at("k").get<int>()});
    if (it == edge_of.end()) {
      throw InputError("plan: allocation entry does not match an instance edge");
    }
    plan.x[it->second] = entry.at("v").get<double>();
  }

  plan.primal_value = doc.at("primal").get<double>();
  plan.dual_bound = doc.at("dual_bound").get<double>();
  plan.gap = doc.at("gap").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                     : doc.at("gap").get<double>();
  plan.gap_absolute = plan.dual_bound - plan.primal_value;
  plan.spend = planned_spend(instance, plan.x, plan.bid_prices);
  return plan;
}

}  // namespace dspopt
