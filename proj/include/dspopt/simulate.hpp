#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "dspopt/common.hpp"
#include "dspopt/instance.hpp"
#include "dspopt/primal.hpp"
#include "dspopt/rng.hpp"

namespace dspopt {

// Online simulation of the arrival / auction / click pipeline. A trace fixes
// the impression sequence, the realized competing max bids, and one click
// uniform per arrival; competing policies consume the same trace, so paired
// comparisons are variance-reduced by common random numbers.

struct Arrival {
  int type = 0;
  double max_bid = 0.0;  // highest competing bid realized in the auction
  double click_u = 0.0;  // compared against the chosen campaign's ctr
};

struct ArrivalTrace {
  std::vector<Arrival> arrivals;
  std::uint64_t seed = 0;
};

namespace detail {
// Substream tag for the Lagrangian policy's campaign-selection draws; keeps
// them decorrelated from the trace stream while staying a pure function of
// the trace seed.
inline constexpr std::uint64_t kSelectionStream = 16;
}  // namespace detail

/// Draws the total arrival count ~ Poisson(sum of s_i), then types i.i.d.
/// proportional to s_i — the count/order distribution of merged independent
/// Poisson processes. Each arrival also realizes its auction's competing max
/// bid and a click uniform.
inline ArrivalTrace generate_trace(const Instance& instance, std::uint64_t seed) {
  ArrivalTrace trace;
  trace.seed = seed;

  double total_supply = 0.0;
  std::vector<double> cumulative(instance.n_types(), 0.0);
  for (std::size_t i = 0; i < instance.n_types(); ++i) {
    total_supply += instance.impression_types[i].expected_supply;
    cumulative[i] = total_supply;
  }
  if (total_supply <= 0.0) return trace;

  Rng rng(seed);
  const long long count = rng.poisson(total_supply);
  trace.arrivals.reserve(static_cast<std::size_t>(count));
  for (long long n = 0; n < count; ++n) {
    const double u = rng.uniform01() * total_supply;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const int type = static_cast<int>(std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative.begin()), instance.n_types() - 1));
    Arrival arrival;
    arrival.type = type;
    arrival.max_bid = sample_max_bid(instance.landscape_of(type), rng);
    arrival.click_u = rng.uniform01();
    trace.arrivals.push_back(arrival);
  }
  return trace;
}

struct PolicyState {
  std::vector<double> remaining_budget;  // m_k minus charged CPC revenue
  std::vector<double> spend;             // charged CPC revenue per campaign
  std::vector<long long> clicks;         // per campaign
  double profit = 0.0;
  double cost = 0.0;     // payments to the exchange
  double revenue = 0.0;  // CPC collections
};

namespace detail {

inline PolicyState make_policy_state(const Instance& instance) {
  PolicyState state;
  state.remaining_budget.resize(instance.n_campaigns());
  for (std::size_t k = 0; k < instance.n_campaigns(); ++k) {
    state.remaining_budget[k] = instance.campaigns[k].budget;
  }
  state.spend.assign(instance.n_campaigns(), 0.0);
  state.clicks.assign(instance.n_campaigns(), 0);
  return state;
}

// A campaign is depleted once it cannot afford one more click.
inline bool depleted(const PolicyState& state, const Instance& instance, int campaign) {
  return state.remaining_budget[campaign] < instance.campaigns[campaign].cpc;
}

// Second-price auction step shared by every policy: win on bid >= competing
// max (the DSP wins ties), pay the competing max, then charge the campaign's
// CPC price if the shared click uniform falls under this edge's ctr.
inline void run_auction(const Instance& instance, const Arrival& arrival, int edge_index,
                        double bid, PolicyState& state) {
  if (bid < arrival.max_bid) return;
  state.cost += arrival.max_bid;
  const Edge& edge = instance.edges[edge_index];
  if (arrival.click_u < edge.ctr) {
    const double cpc = instance.campaigns[edge.campaign].cpc;
    state.revenue += cpc;
    state.remaining_budget[edge.campaign] -= cpc;
    state.spend[edge.campaign] += cpc;
    ++state.clicks[edge.campaign];
  }
}

}  // namespace detail

/// Per impression type, the plan's allocation row as a sampleable
/// sub-distribution over edges; the residual mass means "do not bid".
class CampaignSampler {
 public:
  CampaignSampler(const Instance& instance, const std::vector<double>& x) {
    if (x.size() != instance.edges.size()) {
      throw InputError("allocation vector size does not match edge count");
    }
    rows_.resize(instance.n_types());
    for (std::size_t i = 0; i < instance.n_types(); ++i) {
      double mass = 0.0;
      for (int e : instance.edges_by_type[i]) {
        if (x[e] < -1e-12) throw InputError("allocation entries must be nonnegative");
        mass += std::max(x[e], 0.0);
        rows_[i].edges.push_back(e);
        rows_[i].cumulative.push_back(mass);
      }
      if (mass > 1.0 + 1e-9) {
        throw InputError("allocation row mass exceeds 1");
      }
    }
  }

  /// Returns the sampled edge index, or -1 for the null campaign.
  int sample(int type, Rng& rng) const {
    const Row& row = rows_[type];
    const double u = rng.uniform01();
    const auto it = std::upper_bound(row.cumulative.begin(), row.cumulative.end(), u);
    if (it == row.cumulative.end()) return -1;
    return row.edges[static_cast<std::size_t>(it - row.cumulative.begin())];
  }

 private:
  struct Row {
    std::vector<int> edges;
    std::vector<double> cumulative;
  };
  std::vector<Row> rows_;
};

/// The online policy implied by a plan: sample a campaign from the type's
/// allocation row (or null), skip if null or depleted, otherwise bid the
/// plan's price for that edge.
inline PolicyState run_lagrangian_policy(const Instance& instance, const PlanSolution& plan,
                                         const ArrivalTrace& trace) {
  const CampaignSampler sampler(instance, plan.x);
  Rng selection_rng(mix_seed(trace.seed, detail::kSelectionStream));
  PolicyState state = detail::make_policy_state(instance);
  for (const Arrival& arrival : trace.arrivals) {
    const int e = sampler.sample(arrival.type, selection_rng);
    if (e < 0 || detail::depleted(state, instance, instance.edges[e].campaign)) continue;
    detail::run_auction(instance, arrival, e, plan.bid_prices[e], state);
  }
  state.profit = state.revenue - state.cost;
  return state;
}

/// Baseline: among the type's non-depleted campaigns pick the one with the
/// largest eCPI (lowest index on ties) and bid that eCPI truthfully.
inline PolicyState run_greedy_policy(const Instance& instance, const ArrivalTrace& trace) {
  // Candidate order per type: eCPI descending, campaign index ascending.
  std::vector<std::vector<int>> ranked(instance.n_types());
  for (std::size_t i = 0; i < instance.n_types(); ++i) {
    ranked[i] = instance.edges_by_type[i];
    std::sort(ranked[i].begin(), ranked[i].end(), [&instance](int a, int b) {
      if (instance.edges[a].ecpi != instance.edges[b].ecpi) {
        return instance.edges[a].ecpi > instance.edges[b].ecpi;
      }
      return instance.edges[a].campaign < instance.edges[b].campaign;
    });
  }

  PolicyState state = detail::make_policy_state(instance);
  for (const Arrival& arrival : trace.arrivals) {
    for (int e : ranked[arrival.type]) {
      if (detail::depleted(state, instance, instance.edges[e].campaign)) continue;
      detail::run_auction(instance, arrival, e, instance.edges[e].ecpi, state);
      break;
    }
  }
  state.profit = state.revenue - state.cost;
  return state;
}

struct RunStats {
  double profit = 0.0;
  double cost = 0.0;
  double revenue = 0.0;
  double budget_utilization = 0.0;  // revenue / total budget
  double profit_margin = 0.0;       // profit / revenue (0 when revenue is 0)
};

struct RunRecord {
  RunStats lagrangian;
  RunStats greedy;
};

struct Aggregate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct PolicySummary {
  double profit = 0.0;
  double cost = 0.0;
  double revenue = 0.0;
  double budget_utilization = 0.0;
  double profit_margin = 0.0;
};

struct SimulationReport {
  int runs = 0;
  int excluded_runs = 0;  // runs whose greedy denominators were zero
  PolicySummary lagrangian;
  PolicySummary greedy;
  Aggregate relative_profit;
  Aggregate relative_cost;
  Aggregate relative_revenue;
};

struct ExperimentResult {
  SimulationReport report;
  std::vector<RunRecord> records;  // indexed by run, in run order
};

using PolicyFn = std::function<PolicyState(const Instance&, const ArrivalTrace&)>;

namespace detail {

inline RunStats run_stats(const PolicyState& state, double total_budget) {
  RunStats stats;
  stats.profit = state.profit;
  stats.cost = state.cost;
  stats.revenue = state.revenue;
  stats.budget_utilization = total_budget > 0.0 ? state.revenue / total_budget : 0.0;
  stats.profit_margin = state.revenue > 0.0 ? state.profit / state.revenue : 0.0;
  return stats;
}

inline Aggregate aggregate_of(const std::vector<double>& values) {
  Aggregate agg;
  if (values.empty()) return agg;
  double sum = 0.0;
  for (double v : values) sum += v;
  agg.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
    agg.std_error = std::sqrt(ss / (static_cast<double>(values.size()) - 1.0) /
                              static_cast<double>(values.size()));
  }
  return agg;
}

}  // namespace detail

/// Paired harness over arbitrary policies: run r consumes the trace seeded
/// base_seed + r, both policies see it verbatim. Runs are independent and are
/// distributed across `workers` threads; the aggregation order is fixed by
/// run index, so the output is byte-identical for any worker count.
inline ExperimentResult paired_experiment_custom(const Instance& instance, const PolicyFn& a,
                                                 const PolicyFn& b, int runs,
                                                 std::uint64_t base_seed, int workers = 1) {
  if (runs < 1) throw InputError("paired experiment needs at least one run");

  double total_budget = 0.0;
  for (const auto& campaign : instance.campaigns) total_budget += campaign.budget;

  ExperimentResult result;
  result.records.resize(runs);

  const int n_workers = std::max(1, std::min(workers, runs));
  auto work = [&](int worker) {
    for (int r = worker; r < runs; r += n_workers) {
      const ArrivalTrace trace = generate_trace(instance, base_seed + 1 + r);
      result.records[r].lagrangian = detail::run_stats(a(instance, trace), total_budget);
      result.records[r].greedy = detail::run_stats(b(instance, trace), total_budget);
    }
  };
  if (n_workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }

  SimulationReport& report = result.report;
  report.runs = runs;
  std::vector<double> rel_profit, rel_cost, rel_revenue;
  double sums[10] = {0};
  for (const RunRecord& rec : result.records) {
    sums[0] += rec.lagrangian.profit;
    sums[1] += rec.lagrangian.cost;
    sums[2] += rec.lagrangian.revenue;
    sums[3] += rec.lagrangian.budget_utilization;
    sums[4] += rec.lagrangian.profit_margin;
    sums[5] += rec.greedy.profit;
    sums[6] += rec.greedy.cost;
    sums[7] += rec.greedy.revenue;
    sums[8] += rec.greedy.budget_utilization;
    sums[9] += rec.greedy.profit_margin;
    if (rec.greedy.profit == 0.0 || rec.greedy.cost == 0.0 || rec.greedy.revenue == 0.0) {
      ++report.excluded_runs;  // the ratio statistics are undefined here
      continue;
    }
    rel_profit.push_back(rec.lagrangian.profit / rec.greedy.profit);
    rel_cost.push_back(rec.lagrangian.cost / rec.greedy.cost);
    rel_revenue.push_back(rec.lagrangian.revenue / rec.greedy.revenue);
  }
  const double denom = static_cast<double>(runs);
  report.lagrangian = {sums[0] / denom, sums[1] / denom, sums[2] / denom, sums[3] / denom,
                       sums[4] / denom};
  report.greedy = {sums[5] / denom, sums[6] / denom, sums[7] / denom, sums[8] / denom,
                   sums[9] / denom};
  report.relative_profit = detail::aggregate_of(rel_profit);
  report.relative_cost = detail::aggregate_of(rel_cost);
  report.relative_revenue = detail::aggregate_of(rel_revenue);
  return result;
}

inline ExperimentResult paired_experiment(const Instance& instance, const PlanSolution& plan,
                                          int runs, std::uint64_t base_seed, int workers = 1) {
  const PolicyFn lagrangian = [&plan](const Instance& inst, const ArrivalTrace& trace) {
    return run_lagrangian_policy(inst, plan, trace);
  };
  const PolicyFn greedy = [](const Instance& inst, const ArrivalTrace& trace) {
    return run_greedy_policy(inst, trace);
  };
  return paired_experiment_custom(instance, lagrangian, greedy, runs, base_seed, workers);
}

inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "run,policy,profit,cost,revenue,budget_util,margin\n";
  const auto row = [&os](int run, const char* policy, const RunStats& s) {
    os << run << ',' << policy << ',' << format_double(s.profit) << ','
       << format_double(s.cost) << ',' << format_double(s.revenue) << ','
       << format_double(s.budget_utilization) << ',' << format_double(s.profit_margin)
       << '\n';
  };
  for (std::size_t r = 0; r < records.size(); ++r) {
    row(static_cast<int>(r) + 1, "lagrangian", records[r].lagrangian);
    row(static_cast<int>(r) + 1, "greedy", records[r].greedy);
  }
}

inline json report_to_json(const SimulationReport& report) {
  const auto policy = [](const PolicySummary& p) {
    return json{{"profit", p.profit},
                {"cost", p.cost},
                {"revenue", p.revenue},
                {"budget_utilization", p.budget_utilization},
                {"profit_margin", p.profit_margin}};
  };
  const auto aggregate = [](const Aggregate& a) {
    return json{{"mean", a.mean}, {"stderr", a.std_error}};
  };
  return json{{"runs", report.runs},
              {"excluded_runs", report.excluded_runs},
              {"lagrangian", policy(report.lagrangian)},
              {"greedy", policy(report.greedy)},
              {"relative_profit", aggregate(report.relative_profit)},
              {"relative_cost", aggregate(report.relative_cost)},
              {"relative_revenue", aggregate(report.relative_revenue)}};
}

}  // namespace dspopt
