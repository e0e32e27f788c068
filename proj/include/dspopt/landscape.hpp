#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "dspopt/common.hpp"
#include "dspopt/rng.hpp"

namespace dspopt {

namespace detail {
inline double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

inline void check_bid(double bid) {
  if (!(bid >= 0.0)) throw InputError("bid price must be nonnegative");
}
}  // namespace detail

// Highest competing bid modeled as the maximum of Bin(M, Q) independent
// U[0,1] bids. The distribution has an atom of mass (1-Q)^M at zero (nobody
// else shows up) and a continuous part on (0, 1].
class BinomialMaxUniformLandscape {
 public:
  BinomialMaxUniformLandscape(int market_size, double quality)
      : market_size_(market_size), quality_(quality) {
    if (market_size < 1) throw InputError("landscape market size must be >= 1");
    if (!(quality >= 0.0 && quality <= 1.0)) {
      throw InputError("landscape quality must lie in [0, 1]");
    }
    // Binomial pmf over the competitor count, via the multiplicative
    // coefficient recurrence in floating point (fine for M <= 64).
    pmf_.resize(static_cast<std::size_t>(market_size_) + 1);
    double binom = 1.0;
    for (int n = 0; n <= market_size_; ++n) {
      if (n > 0) binom *= static_cast<double>(market_size_ - n + 1) / n;
      pmf_[n] = binom * detail::ipow(quality_, n) *
                detail::ipow(1.0 - quality_, market_size_ - n);
    }
  }

  int market_size() const { return market_size_; }
  double quality() const { return quality_; }

  /// P(Bmax <= bid). Constant beyond the support maximum of 1.
  double win_prob(double bid) const {
    detail::check_bid(bid);
    const double c = std::min(bid, 1.0);
    return detail::ipow(1.0 - quality_ + quality_ * c, market_size_);
  }

  /// E[Bmax * 1(Bmax <= bid)]. For a fixed competitor count n the max has
  /// density n t^(n-1), so the censored mean below c is n c^(n+1) / (n+1).
  double partial_expectation(double bid) const {
    detail::check_bid(bid);
    const double c = std::min(bid, 1.0);
    double sum = 0.0;
    double cpow = c * c;  // c^(n+1) for n = 1
    for (int n = 1; n <= market_size_; ++n) {
      sum += pmf_[n] * n * cpow / (n + 1);
      cpow *= c;
    }
    return sum;
  }

  /// E[Bmax | Bmax <= bid]; zero when the conditioning event has probability
  /// zero (only possible at bid = 0 with Q = 1, where the limit is also 0).
  double truncated_mean(double bid) const {
    const double p = win_prob(bid);
    if (p <= 0.0) return 0.0;
    return partial_expectation(bid) / p;
  }

  /// Draw a competitor count ~ Bin(M, Q), then the max of that many uniforms.
  double sample_max_bid(Rng& rng) const {
    const int n = rng.binomial(market_size_, quality_);
    double best = 0.0;
    for (int i = 0; i < n; ++i) best = std::max(best, rng.uniform01());
    return best;
  }

  double max_support() const { return 1.0; }

 private:
  int market_size_;
  double quality_;
  std::vector<double> pmf_;
};

// Piecewise-constant CDF built from a list of observed competing bids.
// Exercises the same interface as the closed-form model without any
// distributional assumptions; the sampler resamples the list uniformly.
class EmpiricalLandscape {
 public:
  explicit EmpiricalLandscape(std::vector<double> samples)
      : samples_(std::move(samples)) {
    if (samples_.empty()) throw InputError("empirical landscape needs samples");
    for (double s : samples_) {
      if (!(s >= 0.0)) throw InputError("empirical landscape samples must be >= 0");
    }
    std::sort(samples_.begin(), samples_.end());
    prefix_.resize(samples_.size() + 1, 0.0);
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      prefix_[i + 1] = prefix_[i] + samples_[i];
    }
  }

  const std::vector<double>& samples() const { return samples_; }

  double win_prob(double bid) const {
    detail::check_bid(bid);
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), bid);
    return static_cast<double>(it - samples_.begin()) / samples_.size();
  }

  double partial_expectation(double bid) const {
    detail::check_bid(bid);
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), bid);
    return prefix_[static_cast<std::size_t>(it - samples_.begin())] / samples_.size();
  }

  double truncated_mean(double bid) const {
    const double p = win_prob(bid);
    if (p <= 0.0) return 0.0;
    return partial_expectation(bid) / p;
  }

  double sample_max_bid(Rng& rng) const {
    const auto n = samples_.size();
    auto idx = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
    if (idx >= n) idx = n - 1;
    return samples_[idx];
  }

  double max_support() const { return samples_.back(); }

 private:
  std::vector<double> samples_;  // sorted ascending
  std::vector<double> prefix_;   // prefix sums of sorted samples
};

using Landscape = std::variant<BinomialMaxUniformLandscape, EmpiricalLandscape>;

inline double win_prob(const Landscape& l, double bid) {
  return std::visit([bid](const auto& m) { return m.win_prob(bid); }, l);
}

inline double partial_expectation(const Landscape& l, double bid) {
  return std::visit([bid](const auto& m) { return m.partial_expectation(bid); }, l);
}

inline double truncated_mean(const Landscape& l, double bid) {
  return std::visit([bid](const auto& m) { return m.truncated_mean(bid); }, l);
}

inline double sample_max_bid(const Landscape& l, Rng& rng) {
  return std::visit([&rng](const auto& m) { return m.sample_max_bid(rng); }, l);
}

inline double max_support(const Landscape& l) {
  return std::visit([](const auto& m) { return m.max_support(); }, l);
}

/// Expected utility of entering bid `b` into a second-price auction with
/// valuation `v`: [v - truncated_mean(b)] * win_prob(b), computed in the
/// equivalent censored form v * win_prob(b) - partial_expectation(b) so the
/// zero-probability corner needs no special casing.
inline double expected_win_utility(const Landscape& l, double bid, double valuation) {
  detail::check_bid(bid);
  return valuation * win_prob(l, bid) - partial_expectation(l, bid);
}

inline Landscape landscape_from_json(const json& record, const std::string& where) {
  require_keys(record, {"id", "kind", "params"}, where);
  const std::string kind = record.at("kind").get<std::string>();
  const json& params = record.at("params");
  if (kind == "binomial_max_uniform") {
    require_keys(params, {"M", "Q"}, where + ".params");
    return BinomialMaxUniformLandscape(params.at("M").get<int>(),
                                       params.at("Q").get<double>());
  }
  if (kind == "empirical") {
    require_keys(params, {"samples"}, where + ".params");
    return EmpiricalLandscape(params.at("samples").get<std::vector<double>>());
  }
  throw InputError(where + ": unknown landscape kind \"" + kind + "\"");
}

inline json landscape_to_json(const std::string& id, const Landscape& l) {
  json record;
  record["id"] = id;
  if (const auto* b = std::get_if<BinomialMaxUniformLandscape>(&l)) {
    record["kind"] = "binomial_max_uniform";
    record["params"] = {{"M", b->market_size()}, {"Q", b->quality()}};
  } else {
    const auto& e = std::get<EmpiricalLandscape>(l);
    record["kind"] = "empirical";
    record["params"] = {{"samples", e.samples()}};
  }
  return record;
}

}  // namespace dspopt
