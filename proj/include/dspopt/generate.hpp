#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dspopt/common.hpp"
#include "dspopt/instance.hpp"
#include "dspopt/rng.hpp"

namespace dspopt {

// Synthetic market generator. Every entity gets a uniform quality score;
// qualities drive targeting density, click-through rates, competition, and
// (optionally) budgets.

enum class BudgetMode {
  kConstant,       // m_k = budget for every campaign
  kQualityScaled,  // m_k = budget * Q_k
};

struct GeneratorConfig {
  int n_impression_types = 100;
  int n_campaigns = 100;
  int market_size = 10;
  double supply = 5000.0;  // expected impressions per type
  double cpc = 1.0;
  double budget = 50.0;
  BudgetMode budget_mode = BudgetMode::kConstant;
  std::uint64_t seed = 0;
};

struct GeneratedInstance {
  Instance instance;
  std::vector<double> type_quality;      // Q_i, per impression type
  std::vector<double> campaign_quality;  // Q_k, per campaign
};

namespace detail {

// Campaign-quality, type-quality, and edge-coin draws come from three
// substreams split from the seed in this fixed order, so runs that vary one
// dimension (say, budgets) keep every other draw identical.
enum : std::uint64_t {
  kCampaignQualityStream = 0,
  kTypeQualityStream = 1,
  kEdgeCoinStream = 2,
};

}  // namespace detail

/// One targeting row: each campaign is included independently with
/// probability `type_quality`. Consumes exactly n_campaigns draws.
inline std::vector<int> sample_target_row(Rng& rng, int n_campaigns, double type_quality) {
  std::vector<int> campaigns;
  for (int k = 0; k < n_campaigns; ++k) {
    if (rng.uniform01() < type_quality) campaigns.push_back(k);
  }
  return campaigns;
}

inline GeneratedInstance generate(const GeneratorConfig& config) {
  if (config.n_impression_types < 1 || config.n_campaigns < 1 || config.market_size < 1) {
    throw InputError("generator counts must be >= 1");
  }
  if (!(config.supply > 0.0 && config.cpc > 0.0 && config.budget > 0.0)) {
    throw InputError("generator supply, cpc, and budget must be positive");
  }

  Rng campaign_rng(mix_seed(config.seed, detail::kCampaignQualityStream));
  Rng type_rng(mix_seed(config.seed, detail::kTypeQualityStream));
  Rng edge_rng(mix_seed(config.seed, detail::kEdgeCoinStream));

  GeneratedInstance out;
  out.campaign_quality.resize(config.n_campaigns);
  for (double& q : out.campaign_quality) q = campaign_rng.uniform01();
  out.type_quality.resize(config.n_impression_types);
  for (double& q : out.type_quality) q = type_rng.uniform01();

  Instance& instance = out.instance;
  for (int k = 0; k < config.n_campaigns; ++k) {
    CampaignSpec spec;
    spec.id = "c" + std::to_string(k);
    spec.cpc = config.cpc;
    spec.budget = config.budget_mode == BudgetMode::kConstant
                      ? config.budget
                      : config.budget * out.campaign_quality[k];
    instance.campaigns.push_back(std::move(spec));
  }
  for (int i = 0; i < config.n_impression_types; ++i) {
    const std::string label = std::to_string(i);
    instance.landscapes.push_back(
        {"L" + label,
         BinomialMaxUniformLandscape(config.market_size, out.type_quality[i])});
    ImpressionTypeSpec spec;
    spec.id = "i" + label;
    spec.expected_supply = config.supply;
    spec.landscape_ref = "L" + label;
    spec.landscape_index = i;
    instance.impression_types.push_back(std::move(spec));

    for (int k : sample_target_row(edge_rng, config.n_campaigns, out.type_quality[i])) {
      Edge edge;
      edge.type = i;
      edge.campaign = k;
      edge.ctr = out.type_quality[i] * out.campaign_quality[k];
      edge.ecpi = config.cpc * edge.ctr;
      instance.edges.push_back(edge);
      instance.campaigns[k].targets.push_back(i);
    }
  }
  // Campaigns whose sampled target set came up empty are kept as-is; they
  // simply never bid and their multiplier is irrelevant.
  instance.rebuild_index();
  return out;
}

inline GeneratorConfig example_a_config(std::uint64_t seed) {
  GeneratorConfig config;
  config.seed = seed;
  return config;  // defaults are the Example A constants
}

inline GeneratorConfig example_b_config(std::uint64_t seed) {
  GeneratorConfig config;
  config.seed = seed;
  config.budget_mode = BudgetMode::kQualityScaled;
  return config;
}

inline GeneratorConfig sweep_base_config(std::uint64_t seed, double budget) {
  GeneratorConfig config;
  config.seed = seed;
  config.n_impression_types = 10;
  config.budget = budget;
  return config;
}

/// Sidecar with the drawn quality scores, written next to generated
/// instances; downstream checks use it to recover the generator's draws.
inline json quality_sidecar_json(const GeneratedInstance& generated) {
  json doc;
  doc["Q_i"] = generated.type_quality;
  doc["Q_k"] = generated.campaign_quality;
  return doc;
}

}  // namespace dspopt
