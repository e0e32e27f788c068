#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dspopt/common.hpp"
#include "dspopt/landscape.hpp"

namespace dspopt {

// Planning-problem data model. Instances are plain aggregates: build one by
// hand or through parse_instance(), call rebuild_index(), and treat it as
// immutable afterwards (everything downstream shares it by const reference,
// including across threads).

struct ImpressionTypeSpec {
  std::string id;
  double expected_supply = 0.0;  // mean impression count over the horizon
  std::string landscape_ref;
  int landscape_index = -1;  // resolved position in Instance::landscapes
};

struct CampaignSpec {
  std::string id;
  double budget = 0.0;
  double cpc = 0.0;
  std::vector<int> targets;  // impression-type indices this campaign targets
};

struct Edge {
  int type = -1;
  int campaign = -1;
  double ctr = 0.0;
  double ecpi = 0.0;  // always cpc * ctr; derived, never read from files
};

struct LandscapeRecord {
  std::string id;
  Landscape model;
};

struct Instance {
  std::vector<ImpressionTypeSpec> impression_types;
  std::vector<CampaignSpec> campaigns;
  std::vector<Edge> edges;
  std::vector<LandscapeRecord> landscapes;

  // Two index views over the same edge list, rebuilt after construction.
  // Out-of-range edge endpoints are skipped here and reported by validate().
  std::vector<std::vector<int>> edges_by_type;
  std::vector<std::vector<int>> edges_by_campaign;

  std::size_t n_types() const { return impression_types.size(); }
  std::size_t n_campaigns() const { return campaigns.size(); }

  const Landscape& landscape_of(int type) const {
    return landscapes[impression_types[type].landscape_index].model;
  }

  void rebuild_index() {
    edges_by_type.assign(impression_types.size(), {});
    edges_by_campaign.assign(campaigns.size(), {});
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& edge = edges[e];
      if (edge.type >= 0 && edge.type < static_cast<int>(impression_types.size()) &&
          edge.campaign >= 0 && edge.campaign < static_cast<int>(campaigns.size())) {
        edges_by_type[edge.type].push_back(static_cast<int>(e));
        edges_by_campaign[edge.campaign].push_back(static_cast<int>(e));
      }
    }
  }
};

inline std::size_t edge_count(const Instance& instance) { return instance.edges.size(); }

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool pass() const { return violations.empty(); }
};

// Value-level consistency check. Violations are data, not exceptions: a
// report with entries is a normal return. Structural problems that make the
// instance unrepresentable (unresolvable ids, bad landscape parameters) are
// caught earlier, at parse time.
inline ValidationReport validate(const Instance& instance) {
  ValidationReport report;
  auto flag = [&report](std::string msg) { report.violations.push_back(std::move(msg)); };

  const int n_types = static_cast<int>(instance.impression_types.size());
  const int n_campaigns = static_cast<int>(instance.campaigns.size());
  const int n_landscapes = static_cast<int>(instance.landscapes.size());

  std::map<std::string, int> landscape_ids;
  for (const auto& record : instance.landscapes) ++landscape_ids[record.id];
  for (const auto& [id, count] : landscape_ids) {
    if (count > 1) flag("duplicate landscape id \"" + id + "\"");
  }

  for (int i = 0; i < n_types; ++i) {
    const auto& spec = instance.impression_types[i];
    if (!(spec.expected_supply >= 0.0)) {
      flag("impression type \"" + spec.id + "\": negative expected supply");
    }
    const auto it = landscape_ids.find(spec.landscape_ref);
    if (it == landscape_ids.end() || it->second != 1) {
      flag("impression type \"" + spec.id + "\": landscape ref \"" +
           spec.landscape_ref + "\" does not resolve to exactly one landscape");
    } else if (spec.landscape_index < 0 || spec.landscape_index >= n_landscapes ||
               instance.landscapes[spec.landscape_index].id != spec.landscape_ref) {
      flag("impression type \"" + spec.id + "\": dangling landscape index");
    }
  }

  std::set<std::pair<int, int>> target_pairs;
  for (int k = 0; k < n_campaigns; ++k) {
    const auto& spec = instance.campaigns[k];
    if (!(spec.budget >= 0.0)) flag("campaign \"" + spec.id + "\": negative budget");
    if (!(spec.cpc > 0.0)) flag("campaign \"" + spec.id + "\": nonpositive cpc");
    if (spec.targets.empty()) {
      report.warnings.push_back("campaign \"" + spec.id + "\": empty target set");
    }
    for (int i : spec.targets) {
      if (i < 0 || i >= n_types) {
        flag("campaign \"" + spec.id + "\": dangling target index " + std::to_string(i));
        continue;
      }
      if (!target_pairs.insert({i, k}).second) {
        flag("campaign \"" + spec.id + "\": duplicate target " + std::to_string(i));
      }
    }
  }

  std::set<std::pair<int, int>> edge_pairs;
  for (const Edge& edge : instance.edges) {
    if (edge.type < 0 || edge.type >= n_types || edge.campaign < 0 ||
        edge.campaign >= n_campaigns) {
      flag("edge (" + std::to_string(edge.type) + ", " + std::to_string(edge.campaign) +
           "): dangling index");
      continue;
    }
    if (!edge_pairs.insert({edge.type, edge.campaign}).second) {
      flag("edge (" + std::to_string(edge.type) + ", " + std::to_string(edge.campaign) +
           "): duplicate edge");
      continue;
    }
    if (!(edge.ctr >= 0.0 && edge.ctr <= 1.0)) {
      flag("edge (" + std::to_string(edge.type) + ", " + std::to_string(edge.campaign) +
           "): ctr outside [0, 1]");
    }
    const double expected = instance.campaigns[edge.campaign].cpc * edge.ctr;
    if (std::abs(edge.ecpi - expected) > 1e-12) {
      flag("edge (" + std::to_string(edge.type) + ", " + std::to_string(edge.campaign) +
           "): ecpi differs from cpc * ctr");
    }
    if (!target_pairs.count({edge.type, edge.campaign})) {
      flag("edge (" + std::to_string(edge.type) + ", " + std::to_string(edge.campaign) +
           "): edge not in target set");
    }
  }
  for (const auto& [i, k] : target_pairs) {
    if (!edge_pairs.count({i, k})) {
      flag("target (" + std::to_string(i) + ", " + std::to_string(k) +
           "): target without edge");
    }
  }

  return report;
}

namespace detail {

// External ids may be JSON strings or integers; both normalize to a string
// key so "3" and 3 refer to the same entity.
inline std::string id_to_string(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw InputError(where + ": id must be a string or an integer");
}

inline int resolve_id(const std::map<std::string, int>& table, const std::string& id,
                      const std::string& where) {
  const auto it = table.find(id);
  if (it == table.end()) throw InputError(where + ": unknown id \"" + id + "\"");
  return it->second;
}

}  // namespace detail

inline Instance parse_instance(const json& doc) {
  require_keys(doc, {"impression_types", "campaigns", "edges", "landscapes"}, "instance");

  Instance instance;

  std::map<std::string, int> landscape_index;
  for (const json& record : doc.at("landscapes")) {
    const std::string where =
        "landscapes[" + std::to_string(instance.landscapes.size()) + "]";
    const std::string id = detail::id_to_string(record.at("id"), where);
    Landscape model = landscape_from_json(record, where);
    if (!landscape_index.emplace(id, static_cast<int>(instance.landscapes.size())).second) {
      throw InputError(where + ": duplicate landscape id \"" + id + "\"");
    }
    instance.landscapes.push_back({id, std::move(model)});
  }

  std::map<std::string, int> type_index;
  for (const json& record : doc.at("impression_types")) {
    const std::string where =
        "impression_types[" + std::to_string(instance.impression_types.size()) + "]";
    require_keys(record, {"id", "s", "landscape"}, where);
    ImpressionTypeSpec spec;
    spec.id = detail::id_to_string(record.at("id"), where);
    spec.expected_supply = record.at("s").get<double>();
    spec.landscape_ref = detail::id_to_string(record.at("landscape"), where);
    spec.landscape_index =
        detail::resolve_id(landscape_index, spec.landscape_ref, where + ".landscape");
    if (!type_index.emplace(spec.id, static_cast<int>(instance.impression_types.size()))
             .second) {
      throw InputError(where + ": duplicate impression type id \"" + spec.id + "\"");
    }
    instance.impression_types.push_back(std::move(spec));
  }

  std::map<std::string, int> campaign_index;
  for (const json& record : doc.at("campaigns")) {
    const std::string where = "campaigns[" + std::to_string(instance.campaigns.size()) + "]";
    require_keys(record, {"id", "budget", "cpc", "targets"}, where);
    CampaignSpec spec;
    spec.id = detail::id_to_string(record.at("id"), where);
    spec.budget = record.at("budget").get<double>();
    spec.cpc = record.at("cpc").get<double>();
    for (const json& target : record.at("targets")) {
      spec.targets.push_back(detail::resolve_id(
          type_index, detail::id_to_string(target, where + ".targets"), where + ".targets"));
    }
    if (!campaign_index.emplace(spec.id, static_cast<int>(instance.campaigns.size())).second) {
      throw InputError(where + ": duplicate campaign id \"" + spec.id + "\"");
    }
    instance.campaigns.push_back(std::move(spec));
  }

  for (const json& record : doc.at("edges")) {
    const std::string where = "edges[" + std::to_string(instance.edges.size()) + "]";
    require_keys(record, {"i", "k", "ctr"}, where);
    Edge edge;
    edge.type = detail::resolve_id(
        type_index, detail::id_to_string(record.at("i"), where), where + ".i");
    edge.campaign = detail::resolve_id(
        campaign_index, detail::id_to_string(record.at("k"), where), where + ".k");
    edge.ctr = record.at("ctr").get<double>();
    edge.ecpi = instance.campaigns[edge.campaign].cpc * edge.ctr;
    instance.edges.push_back(edge);
  }

  instance.rebuild_index();
  return instance;
}

inline Instance parse_instance_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw InputError(std::string("instance parse error: ") + err.what());
  }
  return parse_instance(doc);
}

inline json instance_to_json(const Instance& instance) {
  json doc;
  doc["impression_types"] = json::array();
  for (const auto& spec : instance.impression_types) {
    doc["impression_types"].push_back(
        {{"id", spec.id}, {"s", spec.expected_supply}, {"landscape", spec.landscape_ref}});
  }
  doc["campaigns"] = json::array();
  for (const auto& spec : instance.campaigns) {
    json targets = json::array();
    for (int i : spec.targets) targets.push_back(instance.impression_types[i].id);
    doc["campaigns"].push_back({{"id", spec.id},
                                {"budget", spec.budget},
                                {"cpc", spec.cpc},
                                {"targets", std::move(targets)}});
  }
  doc["edges"] = json::array();
  for (const Edge& edge : instance.edges) {
    doc["edges"].push_back({{"i", instance.impression_types[edge.type].id},
                            {"k", instance.campaigns[edge.campaign].id},
                            {"ctr", edge.ctr}});
  }
  doc["landscapes"] = json::array();
  for (const auto& record : instance.landscapes) {
    doc["landscapes"].push_back(landscape_to_json(record.id, record.model));
  }
  return doc;
}

}  // namespace dspopt
