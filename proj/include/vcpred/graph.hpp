#pragma once

#include "vcpred/date.hpp"
#include "vcpred/jsonl.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace vcpred {

// ============================================================================
// Node and edge types
// ============================================================================

enum class NodeKind { Company, Investor };

struct NodeId {
  NodeKind kind = NodeKind::Company;
  std::string id;

  bool operator==(const NodeId& o) const = default;
  auto operator<=>(const NodeId& o) const = default;
};

inline NodeId company_node(std::string id) {
  return {NodeKind::Company, std::move(id)};
}
inline NodeId investor_node(std::string id) {
  return {NodeKind::Investor, std::move(id)};
}

/// Serialized node key, e.g. "cmp:c42" / "inv:i7".
inline std::string node_key(const NodeId& n) {
  return (n.kind == NodeKind::Company ? "cmp:" : "inv:") + n.id;
}

inline NodeId parse_node_key(const std::string& key) {
  if (key.rfind("cmp:", 0) == 0) return company_node(key.substr(4));
  if (key.rfind("inv:", 0) == 0) return investor_node(key.substr(4));
  throw std::runtime_error("invalid node key '" + key + "'");
}

enum class Round { Angel, Seed, SeriesA, Later };

inline const char* round_name(Round r) {
  switch (r) {
    case Round::Angel: return "angel";
    case Round::Seed: return "seed";
    case Round::SeriesA: return "series_a";
    case Round::Later: return "later";
  }
  return "later";
}

/// Round taxonomy beyond angel/seed/series_a collapses into Later.
inline Round parse_round(const std::string& s, bool* known = nullptr) {
  if (known) *known = true;
  if (s == "angel") return Round::Angel;
  if (s == "seed") return Round::Seed;
  if (s == "series_a") return Round::SeriesA;
  if (s == "later") return Round::Later;
  if (known) *known = false;
  return Round::Later;
}

/// Directed investment event, always investor -> company.
struct InvestmentEdge {
  std::string investor_id;
  std::string company_id;
  Date date;
  Round round = Round::Later;
  std::optional<double> amount;  // currency units; absent when undisclosed
};

struct EmploymentEntry {
  std::string role;
  Date date;
};

struct CompanyRecord {
  std::string id;
  std::string name;
  Date founded;
  std::string description;
  std::map<std::string, std::string> attributes;  // industry, region, stage
  std::optional<Date> first_round_date;           // earliest seed/angel edge
};

struct InvestorRecord {
  std::string id;
  std::string name;
  std::map<std::string, std::string> demographics;  // education, age, gender
  std::vector<EmploymentEntry> employment;
};

/// Outcome label: y = 1 iff a series_a edge exists with t0 < t <= t0 + 12mo,
/// where t0 is the earliest seed/angel round date.
struct TargetLabel {
  std::string company_id;
  Date t0;
  int y = 0;
};

// ============================================================================
// InvestmentGraph
// ============================================================================

class InvestmentGraph;

/// Read-only leakage barrier: exposes only edges strictly before the cutoff.
/// Record-level timestamp filtering (employment, histories) is applied by the
/// retrieval layer against the same cutoff.
class TemporalView {
 public:
  TemporalView(const InvestmentGraph& g, Date cutoff)
      : graph_(&g), cutoff_(cutoff) {}

  Date cutoff() const { return cutoff_; }
  const InvestmentGraph& graph() const { return *graph_; }

  /// Adjacent nodes via edges with t < cutoff, ordered by edge date
  /// descending then neighbor id ascending.
  std::vector<std::pair<NodeId, InvestmentEdge>> neighbors(
      const NodeId& node) const;

 private:
  const InvestmentGraph* graph_;
  Date cutoff_;
};

class InvestmentGraph {
 public:
  // --- loading ------------------------------------------------------------

  /// Loads the three JSONL streams. Malformed lines fail with the file and
  /// line number; edges referencing unknown endpoints fail naming the id.
  /// Non-fatal schema oddities (unknown round strings, founded after first
  /// round) are collected as warnings.
  static InvestmentGraph load(const std::string& companies_path,
                              const std::string& investors_path,
                              const std::string& investments_path) {
    InvestmentGraph g;
    for_each_jsonl_line(companies_path, [&](const json& j, int line_no) {
      std::string ctx = companies_path + ":" + std::to_string(line_no);
      CompanyRecord rec;
      rec.id = require_string(j, "id", ctx);
      rec.name = j.value("name", rec.id);
      rec.founded = parse_date_or_throw(require_string(j, "founded", ctx), ctx);
      rec.description = j.value("description", std::string{});
      if (j.contains("attributes") && j["attributes"].is_object()) {
        for (auto it = j["attributes"].begin(); it != j["attributes"].end();
             ++it) {
          if (it.value().is_string())
            rec.attributes[it.key()] = it.value().get<std::string>();
        }
      }
      if (!g.companies_.emplace(rec.id, rec).second)
        throw std::runtime_error(ctx + ": duplicate company id '" + rec.id +
                                 "'");
    });

    for_each_jsonl_line(investors_path, [&](const json& j, int line_no) {
      std::string ctx = investors_path + ":" + std::to_string(line_no);
      InvestorRecord rec;
      rec.id = require_string(j, "id", ctx);
      rec.name = j.value("name", rec.id);
      if (j.contains("demographics") && j["demographics"].is_object()) {
        for (auto it = j["demographics"].begin(); it != j["demographics"].end();
             ++it) {
          if (it.value().is_string())
            rec.demographics[it.key()] = it.value().get<std::string>();
        }
      }
      if (j.contains("employment")) {
        for (const auto& e : j["employment"]) {
          EmploymentEntry entry;
          entry.role = require_string(e, "role", ctx);
          entry.date = parse_date_or_throw(require_string(e, "date", ctx), ctx);
          rec.employment.push_back(entry);
        }
      }
      if (!g.investors_.emplace(rec.id, rec).second)
        throw std::runtime_error(ctx + ": duplicate investor id '" + rec.id +
                                 "'");
    });

    for_each_jsonl_line(investments_path, [&](const json& j, int line_no) {
      std::string ctx = investments_path + ":" + std::to_string(line_no);
      InvestmentEdge e;
      e.investor_id = require_string(j, "investor_id", ctx);
      e.company_id = require_string(j, "company_id", ctx);
      e.date = parse_date_or_throw(require_string(j, "date", ctx), ctx);
      bool known = true;
      e.round = parse_round(require_string(j, "round", ctx), &known);
      if (!known)
        g.warnings_.push_back(ctx + ": unknown round '" +
                              j["round"].get<std::string>() +
                              "' treated as later");
      if (j.contains("amount") && j["amount"].is_number())
        e.amount = j["amount"].get<double>();
      if (!g.companies_.count(e.company_id))
        throw std::runtime_error(ctx + ": edge references unknown company id '" +
                                 e.company_id + "'");
      if (!g.investors_.count(e.investor_id))
        throw std::runtime_error(ctx +
                                 ": edge references unknown investor id '" +
                                 e.investor_id + "'");
      g.edges_.push_back(e);
    });

    g.build_indexes();
    return g;
  }

  // --- counts and lookups ---------------------------------------------------

  size_t num_companies() const { return companies_.size(); }
  size_t num_investors() const { return investors_.size(); }
  size_t num_nodes() const { return companies_.size() + investors_.size(); }
  size_t num_edges() const { return edges_.size(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  const CompanyRecord* company(const std::string& id) const {
    auto it = companies_.find(id);
    return it == companies_.end() ? nullptr : &it->second;
  }
  const InvestorRecord* investor(const std::string& id) const {
    auto it = investors_.find(id);
    return it == investors_.end() ? nullptr : &it->second;
  }
  bool has_node(const NodeId& n) const {
    return n.kind == NodeKind::Company ? companies_.count(n.id) > 0
                                       : investors_.count(n.id) > 0;
  }

  const std::vector<InvestmentEdge>& edges() const { return edges_; }

  /// Edge indexes adjacent to a node, pre-sorted (date desc, neighbor id asc).
  const std::vector<int>& adjacency(const NodeId& n) const {
    static const std::vector<int> kEmpty;
    const auto& index =
        n.kind == NodeKind::Company ? company_adj_ : investor_adj_;
    auto it = index.find(n.id);
    return it == index.end() ? kEmpty : it->second;
  }

  /// Company ids in ascending order (deterministic iteration order).
  std::vector<std::string> company_ids() const {
    std::vector<std::string> ids;
    ids.reserve(companies_.size());
    for (const auto& [id, _] : companies_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  std::vector<std::string> investor_ids() const {
    std::vector<std::string> ids;
    ids.reserve(investors_.size());
    for (const auto& [id, _] : investors_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  // --- labels ---------------------------------------------------------------

  /// Label per the 12-month window rule; nullopt when the company never
  /// raised a seed/angel round.
  std::optional<TargetLabel> compute_label(const std::string& company_id) const {
    const CompanyRecord* rec = company(company_id);
    if (!rec) throw std::runtime_error("unknown company id '" + company_id + "'");
    std::optional<Date> t0;
    for (int idx : adjacency(company_node(company_id))) {
      const InvestmentEdge& e = edges_[idx];
      if (e.round == Round::Seed || e.round == Round::Angel) {
        if (!t0 || e.date < *t0) t0 = e.date;
      }
    }
    if (!t0) return std::nullopt;
    Date window_end = add_months(*t0, 12);
    int y = 0;
    for (int idx : adjacency(company_node(company_id))) {
      const InvestmentEdge& e = edges_[idx];
      if (e.round == Round::SeriesA && *t0 < e.date && e.date <= window_end) {
        y = 1;
        break;
      }
    }
    return TargetLabel{company_id, *t0, y};
  }

  /// All labeled targets, sorted by company id.
  std::vector<TargetLabel> targets() const {
    std::vector<TargetLabel> out;
    for (const auto& id : company_ids()) {
      if (auto lbl = compute_label(id)) out.push_back(*lbl);
    }
    return out;
  }

  TemporalView temporal_view(Date cutoff) const {
    return TemporalView(*this, cutoff);
  }

  /// Consistency checks beyond load-time referential integrity.
  std::vector<std::string> validate() const {
    std::vector<std::string> problems = warnings_;
    for (const auto& [id, rec] : companies_) {
      if (rec.first_round_date && *rec.first_round_date < rec.founded)
        problems.push_back("company '" + id + "': first round precedes founding");
    }
    for (const auto& e : edges_) {
      const CompanyRecord* c = company(e.company_id);
      if (c && e.date < c->founded)
        problems.push_back("edge " + e.investor_id + "->" + e.company_id +
                           " predates company founding");
    }
    std::sort(problems.begin(), problems.end());
    return problems;
  }

 private:
  void build_indexes() {
    for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
      company_adj_[edges_[i].company_id].push_back(i);
      investor_adj_[edges_[i].investor_id].push_back(i);
    }
    auto sort_adj = [&](std::unordered_map<std::string, std::vector<int>>& adj,
                        bool neighbor_is_investor) {
      for (auto& [_, idxs] : adj) {
        std::sort(idxs.begin(), idxs.end(), [&](int a, int b) {
          const auto& ea = edges_[a];
          const auto& eb = edges_[b];
          if (ea.date != eb.date) return eb.date < ea.date;  // recent first
          const std::string& na =
              neighbor_is_investor ? ea.investor_id : ea.company_id;
          const std::string& nb =
              neighbor_is_investor ? eb.investor_id : eb.company_id;
          if (na != nb) return na < nb;
          return a < b;
        });
      }
    };
    sort_adj(company_adj_, /*neighbor_is_investor=*/true);
    sort_adj(investor_adj_, /*neighbor_is_investor=*/false);

    for (auto& [id, rec] : companies_) {
      std::optional<Date> t0;
      auto it = company_adj_.find(id);
      if (it != company_adj_.end()) {
        for (int idx : it->second) {
          const InvestmentEdge& e = edges_[idx];
          if (e.round == Round::Seed || e.round == Round::Angel) {
            if (!t0 || e.date < *t0) t0 = e.date;
          }
        }
      }
      rec.first_round_date = t0;
    }
  }

  std::unordered_map<std::string, CompanyRecord> companies_;
  std::unordered_map<std::string, InvestorRecord> investors_;
  std::vector<InvestmentEdge> edges_;
  std::unordered_map<std::string, std::vector<int>> company_adj_;
  std::unordered_map<std::string, std::vector<int>> investor_adj_;
  std::vector<std::string> warnings_;
};

inline std::vector<std::pair<NodeId, InvestmentEdge>> TemporalView::neighbors(
    const NodeId& node) const {
  std::vector<std::pair<NodeId, InvestmentEdge>> out;
  for (int idx : graph_->adjacency(node)) {
    const InvestmentEdge& e = graph_->edges()[idx];
    if (!(e.date < cutoff_)) continue;
    NodeId other = node.kind == NodeKind::Company
                       ? investor_node(e.investor_id)
                       : company_node(e.company_id);
    out.emplace_back(std::move(other), e);
  }
  return out;
}

}  // namespace vcpred
