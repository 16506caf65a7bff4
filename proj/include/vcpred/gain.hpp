#pragma once

#include "vcpred/graph.hpp"
#include "vcpred/llm.hpp"
#include "vcpred/prompts.hpp"
#include "vcpred/retrieval.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace vcpred {

// ============================================================================
// Path state
// ============================================================================

/// A partial investment chain anchored at the target company. Node kinds
/// alternate company/investor along the path and no node repeats.
struct PathState {
  std::string target_id;
  std::vector<NodeId> nodes;
  std::vector<InvestmentEdge> edges;  // edges[i] connects nodes[i], nodes[i+1]

  int hop() const { return static_cast<int>(nodes.size()) - 1; }

  static PathState root(const std::string& target_id) {
    PathState p;
    p.target_id = target_id;
    p.nodes.push_back(company_node(target_id));
    return p;
  }

  PathState extended(const NodeId& next, const InvestmentEdge& via) const {
    if (next.kind == nodes.back().kind)
      throw std::logic_error("path must alternate company/investor nodes");
    for (const auto& n : nodes) {
      if (n == next) throw std::logic_error("path revisits node " + node_key(next));
    }
    PathState out = *this;
    out.nodes.push_back(next);
    out.edges.push_back(via);
    return out;
  }

  std::vector<std::string> node_keys() const {
    std::vector<std::string> keys;
    keys.reserve(nodes.size());
    for (const auto& n : nodes) keys.push_back(node_key(n));
    return keys;
  }
};

struct ExpansionCandidate {
  NodeId node;
  PathState extended;
  double p_v = std::numeric_limits<double>::quiet_NaN();
  double gain = std::numeric_limits<double>::quiet_NaN();
};

/// Candidate expansions of one path at one hop; the listwise training unit.
struct RankingGroup {
  PathState base;
  std::vector<ExpansionCandidate> candidates;  // 1..3 entries
  double p_base = std::numeric_limits<double>::quiet_NaN();
  int y = 0;
};

// ============================================================================
// BFS expansion tree
// ============================================================================

/// Breadth-first tree of depth at most three around the target, keeping up to
/// three previously unseen neighbors per expanded node. "Unseen" is global to
/// the target's tree (ancestor paths plus every candidate already retained),
/// so no entity is verbalized as evidence twice.
inline std::vector<RankingGroup> build_expansion_tree(const TargetLabel& target,
                                                      const TemporalView& view,
                                                      int fanout = 3,
                                                      int max_hops = 3) {
  std::vector<RankingGroup> groups;
  std::set<NodeId> visited;
  std::deque<PathState> queue;

  PathState root = PathState::root(target.company_id);
  visited.insert(root.nodes.front());
  queue.push_back(root);

  while (!queue.empty()) {
    PathState path = queue.front();
    queue.pop_front();
    if (path.hop() >= max_hops) continue;

    RankingGroup group;
    group.base = path;
    group.y = target.y;
    for (const auto& [node, edge] : view.neighbors(path.nodes.back())) {
      if (static_cast<int>(group.candidates.size()) >= fanout) break;
      if (visited.count(node)) continue;
      visited.insert(node);
      group.candidates.push_back(
          ExpansionCandidate{node, path.extended(node, edge)});
    }
    if (group.candidates.empty()) continue;
    for (const auto& cand : group.candidates) queue.push_back(cand.extended);
    groups.push_back(std::move(group));
  }
  return groups;
}

// ============================================================================
// Path verbalization
// ============================================================================

/// Chain notation, e.g. "Ada Labs <- Fund One -> Beta Corp": an arrow points
/// from investor to the company it backed.
inline std::string chain_line(const PathState& path, const InvestmentGraph& graph) {
  auto display_name = [&](const NodeId& n) -> std::string {
    if (n.kind == NodeKind::Company) {
      const CompanyRecord* c = graph.company(n.id);
      return c ? c->name : "[unknown entity]";
    }
    const InvestorRecord* i = graph.investor(n.id);
    return i ? i->name : "[unknown entity]";
  };
  std::string s = display_name(path.nodes.front());
  for (size_t i = 1; i < path.nodes.size(); ++i) {
    bool into_company = path.nodes[i].kind == NodeKind::Company;
    s += into_company ? " -> " : " <- ";
    s += display_name(path.nodes[i]);
  }
  return s;
}

/// Outcome of a company whose 12-month window already closed before the
/// cutoff; nullopt when unlabeled or still open (masked downstream).
inline std::optional<int> closed_outcome(const InvestmentGraph& graph,
                                         const std::string& company_id,
                                         Date cutoff) {
  auto label = graph.compute_label(company_id);
  if (!label) return std::nullopt;
  if (!(add_months(label->t0, 12) < cutoff)) return std::nullopt;
  return label->y;
}

/// Deterministic template: chain line plus one cutoff-filtered profile block
/// per node. Missing records render as "[unknown entity]" and are counted in
/// *warnings when provided.
inline std::string verbalize_path(const PathState& path,
                                  const InvestmentGraph& graph, Date cutoff,
                                  int profile_entries = 5,
                                  int* warnings = nullptr) {
  std::string s;
  if (path.nodes.size() > 1)
    s += "Investment chain: " + chain_line(path, graph) + "\n\n";
  for (const auto& node : path.nodes) {
    if (node.kind == NodeKind::Company) {
      const CompanyRecord* c = graph.company(node.id);
      if (!c) {
        s += "[unknown entity]\n\n";
        if (warnings) ++*warnings;
        continue;
      }
      s += render_company_profile(*c);
      if (node.id != path.target_id) {
        auto outcome = closed_outcome(graph, node.id, cutoff);
        s += "Outcome      : " +
             (outcome ? outcome_word(*outcome)
                      : std::string("not yet observable at cutoff")) + "\n";
      }
      s += "\n";
    } else {
      if (!graph.investor(node.id)) {
        s += "[unknown entity]\n\n";
        if (warnings) ++*warnings;
        continue;
      }
      s += render_investor_profile(
          build_investor_profile(node.id, cutoff, graph, profile_entries));
      s += "\n";
    }
  }
  return s;
}

/// Prompt handed to the label-scoring gateway for one (possibly partial) path.
inline std::string scoring_prompt(const std::string& path_text) {
  return "Judge whether the target start-up described first will raise a "
         "Series-A round within 12 months, given the evidence below.\n\n" +
         path_text +
         "\nLabel (True = will raise Series A within 12 months, False = will "
         "not):";
}

// ============================================================================
// Information gain
// ============================================================================

/// Marginal gain of an expansion: cross-entropy reduction toward the gold
/// label plus a confidence-shift bonus,
///   delta = [CE(y, p_base) - CE(y, p_v)]
///           + lambda_conf * (|p_v - 0.5| - |p_base - 0.5|).
/// Probabilities are clamped to [1e-6, 1 - 1e-6] before the CE terms.
inline double compute_gain(int y, double p_base, double p_v, double lambda_conf) {
  auto clamp = [](double p) {
    const double eps = 1e-6;
    if (p < eps) return eps;
    if (p > 1.0 - eps) return 1.0 - eps;
    return p;
  };
  auto ce = [](int label, double p) {
    return label ? -std::log(p) : -std::log(1.0 - p);
  };
  double pb = clamp(p_base);
  double pv = clamp(p_v);
  double reduction = ce(y, pb) - ce(y, pv);
  double confidence = std::fabs(pv - 0.5) - std::fabs(pb - 0.5);
  return reduction + lambda_conf * confidence;
}

// ============================================================================
// Oracle labeling
// ============================================================================

struct GainTuple {
  std::string target_id;
  int hop = 0;
  std::vector<std::string> base_path;  // node keys
  std::string candidate_id;            // node key
  std::string base_prompt_hash;
  std::string candidate_prompt_hash;
  double p_base = 0.0;
  double p_v = 0.0;
  int y = 0;
  double delta = 0.0;

  json to_json() const {
    json j;
    j["target_id"] = target_id;
    j["hop"] = hop;
    j["base_path"] = base_path;
    j["candidate_id"] = candidate_id;
    j["base_prompt_hash"] = base_prompt_hash;
    j["candidate_prompt_hash"] = candidate_prompt_hash;
    j["p_base"] = p_base;
    j["p_v"] = p_v;
    j["y"] = y;
    j["delta"] = delta;
    return j;
  }

  static GainTuple from_json(const json& j) {
    GainTuple t;
    t.target_id = j.at("target_id").get<std::string>();
    t.hop = j.at("hop").get<int>();
    t.base_path = j.at("base_path").get<std::vector<std::string>>();
    t.candidate_id = j.at("candidate_id").get<std::string>();
    t.base_prompt_hash = j.value("base_prompt_hash", std::string{});
    t.candidate_prompt_hash = j.value("candidate_prompt_hash", std::string{});
    t.p_base = j.at("p_base").get<double>();
    t.p_v = j.at("p_v").get<double>();
    t.y = j.at("y").get<int>();
    t.delta = j.at("delta").get<double>();
    return t;
  }
};

struct LabelingStats {
  int groups_labeled = 0;
  int groups_dropped = 0;  // scoring failed after retries
  int scores_reused = 0;   // resumed from an earlier run
};

/// Previously scored (base, candidate) prompt-hash pairs, for resumption.
using ScoreResumeMap =
    std::unordered_map<std::string, std::pair<double, double>>;

inline std::string resume_key(const std::string& base_hash,
                              const std::string& cand_hash) {
  return base_hash + "|" + cand_hash;
}

/// Scores every group with the gateway and fills gains. Each scored pair is
/// handed to the sink as a GainTuple; groups whose scoring fails permanently
/// are dropped and counted.
inline LabelingStats label_groups(
    std::vector<RankingGroup>& groups, const InvestmentGraph& graph,
    Date cutoff, LmGateway& gateway, double lambda_conf,
    const std::function<void(const GainTuple&)>& sink,
    const ScoreResumeMap* resume = nullptr, int profile_entries = 5) {
  LabelingStats stats;
  std::vector<RankingGroup> kept;
  kept.reserve(groups.size());

  for (auto& group : groups) {
    std::string base_prompt =
        scoring_prompt(verbalize_path(group.base, graph, cutoff, profile_entries));
    std::string base_hash = content_hash(base_prompt);

    bool failed = false;
    bool base_scored = false;
    std::vector<GainTuple> tuples;
    for (auto& cand : group.candidates) {
      std::string cand_prompt = scoring_prompt(
          verbalize_path(cand.extended, graph, cutoff, profile_entries));
      std::string cand_hash = content_hash(cand_prompt);

      if (resume) {
        auto it = resume->find(resume_key(base_hash, cand_hash));
        if (it != resume->end()) {
          group.p_base = it->second.first;
          cand.p_v = it->second.second;
          base_scored = true;
          ++stats.scores_reused;
        }
      }
      if (std::isnan(cand.p_v)) {
        try {
          if (!base_scored) {
            group.p_base = binary_probability(gateway.score_labels(base_prompt));
            base_scored = true;
          }
          cand.p_v = binary_probability(gateway.score_labels(cand_prompt));
        } catch (const PermanentError&) {
          failed = true;
          break;
        }
      }
      cand.gain = compute_gain(group.y, group.p_base, cand.p_v, lambda_conf);

      GainTuple t;
      t.target_id = group.base.target_id;
      t.hop = group.base.hop();
      t.base_path = group.base.node_keys();
      t.candidate_id = node_key(cand.node);
      t.base_prompt_hash = base_hash;
      t.candidate_prompt_hash = cand_hash;
      t.p_base = group.p_base;
      t.p_v = cand.p_v;
      t.y = group.y;
      t.delta = cand.gain;
      tuples.push_back(std::move(t));
    }

    if (failed) {
      ++stats.groups_dropped;
      continue;
    }
    for (const auto& t : tuples) sink(t);
    ++stats.groups_labeled;
    kept.push_back(std::move(group));
  }
  groups = std::move(kept);
  return stats;
}

}  // namespace vcpred
