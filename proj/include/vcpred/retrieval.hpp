#pragma once

#include "vcpred/encoder.hpp"
#include "vcpred/graph.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace vcpred {

// ============================================================================
// Peer companies
// ============================================================================

struct Peer {
  CompanyRecord record;
  double similarity = 0.0;
  int outcome = 0;  // label of the peer's own closed 12-month window
};

struct PeerSet {
  std::string target_id;
  std::vector<Peer> peers;  // similarity descending
};

/// Semantically similar companies founded strictly before the target whose
/// outcome windows closed before the target's t0. The window rule is
/// stricter than founding-date alone: a peer label resolved after t0 would
/// be future information.
inline PeerSet retrieve_peers(const CompanyRecord& target, Date t0,
                              const InvestmentGraph& graph,
                              TextEncoder& encoder, int k) {
  PeerSet out;
  out.target_id = target.id;
  if (target.description.empty() || k <= 0) return out;
  Embedding target_emb = encoder.encode(target.description);

  for (const auto& id : graph.company_ids()) {
    if (id == target.id) continue;
    const CompanyRecord* cand = graph.company(id);
    if (!(cand->founded < target.founded)) continue;
    if (cand->description.empty()) continue;
    auto label = graph.compute_label(id);
    if (!label) continue;
    if (!(add_months(label->t0, 12) < t0)) continue;  // window still open at t0
    double sim = cosine(target_emb, encoder.encode(cand->description));
    out.peers.push_back(Peer{*cand, sim, label->y});
  }

  std::sort(out.peers.begin(), out.peers.end(), [](const Peer& a, const Peer& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.record.id < b.record.id;
  });
  if (static_cast<int>(out.peers.size()) > k) out.peers.resize(k);
  return out;
}

// ============================================================================
// Lead investor
// ============================================================================

/// Investor who committed the largest amount in the target's first disclosed
/// financing round (all edges sharing the earliest round date). Unknown
/// amounts sort last; ties break by earliest timestamp then lowest id.
inline std::optional<std::string> select_lead_investor(
    const std::string& company_id, const InvestmentGraph& graph) {
  const auto& adj = graph.adjacency(company_node(company_id));
  if (adj.empty()) return std::nullopt;
  std::optional<Date> first_date;
  for (int idx : adj) {
    const auto& e = graph.edges()[idx];
    if (!first_date || e.date < *first_date) first_date = e.date;
  }
  const InvestmentEdge* best = nullptr;
  for (int idx : adj) {
    const auto& e = graph.edges()[idx];
    if (e.date != *first_date) continue;
    if (!best) {
      best = &e;
      continue;
    }
    double ae = e.amount.value_or(-1.0);
    double ab = best->amount.value_or(-1.0);
    if (ae > ab) {
      best = &e;
    } else if (ae == ab && e.investor_id < best->investor_id) {
      best = &e;
    }
  }
  if (!best) return std::nullopt;
  return best->investor_id;
}

// ============================================================================
// Investor profile
// ============================================================================

struct PortfolioEntry {
  CompanyRecord company;
  Date invested;
  int outcome = 0;
};

struct InvestorProfile {
  std::string investor_id;
  std::string name;
  std::map<std::string, std::string> demographics;
  std::vector<EmploymentEntry> employment;    // recency desc, <= n
  std::vector<PortfolioEntry> investments;    // recency desc, <= n
};

/// Resume of v* as of t0: employment and investment records strictly before
/// t0, ranked by recency and truncated to n. A portfolio entry is kept only
/// when the backed company's own 12-month window closed before t0, so its
/// success/failure annotation is known at prediction time.
inline InvestorProfile build_investor_profile(const std::string& investor_id,
                                              Date t0,
                                              const InvestmentGraph& graph,
                                              int n) {
  const InvestorRecord* rec = graph.investor(investor_id);
  if (!rec) throw std::runtime_error("unknown investor id '" + investor_id + "'");
  InvestorProfile out;
  out.investor_id = rec->id;
  out.name = rec->name;
  out.demographics = rec->demographics;

  for (const auto& e : rec->employment) {
    if (e.date < t0) out.employment.push_back(e);
  }
  std::sort(out.employment.begin(), out.employment.end(),
            [](const EmploymentEntry& a, const EmploymentEntry& b) {
              if (a.date != b.date) return b.date < a.date;
              return a.role < b.role;
            });
  if (static_cast<int>(out.employment.size()) > n) out.employment.resize(n);

  // Most recent pre-t0 edge per portfolio company, labels from closed windows.
  std::map<std::string, Date> latest;
  for (int idx : graph.adjacency(investor_node(investor_id))) {
    const auto& e = graph.edges()[idx];
    if (!(e.date < t0)) continue;
    auto it = latest.find(e.company_id);
    if (it == latest.end() || it->second < e.date) latest[e.company_id] = e.date;
  }
  for (const auto& [cid, date] : latest) {
    auto label = graph.compute_label(cid);
    if (!label) continue;
    if (!(add_months(label->t0, 12) < t0)) continue;
    out.investments.push_back(PortfolioEntry{*graph.company(cid), date, label->y});
  }
  std::sort(out.investments.begin(), out.investments.end(),
            [](const PortfolioEntry& a, const PortfolioEntry& b) {
              if (a.invested != b.invested) return b.invested < a.invested;
              return a.company.id < b.company.id;
            });
  if (static_cast<int>(out.investments.size()) > n) out.investments.resize(n);
  return out;
}

}  // namespace vcpred
