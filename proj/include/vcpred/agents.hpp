#pragma once

#include "vcpred/gain.hpp"
#include "vcpred/llm.hpp"
#include "vcpred/prompts.hpp"
#include "vcpred/retrieval.hpp"

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vcpred {

enum class AgentKind { PC, IP, IC, Manager };

inline const char* agent_name(AgentKind k) {
  switch (k) {
    case AgentKind::PC: return "pc";
    case AgentKind::IP: return "ip";
    case AgentKind::IC: return "ic";
    case AgentKind::Manager: return "manager";
  }
  return "unknown";
}

struct AgentVerdict {
  AgentKind agent = AgentKind::PC;
  bool prediction = false;
  std::string rationale;
  std::string prompt_hash;
  GenerationResult raw;
  bool parse_failed = false;    // defaulted after two parse attempts
  bool gateway_failed = false;  // permanent gateway error; view unavailable
};

struct PromptBundle {
  std::string path_prompt;
  std::string peer_prompt;
  std::string investor_prompt;
};

// ============================================================================
// Verdict parsing
// ============================================================================

namespace agent_detail {

inline bool iequal_at(const std::string& text, size_t at, const char* word) {
  size_t n = std::char_traits<char>::length(word);
  if (at + n > text.size()) return false;
  for (size_t i = 0; i < n; ++i) {
    if (std::tolower(static_cast<unsigned char>(text[at + i])) != word[i])
      return false;
  }
  return true;
}

inline size_t find_marker(const std::string& text, const char* word,
                          bool require_colon, size_t* after) {
  size_t n = std::char_traits<char>::length(word);
  for (size_t i = 0; i + n <= text.size(); ++i) {
    if (!iequal_at(text, i, word)) continue;
    size_t k = i + n;
    if (require_colon) {
      while (k < text.size() && (text[k] == ' ' || text[k] == '\t')) ++k;
      if (k >= text.size() || text[k] != ':') continue;
      ++k;
    }
    *after = k;
    return i;
  }
  return std::string::npos;
}

inline std::string trimmed(std::string s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace agent_detail

/// Recovers (prediction, rationale) from generated text. The prediction is
/// the first case-insensitive "Prediction: True|False" occurrence, tolerant
/// of spacing; the rationale is everything after the first "Analysis:"
/// marker, falling back to the full text when the marker is absent or the
/// remainder is blank.
inline std::optional<std::pair<bool, std::string>> parse_verdict(
    const std::string& text) {
  using namespace agent_detail;
  size_t after = 0;
  size_t pos = 0;
  std::optional<bool> prediction;
  while (pos < text.size()) {
    size_t found = find_marker(text.substr(pos), "prediction", true, &after);
    if (found == std::string::npos) break;
    size_t value_at = pos + found + (after - found);
    while (value_at < text.size() &&
           (text[value_at] == ' ' || text[value_at] == '\t'))
      ++value_at;
    if (iequal_at(text, value_at, "true")) {
      prediction = true;
      break;
    }
    if (iequal_at(text, value_at, "false")) {
      prediction = false;
      break;
    }
    pos = value_at + 1;
  }
  if (!prediction) return std::nullopt;

  std::string rationale;
  size_t a_after = 0;
  size_t a_pos = find_marker(text, "analysis", true, &a_after);
  if (a_pos != std::string::npos) rationale = trimmed(text.substr(a_after));
  if (rationale.empty()) rationale = trimmed(text);
  if (rationale.empty()) return std::nullopt;
  return std::make_pair(*prediction, rationale);
}

// ============================================================================
// Prompt assembly
// ============================================================================

/// Fills the path evidence blocks from extracted paths. Companies and
/// investors appearing across paths are deduplicated; outcome labels are
/// masked unless the company's window closed before the cutoff.
inline PathPromptInput build_path_prompt_input(
    const CompanyRecord& target, const std::vector<PathState>& paths,
    const InvestmentGraph& graph, Date cutoff, int profile_entries) {
  PathPromptInput in;
  in.company_name = target.name;
  in.target_profile = render_company_profile(target);

  if (paths.empty()) {
    in.path_text = "no investment path retrieved\n";
    in.company_profiles = "none\n";
    in.labels_line = "none";
    in.investor_profiles = "none\n";
    return in;
  }

  std::vector<std::string> company_ids, investor_ids;
  for (const auto& p : paths) {
    in.path_text += chain_line(p, graph) + "\n";
    for (const auto& n : p.nodes) {
      auto& bucket = n.kind == NodeKind::Company ? company_ids : investor_ids;
      if (n.kind == NodeKind::Company && n.id == target.id) continue;
      if (std::find(bucket.begin(), bucket.end(), n.id) == bucket.end())
        bucket.push_back(n.id);
    }
  }

  for (const auto& id : company_ids) {
    const CompanyRecord* c = graph.company(id);
    if (!c) {
      in.company_profiles += "[unknown entity]\n";
      continue;
    }
    in.company_profiles += render_company_profile(*c);
    auto outcome = closed_outcome(graph, id, cutoff);
    if (!in.labels_line.empty()) in.labels_line += "; ";
    in.labels_line += c->name + " " +
                      (outcome ? outcome_word(*outcome)
                               : std::string("(not yet observable at cutoff)"));
  }
  if (company_ids.empty()) {
    in.company_profiles = "none\n";
    in.labels_line = "none";
  }

  for (const auto& id : investor_ids) {
    if (!graph.investor(id)) {
      in.investor_profiles += "[unknown entity]\n";
      continue;
    }
    in.investor_profiles += render_investor_profile(
        build_investor_profile(id, cutoff, graph, profile_entries));
  }
  if (investor_ids.empty()) in.investor_profiles = "none\n";
  return in;
}

inline std::string build_path_prompt(const CompanyRecord& target,
                                     const std::vector<PathState>& paths,
                                     const InvestmentGraph& graph, Date cutoff,
                                     int profile_entries) {
  return render_path_prompt(
      build_path_prompt_input(target, paths, graph, cutoff, profile_entries));
}

/// Deterministic fill of the three specialist templates.
inline PromptBundle render_prompts(const CompanyRecord& target,
                                   const std::vector<PathState>& paths,
                                   const PeerSet& peers,
                                   const std::optional<InvestorProfile>& lead,
                                   const InvestmentGraph& graph, Date cutoff,
                                   int profile_entries = 5) {
  PromptBundle bundle;
  std::string target_profile = render_company_profile(target);
  bundle.path_prompt =
      build_path_prompt(target, paths, graph, cutoff, profile_entries);
  bundle.peer_prompt = render_peer_prompt(target.name, target_profile, peers);
  bundle.investor_prompt = render_investor_prompt(
      target.name, target_profile,
      lead ? render_investor_profile(*lead) : std::string{});
  return bundle;
}

// ============================================================================
// Agent execution
// ============================================================================

struct AgentRunStats {
  int parse_retries = 0;
  int parse_defaults = 0;
  int gateway_failures = 0;
};

/// One generate call with a single strict-format retry. A second parse
/// failure defaults to False with an "unparseable output" rationale; a
/// permanent gateway error marks the verdict failed but never aborts the
/// pipeline.
inline AgentVerdict run_agent(AgentKind kind, const std::string& prompt,
                              LmGateway& gateway, AgentRunStats* stats) {
  AgentVerdict v;
  v.agent = kind;
  v.prompt_hash = content_hash(prompt);
  try {
    v.raw = gateway.generate(prompt);
    auto parsed = parse_verdict(v.raw.text);
    if (!parsed) {
      if (stats) ++stats->parse_retries;
      v.raw = gateway.generate(
          prompt +
          "\n\nAnswer only in the format:\nPrediction: True/False\nAnalysis: "
          "<reasoning>");
      parsed = parse_verdict(v.raw.text);
    }
    if (parsed) {
      v.prediction = parsed->first;
      v.rationale = parsed->second;
    } else {
      v.prediction = false;
      v.rationale = "unparseable output";
      v.parse_failed = true;
      if (stats) ++stats->parse_defaults;
    }
  } catch (const PermanentError& e) {
    v.prediction = false;
    v.rationale = std::string("view unavailable: ") + e.what();
    v.gateway_failed = true;
    if (stats) ++stats->gateway_failures;
  }
  return v;
}

/// Specialists in canonical view order: [0]=PC, [1]=IP, [2]=IC.
inline std::array<AgentVerdict, 3> run_specialists(const PromptBundle& bundle,
                                                   LmGateway& gateway,
                                                   AgentRunStats* stats = nullptr) {
  return {run_agent(AgentKind::PC, bundle.peer_prompt, gateway, stats),
          run_agent(AgentKind::IP, bundle.investor_prompt, gateway, stats),
          run_agent(AgentKind::IC, bundle.path_prompt, gateway, stats)};
}

inline ManagerVerdictBlock verdict_block(const AgentVerdict& v) {
  if (v.gateway_failed) return {"view unavailable", "view unavailable"};
  return {v.prediction ? "True" : "False", v.rationale};
}

/// Specialist verdicts plus gate weights collated into the meta-prompt.
/// Weights arrive in view order (PC, IP, IC), must sum to 1, and are
/// rendered to three decimals in the prompt's block order
/// (path, similar-company, lead-investor).
inline AgentVerdict run_manager(const std::array<AgentVerdict, 3>& specialists,
                                const std::array<double, 3>& view_weights,
                                const CompanyRecord& target, LmGateway& gateway,
                                AgentRunStats* stats = nullptr) {
  double sum = view_weights[0] + view_weights[1] + view_weights[2];
  if (std::fabs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("manager weights must sum to 1");
  std::string prompt = render_manager_prompt(
      target.name, render_company_profile(target),
      verdict_block(specialists[2]),  // IC = path analyst
      verdict_block(specialists[0]),  // PC = similar-company analyst
      verdict_block(specialists[1]),  // IP = lead-investor analyst
      {view_weights[2], view_weights[0], view_weights[1]});
  return run_agent(AgentKind::Manager, prompt, gateway, stats);
}

}  // namespace vcpred
