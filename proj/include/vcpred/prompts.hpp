#pragma once

#include "vcpred/graph.hpp"
#include "vcpred/retrieval.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace vcpred {

// Fixed output contract shared by all four agent prompts. The parser in
// agents.hpp is the inverse of this block.
inline const char* output_format_block() {
  return
      "  - Output exactly in the format:\n"
      "\n"
      "      Prediction: True/False\n"
      "      Analysis: <your step-by-step reasoning>\n"
      "\n"
      "  - If evidence is insufficient, reason cautiously but still decide.\n";
}

inline std::string outcome_word(int y) { return y ? "(success)" : "(failure)"; }

// ============================================================================
// Entity profile blocks
// ============================================================================

inline std::string attr_or(const CompanyRecord& c, const char* key,
                           const char* fallback = "unknown") {
  auto it = c.attributes.find(key);
  return it == c.attributes.end() ? fallback : it->second;
}

inline std::string render_company_profile(const CompanyRecord& c) {
  std::string s;
  s += "### Company Profile ###\n";
  s += "Company name : " + c.name + "\n";
  s += "Founded      : " + to_string(c.founded) + "\n";
  s += "Industry     : " + attr_or(c, "industry") + "\n";
  s += "Region       : " + attr_or(c, "region") + "\n";
  s += "Stage        : " + attr_or(c, "stage") + "\n";
  s += "Overview     : " + (c.description.empty() ? "none" : c.description) + "\n";
  return s;
}

inline std::string company_snippet(const CompanyRecord& c) {
  std::string desc = c.description;
  if (desc.size() > 160) desc = desc.substr(0, 157) + "...";
  return c.name + " — " + (desc.empty() ? "no description" : desc);
}

inline std::string render_investor_profile(const InvestorProfile& p) {
  std::string s;
  s += "### Investor Profile ###\n";
  s += "Investor name: " + p.name + "\n";
  for (const auto& [key, value] : p.demographics) {
    s += key + " : " + value + "\n";
  }
  s += "Previous positions:\n";
  if (p.employment.empty()) {
    s += "- none on record\n";
  } else {
    for (const auto& e : p.employment) {
      s += "- " + e.role + " (" + to_string(e.date) + ")\n";
    }
  }
  s += "Investment record:\n";
  if (p.investments.empty()) {
    s += "- none on record\n";
  } else {
    for (const auto& inv : p.investments) {
      s += "- " + company_snippet(inv.company) + " (invested " +
           to_string(inv.invested) + ") " + outcome_word(inv.outcome) + "\n";
    }
  }
  return s;
}

inline std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", w);
  return buf;
}

// ============================================================================
// Agent prompt templates
// ============================================================================

struct PathPromptInput {
  std::string company_name;
  std::string path_text;          // chain lines
  std::string company_profiles;   // profile blocks for path companies
  std::string labels_line;        // outcome summary for path companies
  std::string investor_profiles;  // profile blocks for path investors
  std::string target_profile;
};

inline std::string task_block(const std::string& company_name) {
  return "Task:\n"
         "  - Analyse the evidence and predict whether " + company_name +
         " will\n    raise a Series-A round within 12 months.\n" +
         output_format_block();
}

inline std::string render_path_prompt(const PathPromptInput& in) {
  std::string s;
  s += "Role: You are a senior venture-capital analyst who excels at "
       "step-by-step\n      reasoning over investment paths to judge whether "
       "a seed / angel-stage\n      start-up is likely to secure Series-A "
       "funding within the next year.\n\n";
  s += "You are given four blocks of information:\n\n";
  s += "(1) High-value investment path retrieved for " + in.company_name +
       ":\n" + in.path_text + "\n";
  s += "(2) Company profiles appearing in the path (each with outcome labels; "
       "True = raised Series A\n    within 12 months after seed/angel, False "
       "= did not):\n" + in.company_profiles +
       "Success/Failure: " + in.labels_line + "\n\n";
  s += "(3) Investor profiles appearing in the path:\n" + in.investor_profiles +
       "\n";
  s += "(4) Target company profile:\n" + in.target_profile + "\n";
  s += task_block(in.company_name);
  return s;
}

inline std::string render_peer_prompt(const std::string& company_name,
                                      const std::string& target_profile,
                                      const PeerSet& peers) {
  std::string profiles;
  std::string labels;
  if (peers.peers.empty()) {
    profiles = "no comparable companies\n";
    labels = "none";
  } else {
    for (const auto& p : peers.peers) {
      profiles += render_company_profile(p.record);
      if (!labels.empty()) labels += "; ";
      labels += p.record.name + " " + outcome_word(p.outcome);
    }
  }
  std::string s;
  s += "Role:\n  You are a senior venture-capital analyst who excels at using "
       "information from\n  industry peers (similar companies) to judge "
       "whether a seed/angel-stage target\n  will secure Series-A funding "
       "within the next year.\n\n";
  s += "You are given:\n\n";
  s += "(1) Target company profile:\n" + target_profile + "\n";
  s += "(2) Comparable companies (each with outcome labels; True = raised "
       "Series A\n    within 12 months after seed/angel, False = did not):\n" +
       profiles + "Success/Failure: " + labels + "\n\n";
  s += task_block(company_name);
  return s;
}

inline std::string render_investor_prompt(const std::string& company_name,
                                          const std::string& target_profile,
                                          const std::string& investor_profile) {
  std::string s;
  s += "Role:\n  You are a senior venture-capital analyst who specialises in "
       "evaluating a\n  start-up's lead seed/angel investor record to judge "
       "whether the target can\n  secure Series-A funding within the next "
       "year.\n\n";
  s += "You are given:\n";
  s += "(1) Target company profile:\n" + target_profile + "\n";
  s += "(2) Lead-investor resume (prior operating roles and portfolio "
       "companies,\n    each annotated as success or failure):\n" +
       (investor_profile.empty() ? "no lead investor identified\n"
                                 : investor_profile) + "\n";
  s += task_block(company_name);
  return s;
}

struct ManagerVerdictBlock {
  std::string prediction;  // "True" / "False" / "view unavailable"
  std::string analysis;
};

/// Weights arrive in prompt order: (path, similar-company, lead-investor).
inline std::string render_manager_prompt(
    const std::string& company_name, const std::string& target_profile,
    const ManagerVerdictBlock& path_v, const ManagerVerdictBlock& peer_v,
    const ManagerVerdictBlock& inv_v, const std::vector<double>& weights) {
  std::string s;
  s += "Role:\n  You are a senior venture-capital analyst who excels at "
       "synthesizing other\n  experts' viewpoints to decide whether a "
       "seed/angel-stage start-up will secure\n  Series-A funding within the "
       "next year.\n\n";
  s += "You are given:\n\n";
  s += "(1) Path-analyst verdict\n    - Prediction: " + path_v.prediction +
       "\n    - Analysis  : " + path_v.analysis + "\n\n";
  s += "(2) Similar-company analyst verdict\n    - Prediction: " +
       peer_v.prediction + "\n    - Analysis  : " + peer_v.analysis + "\n\n";
  s += "(3) Lead-investor analyst verdict\n    - Prediction: " +
       inv_v.prediction + "\n    - Analysis  : " + inv_v.analysis + "\n\n";
  s += "(4) Aggregate-weight advice\n    The historical importance of the "
       "three perspectives is " + format_weight(weights.at(0)) + ", " +
       format_weight(weights.at(1)) + ", " + format_weight(weights.at(2)) +
       " (path, similar-company, lead-investor).\n\n";
  s += "(5) Target company profile\n" + target_profile + "\n";
  s += "Task:\n  - Produce a single, final prediction on whether the target "
       "will raise a\n    Series-A round within 12 months.\n" +
       output_format_block();
  return s;
}

}  // namespace vcpred
