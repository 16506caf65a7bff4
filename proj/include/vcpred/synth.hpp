#pragma once

#include "vcpred/date.hpp"
#include "vcpred/gating.hpp"
#include "vcpred/jsonl.hpp"
#include "vcpred/llm.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace vcpred {

// ============================================================================
// Generator configuration
// ============================================================================

/// PitchBook-shaped synthetic market with recoverable planted signals:
/// success is network-mediated (tier-1 lead investors carry a large uplift)
/// and entity texts embed tokens the mock gateway scores, so the selector,
/// the agents, and the gate all have real signal to find.
struct GeneratorConfig {
  uint64_t seed = 1;
  int companies = 500;
  int investors = 80;
  Date span_start{2018, 1, 1};
  int span_months = 36;
  int eval_months = 9;  // targets with t0 in this closing window form the
                        // held-out final-evaluation cohort
  double base_rate = 0.2;
  double tier1_fraction = 0.15;
  double tier1_uplift = 0.5;   // P(success | tier-1 lead) = base + uplift
  double good_fraction = 0.3;  // companies with positive-quality text
  double good_tier1_affinity = 0.7;  // P(tier-1 lead | good text)
  double bad_tier1_affinity = 0.05;
};

struct SynthResult {
  int companies = 0;
  int investors = 0;
  int edges = 0;
  int intended_positives = 0;
  Date eval_start;
};

// Tokens understood by the default mock rule table.
inline constexpr const char* kTier1Token = "ALPHA_SYNDICATE";
inline constexpr const char* kColdToken = "COLD_NETWORK";
inline constexpr const char* kGoodToken = "TRACTION_SURGE";
inline constexpr const char* kBadToken = "CHURN_RISK";

inline std::vector<MockRule> default_mock_rules() {
  return {
      {kTier1Token, 2.0}, {kColdToken, -0.6},   {kGoodToken, 1.2},
      {kBadToken, -1.2},  {"(success)", 0.4},   {"(failure)", -0.4},
  };
}

inline void save_mock_rules(const std::string& path,
                            const std::vector<MockRule>& rules) {
  json arr = json::array();
  for (const auto& r : rules) {
    json j;
    j["token"] = r.token;
    j["shift"] = r.shift;
    arr.push_back(j);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << arr.dump(2) << "\n";
}

inline std::vector<MockRule> load_mock_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mock rules file " + path);
  json arr = json::parse(in);
  std::vector<MockRule> rules;
  for (const auto& j : arr) {
    rules.push_back(MockRule{j.at("token").get<std::string>(),
                             j.at("shift").get<double>()});
  }
  return rules;
}

// ============================================================================
// Generation
// ============================================================================

namespace synth_detail {

struct InvestorDraft {
  std::string id;
  std::string name;
  bool tier1 = false;
  json record;
};

inline std::string pick(std::mt19937_64& rng,
                        const std::vector<std::string>& pool) {
  std::uniform_int_distribution<size_t> d(0, pool.size() - 1);
  return pool[d(rng)];
}

inline int pick_int(std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng);
}

inline double pick_real(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

}  // namespace synth_detail

inline SynthResult generate_dataset(const GeneratorConfig& cfg,
                                    const std::string& companies_path,
                                    const std::string& investors_path,
                                    const std::string& investments_path) {
  using namespace synth_detail;
  if (cfg.companies <= 0 || cfg.investors <= 0)
    throw std::invalid_argument("generator: counts must be positive");
  if (cfg.base_rate <= 0.0 || cfg.base_rate >= 1.0)
    throw std::invalid_argument("generator: base rate must be in (0,1)");

  std::mt19937_64 rng(cfg.seed);
  AttributeVocab vocab = default_attribute_vocab();
  const auto& industries = vocab.fields[0].second;
  const auto& regions = vocab.fields[1].second;

  const std::vector<std::string> name_prefixes = {
      "Nova", "Apex", "Blue", "Iron", "Echo", "Zen", "Flux", "Orbit"};
  const std::vector<std::string> fillers = {
      "enterprise", "consumer",  "regional", "global",  "industrial",
      "subscription", "on-demand", "managed", "embedded", "wholesale"};
  const std::vector<std::string> neutral_roles = {
      "senior analyst at meridian capital", "principal at harbor ventures",
      "investment associate at summit partners",
      "portfolio manager at crescent fund"};
  const std::vector<std::string> educations = {"mba", "phd", "bsc"};
  const std::vector<std::string> ages = {"30-39", "40-49", "50-59"};
  const std::vector<std::string> genders = {"female", "male", "nonbinary"};

  // --- investors ------------------------------------------------------------
  std::vector<InvestorDraft> investors(cfg.investors);
  std::vector<int> tier1_ids, regular_ids;
  for (int i = 0; i < cfg.investors; ++i) {
    InvestorDraft& inv = investors[i];
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "i%04d", i);
    inv.id = idbuf;
    inv.name = "Fund " + pick(rng, name_prefixes) + "-" + std::to_string(i);
    inv.tier1 = pick_real(rng, 0.0, 1.0) < cfg.tier1_fraction;
    (inv.tier1 ? tier1_ids : regular_ids).push_back(i);

    json employment = json::array();
    int n_roles = pick_int(rng, 1, 3);
    int marked = inv.tier1 ? pick_int(rng, 0, n_roles - 1) : -1;
    bool cold = !inv.tier1 && pick_real(rng, 0.0, 1.0) < 0.5;
    int cold_at = cold ? pick_int(rng, 0, n_roles - 1) : -1;
    for (int r = 0; r < n_roles; ++r) {
      std::string role;
      if (r == marked)
        role = std::string("general partner at ") + kTier1Token + " capital";
      else if (r == cold_at)
        role = std::string("associate at ") + kColdToken + " partners";
      else
        role = pick(rng, neutral_roles);
      Date when{2005 + pick_int(rng, 0, 11), pick_int(rng, 1, 12),
                pick_int(rng, 1, 28)};
      employment.push_back({{"role", role}, {"date", to_string(when)}});
    }
    inv.record = {{"id", inv.id},
                  {"name", inv.name},
                  {"demographics",
                   {{"education", pick(rng, educations)},
                    {"age_bracket", pick(rng, ages)},
                    {"gender", pick(rng, genders)}}},
                  {"employment", employment}};
  }
  if (tier1_ids.empty()) tier1_ids.push_back(0);  // degenerate tiny configs
  if (regular_ids.empty()) regular_ids.push_back(cfg.investors - 1);

  // Expected tier-1 lead share fixes the non-tier success rate so the overall
  // positive rate stays at base_rate.
  double tier1_share = cfg.good_fraction * cfg.good_tier1_affinity +
                       (1.0 - cfg.good_fraction) * cfg.bad_tier1_affinity;
  double p_high = std::min(cfg.base_rate + cfg.tier1_uplift, 0.95);
  double p_low = (cfg.base_rate - tier1_share * p_high) / (1.0 - tier1_share);
  p_low = std::max(p_low, 0.01);

  // --- companies and first rounds --------------------------------------------
  SynthResult result;
  result.eval_start =
      add_months(cfg.span_start, cfg.span_months - cfg.eval_months);

  json companies = json::array();
  std::vector<json> edge_rows;
  auto add_edge = [&](const std::string& inv_id, const std::string& cmp_id,
                      Date date, const char* round,
                      std::optional<double> amount) {
    json e = {{"investor_id", inv_id},
              {"company_id", cmp_id},
              {"date", to_string(date)},
              {"round", round}};
    if (amount) e["amount"] = *amount;
    edge_rows.push_back(std::move(e));
  };

  Date span_end = add_months(cfg.span_start, cfg.span_months);
  std::vector<std::pair<std::string, Date>> founded_dates;  // for noise rounds

  for (int c = 0; c < cfg.companies; ++c) {
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "c%05d", c);
    std::string cid = idbuf;
    std::string sector = industries[pick_int(rng, 0, industries.size() - 1)];
    std::string region = regions[pick_int(rng, 0, regions.size() - 1)];
    bool good = pick_real(rng, 0.0, 1.0) < cfg.good_fraction;

    // t0 stays clear of the span end so every label window closes in-span.
    int t0_month = pick_int(rng, 1, cfg.span_months - 1);
    Date t0 = add_days(add_months(cfg.span_start, t0_month - 1),
                       pick_int(rng, 0, 27));
    Date founded = add_months(t0, -pick_int(rng, 1, 6));
    founded_dates.emplace_back(cid, founded);

    std::string name =
        pick(rng, name_prefixes) + sector.substr(0, 1) + "-" + std::to_string(c);
    std::string quality_text;
    if (good)
      quality_text = std::string(kGoodToken) + " momentum " + kGoodToken;
    else if (pick_real(rng, 0.0, 1.0) < 0.8)
      quality_text = std::string(kBadToken) + " headwinds " + kBadToken;
    else
      quality_text = "steady demand profile";
    std::string description = name + " builds a " + sector + " platform for " +
                              pick(rng, fillers) + " customers with " +
                              pick(rng, fillers) + " distribution. " +
                              quality_text + " ref" + cid;

    bool angel = pick_real(rng, 0.0, 1.0) < 0.2;
    companies.push_back({{"id", cid},
                         {"name", name},
                         {"founded", to_string(founded)},
                         {"description", description},
                         {"attributes",
                          {{"industry", sector},
                           {"region", region},
                           {"stage", angel ? "angel" : "seed"}}}});

    // Lead selection: quality steers toward tier-1 investors.
    double affinity =
        good ? cfg.good_tier1_affinity : cfg.bad_tier1_affinity;
    bool tier1_lead = pick_real(rng, 0.0, 1.0) < affinity;
    int lead = tier1_lead
                   ? tier1_ids[pick_int(rng, 0, tier1_ids.size() - 1)]
                   : regular_ids[pick_int(rng, 0, regular_ids.size() - 1)];
    const char* round = angel ? "angel" : "seed";
    double lead_amount = 2e6 + pick_real(rng, 0.0, 4e6);
    add_edge(investors[lead].id, cid, t0, round, lead_amount);

    // Co-investors come from the regular pool so "tier-1 in the first round"
    // coincides with "tier-1 lead".
    int n_co = pick_int(rng, 0, 2);
    for (int k = 0; k < n_co; ++k) {
      int co = regular_ids[pick_int(rng, 0, regular_ids.size() - 1)];
      if (investors[co].id == investors[lead].id) continue;
      std::optional<double> amount;
      if (pick_real(rng, 0.0, 1.0) > 0.15)
        amount = 0.4e6 + pick_real(rng, 0.0, lead_amount * 0.3);
      add_edge(investors[co].id, cid, t0, round, amount);
    }

    // Outcome simulation: series_a inside or outside the 12-month window.
    double p_succ = tier1_lead ? p_high : p_low;
    bool success = pick_real(rng, 0.0, 1.0) < p_succ;
    if (success) {
      ++result.intended_positives;
      Date sa = pick_real(rng, 0.0, 1.0) < 0.05
                    ? add_months(t0, 12)  // boundary case, still inside
                    : add_days(add_months(t0, pick_int(rng, 1, 11)),
                               pick_int(rng, 0, 15));
      int sa_inv = pick_int(rng, 0, cfg.investors - 1);
      add_edge(investors[sa_inv].id, cid, sa, "series_a",
               8e6 + pick_real(rng, 0.0, 1e7));
    } else if (pick_real(rng, 0.0, 1.0) < 0.25) {
      Date sa = add_days(add_months(t0, pick_int(rng, 13, 20)),
                         pick_int(rng, 0, 15));
      int sa_inv = pick_int(rng, 0, cfg.investors - 1);
      add_edge(investors[sa_inv].id, cid, sa, "series_a",
               8e6 + pick_real(rng, 0.0, 1e7));
    }
  }

  // --- follow-on noise rounds -------------------------------------------------
  // Extra later-stage edges give investors portfolios beyond their leads and
  // create multi-hop structure with mixed-quality neighborhoods.
  for (int i = 0; i < cfg.investors; ++i) {
    int extra = pick_int(rng, 1, 4);
    for (int k = 0; k < extra; ++k) {
      int c = pick_int(rng, 0, cfg.companies - 1);
      Date earliest = add_months(founded_dates[c].second, 7);
      long lo = days_from_civil(earliest);
      long hi = days_from_civil(span_end);
      if (lo >= hi) continue;
      Date when = civil_from_days(
          lo + static_cast<long>(pick_real(rng, 0.0, 1.0) * (hi - lo)));
      add_edge(investors[i].id, founded_dates[c].first, when, "later",
               1e6 + pick_real(rng, 0.0, 4e6));
    }
  }

  // --- deterministic serialization -------------------------------------------
  std::sort(edge_rows.begin(), edge_rows.end(), [](const json& a, const json& b) {
    auto ka = std::make_tuple(a["date"].get<std::string>(),
                              a["investor_id"].get<std::string>(),
                              a["company_id"].get<std::string>(),
                              a["round"].get<std::string>());
    auto kb = std::make_tuple(b["date"].get<std::string>(),
                              b["investor_id"].get<std::string>(),
                              b["company_id"].get<std::string>(),
                              b["round"].get<std::string>());
    return ka < kb;
  });

  {
    JsonlWriter w(companies_path);
    for (const auto& j : companies) w.write(j);
  }
  {
    JsonlWriter w(investors_path);
    for (const auto& inv : investors) w.write(inv.record);
  }
  {
    JsonlWriter w(investments_path);
    for (const auto& j : edge_rows) w.write(j);
  }

  result.companies = cfg.companies;
  result.investors = cfg.investors;
  result.edges = static_cast<int>(edge_rows.size());
  return result;
}

// ============================================================================
// Dataset metadata
// ============================================================================

struct DatasetMeta {
  uint64_t seed = 0;
  Date eval_start;
  int companies = 0;
  int investors = 0;
  int edges = 0;

  json to_json() const {
    return {{"seed", seed},
            {"eval_start", to_string(eval_start)},
            {"companies", companies},
            {"investors", investors},
            {"edges", edges}};
  }

  static DatasetMeta from_json(const json& j) {
    DatasetMeta m;
    m.seed = j.at("seed").get<uint64_t>();
    m.eval_start = parse_date_or_throw(j.at("eval_start").get<std::string>(),
                                       "dataset meta");
    m.companies = j.at("companies").get<int>();
    m.investors = j.at("investors").get<int>();
    m.edges = j.at("edges").get<int>();
    return m;
  }
};

}  // namespace vcpred
