#pragma once

#include "vcpred/date.hpp"
#include "vcpred/jsonl.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vcpred {

struct PredictionRecord {
  std::string target_id;
  Date t0;
  int y_true = 0;
  int y_pred = 0;
  double confidence = 0.0;
  std::string confidence_source;  // "gate_head" or "verdict_binary"
};

namespace metric_detail {

/// Ranking order: confidence descending, ties broken by target id.
inline std::vector<const PredictionRecord*> ranked(
    const std::vector<PredictionRecord>& records) {
  std::vector<const PredictionRecord*> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(&r);
  std::sort(out.begin(), out.end(),
            [](const PredictionRecord* a, const PredictionRecord* b) {
              if (a->confidence != b->confidence)
                return a->confidence > b->confidence;
              return a->target_id < b->target_id;
            });
  return out;
}

}  // namespace metric_detail

// ============================================================================
// Precision at K
// ============================================================================

struct PrecisionAtK {
  double value = 0.0;
  int counted = 0;      // records actually used
  bool truncated = false;  // fewer than K records were available
};

inline PrecisionAtK precision_at_k(const std::vector<PredictionRecord>& records,
                                   int k) {
  if (records.empty()) throw std::invalid_argument("precision_at_k: no records");
  if (k <= 0) throw std::invalid_argument("precision_at_k: k must be positive");
  auto order = metric_detail::ranked(records);
  PrecisionAtK out;
  out.truncated = static_cast<int>(order.size()) < k;
  out.counted = std::min<int>(k, static_cast<int>(order.size()));
  int hits = 0;
  for (int i = 0; i < out.counted; ++i) hits += order[i]->y_true;
  out.value = static_cast<double>(hits) / static_cast<double>(out.counted);
  return out;
}

// ============================================================================
// Monthly cohorts and AP@K
// ============================================================================

struct CohortMetrics {
  std::string month;  // "YYYY-MM" of t0
  int count = 0;
  int positives = 0;
  std::map<int, PrecisionAtK> p_at_k;
};

inline std::vector<CohortMetrics> monthly_cohorts(
    const std::vector<PredictionRecord>& records, const std::vector<int>& ks) {
  std::map<std::string, std::vector<PredictionRecord>> by_month;
  for (const auto& r : records) by_month[month_key(r.t0)].push_back(r);
  std::vector<CohortMetrics> out;
  for (const auto& [month, recs] : by_month) {
    CohortMetrics c;
    c.month = month;
    c.count = static_cast<int>(recs.size());
    for (const auto& r : recs) c.positives += r.y_true;
    for (int k : ks) c.p_at_k[k] = precision_at_k(recs, k);
    out.push_back(std::move(c));
  }
  return out;  // ordered by month via the map
}

/// Mean of per-month P@K over months with at least one record. Months with
/// fewer than K records contribute a flagged P@K over what is available.
inline double average_precision_at_k(const std::vector<PredictionRecord>& records,
                                     int k) {
  auto cohorts = monthly_cohorts(records, {k});
  if (cohorts.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : cohorts) sum += c.p_at_k.at(k).value;
  return sum / static_cast<double>(cohorts.size());
}

// ============================================================================
// Classification metrics
// ============================================================================

struct ClassificationMetrics {
  int tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc_roc;  // empty when only one class is present
  std::optional<double> auc_pr;
};

/// Binary metrics from y_pred; AUC-ROC via average-rank Mann-Whitney (exact
/// trapezoid under ties); AUC-PR via right-continuous step interpolation over
/// distinct confidence thresholds. Zero-denominator conventions: 0.
inline ClassificationMetrics classification_metrics(
    const std::vector<PredictionRecord>& records) {
  ClassificationMetrics m;
  for (const auto& r : records) {
    if (r.y_pred == 1 && r.y_true == 1) ++m.tp;
    if (r.y_pred == 1 && r.y_true == 0) ++m.fp;
    if (r.y_pred == 0 && r.y_true == 1) ++m.fn;
    if (r.y_pred == 0 && r.y_true == 0) ++m.tn;
  }
  m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;

  int n_pos = m.tp + m.fn;
  int n_neg = m.fp + m.tn;
  if (n_pos == 0 || n_neg == 0) return m;

  // AUC-ROC: average ranks of confidences, U-statistic normalization.
  std::vector<std::pair<double, int>> by_conf;
  by_conf.reserve(records.size());
  for (const auto& r : records) by_conf.emplace_back(r.confidence, r.y_true);
  std::sort(by_conf.begin(), by_conf.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < by_conf.size()) {
    size_t j = i;
    while (j < by_conf.size() && by_conf[j].first == by_conf[i].first) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t t = i; t < j; ++t) {
      if (by_conf[t].second == 1) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  m.auc_roc = u / (static_cast<double>(n_pos) * n_neg);

  // AUC-PR: sweep thresholds from high to low confidence.
  std::sort(by_conf.begin(), by_conf.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double auc_pr = 0.0;
  double prev_recall = 0.0;
  int tp = 0, fp = 0;
  i = 0;
  while (i < by_conf.size()) {
    size_t j = i;
    while (j < by_conf.size() && by_conf[j].first == by_conf[i].first) ++j;
    for (size_t t = i; t < j; ++t) {
      if (by_conf[t].second == 1)
        ++tp;
      else
        ++fp;
    }
    double recall = static_cast<double>(tp) / n_pos;
    double precision = static_cast<double>(tp) / (tp + fp);
    auc_pr += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  m.auc_pr = auc_pr;
  return m;
}

// ============================================================================
// Reports
// ============================================================================

namespace metric_detail {

inline std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt6(*v) : "NA";
}

}  // namespace metric_detail

/// Long-format metric CSV; when a baselines map is given, a delta column is
/// appended for metrics it covers. Byte-identical for identical inputs.
inline void write_metrics_csv(
    const std::string& path, const std::vector<PredictionRecord>& records,
    const std::map<std::string, double>* baselines = nullptr) {
  ClassificationMetrics cm = classification_metrics(records);
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("ap_at_5", metric_detail::fmt6(average_precision_at_k(records, 5)));
  rows.emplace_back("ap_at_10", metric_detail::fmt6(average_precision_at_k(records, 10)));
  rows.emplace_back("ap_at_20", metric_detail::fmt6(average_precision_at_k(records, 20)));
  rows.emplace_back("precision", metric_detail::fmt6(cm.precision));
  rows.emplace_back("recall", metric_detail::fmt6(cm.recall));
  rows.emplace_back("f1", metric_detail::fmt6(cm.f1));
  rows.emplace_back("auc_roc", metric_detail::fmt_opt(cm.auc_roc));
  rows.emplace_back("auc_pr", metric_detail::fmt_opt(cm.auc_pr));
  rows.emplace_back("n_records", std::to_string(records.size()));

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << (baselines ? "metric,value,baseline,delta\n" : "metric,value\n");
  for (const auto& [name, value] : rows) {
    out << name << "," << value;
    if (baselines) {
      auto it = baselines->find(name);
      if (it != baselines->end() && value != "NA") {
        double v = std::stod(value);
        out << "," << metric_detail::fmt6(it->second) << ","
            << metric_detail::fmt6(v - it->second);
      } else {
        out << ",NA,NA";
      }
    }
    out << "\n";
  }
}

inline void write_monthly_csv(const std::string& path,
                              const std::vector<PredictionRecord>& records,
                              const std::vector<int>& ks = {5, 10, 20}) {
  auto cohorts = monthly_cohorts(records, ks);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "month,n,positives";
  for (int k : ks) out << ",p_at_" << k << ",p_at_" << k << "_truncated";
  out << "\n";
  for (const auto& c : cohorts) {
    out << c.month << "," << c.count << "," << c.positives;
    for (int k : ks) {
      const auto& p = c.p_at_k.at(k);
      out << "," << metric_detail::fmt6(p.value) << "," << (p.truncated ? 1 : 0);
    }
    out << "\n";
  }
}

inline std::map<std::string, double> load_baselines_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open baselines file " + path);
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(in, line)) {
    size_t comma = line.find(',');
    if (comma == std::string::npos) continue;
    std::string key = line.substr(0, comma);
    if (key == "metric") continue;  // header
    std::string value = line.substr(comma + 1);
    size_t next = value.find(',');
    if (next != std::string::npos) value = value.substr(0, next);
    try {
      out[key] = std::stod(value);
    } catch (...) {
      continue;  // non-numeric cell (e.g. NA)
    }
  }
  return out;
}

}  // namespace vcpred
