#pragma once

#include "vcpred/mlp.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vcpred {

// ============================================================================
// Instance attributes
// ============================================================================

/// One-hot vocabulary for the structured company descriptors fed to the gate.
struct AttributeVocab {
  std::vector<std::pair<std::string, std::vector<std::string>>> fields;

  int dim() const {
    int d = 0;
    for (const auto& [_, values] : fields) d += static_cast<int>(values.size());
    return d;
  }
};

/// Default taxonomy: 8 industries + 4 regions + 2 stages = 14 dims.
inline AttributeVocab default_attribute_vocab() {
  AttributeVocab v;
  v.fields = {
      {"industry",
       {"fintech", "biotech", "robotics", "saas", "ecommerce", "energy",
        "logistics", "media"}},
      {"region", {"us", "eu", "asia", "other"}},
      {"stage", {"seed", "angel"}},
  };
  return v;
}

/// Values outside the vocabulary leave their block all-zero.
inline std::vector<double> build_attribute_vector(
    const std::map<std::string, std::string>& attributes,
    const AttributeVocab& vocab) {
  std::vector<double> out;
  out.reserve(vocab.dim());
  for (const auto& [key, values] : vocab.fields) {
    auto it = attributes.find(key);
    for (const auto& v : values)
      out.push_back(it != attributes.end() && it->second == v ? 1.0 : 0.0);
  }
  return out;
}

// ============================================================================
// Gate model
// ============================================================================

/// View order is fixed everywhere: 0 = PC (peer-company), 1 = IP (investor
/// profile), 2 = IC (investment chain).
constexpr int kNumViews = 3;

struct GateInput {
  std::array<std::vector<double>, kNumViews> rationales;  // d_r each
  std::vector<double> attributes;                         // d_a, entries in {0,1}
};

struct GateOutput {
  std::array<double, kNumViews> scores{};
  std::array<double, kNumViews> weights{};
  std::vector<double> fused;  // convex combination of rationales
  double probability = 0.5;   // auxiliary success head
};

struct GateTrainConfig {
  int rationale_dim = 384;
  int attr_dim = 14;
  int hidden = 256;
  int batch_size = 256;
  int epochs = 50;
  double learning_rate = 5e-4;
  double weight_decay = 0.01;
  uint64_t seed = 29;
  bool use_query_key = false;  // appendix-style attention scorer
  int qk_dim = 64;
};

struct GateModel {
  int rationale_dim = 0;
  int attr_dim = 0;
  TwoLayerScorer score_net;  // g_phi, shared across views
  TwoLayerScorer head_net;   // h_theta, auxiliary success score
  bool use_query_key = false;
  int qk_dim = 0;
  std::vector<double> wq;  // qk_dim x (d_r + d_a), row-major
  std::vector<double> wk;

  static GateModel make(const GateTrainConfig& cfg) {
    GateModel m;
    m.rationale_dim = cfg.rationale_dim;
    m.attr_dim = cfg.attr_dim;
    int in = cfg.rationale_dim + cfg.attr_dim;
    m.score_net = TwoLayerScorer(in, cfg.hidden);
    m.head_net = TwoLayerScorer(in, cfg.hidden);
    m.use_query_key = cfg.use_query_key;
    if (cfg.use_query_key) {
      m.qk_dim = cfg.qk_dim;
      m.wq.assign(static_cast<size_t>(cfg.qk_dim) * in, 0.0);
      m.wk.assign(static_cast<size_t>(cfg.qk_dim) * in, 0.0);
    }
    return m;
  }

  void init(uint64_t seed) {
    score_net.init(mix_seed(seed, 1));
    head_net.init(mix_seed(seed, 2));
    if (use_query_key) {
      int in = rationale_dim + attr_dim;
      std::mt19937_64 rng(mix_seed(seed, 3));
      double s = 1.0 / std::sqrt(static_cast<double>(in));
      std::uniform_real_distribution<double> u(-s, s);
      for (auto& v : wq) v = u(rng);
      for (auto& v : wk) v = u(rng);
    }
  }

  size_t param_count() const {
    return score_net.param_count() + head_net.param_count() + wq.size() +
           wk.size();
  }

  void to_flat(std::vector<double>& out) const {
    std::vector<double> tmp;
    out.clear();
    score_net.to_flat(tmp);
    out.insert(out.end(), tmp.begin(), tmp.end());
    head_net.to_flat(tmp);
    out.insert(out.end(), tmp.begin(), tmp.end());
    out.insert(out.end(), wq.begin(), wq.end());
    out.insert(out.end(), wk.begin(), wk.end());
  }

  void from_flat(const std::vector<double>& in) {
    size_t off = 0;
    score_net.from_flat(in, off);
    off += score_net.param_count();
    head_net.from_flat(in, off);
    off += head_net.param_count();
    for (auto& v : wq) v = in[off++];
    for (auto& v : wk) v = in[off++];
  }

  void save(const std::string& path) const {
    json j;
    j["format"] = "vcpred-mlp-checkpoint";
    j["version"] = 1;
    j["kind"] = "gating-fusion";
    j["rationale_dim"] = rationale_dim;
    j["attr_dim"] = attr_dim;
    j["use_query_key"] = use_query_key;
    j["qk_dim"] = qk_dim;
    j["score_net"] = score_net.to_json();
    j["head_net"] = head_net.to_json();
    j["wq"] = wq;
    j["wk"] = wk;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out << j.dump(2) << "\n";
  }

  static GateModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    json j = json::parse(in);
    if (j.value("kind", std::string{}) != "gating-fusion")
      throw std::runtime_error(path + ": not a gating-fusion checkpoint");
    GateModel m;
    m.rationale_dim = j.at("rationale_dim").get<int>();
    m.attr_dim = j.at("attr_dim").get<int>();
    m.use_query_key = j.at("use_query_key").get<bool>();
    m.qk_dim = j.at("qk_dim").get<int>();
    m.score_net = TwoLayerScorer::from_json(j.at("score_net"));
    m.head_net = TwoLayerScorer::from_json(j.at("head_net"));
    m.wq = j.at("wq").get<std::vector<double>>();
    m.wk = j.at("wk").get<std::vector<double>>();
    return m;
  }
};

// ============================================================================
// Forward pass
// ============================================================================

namespace gate_detail {

inline std::vector<double> concat(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline void matvec(const std::vector<double>& m, const std::vector<double>& x,
                   int rows, std::vector<double>& out) {
  int cols = static_cast<int>(x.size());
  out.assign(rows, 0.0);
  for (int r = 0; r < rows; ++r) {
    const double* row = &m[static_cast<size_t>(r) * cols];
    double s = 0.0;
    for (int c = 0; c < cols; ++c) s += row[c] * x[c];
    out[r] = s;
  }
}

struct ForwardTrace {
  std::array<std::vector<double>, kNumViews> view_inputs;   // u_i
  std::array<std::vector<double>, kNumViews> score_pre;     // g_phi pre-acts
  std::array<std::vector<double>, kNumViews> q_proj, k_proj;
  std::vector<double> fused_input;  // [r_f || a]
  std::vector<double> head_pre;
  GateOutput out;
};

}  // namespace gate_detail

/// s_i = g_phi([r_i || a*]); w = softmax(s); r_f = sum_i w_i r_i;
/// p = sigmoid(h_theta([r_f || a*])).
inline gate_detail::ForwardTrace gate_forward_traced(const GateInput& input,
                                                     const GateModel& model) {
  for (const auto& r : input.rationales) {
    if (static_cast<int>(r.size()) != model.rationale_dim)
      throw std::invalid_argument("gate_forward: rationale dimension mismatch");
  }
  if (static_cast<int>(input.attributes.size()) != model.attr_dim)
    throw std::invalid_argument("gate_forward: attribute dimension mismatch");

  gate_detail::ForwardTrace t;
  std::vector<double> raw_scores(kNumViews);
  for (int i = 0; i < kNumViews; ++i) {
    t.view_inputs[i] =
        gate_detail::concat(input.rationales[i], input.attributes);
    if (model.use_query_key) {
      gate_detail::matvec(model.wq, t.view_inputs[i], model.qk_dim, t.q_proj[i]);
      gate_detail::matvec(model.wk, t.view_inputs[i], model.qk_dim, t.k_proj[i]);
      double s = 0.0;
      for (int k = 0; k < model.qk_dim; ++k) s += t.q_proj[i][k] * t.k_proj[i][k];
      raw_scores[i] = s / std::sqrt(static_cast<double>(model.qk_dim));
    } else {
      raw_scores[i] = model.score_net.forward(t.view_inputs[i], t.score_pre[i]);
    }
  }
  std::vector<double> w = softmax(raw_scores);

  std::vector<double> fused(model.rationale_dim, 0.0);
  for (int i = 0; i < kNumViews; ++i) {
    for (int c = 0; c < model.rationale_dim; ++c)
      fused[c] += w[i] * input.rationales[i][c];
  }
  t.fused_input = gate_detail::concat(fused, input.attributes);
  double z = model.head_net.forward(t.fused_input, t.head_pre);

  for (int i = 0; i < kNumViews; ++i) {
    t.out.scores[i] = raw_scores[i];
    t.out.weights[i] = w[i];
  }
  t.out.fused = std::move(fused);
  t.out.probability = sigmoid(z);
  return t;
}

inline GateOutput gate_forward(const GateInput& input, const GateModel& model) {
  return gate_forward_traced(input, model).out;
}

/// The manager consumes only the weights; the auxiliary head stays internal.
inline std::array<double, kNumViews> gate_weights_for_manager(
    const GateInput& input, const GateModel& model) {
  return gate_forward(input, model).weights;
}

// ============================================================================
// Training
// ============================================================================

struct GateSample {
  GateInput input;
  int label = 0;
};

struct GateEpochLog {
  int epoch = 0;
  double loss = 0.0;
  double val_precision = 0.0;
  double val_f1 = 0.0;
};

struct GateEvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

namespace gate_detail {

inline GateEvalResult prf_from_counts(int tp, int fp, int fn) {
  GateEvalResult r;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

}  // namespace gate_detail

inline GateEvalResult evaluate_gate(const GateModel& model,
                                    const std::vector<GateSample>& data,
                                    double threshold = 0.5) {
  int tp = 0, fp = 0, fn = 0;
  for (const auto& s : data) {
    int pred = gate_forward(s.input, model).probability >= threshold ? 1 : 0;
    if (pred == 1 && s.label == 1) ++tp;
    if (pred == 1 && s.label == 0) ++fp;
    if (pred == 0 && s.label == 1) ++fn;
  }
  return gate_detail::prf_from_counts(tp, fp, fn);
}

/// Chance baseline: for each instance one view is picked uniformly at random
/// and fused alone; the trained head then scores that view.
inline GateEvalResult evaluate_gate_random_view(
    const GateModel& model, const std::vector<GateSample>& data, uint64_t seed,
    double threshold = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, kNumViews - 1);
  int tp = 0, fp = 0, fn = 0;
  for (const auto& s : data) {
    int view = pick(rng);
    std::vector<double> fused_input =
        gate_detail::concat(s.input.rationales[view], s.input.attributes);
    double p = sigmoid(model.head_net.forward(fused_input));
    int pred = p >= threshold ? 1 : 0;
    if (pred == 1 && s.label == 1) ++tp;
    if (pred == 1 && s.label == 0) ++fp;
    if (pred == 0 && s.label == 1) ++fn;
  }
  return gate_detail::prf_from_counts(tp, fp, fn);
}

/// Binary cross-entropy on one sample; accumulates parameter gradients.
/// Closed-form chain: dL/dz = p - y; head backprop yields dL/d r_f;
/// dL/dw_i = <dL/dr_f, r_i>; softmax Jacobian gives
/// dL/ds_i = w_i (dL/dw_i - sum_j w_j dL/dw_j); per-view backprop through the
/// shared scorer (or the query/key projections) finishes the pass.
inline double gate_backward(const GateInput& input, int label,
                            const GateModel& model,
                            TwoLayerScorer::Grads& score_grads,
                            TwoLayerScorer::Grads& head_grads,
                            std::vector<double>& wq_grads,
                            std::vector<double>& wk_grads, double grad_scale) {
  auto t = gate_forward_traced(input, model);
  double p = t.out.probability;
  double eps = 1e-12;
  double loss = label ? -std::log(std::max(p, eps))
                      : -std::log(std::max(1.0 - p, eps));

  double dz = (p - static_cast<double>(label)) * grad_scale;
  std::vector<double> d_fused_input;
  model.head_net.backward(t.fused_input, t.head_pre, dz, head_grads,
                          &d_fused_input);

  std::array<double, kNumViews> dw{};
  double weighted_sum = 0.0;
  for (int i = 0; i < kNumViews; ++i) {
    double acc = 0.0;
    for (int c = 0; c < model.rationale_dim; ++c)
      acc += d_fused_input[c] * input.rationales[i][c];
    dw[i] = acc;
    weighted_sum += t.out.weights[i] * acc;
  }
  for (int i = 0; i < kNumViews; ++i) {
    double ds = t.out.weights[i] * (dw[i] - weighted_sum);
    if (model.use_query_key) {
      double scale = 1.0 / std::sqrt(static_cast<double>(model.qk_dim));
      int in = model.rationale_dim + model.attr_dim;
      for (int k = 0; k < model.qk_dim; ++k) {
        double dq = ds * scale * t.k_proj[i][k];
        double dk = ds * scale * t.q_proj[i][k];
        size_t row = static_cast<size_t>(k) * in;
        for (int c = 0; c < in; ++c) {
          wq_grads[row + c] += dq * t.view_inputs[i][c];
          wk_grads[row + c] += dk * t.view_inputs[i][c];
        }
      }
    } else {
      model.score_net.backward(t.view_inputs[i], t.score_pre[i], ds,
                               score_grads);
    }
  }
  return loss;
}

struct GateTrainResult {
  GateModel model;
  std::vector<GateEpochLog> log;
};

inline GateTrainResult train_gate(const std::vector<GateSample>& train_data,
                                  const std::vector<GateSample>& val_data,
                                  const GateTrainConfig& cfg) {
  if (train_data.empty()) throw std::runtime_error("gate: empty training set");
  bool has_pos = false, has_neg = false;
  for (const auto& s : train_data) (s.label ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw std::runtime_error("gate: training set must contain both classes");

  GateTrainResult result;
  result.model = GateModel::make(cfg);
  result.model.init(cfg.seed);
  GateModel& model = result.model;

  AdamW opt(model.param_count(), cfg.learning_rate, cfg.weight_decay);
  std::vector<size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> best_params;
  double best_val = -1.0;
  std::vector<double> flat_params, flat_grads;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937_64 rng(mix_seed(cfg.seed, 1000 + static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(order.size(), start + cfg.batch_size);
      TwoLayerScorer::Grads score_grads(model.score_net);
      TwoLayerScorer::Grads head_grads(model.head_net);
      std::vector<double> wq_grads(model.wq.size(), 0.0);
      std::vector<double> wk_grads(model.wk.size(), 0.0);
      double inv_batch = 1.0 / static_cast<double>(end - start);

      for (size_t k = start; k < end; ++k) {
        const GateSample& s = train_data[order[k]];
        epoch_loss += gate_backward(s.input, s.label, model, score_grads,
                                    head_grads, wq_grads, wk_grads, inv_batch);
      }

      model.to_flat(flat_params);
      flat_grads.clear();
      std::vector<double> tmp;
      TwoLayerScorer::grads_to_flat(score_grads, tmp);
      flat_grads.insert(flat_grads.end(), tmp.begin(), tmp.end());
      TwoLayerScorer::grads_to_flat(head_grads, tmp);
      flat_grads.insert(flat_grads.end(), tmp.begin(), tmp.end());
      flat_grads.insert(flat_grads.end(), wq_grads.begin(), wq_grads.end());
      flat_grads.insert(flat_grads.end(), wk_grads.begin(), wk_grads.end());
      opt.step(flat_params, flat_grads);
      model.from_flat(flat_params);
    }

    GateEpochLog entry;
    entry.epoch = epoch;
    entry.loss = epoch_loss / static_cast<double>(train_data.size());
    if (!val_data.empty()) {
      GateEvalResult ev = evaluate_gate(model, val_data);
      entry.val_precision = ev.precision;
      entry.val_f1 = ev.f1;
    }
    result.log.push_back(entry);

    double crit = val_data.empty() ? -entry.loss : entry.val_f1;
    if (crit > best_val) {
      best_val = crit;
      model.to_flat(best_params);
    }
  }

  if (!best_params.empty()) model.from_flat(best_params);
  return result;
}

inline void write_gate_log_csv(const std::string& path,
                               const std::vector<GateEpochLog>& log) {
  std::ofstream out(path, std::ios::trunc);
  out << "epoch,loss,val_precision,val_f1\n";
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f\n", e.epoch, e.loss,
                  e.val_precision, e.val_f1);
    out << buf;
  }
}

}  // namespace vcpred
