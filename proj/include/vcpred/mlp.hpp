#pragma once

#include "vcpred/jsonl.hpp"

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vcpred {

// ============================================================================
// Two-layer scalar scorer: s(x) = w2 . relu(W1 x + b1) + b2
// ============================================================================

struct TwoLayerScorer {
  int in_dim = 0;
  int hidden = 0;
  std::vector<double> w1;  // hidden x in_dim, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  TwoLayerScorer() = default;
  TwoLayerScorer(int in, int h) : in_dim(in), hidden(h) {
    w1.assign(static_cast<size_t>(hidden) * in_dim, 0.0);
    b1.assign(hidden, 0.0);
    w2.assign(hidden, 0.0);
  }

  /// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], seeded.
  void init(uint64_t seed) {
    std::mt19937_64 rng(seed);
    double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
    std::uniform_real_distribution<double> u1(-s1, s1);
    for (auto& v : w1) v = u1(rng);
    for (auto& v : b1) v = u1(rng);
    double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    std::uniform_real_distribution<double> u2(-s2, s2);
    for (auto& v : w2) v = u2(rng);
    b2 = u2(rng);
  }

  /// Forward pass; fills pre-activation buffer (needed by backward).
  double forward(std::span<const double> x, std::vector<double>& pre) const {
    if (static_cast<int>(x.size()) != in_dim)
      throw std::invalid_argument("scorer: input dimension mismatch");
    pre.resize(hidden);
    double s = b2;
    for (int h = 0; h < hidden; ++h) {
      double z = b1[h];
      const double* row = &w1[static_cast<size_t>(h) * in_dim];
      for (int i = 0; i < in_dim; ++i) z += row[i] * x[i];
      pre[h] = z;
      if (z > 0.0) s += w2[h] * z;
    }
    return s;
  }

  double forward(std::span<const double> x) const {
    std::vector<double> pre;
    return forward(x, pre);
  }

  struct Grads {
    std::vector<double> w1, b1, w2;
    double b2 = 0.0;

    explicit Grads(const TwoLayerScorer& m)
        : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0) {}

    void scale(double k) {
      for (auto& v : w1) v *= k;
      for (auto& v : b1) v *= k;
      for (auto& v : w2) v *= k;
      b2 *= k;
    }
  };

  /// Backward for upstream gradient ds at input x (pre from forward).
  /// Accumulates into g; optionally emits dL/dx.
  void backward(std::span<const double> x, const std::vector<double>& pre,
                double ds, Grads& g, std::vector<double>* dx = nullptr) const {
    if (dx) dx->assign(in_dim, 0.0);
    g.b2 += ds;
    for (int h = 0; h < hidden; ++h) {
      if (pre[h] <= 0.0) continue;
      g.w2[h] += ds * pre[h];
      double dz = ds * w2[h];
      g.b1[h] += dz;
      double* grow = &g.w1[static_cast<size_t>(h) * in_dim];
      const double* row = &w1[static_cast<size_t>(h) * in_dim];
      for (int i = 0; i < in_dim; ++i) {
        grow[i] += dz * x[i];
        if (dx) (*dx)[i] += dz * row[i];
      }
    }
  }

  size_t param_count() const { return w1.size() + b1.size() + w2.size() + 1; }

  void to_flat(std::vector<double>& out) const {
    out.clear();
    out.reserve(param_count());
    out.insert(out.end(), w1.begin(), w1.end());
    out.insert(out.end(), b1.begin(), b1.end());
    out.insert(out.end(), w2.begin(), w2.end());
    out.push_back(b2);
  }

  void from_flat(const std::vector<double>& in, size_t offset = 0) {
    size_t p = offset;
    for (auto& v : w1) v = in[p++];
    for (auto& v : b1) v = in[p++];
    for (auto& v : w2) v = in[p++];
    b2 = in[p++];
  }

  static void grads_to_flat(const Grads& g, std::vector<double>& out) {
    out.clear();
    out.insert(out.end(), g.w1.begin(), g.w1.end());
    out.insert(out.end(), g.b1.begin(), g.b1.end());
    out.insert(out.end(), g.w2.begin(), g.w2.end());
    out.push_back(g.b2);
  }

  json to_json() const {
    json j;
    j["in_dim"] = in_dim;
    j["hidden"] = hidden;
    j["w1"] = w1;
    j["b1"] = b1;
    j["w2"] = w2;
    j["b2"] = b2;
    return j;
  }

  static TwoLayerScorer from_json(const json& j) {
    TwoLayerScorer m(j.at("in_dim").get<int>(), j.at("hidden").get<int>());
    m.w1 = j.at("w1").get<std::vector<double>>();
    m.b1 = j.at("b1").get<std::vector<double>>();
    m.w2 = j.at("w2").get<std::vector<double>>();
    m.b2 = j.at("b2").get<double>();
    if (m.w1.size() != static_cast<size_t>(m.hidden) * m.in_dim ||
        m.b1.size() != static_cast<size_t>(m.hidden) ||
        m.w2.size() != static_cast<size_t>(m.hidden))
      throw std::runtime_error("checkpoint: inconsistent scorer shape");
    return m;
  }
};

// ============================================================================
// AdamW (decoupled weight decay)
// ============================================================================

class AdamW {
 public:
  AdamW(size_t n_params, double lr, double weight_decay,
        double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr),
        wd_(weight_decay),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps),
        m_(n_params, 0.0),
        v_(n_params, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw std::invalid_argument("adamw: size mismatch");
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
      double mhat = m_[i] / bc1;
      double vhat = v_[i] / bc2;
      params[i] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + wd_ * params[i]);
    }
  }

 private:
  double lr_, wd_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

// ============================================================================
// Shared numeric helpers
// ============================================================================

/// Softmax of scores/temperature, computed with max-shift for stability.
inline std::vector<double> softmax(const std::vector<double>& scores,
                                   double temperature = 1.0) {
  if (scores.empty()) throw std::invalid_argument("softmax: empty input");
  if (temperature <= 0.0) throw std::invalid_argument("softmax: tau must be > 0");
  double mx = scores[0];
  for (double s : scores) mx = std::max(mx, s);
  std::vector<double> out(scores.size());
  double sum = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp((scores[i] - mx) / temperature);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace vcpred
