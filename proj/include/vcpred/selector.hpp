#pragma once

#include "vcpred/encoder.hpp"
#include "vcpred/gain.hpp"
#include "vcpred/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace vcpred {

// ============================================================================
// Features
// ============================================================================

/// Difference feature for one candidate expansion:
///   x = [ e_base || e_v || (e_v - e_base) ],  dimension 3D.
inline std::vector<double> build_features(const Embedding& e_base,
                                          const Embedding& e_v) {
  if (e_base.dim() != e_v.dim())
    throw std::invalid_argument("feature: embedding dimension mismatch");
  std::vector<double> x;
  x.reserve(3 * e_base.dim());
  x.insert(x.end(), e_base.values.begin(), e_base.values.end());
  x.insert(x.end(), e_v.values.begin(), e_v.values.end());
  for (size_t i = 0; i < e_base.dim(); ++i)
    x.push_back(e_v.values[i] - e_base.values[i]);
  return x;
}

/// A ranking group reduced to trainable tensors.
struct FeaturizedGroup {
  std::vector<std::vector<double>> features;  // one row per candidate
  std::vector<double> gains;
};

inline FeaturizedGroup featurize_group(const RankingGroup& group,
                                       const InvestmentGraph& graph,
                                       Date cutoff, TextEncoder& encoder,
                                       int profile_entries = 5) {
  FeaturizedGroup out;
  Embedding e_base =
      encoder.encode(verbalize_path(group.base, graph, cutoff, profile_entries));
  for (const auto& cand : group.candidates) {
    Embedding e_v = encoder.encode(
        verbalize_path(cand.extended, graph, cutoff, profile_entries));
    out.features.push_back(build_features(e_base, e_v));
    out.gains.push_back(cand.gain);
  }
  return out;
}

// ============================================================================
// Listwise objective
// ============================================================================

/// Temperature-smoothed oracle targets. Gains are shifted by the group
/// minimum (r_i = delta_i - min_j delta_j); groups whose shifted gains are
/// all zero carry no loss and yield nullopt (skipped by the trainer).
inline std::optional<std::vector<double>> listwise_targets(
    const std::vector<double>& gains, double tau) {
  if (gains.empty()) throw std::invalid_argument("listwise_targets: empty group");
  double mn = *std::min_element(gains.begin(), gains.end());
  std::vector<double> r(gains.size());
  double sum = 0.0;
  for (size_t i = 0; i < gains.size(); ++i) {
    r[i] = gains[i] - mn;
    sum += r[i];
  }
  if (sum == 0.0) return std::nullopt;
  return softmax(r, tau);
}

/// KL(q || p) with the convention 0 * log 0 = 0.
inline double listwise_loss(const std::vector<double>& q,
                            const std::vector<double>& p) {
  if (q.size() != p.size())
    throw std::invalid_argument("listwise_loss: length mismatch");
  double kl = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    kl += q[i] * (std::log(q[i]) - std::log(p[i]));
  }
  return kl;
}

// ============================================================================
// Selector model
// ============================================================================

struct SelectorTrainConfig {
  double tau = 0.5;
  int batch_size = 256;
  int epochs = 30;
  double learning_rate = 3e-4;
  double weight_decay = 0.01;
  int hidden = 256;
  uint64_t seed = 17;
};

struct SelectorModel {
  TwoLayerScorer net;
  double tau = 0.5;
  int embed_dim = 0;  // D; net input is 3D
  uint64_t seed = 0;

  double score(const std::vector<double>& x) const { return net.forward(x); }

  void save(const std::string& path) const {
    json j;
    j["format"] = "vcpred-mlp-checkpoint";
    j["version"] = 1;
    j["kind"] = "path-selector";
    j["embed_dim"] = embed_dim;
    j["tau"] = tau;
    j["seed"] = seed;
    j["net"] = net.to_json();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out << j.dump(2) << "\n";
  }

  static SelectorModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    json j = json::parse(in);
    if (j.value("kind", std::string{}) != "path-selector")
      throw std::runtime_error(path + ": not a path-selector checkpoint");
    SelectorModel m;
    m.embed_dim = j.at("embed_dim").get<int>();
    m.tau = j.at("tau").get<double>();
    m.seed = j.value("seed", 0ULL);
    m.net = TwoLayerScorer::from_json(j.at("net"));
    return m;
  }
};

// ============================================================================
// Training
// ============================================================================

struct SelectorEpochLog {
  int epoch = 0;
  double loss = 0.0;
  double val_ndcg1 = 0.0;
};

struct SelectorEval {
  double ndcg_at_1 = 0.0;
  double hit_at_1 = 0.0;
  int groups_scored = 0;  // groups with nonzero shifted gain mass
};

namespace detail {

/// Chosen index under deterministic argmax (lowest index wins ties).
inline size_t argmax_index(const std::vector<double>& v) {
  size_t best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace detail

/// Hit@1: the top-scored candidate attains the maximal oracle gain.
/// NDCG@1: shifted gain of the chosen candidate over the group maximum.
/// Groups with zero shifted gain mass are skipped.
template <typename ScoreFn>
SelectorEval evaluate_selector_scores(const std::vector<FeaturizedGroup>& groups,
                                      ScoreFn&& score) {
  SelectorEval out;
  double ndcg_sum = 0.0;
  double hit_sum = 0.0;
  for (const auto& g : groups) {
    double mn = *std::min_element(g.gains.begin(), g.gains.end());
    double mx = *std::max_element(g.gains.begin(), g.gains.end());
    if (mx - mn == 0.0) continue;
    std::vector<double> scores(g.features.size());
    for (size_t i = 0; i < g.features.size(); ++i) scores[i] = score(g, i);
    size_t chosen = detail::argmax_index(scores);
    ndcg_sum += (g.gains[chosen] - mn) / (mx - mn);
    hit_sum += g.gains[chosen] == mx ? 1.0 : 0.0;
    ++out.groups_scored;
  }
  if (out.groups_scored > 0) {
    out.ndcg_at_1 = ndcg_sum / out.groups_scored;
    out.hit_at_1 = hit_sum / out.groups_scored;
  }
  return out;
}

inline SelectorEval evaluate_selector(const SelectorModel& model,
                                      const std::vector<FeaturizedGroup>& groups) {
  return evaluate_selector_scores(
      groups, [&](const FeaturizedGroup& g, size_t i) {
        return model.score(g.features[i]);
      });
}

/// Random baseline: i.i.d. U(0,1) score per candidate, same evaluation.
inline SelectorEval evaluate_random_baseline(
    const std::vector<FeaturizedGroup>& groups, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return evaluate_selector_scores(
      groups, [&](const FeaturizedGroup&, size_t) { return u(rng); });
}

struct SelectorTrainResult {
  SelectorModel model;
  std::vector<SelectorEpochLog> log;
  int skipped_groups = 0;
};

/// Minimizes the summed listwise KL with AdamW. Scores enter the model-side
/// softmax with the same temperature as the targets, so dL/ds_i =
/// (p_i - q_i) / tau, back-propagated through the two layers in closed form.
/// Deterministic given the seed; the best epoch by validation NDCG@1 wins.
inline SelectorTrainResult train_selector(
    const std::vector<FeaturizedGroup>& train_groups,
    const std::vector<FeaturizedGroup>& val_groups,
    const SelectorTrainConfig& cfg) {
  struct Prepared {
    const FeaturizedGroup* group;
    std::vector<double> q;
  };
  std::vector<Prepared> usable;
  int skipped = 0;
  for (const auto& g : train_groups) {
    auto q = listwise_targets(g.gains, cfg.tau);
    if (!q) {
      ++skipped;
      continue;
    }
    usable.push_back(Prepared{&g, std::move(*q)});
  }
  if (usable.empty()) throw std::runtime_error("no trainable groups");

  const int in_dim = static_cast<int>(usable.front().group->features[0].size());
  SelectorTrainResult result;
  result.skipped_groups = skipped;
  result.model.tau = cfg.tau;
  result.model.embed_dim = in_dim / 3;
  result.model.seed = cfg.seed;
  TwoLayerScorer& net = result.model.net;
  net = TwoLayerScorer(in_dim, cfg.hidden);
  net.init(cfg.seed);

  AdamW opt(net.param_count(), cfg.learning_rate, cfg.weight_decay);
  std::vector<size_t> order(usable.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> best_params;
  double best_val = -1.0;
  std::vector<double> flat_params, flat_grads, pre;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(order.size(), start + cfg.batch_size);
      TwoLayerScorer::Grads grads(net);
      double inv_batch = 1.0 / static_cast<double>(end - start);

      for (size_t k = start; k < end; ++k) {
        const Prepared& item = usable[order[k]];
        const auto& feats = item.group->features;
        std::vector<double> scores(feats.size());
        std::vector<std::vector<double>> pres(feats.size());
        for (size_t i = 0; i < feats.size(); ++i)
          scores[i] = net.forward(feats[i], pres[i]);
        std::vector<double> p = softmax(scores, cfg.tau);
        epoch_loss += listwise_loss(item.q, p);
        for (size_t i = 0; i < feats.size(); ++i) {
          double ds = (p[i] - item.q[i]) / cfg.tau * inv_batch;
          net.backward(feats[i], pres[i], ds, grads);
        }
      }
      net.to_flat(flat_params);
      TwoLayerScorer::grads_to_flat(grads, flat_grads);
      opt.step(flat_params, flat_grads);
      net.from_flat(flat_params);
    }

    SelectorEpochLog entry;
    entry.epoch = epoch;
    entry.loss = epoch_loss / static_cast<double>(usable.size());
    entry.val_ndcg1 = val_groups.empty()
                          ? 0.0
                          : evaluate_selector(result.model, val_groups).ndcg_at_1;
    result.log.push_back(entry);

    double crit = val_groups.empty() ? -entry.loss : entry.val_ndcg1;
    if (crit > best_val) {
      best_val = crit;
      net.to_flat(best_params);
    }
  }

  if (!best_params.empty()) net.from_flat(best_params);
  return result;
}

inline void write_selector_log_csv(const std::string& path,
                                   const std::vector<SelectorEpochLog>& log) {
  std::ofstream out(path, std::ios::trunc);
  out << "epoch,loss,val_ndcg1\n";
  char buf[96];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", e.epoch, e.loss,
                  e.val_ndcg1);
    out << buf;
  }
}

// ============================================================================
// Inference-time path extraction
// ============================================================================

/// Beam extraction without oracle calls: the selector scores all unseen
/// neighbors, the top-P at hop 0 seed the beams, and each beam then extends
/// greedily by its best-scored neighbor until the depth cap. The baseline
/// embedding is recomputed from the verbalized current path at every hop.
inline std::vector<PathState> extract_paths(const TargetLabel& target,
                                            const TemporalView& view,
                                            const SelectorModel& model,
                                            TextEncoder& encoder,
                                            int path_count = 2, int max_depth = 4,
                                            int profile_entries = 5) {
  const InvestmentGraph& graph = view.graph();

  struct Scored {
    double score;
    size_t order;
    PathState path;
  };

  auto scored_expansions = [&](const PathState& path) {
    std::vector<Scored> out;
    Embedding e_base = encoder.encode(
        verbalize_path(path, graph, view.cutoff(), profile_entries));
    std::set<NodeId> seen(path.nodes.begin(), path.nodes.end());
    size_t order = 0;
    for (const auto& [node, edge] : view.neighbors(path.nodes.back())) {
      if (seen.count(node)) continue;
      seen.insert(node);  // multi-edges to one neighbor: keep first (most recent)
      PathState ext = path.extended(node, edge);
      Embedding e_v = encoder.encode(
          verbalize_path(ext, graph, view.cutoff(), profile_entries));
      out.push_back(
          Scored{model.score(build_features(e_base, e_v)), order++, std::move(ext)});
    }
    std::sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.order < b.order;
    });
    return out;
  };

  PathState root = PathState::root(target.company_id);
  std::vector<Scored> seeds = scored_expansions(root);
  std::vector<PathState> beams;
  for (size_t i = 0; i < seeds.size() && static_cast<int>(i) < path_count; ++i)
    beams.push_back(seeds[i].path);

  for (auto& beam : beams) {
    while (beam.hop() < max_depth) {
      std::vector<Scored> next = scored_expansions(beam);
      if (next.empty()) break;
      beam = next.front().path;
    }
  }

  // Dedupe identical node sequences, preserving beam order.
  std::vector<PathState> out;
  std::set<std::vector<std::string>> seen_paths;
  for (auto& b : beams) {
    if (seen_paths.insert(b.node_keys()).second) out.push_back(std::move(b));
  }
  return out;
}

}  // namespace vcpred
