#pragma once

#include "vcpred/hash.hpp"
#include "vcpred/jsonl.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace vcpred {

// ============================================================================
// Embeddings
// ============================================================================

struct Embedding {
  std::vector<double> values;
  double norm = 0.0;

  size_t dim() const { return values.size(); }
};

inline Embedding make_embedding(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw std::runtime_error("non-finite embedding entry");
    sq += v * v;
  }
  return Embedding{std::move(values), std::sqrt(sq)};
}

inline double dot(const Embedding& a, const Embedding& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

inline double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("cosine: dimension mismatch");
  if (a.norm == 0.0 || b.norm == 0.0)
    throw std::invalid_argument("cosine: zero vector");
  return dot(a, b) / (a.norm * b.norm);
}

// ============================================================================
// Encoder providers
// ============================================================================

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual Embedding encode(const std::string& text) = 0;
  virtual int dim() const = 0;
  /// Stable provider identifier; part of the cache key.
  virtual std::string id() const = 0;
};

/// Deterministic offline encoder: hashed bag-of-tokens with signed buckets,
/// L2-normalized. Token overlap between texts shows up as cosine similarity,
/// which is all retrieval needs in tests.
class HashedEncoder : public TextEncoder {
 public:
  explicit HashedEncoder(int dim = 384) : dim_(dim) {
    if (dim <= 0) throw std::invalid_argument("encoder dim must be positive");
  }

  Embedding encode(const std::string& text) override {
    if (text.empty()) throw std::invalid_argument("encode: empty text");
    std::vector<double> v(dim_, 0.0);
    size_t i = 0;
    const size_t n = text.size();
    bool any_token = false;
    while (i < n) {
      while (i < n && !is_token_char(text[i])) ++i;
      size_t start = i;
      while (i < n && is_token_char(text[i])) ++i;
      if (i == start) continue;
      any_token = true;
      std::string tok = lowered(text.substr(start, i - start));
      uint64_t h = fnv1a64(tok);
      size_t idx = h % static_cast<uint64_t>(dim_);
      double sign = ((h >> 32) & 1u) ? 1.0 : -1.0;
      v[idx] += sign;
    }
    if (!any_token) throw std::invalid_argument("encode: no tokens in text");
    Embedding e = make_embedding(std::move(v));
    if (e.norm > 0.0) {
      for (double& x : e.values) x /= e.norm;
      e.norm = 1.0;
    }
    return e;
  }

  int dim() const override { return dim_; }
  std::string id() const override {
    return "hashed-bow-v1-d" + std::to_string(dim_);
  }

 private:
  static bool is_token_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }
  static std::string lowered(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

  int dim_;
};

// ============================================================================
// Disk-backed embedding cache
// ============================================================================

/// Append-only JSONL cache keyed by (provider id, content hash). Embeddings
/// are extracted once per distinct text; reruns and remote providers hit the
/// cache instead of recomputing.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (j.is_discarded() || !j.contains("key") || !j.contains("v")) continue;
      entries_[j["key"].get<std::string>()] =
          j["v"].get<std::vector<double>>();
    }
  }

  std::optional<std::vector<double>> get(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& key, const std::vector<double>& values) {
    std::lock_guard<std::mutex> lock(mu_);
    if (entries_.count(key)) return;
    entries_[key] = values;
    std::ofstream out(path_, std::ios::app);
    if (out) {
      json j;
      j["key"] = key;
      j["v"] = values;
      out << j.dump() << "\n";
    }
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

class CachingEncoder : public TextEncoder {
 public:
  CachingEncoder(std::shared_ptr<TextEncoder> inner,
                 std::shared_ptr<EmbeddingCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  Embedding encode(const std::string& text) override {
    std::string key = inner_->id() + ":" + content_hash(text);
    if (cache_) {
      if (auto hit = cache_->get(key)) return make_embedding(*hit);
    }
    Embedding e = inner_->encode(text);
    if (cache_) cache_->put(key, e.values);
    return e;
  }

  int dim() const override { return inner_->dim(); }
  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<TextEncoder> inner_;
  std::shared_ptr<EmbeddingCache> cache_;
};

}  // namespace vcpred
