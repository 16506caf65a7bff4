#pragma once

#include "vcpred/hash.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace vcpred {

// ============================================================================
// Gateway result types
// ============================================================================

/// String log-likelihoods of the verbalized labels "True" / "False". Only the
/// difference is consumed downstream, so mock providers may emit any finite
/// pair.
struct LabelLogLik {
  double l_true = 0.0;
  double l_false = 0.0;
};

struct GenerationResult {
  std::string text;
  std::string model_id;
  double latency_ms = 0.0;
};

/// Two-way normalization of label log-likelihoods:
///   p = e^{L_T} / (e^{L_T} + e^{L_F}) = sigmoid(L_T - L_F).
/// Computed in the numerically stable branch form; result stays in (0, 1).
inline double binary_probability(const LabelLogLik& ll) {
  if (!std::isfinite(ll.l_true) || !std::isfinite(ll.l_false))
    throw std::invalid_argument("binary_probability: non-finite log-likelihood");
  double x = ll.l_true - ll.l_false;
  double p;
  if (x >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-x));
  } else {
    double e = std::exp(x);
    p = e / (1.0 + e);
  }
  if (p <= 0.0) p = std::numeric_limits<double>::min();
  if (p >= 1.0) p = std::nextafter(1.0, 0.0);
  return p;
}

// ============================================================================
// Errors, retry, throttling
// ============================================================================

/// Transient failure (connection reset, 5xx); callers retry with backoff.
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-retryable failure (bad request, context overflow, retries exhausted).
struct PermanentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RetryPolicy {
  int max_attempts = 5;
  double base_delay_ms = 50.0;
  double max_delay_ms = 2000.0;
  uint64_t jitter_seed = 0;
};

/// Runs fn, retrying TransportError with exponential backoff and jitter.
template <typename Fn>
auto call_with_retry(const RetryPolicy& policy, Fn&& fn)
    -> decltype(fn()) {
  std::mt19937_64 rng(policy.jitter_seed);
  std::string last_error;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    try {
      return fn();
    } catch (const TransportError& e) {
      last_error = e.what();
      if (attempt == policy.max_attempts) break;
      double delay = policy.base_delay_ms * std::pow(2.0, attempt - 1);
      if (delay > policy.max_delay_ms) delay = policy.max_delay_ms;
      std::uniform_real_distribution<double> jitter(0.0, delay * 0.25);
      delay += jitter(rng);
      std::this_thread::sleep_for(
          std::chrono::microseconds(static_cast<long>(delay * 1000)));
    }
  }
  throw PermanentError("retries exhausted after " +
                       std::to_string(policy.max_attempts) +
                       " attempts: " + last_error);
}

/// Bounds the number of in-flight gateway calls.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int max_in_flight)
      : max_in_flight_(max_in_flight > 0 ? max_in_flight : 1) {}

  class Guard {
   public:
    explicit Guard(ConcurrencyLimiter& l) : limiter_(&l) { limiter_->acquire(); }
    ~Guard() { limiter_->release(); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    ConcurrencyLimiter* limiter_;
  };

 private:
  void acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
    ++in_flight_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      --in_flight_;
    }
    cv_.notify_one();
  }

  std::mutex mu_;
  std::condition_variable cv_;
  int max_in_flight_;
  int in_flight_ = 0;
};

/// Crude provider-agnostic token estimate: 4 characters per token.
inline long estimate_tokens(const std::string& text) {
  return static_cast<long>((text.size() + 3) / 4);
}

// ============================================================================
// Gateway interface
// ============================================================================

class LmGateway {
 public:
  virtual ~LmGateway() = default;

  /// Log-likelihoods of the label strings given the prompt.
  virtual LabelLogLik score_labels(const std::string& prompt) = 0;

  /// Free-form generation.
  virtual GenerationResult generate(const std::string& prompt) = 0;

  virtual std::string id() const = 0;
};

// ============================================================================
// Deterministic mock
// ============================================================================

/// Substring rule consumed by the mock gateway. The label logit of a prompt
/// is the shift-weighted count of non-overlapping occurrences of each token.
struct MockRule {
  std::string token;
  double shift = 0.0;
};

/// Pure function of (prompt, rule table, seed). Synthetic datasets plant rule
/// tokens in entity texts, giving every stage a recoverable oracle signal.
///
/// Manager-style prompts (detected by the aggregate-weight marker) are
/// answered by a weighted vote over the specialist "Prediction:" lines quoted
/// in the prompt, so fusion weights have an observable effect end to end.
class MockLm : public LmGateway {
 public:
  static constexpr const char* kManagerMarker = "Aggregate-weight advice";

  MockLm(std::vector<MockRule> rules, uint64_t seed = 0,
         long max_prompt_tokens = 12000)
      : rules_(std::move(rules)),
        seed_(seed),
        max_prompt_tokens_(max_prompt_tokens) {}

  LabelLogLik score_labels(const std::string& prompt) override {
    check_budget(prompt);
    double logit = prompt_logit(prompt);
    return LabelLogLik{logit / 2.0, -logit / 2.0};
  }

  GenerationResult generate(const std::string& prompt) override {
    check_budget(prompt);
    bool verdict;
    std::string analysis;
    if (prompt.find(kManagerMarker) != std::string::npos) {
      verdict = manager_vote(prompt, &analysis);
    } else {
      double logit = prompt_logit(prompt);
      verdict = logit > 0.0;
      analysis = signal_summary(prompt, logit);
    }
    GenerationResult out;
    out.text = std::string("Prediction: ") + (verdict ? "True" : "False") +
               "\nAnalysis: " + analysis;
    out.model_id = id();
    return out;
  }

  std::string id() const override {
    return "mock-" + std::to_string(seed_);
  }

  double prompt_logit(const std::string& prompt) const {
    double logit = 0.0;
    for (const auto& rule : rules_) {
      logit += rule.shift * static_cast<double>(count_occurrences(prompt, rule.token));
    }
    return logit;
  }

 private:
  void check_budget(const std::string& prompt) const {
    if (estimate_tokens(prompt) > max_prompt_tokens_)
      throw PermanentError("prompt exceeds token budget (" +
                           std::to_string(estimate_tokens(prompt)) + " > " +
                           std::to_string(max_prompt_tokens_) + ")");
  }

  static size_t count_occurrences(const std::string& text,
                                  const std::string& token) {
    if (token.empty()) return 0;
    size_t count = 0;
    size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
      ++count;
      pos += token.size();
    }
    return count;
  }

  std::string signal_summary(const std::string& prompt, double logit) const {
    std::string parts;
    for (const auto& rule : rules_) {
      size_t n = count_occurrences(prompt, rule.token);
      if (n == 0) continue;
      char buf[64];
      std::snprintf(buf, sizeof(buf), " (%+.2f x%zu);", rule.shift, n);
      parts += " " + rule.token + buf;
    }
    char net[64];
    std::snprintf(net, sizeof(net), "%+.3f", logit);
    if (parts.empty())
      return std::string("No known signals detected. Net signal ") + net + ".";
    return "Matched signals:" + parts + " Net signal " + std::string(net) + ".";
  }

  /// Weighted vote over the specialist predictions quoted before the
  /// aggregate-weight marker; falls back to the token rule on a tie.
  bool manager_vote(const std::string& prompt, std::string* analysis) const {
    size_t marker = prompt.find(kManagerMarker);
    std::string head = prompt.substr(0, marker);
    std::vector<int> preds;  // +1 True, -1 False
    size_t pos = 0;
    while (preds.size() < 3) {
      size_t p = find_prediction(head, pos);
      if (p == std::string::npos) break;
      size_t value_at = head.find_first_not_of(" \t", head.find(':', p) + 1);
      if (value_at == std::string::npos) break;
      if (matches_word(head, value_at, "true"))
        preds.push_back(1);
      else if (matches_word(head, value_at, "false"))
        preds.push_back(-1);
      pos = value_at;
    }
    std::vector<double> weights = parse_weights(prompt, marker);
    double vote = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
      double w = i < weights.size() && preds.size() == weights.size()
                     ? weights[i]
                     : 1.0 / static_cast<double>(preds.size());
      vote += w * preds[i];
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "Weighted specialist vote %+.4f over %zu available verdicts.",
                  vote, preds.size());
    *analysis = buf;
    if (vote > 1e-12) return true;
    if (vote < -1e-12) return false;
    return prompt_logit(prompt) > 0.0;
  }

  static size_t find_prediction(const std::string& text, size_t from) {
    static const std::string kWord = "prediction";
    for (size_t i = from; i + kWord.size() < text.size(); ++i) {
      size_t j = 0;
      while (j < kWord.size() &&
             std::tolower(static_cast<unsigned char>(text[i + j])) == kWord[j])
        ++j;
      if (j == kWord.size()) {
        size_t k = i + j;
        while (k < text.size() && (text[k] == ' ' || text[k] == '\t')) ++k;
        if (k < text.size() && text[k] == ':') return i;
      }
    }
    return std::string::npos;
  }

  static bool matches_word(const std::string& text, size_t at,
                           const std::string& word) {
    if (at + word.size() > text.size()) return false;
    for (size_t i = 0; i < word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(text[at + i])) != word[i])
        return false;
    }
    return true;
  }

  static std::vector<double> parse_weights(const std::string& prompt,
                                           size_t marker) {
    // Expected shape after the marker: "... is 0.500, 0.300, 0.200 (...)".
    std::vector<double> out;
    size_t pos = prompt.find(" is ", marker);
    if (pos == std::string::npos) return out;
    pos += 4;
    while (out.size() < 3 && pos < prompt.size()) {
      char* end = nullptr;
      double v = std::strtod(prompt.c_str() + pos, &end);
      if (end == prompt.c_str() + pos) break;
      out.push_back(v);
      pos = static_cast<size_t>(end - prompt.c_str());
      while (pos < prompt.size() && (prompt[pos] == ',' || prompt[pos] == ' '))
        ++pos;
    }
    return out;
  }

  std::vector<MockRule> rules_;
  uint64_t seed_;
  long max_prompt_tokens_;
};

}  // namespace vcpred
