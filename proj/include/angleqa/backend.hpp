#pragma once

// Generative backends: a memorizing toy model with a closed-form token
// distribution, and an HTTP client for a remote generation server.

#include <cstdint>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "angleqa/sampler.hpp"

namespace angleqa {

enum class DecodeMode { greedy, beam, nucleus };

std::string_view to_string(DecodeMode mode) noexcept;
DecodeMode parse_decode_mode(std::string_view s);

struct DecodeOptions {
  DecodeMode mode = DecodeMode::greedy;
  int beam_size = 1;
  double top_p = 1.0;
  double temperature = 1.0;
  int max_tokens = 128;
  std::optional<std::uint64_t> seed;

  /// Throws InvalidDecodeOptions.
  void validate() const;
};

struct GenerationResult {
  std::string output;
  std::optional<std::vector<double>> token_logprobs;  // natural log, each <= 0
};

/// Thread-safe: implementations accept concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;

  virtual GenerationResult generate(std::string_view input,
                                    const DecodeOptions& opts) const = 0;

  /// Per-token log-probabilities of `forced_output` followed by the end
  /// marker. Throws EmptyCandidates when forced_output is blank.
  virtual std::vector<double> force_score(std::string_view input,
                                          std::string_view forced_output) const = 0;

  /// Concurrency the backend is willing to serve.
  virtual std::size_t max_in_flight() const { return 8; }
};

inline constexpr std::string_view kEndMarker = "</s>";

struct ToyModelParams {
  double alpha = 0.1;  // probability mass spread off the memorized path
};

/// Memorizes input -> output. For inputs it has not seen, it answers with the
/// output of the memorized input with the highest token-set Jaccard
/// similarity (ties: lexicographically smallest input).
///
/// Token distribution with V = |vocabulary| and memorized continuation m:
/// while the forced prefix equals m, P(m_i) = (1 - alpha) + alpha / V and any
/// other token gets alpha / V; after the first divergence every token gets
/// 1 / V. Out-of-vocabulary tokens are scored like an unseen vocabulary token.
class ToyBackend final : public Backend {
 public:
  /// Throws ConflictingPairs, EmptyModel (no pairs) or InvalidConfig (alpha).
  static ToyBackend train(std::span<const std::pair<std::string, std::string>> pairs,
                          ToyModelParams params = {});
  static ToyBackend train(std::span<const EncodedPair> pairs, ToyModelParams params = {});

  std::string name() const override { return "toy"; }
  GenerationResult generate(std::string_view input, const DecodeOptions& opts) const override;
  std::vector<double> force_score(std::string_view input,
                                  std::string_view forced_output) const override;

  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  std::size_t memorized() const noexcept { return inputs_.size(); }
  double alpha() const noexcept { return params_.alpha; }

  /// The memorized output that `input` resolves to.
  const std::string& lookup(std::string_view input) const;

 private:
  ToyBackend() = default;

  ToyModelParams params_;
  std::vector<std::string> inputs_;  // sorted
  std::vector<std::string> outputs_;
  std::vector<std::vector<std::string>> input_token_sets_;  // sorted, unique
  std::unordered_map<std::string, std::size_t> exact_;
  std::vector<std::string> vocabulary_;
};

/// Convenience alias matching the data-pipeline naming.
inline ToyBackend train_lookup(std::span<const EncodedPair> pairs, ToyModelParams params = {}) {
  return ToyBackend::train(pairs, params);
}

struct RemoteOptions {
  std::size_t max_in_flight = 8;
  int timeout_seconds = 60;
  /// When > 0, inputs are cut to this many whitespace tokens, dropping from
  /// the end (where context sits).
  std::size_t max_input_tokens = 0;
};

/// Client for POST /v1/generate and POST /v1/force.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(std::string base_url, RemoteOptions opts = {});

  std::string name() const override { return "remote:" + base_url_; }
  GenerationResult generate(std::string_view input, const DecodeOptions& opts) const override;
  std::vector<double> force_score(std::string_view input,
                                  std::string_view forced_output) const override;
  std::size_t max_in_flight() const override { return opts_.max_in_flight; }

  const std::string& base_url() const noexcept { return base_url_; }

 private:
  std::string post(const std::string& path, const std::string& body) const;
  std::string prepare_input(std::string_view input) const;

  std::string base_url_;
  RemoteOptions opts_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

/// Cuts `input` to at most `max_tokens` whitespace tokens, keeping the front.
std::string truncate_tail(std::string_view input, std::size_t max_tokens);

/// "toy:<pairs.jsonl>" or "remote:<base-url>". The environment variable
/// ANGLEQA_REMOTE_URL, when set, overrides the remote base URL.
std::unique_ptr<Backend> make_backend(std::string_view spec, const SlotRegistry& registry,
                                      ToyModelParams toy = {}, RemoteOptions remote = {});

}  // namespace angleqa
