#pragma once

// Answer-scoring functions. Exact match and token F1 operate on normalized
// text: lowercase, ASCII punctuation removed, standalone a/an/the dropped,
// whitespace collapsed. ROUGE-L keeps articles.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace angleqa {

enum class MetricKind { exact_match, token_f1, rouge_l, mc_accuracy };

std::string_view to_string(MetricKind kind) noexcept;
MetricKind parse_metric_kind(std::string_view s);

struct SlotScore {
  double value = 0.0;
  bool failed = false;  // expected slot absent from the output
  MetricKind metric = MetricKind::exact_match;
};

std::string normalize_answer(std::string_view text);
std::vector<std::string> normalized_tokens(std::string_view text);
/// Lowercase, punctuation removed, whitespace split; articles kept.
std::vector<std::string> rouge_tokens(std::string_view text);

double exact_match(std::string_view prediction, std::span<const std::string> golds);
double token_f1(std::string_view prediction, std::span<const std::string> golds);
double rouge_l(std::string_view prediction, std::span<const std::string> golds);

/// Length of the longest common subsequence of two token sequences.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

struct McOption {
  char label;
  std::string text;
};

/// Splits "(A) gravel (B) blacktop (C) sand". Labels must run A, B, C, ...
/// Throws MalformedOptions when fewer than two labels are found.
std::vector<McOption> parse_mc_options(std::string_view mcoptions);

/// Renders options back into "(A) t1 (B) t2 ..." form.
std::string render_mc_options(std::span<const std::string> choices);

/// Exact normalized match wins; otherwise the option with the highest token
/// F1 against the prediction, ties going to the earliest label.
char mc_select(std::string_view prediction, std::string_view mcoptions);

/// 1 when the prediction and the first gold select the same option.
double mc_accuracy(std::string_view prediction, std::span<const std::string> golds,
                   std::string_view mcoptions);

/// Dispatches on `kind`. mc_accuracy requires non-empty `mcoptions`
/// (MetricUnavailable otherwise).
double score_value(MetricKind kind, std::string_view prediction,
                   std::span<const std::string> golds, std::string_view mcoptions = {});

}  // namespace angleqa
