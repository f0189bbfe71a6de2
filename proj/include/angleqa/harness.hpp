#pragma once

// Evaluation over datasets and backends: per-angle score tables, forced-choice
// ranking, the explanation-feedback pipeline and risk-coverage curves.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "angleqa/backend.hpp"
#include "angleqa/codec.hpp"
#include "angleqa/metrics.hpp"
#include "angleqa/slots.hpp"

namespace angleqa {

/// Metric per target slot. Without an override the answer slot uses
/// mc_accuracy when the instance carries mcoptions and exact_match otherwise;
/// every other slot uses `fallback`.
struct MetricConfig {
  std::map<std::string, MetricKind, std::less<>> per_slot;
  MetricKind fallback = MetricKind::rouge_l;

  MetricKind metric_for(std::string_view slot, const Instance& instance) const;
};

/// Gold strings for `slot`: the answer slot uses the instance references
/// when present.
std::vector<std::string> golds_for(const Instance& instance, std::string_view slot);

/// Scores one target slot of a parsed output. A missing slot is a failure
/// with value 0.
SlotScore score_slot(const Instance& instance, std::string_view slot,
                     const ParsedOutput& parsed, MetricKind metric);

struct AngleRow {
  std::string angle;  // arrow notation
  std::string slot;
  MetricKind metric = MetricKind::exact_match;
  double mean = 0.0;
  std::size_t n = 0;         // evaluated instances
  std::size_t failures = 0;  // outputs missing this slot
  std::size_t skipped = 0;   // instances the angle does not apply to
};

struct AngleReport {
  std::vector<std::string> angles;  // column order
  std::vector<AngleRow> rows;

  const AngleRow* find(std::string_view angle, std::string_view slot) const;
};

struct EvalOptions {
  DecodeOptions decode;
  std::size_t workers = 0;  // 0: min(backend limit, hardware threads)
};

/// Raised when the backend fails mid-run; carries the report over the pairs
/// that completed.
class EvalInterrupted : public Error {
 public:
  EvalInterrupted(const Error& cause, AngleReport partial)
      : Error(cause.code(), cause.detail()), partial_(std::move(partial)) {}
  const AngleReport& partial() const noexcept { return partial_; }

 private:
  AngleReport partial_;
};

AngleReport eval_all_angles(const SlotRegistry& registry, const Dataset& dataset,
                            const Backend& backend, const OrderPolicy& policy,
                            const MetricConfig& metrics = {}, const EvalOptions& opts = {});

/// Table layout: one column per angle, one row per (slot, metric), followed
/// by n / skipped / failure counts.
std::string render_angle_report(const AngleReport& report);

/// {"angle","slot","metric","mean","n","failures","skipped"} per line.
void write_angle_report(std::ostream& os, const AngleReport& report);

struct CandidateScore {
  std::string candidate;
  double logprob_sum = 0.0;
  double probability = 0.0;
};

/// The text forced for a candidate answer: "$answer$ = <candidate>".
std::string forced_answer_text(std::string_view candidate);

/// Input for ranking: every available slot except answer is a source
/// (mcoptions only when include_m), with answer as the single target.
std::string ranking_input(const SlotRegistry& registry, const Instance& instance,
                          bool include_m, const OrderPolicy& policy);

/// Forced-decodes every candidate and sorts by sequence probability
/// (descending, ties in input order). Throws EmptyCandidates or
/// DuplicateCandidates.
std::vector<CandidateScore> rank_candidates(const SlotRegistry& registry,
                                            const Instance& instance,
                                            const std::vector<std::string>& candidates,
                                            const Backend& backend, bool include_m,
                                            const OrderPolicy& policy);

struct FeedbackResult {
  std::optional<std::string> direct_answer;
  std::optional<std::string> explanation;
  std::optional<std::string> fed_back_answer;
  bool missing_explanation = false;
  bool marker_collision = false;
  std::string stage1_input;
  std::string stage2_input;
};

/// Stage 1: QC->AE (Q->AE without context). Stage 2: QEC->A (QE->A) with the
/// generated explanation as a source value.
FeedbackResult explanation_feedback(const SlotRegistry& registry, const Instance& instance,
                                    const Backend& backend, const OrderPolicy& policy,
                                    const DecodeOptions& decode = {});

struct CoveragePoint {
  double coverage;
  double accuracy;
};

std::vector<CoveragePoint> risk_coverage(
    const std::vector<std::pair<double, int>>& items);

}  // namespace angleqa
