#pragma once

// Dataset loaders (line-delimited JSON) and the two data-preparation
// procedures: retrieved context and CENTRAL-sentence explanations.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "angleqa/slots.hpp"

namespace angleqa {

/// Non-fatal notes raised while loading.
struct Diagnostics {
  std::vector<std::string> warnings;
};

struct McChoice {
  char label;
  std::string text;
};

struct McRecord {
  std::string id;
  std::string question;
  std::vector<McChoice> choices;
  char answer_key = 'A';
  std::optional<std::string> category;
};

/// Records: {"id", "question", "choices": [{"label","text"},...], "answerKey",
/// "category"?}. Optional "context" and "explanation" fields become slots.
Dataset load_mc_dataset(const std::filesystem::path& path, const SlotRegistry& registry,
                        Diagnostics* diag = nullptr);
Dataset read_mc_dataset(std::istream& in, std::string name, const SlotRegistry& registry,
                        Diagnostics* diag = nullptr);

/// Records: {"id", "question", "answers": [...], "category"?}. The first answer
/// fills the answer slot; all of them are kept as references.
Dataset load_da_dataset(const std::filesystem::path& path, const SlotRegistry& registry,
                        Diagnostics* diag = nullptr);
Dataset read_da_dataset(std::istream& in, std::string name, const SlotRegistry& registry,
                        Diagnostics* diag = nullptr);

/// Records: {"id", "question", "category"}. No gold answers.
Dataset load_challenge_suite(const std::filesystem::path& path, const SlotRegistry& registry,
                             Diagnostics* diag = nullptr);
Dataset read_challenge_suite(std::istream& in, std::string name,
                             const SlotRegistry& registry, Diagnostics* diag = nullptr);

/// Picks the loader from the first record's fields ("choices" -> MC,
/// "answers" -> DA, otherwise challenge suite).
Dataset load_dataset(const std::filesystem::path& path, const SlotRegistry& registry,
                     Diagnostics* diag = nullptr);

/// Category vocabulary of the 300-question challenge suite with the number of
/// questions in each.
const std::vector<std::pair<std::string, int>>& challenge_categories();

struct SentenceCorpus {
  std::vector<std::string> sentences;
};

/// One sentence per non-blank line.
SentenceCorpus load_corpus(const std::filesystem::path& path);

/// Sentence scorer: sum of inverse document frequencies of the distinct
/// normalized query tokens that occur in the sentence.
class LexicalScorer {
 public:
  explicit LexicalScorer(const SentenceCorpus& corpus);

  double score(const std::vector<std::string>& query_tokens, std::size_t sentence) const;
  double idf(const std::string& token) const;
  std::size_t size() const noexcept { return sentence_tokens_.size(); }

 private:
  std::vector<std::vector<std::string>> sentence_tokens_;  // sorted, unique
  std::map<std::string, std::size_t, std::less<>> doc_freq_;
};

/// Top-k sentences ranked against the question plus all option texts, always
/// keeping the single best sentence for each option's own query (question +
/// that option). Joined by spaces, descending score.
/// Throws EmptyCorpus or KTooSmall.
std::string retrieve_context(std::string_view question,
                             const std::optional<std::string>& mcoptions,
                             const SentenceCorpus& corpus, std::size_t k = 10);

/// Indices of the selected sentences, in output order.
std::vector<std::size_t> retrieve_indices(std::string_view question,
                                          const std::optional<std::string>& mcoptions,
                                          const SentenceCorpus& corpus, std::size_t k = 10);

inline constexpr std::size_t kMaxExplanationSentences = 5;

/// Shuffles the sentences (keeping a random 5 when there are more) and joins
/// them into one paragraph. Throws EmptyExplanation.
std::string build_explanation(const std::vector<std::string>& central_sentences,
                              std::uint64_t seed);

/// Records: {"id", "central": [sentence, ...]}.
std::map<std::string, std::vector<std::string>> load_central_sentences(
    const std::filesystem::path& path);

/// New dataset whose instances gain an explanation slot when the table has
/// sentences for their id. Per-instance seeds derive from `seed` and the id.
Dataset attach_explanations(const SlotRegistry& registry, const Dataset& dataset,
                            const std::map<std::string, std::vector<std::string>>& central,
                            std::uint64_t seed);

/// New dataset whose instances gain a retrieved context slot.
Dataset attach_context(const SlotRegistry& registry, const Dataset& dataset,
                       const SentenceCorpus& corpus, std::size_t k = 10);

}  // namespace angleqa
