#pragma once

// Independent oracles and fixtures shared by the unit tests and the
// acceptance binary. Oracles are deliberately naive re-derivations and never
// call into the library code they check.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "angleqa/backend.hpp"
#include "angleqa/random.hpp"
#include "angleqa/slots.hpp"

namespace angleqa::testing {

// Precision/recall F1 with a remove-on-match multiset intersection.
inline double oracle_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::vector<std::string> pool = gold;
  double common = 0;
  for (const auto& t : pred) {
    auto it = std::find(pool.begin(), pool.end(), t);
    if (it != pool.end()) {
      pool.erase(it);
      common += 1;
    }
  }
  if (common == 0) return 0.0;
  double p = common / static_cast<double>(pred.size());
  double r = common / static_cast<double>(gold.size());
  return 2 * p * r / (p + r);
}

// Textbook recursive LCS, exponential but fine for length <= 7.
inline std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b,
                              std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + oracle_lcs(a, b, i + 1, j + 1);
  return std::max(oracle_lcs(a, b, i + 1, j), oracle_lcs(a, b, i, j + 1));
}

inline double oracle_rouge_l(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return 0.0;
  double l = static_cast<double>(oracle_lcs(pred, gold));
  if (l == 0) return 0.0;
  double p = l / static_cast<double>(pred.size());
  double r = l / static_cast<double>(gold.size());
  return 2 * p * r / (p + r);
}

inline std::string join_tokens(const std::vector<std::string>& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ' ';
    s += t[i];
  }
  return s;
}

// Tokens that survive normalization untouched (lowercase, no punctuation,
// no articles), so oracle inputs need no normalizer of their own.
inline std::vector<std::string> random_plain_tokens(Rng& rng, std::size_t max_len,
                                                    std::size_t alphabet) {
  static const char* words[] = {"x", "y", "z", "w", "v", "u"};
  std::size_t n = rng.uniform_index(max_len + 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(words[rng.uniform_index(alphabet)]);
  return out;
}

inline Instance rollerskating(const SlotRegistry& reg) {
  return Instance::make(reg, "roller",
                        {{"question", "Which surface is best for rollerskating?"},
                         {"mcoptions", "(A) gravel (B) sand (C) blacktop"},
                         {"answer", "blacktop"},
                         {"explanation", "A wheeled vehicle requires smooth surfaces."}});
}

inline const char* kRollerInput =
    "$answer$ ; $explanation$ ; $question$ = Which surface is best for rollerskating? ; "
    "$mcoptions$ = (A) gravel (B) sand (C) blacktop";
inline const char* kRollerOutput =
    "$answer$ = blacktop ; $explanation$ = A wheeled vehicle requires smooth surfaces.";

// Slot values that pass validation but stress the parser: separators inside
// values, unregistered dollar spans, punctuation and repeated spaces.
inline std::string random_value(Rng& rng) {
  static const char* pieces[] = {
      "blacktop", "gravel", "a ; b", ";",     "costs $5",  "$notaslot$", "x=y",   "==",
      "A wheeled vehicle", "(A) one", "ends ;", "; starts", "$",  "mid $ dollar", "é ü", "42",
      "answer", "$answer", "answer$", "question =", "tab\there"};
  std::size_t n = 1 + rng.uniform_index(5);
  std::string v;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) v += rng.uniform_index(4) == 0 ? "  " : " ";
    v += pieces[rng.uniform_index(std::size(pieces))];
  }
  return v;
}

// A 20-instance multiple-choice toy dataset. Every third instance lacks an
// explanation and every fourth lacks context, so applicability varies.
inline std::vector<Instance> toy_instances(const SlotRegistry& reg, std::size_t n = 20) {
  std::vector<Instance> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = std::to_string(i);
    SlotValues v{{"question", "Which item number " + s + " is correct?"},
                 {"mcoptions", "(A) alpha" + s + " (B) beta" + s + " (C) gamma" + s + " (D) delta" + s},
                 {"answer", "beta" + s}};
    if (i % 3 != 0) v["explanation"] = "Item " + s + " follows the beta rule.";
    if (i % 4 != 0) v["context"] = "Fact " + s + ": beta items are correct.";
    out.push_back(Instance::make(reg, "toy-" + (i < 10 ? "0" + s : s), v));
  }
  return out;
}

// Toy backend memorizing the 1-token answer "blacktop" for `input`, with a
// vocabulary of exactly ten tokens (eight fillers, blacktop, end marker).
inline ToyBackend toy_v10(const std::string& input, double alpha = 0.1) {
  std::vector<std::pair<std::string, std::string>> pairs{
      {input, "blacktop"},
      {"filler input one", "f1 f2 f3 f4"},
      {"filler input two", "f5 f6 f7 f8"}};
  return ToyBackend::train(pairs, ToyModelParams{alpha});
}

}  // namespace angleqa::testing
