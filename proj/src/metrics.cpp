#include "angleqa/metrics.hpp"

#include <algorithm>
#include <map>

#include "angleqa/errors.hpp"
#include "angleqa/text.hpp"

namespace angleqa {

namespace {

bool is_punct(unsigned char c) noexcept {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

void require_golds(std::span<const std::string> golds) {
  if (golds.empty()) throw Error(Errc::EmptyGolds, "at least one gold answer is required");
}

double f1_from(double overlap, std::size_t pred_len, std::size_t gold_len) {
  if (overlap <= 0.0) return 0.0;
  double p = overlap / static_cast<double>(pred_len);
  double r = overlap / static_cast<double>(gold_len);
  return 2.0 * p * r / (p + r);
}

double token_f1_single(const std::vector<std::string>& pred,
                       const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string_view, long> counts;
  for (const auto& t : gold) ++counts[t];
  long common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return f1_from(static_cast<double>(common), pred.size(), gold.size());
}

}  // namespace

std::string_view to_string(MetricKind kind) noexcept {
  switch (kind) {
    case MetricKind::exact_match: return "exact_match";
    case MetricKind::token_f1: return "token_f1";
    case MetricKind::rouge_l: return "rouge_l";
    case MetricKind::mc_accuracy: return "mc_accuracy";
  }
  return "unknown";
}

MetricKind parse_metric_kind(std::string_view s) {
  if (s == "exact_match") return MetricKind::exact_match;
  if (s == "token_f1") return MetricKind::token_f1;
  if (s == "rouge_l") return MetricKind::rouge_l;
  if (s == "mc_accuracy") return MetricKind::mc_accuracy;
  throw Error(Errc::InvalidConfig, "unknown metric '" + std::string(s) + "'");
}

namespace {

std::string strip_punct_lower(std::string_view input) {
  std::string no_punct;
  no_punct.reserve(input.size());
  for (char c : text::to_lower_ascii(input)) {
    if (!is_punct(static_cast<unsigned char>(c))) no_punct += c;
  }
  return no_punct;
}

}  // namespace

std::string normalize_answer(std::string_view input) {
  std::vector<std::string> kept;
  for (auto& tok : text::split_ws(strip_punct_lower(input))) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    kept.push_back(std::move(tok));
  }
  return text::join(kept, " ");
}

std::vector<std::string> normalized_tokens(std::string_view text) {
  return text::split_ws(normalize_answer(text));
}

std::vector<std::string> rouge_tokens(std::string_view text) {
  return text::split_ws(strip_punct_lower(text));
}

double exact_match(std::string_view prediction, std::span<const std::string> golds) {
  require_golds(golds);
  const auto pred = normalize_answer(prediction);
  for (const auto& g : golds) {
    if (normalize_answer(g) == pred) return 1.0;
  }
  return 0.0;
}

double token_f1(std::string_view prediction, std::span<const std::string> golds) {
  require_golds(golds);
  const auto pred = normalized_tokens(prediction);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1_single(pred, normalized_tokens(g)));
  return best;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::string_view prediction, std::span<const std::string> golds) {
  require_golds(golds);
  const auto pred = rouge_tokens(prediction);
  double best = 0.0;
  for (const auto& g : golds) {
    const auto gold = rouge_tokens(g);
    auto lcs = lcs_length(pred, gold);
    best = std::max(best, f1_from(static_cast<double>(lcs), pred.size(), gold.size()));
  }
  return best;
}

std::vector<McOption> parse_mc_options(std::string_view mcoptions) {
  std::vector<std::pair<char, std::size_t>> found;  // label, offset of "(X) "
  std::size_t from = 0;
  for (char label = 'A'; label <= 'Z'; ++label) {
    const std::string tag = std::string("(") + label + ") ";
    auto pos = mcoptions.find(tag, from);
    if (pos == std::string_view::npos) {
      // The final option may end right after its label.
      const std::string bare = std::string("(") + label + ")";
      if (mcoptions.size() >= bare.size() &&
          mcoptions.substr(mcoptions.size() - bare.size()) == bare &&
          mcoptions.size() - bare.size() >= from) {
        found.emplace_back(label, mcoptions.size() - bare.size());
      }
      break;
    }
    found.emplace_back(label, pos);
    from = pos + tag.size();
  }
  if (found.size() < 2) {
    throw Error(Errc::MalformedOptions,
                "expected at least two '(X) ' labels in '" + std::string(mcoptions) + "'");
  }
  std::vector<McOption> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    std::size_t start = std::min(found[i].second + 4, mcoptions.size());
    std::size_t end = i + 1 < found.size() ? found[i + 1].second : mcoptions.size();
    out.push_back({found[i].first, std::string(text::trim(mcoptions.substr(start, end - start)))});
  }
  return out;
}

std::string render_mc_options(std::span<const std::string> choices) {
  std::string out;
  char label = 'A';
  for (const auto& c : choices) {
    if (!out.empty()) out += ' ';
    out += '(';
    out += label++;
    out += ") ";
    out += c;
  }
  return out;
}

char mc_select(std::string_view prediction, std::string_view mcoptions) {
  const auto options = parse_mc_options(mcoptions);
  const auto pred = normalize_answer(prediction);
  for (const auto& o : options) {
    if (normalize_answer(o.text) == pred) return o.label;
  }
  const auto pred_tokens = text::split_ws(pred);
  char best = options.front().label;
  double best_score = -1.0;
  for (const auto& o : options) {
    double s = token_f1_single(pred_tokens, normalized_tokens(o.text));
    if (s > best_score) {
      best_score = s;
      best = o.label;
    }
  }
  return best;
}

double mc_accuracy(std::string_view prediction, std::span<const std::string> golds,
                   std::string_view mcoptions) {
  require_golds(golds);
  if (text::trim(mcoptions).empty()) {
    throw Error(Errc::MetricUnavailable, "mc_accuracy needs an mcoptions value");
  }
  return mc_select(prediction, mcoptions) == mc_select(golds.front(), mcoptions) ? 1.0 : 0.0;
}

double score_value(MetricKind kind, std::string_view prediction,
                   std::span<const std::string> golds, std::string_view mcoptions) {
  switch (kind) {
    case MetricKind::exact_match: return exact_match(prediction, golds);
    case MetricKind::token_f1: return token_f1(prediction, golds);
    case MetricKind::rouge_l: return rouge_l(prediction, golds);
    case MetricKind::mc_accuracy: return mc_accuracy(prediction, golds, mcoptions);
  }
  return 0.0;
}

}  // namespace angleqa
