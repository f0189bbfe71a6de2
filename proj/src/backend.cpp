#include "angleqa/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "angleqa/text.hpp"

namespace angleqa {

std::string_view to_string(DecodeMode mode) noexcept {
  switch (mode) {
    case DecodeMode::greedy: return "greedy";
    case DecodeMode::beam: return "beam";
    case DecodeMode::nucleus: return "nucleus";
  }
  return "greedy";
}

DecodeMode parse_decode_mode(std::string_view s) {
  if (s == "greedy") return DecodeMode::greedy;
  if (s == "beam") return DecodeMode::beam;
  if (s == "nucleus") return DecodeMode::nucleus;
  throw Error(Errc::InvalidDecodeOptions, "unknown decode mode '" + std::string(s) + "'");
}

void DecodeOptions::validate() const {
  if (max_tokens < 1) throw Error(Errc::InvalidDecodeOptions, "max_tokens must be >= 1");
  switch (mode) {
    case DecodeMode::greedy:
      break;
    case DecodeMode::beam:
      if (beam_size < 1) throw Error(Errc::InvalidDecodeOptions, "beam_size must be >= 1");
      break;
    case DecodeMode::nucleus:
      if (!(top_p > 0.0 && top_p <= 1.0)) {
        throw Error(Errc::InvalidDecodeOptions, "top_p must be in (0, 1]");
      }
      if (!(temperature > 0.0)) {
        throw Error(Errc::InvalidDecodeOptions, "temperature must be > 0");
      }
      break;
  }
}

// ---------------------------------------------------------------------------
// ToyBackend

namespace {

std::vector<std::string> token_set(std::string_view s) {
  auto toks = text::split_ws(s);
  std::sort(toks.begin(), toks.end());
  toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
  return toks;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

ToyBackend ToyBackend::train(std::span<const std::pair<std::string, std::string>> pairs,
                             ToyModelParams params) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw Error(Errc::InvalidConfig, "toy alpha must lie in (0, 1)");
  }
  if (pairs.empty()) throw Error(Errc::EmptyModel, "no pairs to memorize");

  std::map<std::string, std::string> memo;
  for (const auto& [in, out] : pairs) {
    auto [it, inserted] = memo.emplace(in, out);
    if (!inserted && it->second != out) {
      throw Error(Errc::ConflictingPairs, "input '" + in + "' maps to both '" +
                                              it->second + "' and '" + out + "'");
    }
  }

  ToyBackend b;
  b.params_ = params;
  std::set<std::string> vocab;
  for (auto& [in, out] : memo) {
    b.exact_.emplace(in, b.inputs_.size());
    b.input_token_sets_.push_back(token_set(in));
    for (auto& t : text::split_ws(out)) vocab.insert(std::move(t));
    b.inputs_.push_back(in);
    b.outputs_.push_back(out);
  }
  vocab.insert(std::string(kEndMarker));
  b.vocabulary_.assign(vocab.begin(), vocab.end());
  return b;
}

ToyBackend ToyBackend::train(std::span<const EncodedPair> pairs, ToyModelParams params) {
  std::vector<std::pair<std::string, std::string>> raw;
  raw.reserve(pairs.size());
  for (const auto& p : pairs) raw.emplace_back(p.input, p.output);
  return train(raw, params);
}

const std::string& ToyBackend::lookup(std::string_view input) const {
  if (inputs_.empty()) throw Error(Errc::EmptyModel, "toy backend has no memorized pairs");
  if (auto it = exact_.find(std::string(input)); it != exact_.end()) {
    return outputs_[it->second];
  }
  const auto query = token_set(input);
  std::size_t best = 0;
  double best_sim = -1.0;
  // inputs_ is sorted, so strict '>' keeps the lexicographically smallest.
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    double sim = jaccard(query, input_token_sets_[i]);
    if (sim > best_sim) {
      best_sim = sim;
      best = i;
    }
  }
  return outputs_[best];
}

GenerationResult ToyBackend::generate(std::string_view input, const DecodeOptions& opts) const {
  opts.validate();
  const std::string& out = lookup(input);
  return GenerationResult{out, force_score(input, out)};
}

std::vector<double> ToyBackend::force_score(std::string_view input,
                                            std::string_view forced_output) const {
  if (text::trim(forced_output).empty()) {
    throw Error(Errc::EmptyCandidates, "forced output is blank");
  }
  auto memorized = text::split_ws(lookup(input));
  memorized.emplace_back(kEndMarker);
  auto forced = text::split_ws(forced_output);
  forced.emplace_back(kEndMarker);

  const double v = static_cast<double>(vocabulary_.size());
  const double alpha = params_.alpha;
  const double on_path = std::log((1.0 - alpha) + alpha / v);
  const double off_path = std::log(alpha / v);
  const double uniform = std::log(1.0 / v);

  std::vector<double> lp;
  lp.reserve(forced.size());
  bool diverged = false;
  for (std::size_t i = 0; i < forced.size(); ++i) {
    if (diverged) {
      lp.push_back(uniform);
    } else if (i < memorized.size() && forced[i] == memorized[i]) {
      lp.push_back(on_path);
    } else {
      lp.push_back(off_path);
      diverged = true;
    }
  }
  return lp;
}

// ---------------------------------------------------------------------------

std::string truncate_tail(std::string_view input, std::size_t max_tokens) {
  auto toks = text::split_ws(input);
  if (max_tokens == 0 || toks.size() <= max_tokens) return std::string(input);
  toks.resize(max_tokens);
  return text::join(toks, " ");
}

std::unique_ptr<Backend> make_backend(std::string_view spec, const SlotRegistry& registry,
                                      ToyModelParams toy, RemoteOptions remote) {
  auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(Errc::InvalidConfig,
                "backend must be toy:<pairs-file> or remote:<base-url>, got '" +
                    std::string(spec) + "'");
  }
  auto kind = spec.substr(0, colon);
  std::string arg(spec.substr(colon + 1));
  if (kind == "toy") {
    std::ifstream in(arg);
    if (!in) throw Error(Errc::IoError, "cannot open pairs file '" + arg + "'");
    auto pairs = read_pairs(in, registry);
    return std::make_unique<ToyBackend>(ToyBackend::train(pairs, toy));
  }
  if (kind == "remote") {
    if (const char* env = std::getenv("ANGLEQA_REMOTE_URL"); env && *env) arg = env;
    return std::make_unique<RemoteBackend>(arg, remote);
  }
  throw Error(Errc::InvalidConfig, "unknown backend kind '" + std::string(kind) + "'");
}

}  // namespace angleqa
