#include "angleqa/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include "angleqa/errors.hpp"
#include "angleqa/metrics.hpp"
#include "angleqa/random.hpp"
#include "angleqa/text.hpp"
#include "json.hpp"

namespace angleqa {

namespace {

using json = nlohmann::json;

std::string line_tag(std::size_t lineno) { return "line " + std::to_string(lineno) + ": "; }

// Calls `fn(record, lineno)` for every non-blank line. JSON and schema errors
// surface as ParseError with the line number; loader-specific codes keep
// their code.
void for_each_record(std::istream& in,
                     const std::function<void(const json&, std::size_t)>& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, line_tag(lineno) + e.what());
    }
    try {
      if (!rec.is_object()) throw Error(Errc::ParseError, "record is not an object");
      fn(rec, lineno);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, line_tag(lineno) + e.what());
    } catch (const Error& e) {
      Errc code = e.code() == Errc::BadAnswerKey || e.code() == Errc::NoGoldAnswers
                      ? e.code()
                      : Errc::ParseError;
      throw Error(code, line_tag(lineno) + e.detail());
    }
  }
}

std::string required_string(const json& rec, const char* field) {
  if (!rec.contains(field)) throw Error(Errc::ParseError, std::string("missing \"") + field + "\"");
  const auto& v = rec.at(field);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(Errc::ParseError, std::string("\"") + field + "\" must be a string");
}

std::optional<std::string> optional_string(const json& rec, const char* field) {
  if (!rec.contains(field) || rec.at(field).is_null()) return std::nullopt;
  auto s = rec.at(field).get<std::string>();
  if (text::trim(s).empty()) return std::nullopt;
  return s;
}

void add_optional_slots(const json& rec, SlotValues& values) {
  for (auto slot : {kContext, kExplanation}) {
    if (auto v = optional_string(rec, std::string(slot).c_str())) {
      values.emplace(std::string(slot), std::move(*v));
    }
  }
}

class IdSet {
 public:
  void add(const std::string& id) {
    if (!ids_.insert(id).second) throw Error(Errc::ParseError, "duplicate id '" + id + "'");
  }

 private:
  std::set<std::string> ids_;
};

std::ifstream open_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  return in;
}

Dataset finish(std::string name, std::vector<Instance> instances, Diagnostics* diag) {
  if (instances.empty() && diag) {
    diag->warnings.push_back("dataset '" + name + "' is empty");
  }
  return Dataset::make(std::move(name), std::move(instances));
}

}  // namespace

Dataset read_mc_dataset(std::istream& in, std::string name, const SlotRegistry& registry,
                        Diagnostics* diag) {
  std::vector<Instance> instances;
  IdSet ids;
  for_each_record(in, [&](const json& rec, std::size_t) {
    McRecord r;
    r.id = required_string(rec, "id");
    ids.add(r.id);
    r.question = required_string(rec, "question");
    if (!rec.contains("choices") || !rec["choices"].is_array()) {
      throw Error(Errc::ParseError, "\"choices\" must be an array");
    }
    char expected = 'A';
    for (const auto& c : rec["choices"]) {
      auto label = required_string(c, "label");
      if (label.size() != 1 || label[0] != expected) {
        throw Error(Errc::ParseError, "choice labels must run A, B, C, ... (got '" + label + "')");
      }
      r.choices.push_back({label[0], required_string(c, "text")});
      ++expected;
    }
    auto key = required_string(rec, "answerKey");
    auto hit = std::find_if(r.choices.begin(), r.choices.end(),
                            [&](const McChoice& c) { return key.size() == 1 && c.label == key[0]; });
    if (hit == r.choices.end()) {
      throw Error(Errc::BadAnswerKey, "answerKey '" + key + "' is not a choice label");
    }
    r.answer_key = hit->label;
    r.category = optional_string(rec, "category");

    std::vector<std::string> texts;
    for (const auto& c : r.choices) texts.push_back(c.text);
    SlotValues values{{std::string(kQuestion), r.question},
                      {std::string(kMcOptions), render_mc_options(texts)},
                      {std::string(kAnswer), hit->text}};
    add_optional_slots(rec, values);
    instances.push_back(Instance::make(registry, r.id, std::move(values), r.category, name));
  });
  return finish(std::move(name), std::move(instances), diag);
}

Dataset read_da_dataset(std::istream& in, std::string name, const SlotRegistry& registry,
                        Diagnostics* diag) {
  std::vector<Instance> instances;
  IdSet ids;
  for_each_record(in, [&](const json& rec, std::size_t) {
    auto id = required_string(rec, "id");
    ids.add(id);
    auto question = required_string(rec, "question");
    if (!rec.contains("answers") || !rec["answers"].is_array()) {
      throw Error(Errc::ParseError, "\"answers\" must be an array");
    }
    std::vector<std::string> golds;
    for (const auto& a : rec["answers"]) {
      auto s = a.get<std::string>();
      if (!text::trim(s).empty()) golds.emplace_back(text::trim(s));
    }
    if (golds.empty()) throw Error(Errc::NoGoldAnswers, "record '" + id + "' has no answers");
    SlotValues values{{std::string(kQuestion), question}, {std::string(kAnswer), golds.front()}};
    add_optional_slots(rec, values);
    instances.push_back(Instance::make(registry, id, std::move(values),
                                       optional_string(rec, "category"), name,
                                       std::move(golds)));
  });
  return finish(std::move(name), std::move(instances), diag);
}

Dataset read_challenge_suite(std::istream& in, std::string name, const SlotRegistry& registry,
                             Diagnostics* diag) {
  std::vector<Instance> instances;
  IdSet ids;
  for_each_record(in, [&](const json& rec, std::size_t) {
    auto id = required_string(rec, "id");
    ids.add(id);
    SlotValues values{{std::string(kQuestion), required_string(rec, "question")}};
    instances.push_back(Instance::make(registry, id, std::move(values),
                                       optional_string(rec, "category"), name));
  });
  return finish(std::move(name), std::move(instances), diag);
}

Dataset load_mc_dataset(const std::filesystem::path& path, const SlotRegistry& registry,
                        Diagnostics* diag) {
  auto in = open_file(path);
  return read_mc_dataset(in, path.stem().string(), registry, diag);
}

Dataset load_da_dataset(const std::filesystem::path& path, const SlotRegistry& registry,
                        Diagnostics* diag) {
  auto in = open_file(path);
  return read_da_dataset(in, path.stem().string(), registry, diag);
}

Dataset load_challenge_suite(const std::filesystem::path& path, const SlotRegistry& registry,
                             Diagnostics* diag) {
  auto in = open_file(path);
  return read_challenge_suite(in, path.stem().string(), registry, diag);
}

Dataset load_dataset(const std::filesystem::path& path, const SlotRegistry& registry,
                     Diagnostics* diag) {
  auto in = open_file(path);
  std::string line;
  while (std::getline(in, line) && text::trim(line).empty()) {
  }
  in.close();
  if (text::trim(line).empty()) return load_challenge_suite(path, registry, diag);
  json first;
  try {
    first = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("first record: ") + e.what());
  }
  if (first.contains("choices")) return load_mc_dataset(path, registry, diag);
  if (first.contains("answers")) return load_da_dataset(path, registry, diag);
  return load_challenge_suite(path, registry, diag);
}

const std::vector<std::pair<std::string, int>>& challenge_categories() {
  static const std::vector<std::pair<std::string, int>> kCategories = {
      {"commonsense", 38},        {"comparison", 2},       {"entity substitution", 4},
      {"entity tracking", 13},    {"estimation", 4},       {"example generation", 2},
      {"explanation", 14},        {"false presupposition", 9},
      {"general knowledge", 70},  {"generation", 1},       {"history", 2},
      {"human behavior", 5},      {"hypothetical", 29},    {"math", 2},
      {"meta-reasoning", 6},      {"riddle", 2},           {"science", 41},
      {"spatial", 11},            {"steps", 15},           {"story understanding", 25},
      {"temporal", 2},            {"Winograd", 3},
  };
  return kCategories;
}

// ---------------------------------------------------------------------------
// Retrieval

SentenceCorpus load_corpus(const std::filesystem::path& path) {
  auto in = open_file(path);
  SentenceCorpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (!t.empty()) corpus.sentences.emplace_back(t);
  }
  return corpus;
}

namespace {

std::vector<std::string> unique_tokens(std::string_view s) {
  auto toks = normalized_tokens(s);
  std::sort(toks.begin(), toks.end());
  toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
  return toks;
}

}  // namespace

LexicalScorer::LexicalScorer(const SentenceCorpus& corpus) {
  sentence_tokens_.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    auto toks = unique_tokens(s);
    for (const auto& t : toks) ++doc_freq_[t];
    sentence_tokens_.push_back(std::move(toks));
  }
}

double LexicalScorer::idf(const std::string& token) const {
  auto it = doc_freq_.find(token);
  const double df = it == doc_freq_.end() ? 0.0 : static_cast<double>(it->second);
  const double n = static_cast<double>(sentence_tokens_.size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double LexicalScorer::score(const std::vector<std::string>& query_tokens,
                            std::size_t sentence) const {
  const auto& toks = sentence_tokens_.at(sentence);
  double s = 0.0;
  for (const auto& q : query_tokens) {
    if (std::binary_search(toks.begin(), toks.end(), q)) s += idf(q);
  }
  return s;
}

std::vector<std::size_t> retrieve_indices(std::string_view question,
                                          const std::optional<std::string>& mcoptions,
                                          const SentenceCorpus& corpus, std::size_t k) {
  if (corpus.sentences.empty()) throw Error(Errc::EmptyCorpus, "no sentences to retrieve from");
  if (k == 0) throw Error(Errc::KTooSmall, "k must be >= 1");

  // Ranking uses one query over the question and every option; each option's
  // own query only decides which sentence it forces in.
  std::vector<std::vector<std::string>> queries;
  std::string combined(question);
  if (mcoptions && !text::trim(*mcoptions).empty()) {
    for (const auto& o : parse_mc_options(*mcoptions)) {
      queries.push_back(unique_tokens(std::string(question) + " " + o.text));
      combined += " " + o.text;
    }
    if (k < queries.size()) {
      throw Error(Errc::KTooSmall, "k = " + std::to_string(k) + " is below the " +
                                       std::to_string(queries.size()) + " options");
    }
  } else {
    queries.push_back(unique_tokens(question));
  }

  const LexicalScorer scorer(corpus);
  const std::size_t n = corpus.sentences.size();
  const auto combined_query = unique_tokens(combined);
  std::vector<double> best(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) best[i] = scorer.score(combined_query, i);
  std::vector<std::size_t> forced;
  for (const auto& q : queries) {
    std::size_t top = 0;
    double top_score = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = scorer.score(q, i);
      if (s > top_score) {
        top_score = s;
        top = i;
      }
    }
    forced.push_back(top);
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto by_score = [&](std::size_t a, std::size_t b) {
    if (best[a] != best[b]) return best[a] > best[b];
    return a < b;
  };
  std::stable_sort(order.begin(), order.end(), by_score);

  std::vector<bool> chosen(n, false);
  std::size_t count = 0;
  if (queries.size() > 1) {
    for (auto i : forced) {
      if (!chosen[i]) {
        chosen[i] = true;
        ++count;
      }
    }
  }
  for (auto i : order) {
    if (count >= k) break;
    if (!chosen[i]) {
      chosen[i] = true;
      ++count;
    }
  }
  std::vector<std::size_t> out;
  for (auto i : order) {
    if (chosen[i]) out.push_back(i);
  }
  return out;
}

std::string retrieve_context(std::string_view question,
                             const std::optional<std::string>& mcoptions,
                             const SentenceCorpus& corpus, std::size_t k) {
  std::vector<std::string> parts;
  for (auto i : retrieve_indices(question, mcoptions, corpus, k)) {
    parts.push_back(corpus.sentences[i]);
  }
  return text::join(parts, " ");
}

// ---------------------------------------------------------------------------
// Explanations

std::string build_explanation(const std::vector<std::string>& central_sentences,
                              std::uint64_t seed) {
  std::vector<std::string> sentences;
  for (const auto& s : central_sentences) {
    auto t = text::trim(s);
    if (!t.empty()) sentences.emplace_back(t);
  }
  if (sentences.empty()) throw Error(Errc::EmptyExplanation, "no CENTRAL sentences");
  Rng rng(mix_seed({seed}));
  // A full shuffle followed by truncation is a uniform ordered sample.
  rng.shuffle(std::span<std::string>(sentences));
  if (sentences.size() > kMaxExplanationSentences) sentences.resize(kMaxExplanationSentences);
  return text::join(sentences, " ");
}

std::map<std::string, std::vector<std::string>> load_central_sentences(
    const std::filesystem::path& path) {
  auto in = open_file(path);
  std::map<std::string, std::vector<std::string>> out;
  for_each_record(in, [&](const json& rec, std::size_t) {
    auto id = required_string(rec, "id");
    auto sentences = rec.at("central").get<std::vector<std::string>>();
    if (!out.emplace(id, std::move(sentences)).second) {
      throw Error(Errc::ParseError, "duplicate id '" + id + "'");
    }
  });
  return out;
}

Dataset attach_explanations(const SlotRegistry& registry, const Dataset& dataset,
                            const std::map<std::string, std::vector<std::string>>& central,
                            std::uint64_t seed) {
  std::vector<Instance> out;
  out.reserve(dataset.instances().size());
  for (const auto& inst : dataset.instances()) {
    auto it = central.find(inst.id());
    if (it == central.end() || it->second.empty()) {
      out.push_back(inst);
      continue;
    }
    auto expl = build_explanation(it->second, mix_seed({seed, hash_string(inst.id())}));
    out.push_back(inst.with_value(registry, std::string(kExplanation), std::move(expl)));
  }
  return dataset.with_instances(std::move(out));
}

Dataset attach_context(const SlotRegistry& registry, const Dataset& dataset,
                       const SentenceCorpus& corpus, std::size_t k) {
  std::vector<Instance> out;
  out.reserve(dataset.instances().size());
  for (const auto& inst : dataset.instances()) {
    const std::string* q = inst.find(kQuestion);
    if (!q) {
      out.push_back(inst);
      continue;
    }
    std::optional<std::string> options;
    if (const std::string* m = inst.find(kMcOptions)) options = *m;
    auto ctx = retrieve_context(*q, options, corpus, k);
    out.push_back(inst.with_value(registry, std::string(kContext), std::move(ctx)));
  }
  return dataset.with_instances(std::move(out));
}

}  // namespace angleqa
