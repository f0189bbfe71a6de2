#include "angleqa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "angleqa/sampler.hpp"
#include "angleqa/text.hpp"
#include "json.hpp"

namespace angleqa {

MetricKind MetricConfig::metric_for(std::string_view slot, const Instance& instance) const {
  if (auto it = per_slot.find(slot); it != per_slot.end()) return it->second;
  if (slot == kAnswer) {
    return instance.has(kMcOptions) ? MetricKind::mc_accuracy : MetricKind::exact_match;
  }
  return fallback;
}

std::vector<std::string> golds_for(const Instance& instance, std::string_view slot) {
  if (slot == kAnswer && !instance.references().empty()) return instance.references();
  if (const std::string* v = instance.find(slot)) return {*v};
  return {};
}

SlotScore score_slot(const Instance& instance, std::string_view slot,
                     const ParsedOutput& parsed, MetricKind metric) {
  SlotScore s;
  s.metric = metric;
  auto it = parsed.values.find(slot);
  if (it == parsed.values.end()) {
    s.failed = true;
    return s;
  }
  const std::string* options = instance.find(kMcOptions);
  s.value = score_value(metric, it->second, golds_for(instance, slot),
                        options ? std::string_view(*options) : std::string_view{});
  return s;
}

const AngleRow* AngleReport::find(std::string_view angle, std::string_view slot) const {
  for (const auto& r : rows) {
    if (r.angle == angle && r.slot == slot) return &r;
  }
  return nullptr;
}

namespace {

struct WorkItem {
  std::size_t instance;
  std::size_t angle;
  const EncodedPair* pair;
};

struct ItemResult {
  bool done = false;
  ParsedOutput parsed;
};

// Runs fn(i) for i in [0, n) on up to `workers` threads. Stops handing out
// new work after the first exception, which is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto run = [&] {
    while (!stop.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (first_error) std::rethrow_exception(first_error);
}

struct Accumulator {
  double sum = 0.0;
  std::size_t n = 0;
  std::size_t failures = 0;
};

AngleReport aggregate(const SlotRegistry& registry, const Dataset& dataset,
                      const MetricConfig& metrics, const std::vector<WorkItem>& items,
                      const std::vector<ItemResult>& results,
                      const std::vector<std::size_t>& skipped) {
  const auto& angles = dataset.angles();
  const auto& instances = dataset.instances();

  // Instance-id order within each angle keeps float sums identical however
  // the work was scheduled.
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (results[k].done) order.push_back(k);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (items[a].angle != items[b].angle) return items[a].angle < items[b].angle;
    return instances[items[a].instance].id() < instances[items[b].instance].id();
  });

  using Key = std::tuple<std::size_t, std::size_t, int>;  // angle, target pos, metric
  std::map<Key, Accumulator> acc;
  for (auto k : order) {
    const auto& item = items[k];
    const Instance& inst = instances[item.instance];
    const Angle& angle = angles[item.angle];
    for (std::size_t t = 0; t < angle.targets.size(); ++t) {
      MetricKind metric = metrics.metric_for(angle.targets[t], inst);
      SlotScore s = score_slot(inst, angle.targets[t], results[k].parsed, metric);
      auto& a = acc[{item.angle, t, static_cast<int>(metric)}];
      a.sum += s.value;
      ++a.n;
      if (s.failed) ++a.failures;
    }
  }

  AngleReport report;
  for (std::size_t a = 0; a < angles.size(); ++a) {
    const std::string name = format_angle(registry, angles[a]);
    report.angles.push_back(name);
    for (std::size_t t = 0; t < angles[a].targets.size(); ++t) {
      bool any = false;
      for (int m = 0; m <= static_cast<int>(MetricKind::mc_accuracy); ++m) {
        auto it = acc.find({a, t, m});
        if (it == acc.end()) continue;
        any = true;
        const auto& v = it->second;
        report.rows.push_back({name, angles[a].targets[t], static_cast<MetricKind>(m),
                               v.sum / static_cast<double>(v.n), v.n, v.failures, skipped[a]});
      }
      if (!any) {
        const std::string& slot = angles[a].targets[t];
        MetricKind m = metrics.per_slot.count(slot) ? metrics.per_slot.find(slot)->second
                       : slot == kAnswer            ? MetricKind::exact_match
                                                    : metrics.fallback;
        report.rows.push_back({name, slot, m, 0.0, 0, 0, skipped[a]});
      }
    }
  }
  return report;
}

}  // namespace

AngleReport eval_all_angles(const SlotRegistry& registry, const Dataset& dataset,
                            const Backend& backend, const OrderPolicy& policy,
                            const MetricConfig& metrics, const EvalOptions& opts) {
  opts.decode.validate();
  const auto& angles = dataset.angles();
  const auto& instances = dataset.instances();
  const PairStream stream = enumerate_all_angles(registry, dataset, policy);

  std::vector<WorkItem> items;
  std::vector<std::size_t> skipped(angles.size(), 0);
  items.reserve(stream.pairs.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (std::size_t a = 0; a < angles.size(); ++a) {
      if (!angle_applicable(instances[i], angles[a])) {
        ++skipped[a];
        continue;
      }
      items.push_back({i, a, &stream.pairs[items.size()]});
    }
  }

  std::vector<ItemResult> results(items.size());
  std::size_t workers = opts.workers;
  if (workers == 0) {
    workers = std::min<std::size_t>(backend.max_in_flight(),
                                    std::max(1u, std::thread::hardware_concurrency()));
  }
  try {
    parallel_for(items.size(), workers, [&](std::size_t k) {
      const auto& item = items[k];
      auto gen = backend.generate(item.pair->input, opts.decode);
      results[k].parsed = parse_output(registry, gen.output, angles[item.angle].targets);
      results[k].done = true;
    });
  } catch (const Error& e) {
    if (e.code() != Errc::BackendUnavailable) throw;
    throw EvalInterrupted(e, aggregate(registry, dataset, metrics, items, results, skipped));
  }
  return aggregate(registry, dataset, metrics, items, results, skipped);
}

std::string render_angle_report(const AngleReport& report) {
  // Row labels: "<slot> [<metric>]".
  std::vector<std::string> labels;
  for (const auto& r : report.rows) {
    std::string label = r.slot + " [" + std::string(to_string(r.metric)) + "]";
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
  }
  auto cell_for = [&](const std::string& angle, const std::string& label) -> const AngleRow* {
    for (const auto& r : report.rows) {
      if (r.angle == angle && r.slot + " [" + std::string(to_string(r.metric)) + "]" == label) {
        return &r;
      }
    }
    return nullptr;
  };

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"slot [metric]"};
  for (const auto& a : report.angles) header.push_back(a);
  table.push_back(header);
  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
  };
  for (const auto& label : labels) {
    std::vector<std::string> line{label};
    for (const auto& a : report.angles) {
      const AngleRow* r = cell_for(a, label);
      line.push_back(r && r->n ? fmt(r->mean) : "-");
    }
    table.push_back(line);
  }
  auto count_line = [&](const std::string& name, auto getter) {
    std::vector<std::string> line{name};
    for (const auto& a : report.angles) {
      std::size_t value = 0;
      bool any = false;
      for (const auto& r : report.rows) {
        if (r.angle == a) {
          value = std::max(value, getter(r));
          any = true;
        }
      }
      line.push_back(any ? std::to_string(value) : "-");
    }
    table.push_back(line);
  };
  count_line("n", [&](const AngleRow& r) {
    std::size_t total = 0;
    for (const auto& o : report.rows) {
      if (o.angle == r.angle && o.slot == r.slot) total += o.n;
    }
    return total;
  });
  count_line("skipped", [](const AngleRow& r) { return r.skipped; });
  count_line("failures", [&](const AngleRow& r) {
    std::size_t total = 0;
    for (const auto& o : report.rows) {
      if (o.angle == r.angle && o.slot == r.slot) total += o.failures;
    }
    return total;
  });

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  for (std::size_t l = 0; l < table.size(); ++l) {
    for (std::size_t c = 0; c < table[l].size(); ++c) {
      if (c) os << "  ";
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << table[l][c];
      } else {
        os << std::right << std::setw(static_cast<int>(width[c])) << table[l][c];
      }
    }
    os << '\n';
    if (l == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

void write_angle_report(std::ostream& os, const AngleReport& report) {
  for (const auto& r : report.rows) {
    nlohmann::ordered_json rec;
    rec["angle"] = r.angle;
    rec["slot"] = r.slot;
    rec["metric"] = std::string(to_string(r.metric));
    rec["mean"] = r.mean;
    rec["n"] = r.n;
    rec["failures"] = r.failures;
    rec["skipped"] = r.skipped;
    os << rec.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Ranking

std::string forced_answer_text(std::string_view candidate) {
  return format_assignment(kAnswer, candidate);
}

std::string ranking_input(const SlotRegistry& registry, const Instance& instance,
                          bool include_m, const OrderPolicy& policy) {
  std::vector<std::string> sources;
  bool has_context = false;
  for (const auto& e : registry.entries()) {
    if (e.name == kAnswer || !instance.has(e.name)) continue;
    if (e.name == kMcOptions && !include_m) continue;
    if (e.name == kContext) {
      has_context = true;
      continue;
    }
    sources.push_back(e.name);
  }
  if (has_context) sources.emplace_back(kContext);
  Angle angle = Angle::make(registry, std::move(sources), {std::string(kAnswer)});
  return encode_input(registry, instance, angle, policy);
}

std::vector<CandidateScore> rank_candidates(const SlotRegistry& registry,
                                            const Instance& instance,
                                            const std::vector<std::string>& candidates,
                                            const Backend& backend, bool include_m,
                                            const OrderPolicy& policy) {
  if (candidates.empty()) throw Error(Errc::EmptyCandidates, "no candidates to rank");
  std::set<std::string_view> seen;
  for (const auto& c : candidates) {
    if (text::trim(c).empty()) throw Error(Errc::EmptyCandidates, "blank candidate");
    if (!seen.insert(c).second) throw Error(Errc::DuplicateCandidates, "'" + c + "' repeated");
  }
  const std::string input = ranking_input(registry, instance, include_m, policy);
  std::vector<CandidateScore> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto lp = backend.force_score(input, forced_answer_text(c));
    double sum = 0.0;
    for (double x : lp) sum += x;
    out.push_back({c, sum, std::exp(sum)});
  }
  std::stable_sort(out.begin(), out.end(), [](const CandidateScore& a, const CandidateScore& b) {
    return a.probability > b.probability;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Explanation feedback

FeedbackResult explanation_feedback(const SlotRegistry& registry, const Instance& instance,
                                    const Backend& backend, const OrderPolicy& policy,
                                    const DecodeOptions& decode) {
  FeedbackResult result;
  const std::string* question = instance.find(kQuestion);
  if (!question) {
    throw Error(Errc::MissingSourceSlot, "instance '" + instance.id() + "' has no question");
  }
  const std::string* context = instance.find(kContext);

  SlotValues base{{std::string(kQuestion), *question}};
  if (context) base.emplace(std::string(kContext), *context);
  const Instance stage1 = Instance::make(registry, instance.id(), base);

  std::vector<std::string> stage1_sources{std::string(kQuestion)};
  if (context) stage1_sources.emplace_back(kContext);
  const Angle answer_and_explain = Angle::make(
      registry, stage1_sources, {std::string(kAnswer), std::string(kExplanation)});

  result.stage1_input = encode_input(registry, stage1, answer_and_explain, policy);
  auto gen1 = backend.generate(result.stage1_input, decode);
  auto parsed1 = parse_output(registry, gen1.output, answer_and_explain.targets);
  if (auto it = parsed1.values.find(kAnswer); it != parsed1.values.end()) {
    result.direct_answer = it->second;
  }
  auto expl = parsed1.values.find(kExplanation);
  if (expl == parsed1.values.end()) {
    result.missing_explanation = true;
    return result;
  }
  result.explanation = expl->second;

  std::vector<std::string> stage2_sources{std::string(kQuestion), std::string(kExplanation)};
  if (context) stage2_sources.emplace_back(kContext);
  const Angle answer_only = Angle::make(registry, stage2_sources, {std::string(kAnswer)});
  const Instance stage2 = stage1.with_value(registry, std::string(kExplanation), expl->second);
  try {
    result.stage2_input = encode_input(registry, stage2, answer_only, policy);
  } catch (const Error& e) {
    if (e.code() != Errc::MarkerCollision) throw;
    result.marker_collision = true;
    return result;
  }
  auto gen2 = backend.generate(result.stage2_input, decode);
  auto parsed2 = parse_output(registry, gen2.output, answer_only.targets);
  if (auto it = parsed2.values.find(kAnswer); it != parsed2.values.end()) {
    result.fed_back_answer = it->second;
  }
  return result;
}

// ---------------------------------------------------------------------------

std::vector<CoveragePoint> risk_coverage(const std::vector<std::pair<double, int>>& items) {
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].first > items[b].first;
  });
  std::vector<CoveragePoint> out;
  out.reserve(items.size());
  const double n = static_cast<double>(items.size());
  long correct = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    correct += items[order[k]].second ? 1 : 0;
    out.push_back({static_cast<double>(k + 1) / n,
                   static_cast<double>(correct) / static_cast<double>(k + 1)});
  }
  return out;
}

}  // namespace angleqa
