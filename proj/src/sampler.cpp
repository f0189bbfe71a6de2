#include "angleqa/sampler.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"

#include "angleqa/random.hpp"
#include "angleqa/text.hpp"

namespace angleqa {

using ojson = nlohmann::ordered_json;

void SamplerConfig::validate() const {
  if (epochs < 1) throw Error(Errc::InvalidConfig, "epochs must be >= 1");
  if (max_resample_attempts < 1) {
    throw Error(Errc::InvalidConfig, "max_resample_attempts must be >= 1");
  }
}

bool angle_applicable(const Instance& instance, const Angle& angle) noexcept {
  for (const auto& s : angle.sources) {
    if (!instance.has(s)) return false;
  }
  for (const auto& t : angle.targets) {
    if (!instance.has(t)) return false;
  }
  return true;
}

OrderPolicy item_policy(const OrderPolicy& policy, std::uint64_t a,
                        std::uint64_t b, std::uint64_t c) {
  if (policy.mode == OrderMode::as_given) return policy;
  return OrderPolicy::scrambled(mix_seed({policy.seed, a, b, c}));
}

namespace {

// Weighted draw over `candidates` (indices into angles).
std::size_t draw(Rng& rng, const std::vector<Angle>& angles,
                 const std::vector<std::size_t>& candidates) {
  double total = 0.0;
  for (auto i : candidates) total += angles[i].weight;
  double u = rng.uniform01() * total;
  double acc = 0.0;
  for (auto i : candidates) {
    acc += angles[i].weight;
    if (u < acc) return i;
  }
  return candidates.back();
}

EncodedPair make_pair(const SlotRegistry& registry, const Instance& inst,
                      const Angle& angle, const OrderPolicy& policy) {
  return EncodedPair{encode_input(registry, inst, angle, policy),
                     encode_output(registry, inst, angle, policy), inst.id(),
                     angle};
}

}  // namespace

std::optional<EncodedPair> sample_pair(const SlotRegistry& registry,
                                       const Dataset& dataset,
                                       const SamplerConfig& config,
                                       std::uint64_t epoch, std::size_t index) {
  const auto& angles = dataset.angles();
  const Instance& inst = dataset.instances().at(index);
  const std::uint64_t item_seed = mix_seed({config.seed, epoch, index});
  Rng rng(item_seed);

  std::vector<std::size_t> all(angles.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  std::size_t chosen = draw(rng, angles, all);
  if (!angle_applicable(inst, angles[chosen])) {
    // Resample among applicable angles only; equivalent in distribution to
    // rejection sampling, and always terminates.
    std::vector<std::size_t> applicable;
    for (auto i : all) {
      if (angle_applicable(inst, angles[i])) applicable.push_back(i);
    }
    if (applicable.empty()) return std::nullopt;
    chosen = draw(rng, angles, applicable);
  }
  OrderPolicy policy = item_policy(config.policy, item_seed, 0);
  return make_pair(registry, inst, angles[chosen], policy);
}

PairStream sample_training_pairs(const SlotRegistry& registry,
                                 const Dataset& dataset,
                                 const SamplerConfig& config) {
  config.validate();
  if (dataset.angles().empty()) {
    throw Error(Errc::InvalidConfig, "dataset '" + dataset.name() + "' has no angles");
  }
  PairStream stream;
  const auto& instances = dataset.instances();
  std::vector<bool> usable(instances.size(), false);
  std::size_t usable_count = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& a : dataset.angles()) {
      if (angle_applicable(instances[i], a)) {
        usable[i] = true;
        ++usable_count;
        break;
      }
    }
    if (!usable[i]) {
      ++stream.skipped;
      stream.warnings.push_back("NoApplicableAngle: instance '" + instances[i].id() +
                                "' matches no configured angle; skipped");
    }
  }
  if (usable_count == 0) {
    throw Error(Errc::NoApplicableAngle,
                "no instance of '" + dataset.name() + "' matches any angle");
  }
  stream.pairs.reserve(usable_count * config.epochs);
  for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (!usable[i]) continue;
      if (auto pair = sample_pair(registry, dataset, config, epoch, i)) {
        stream.pairs.push_back(std::move(*pair));
      }
    }
  }
  return stream;
}

PairStream enumerate_all_angles(const SlotRegistry& registry,
                                const Dataset& dataset,
                                const OrderPolicy& policy) {
  PairStream stream;
  const auto& instances = dataset.instances();
  const auto& angles = dataset.angles();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (std::size_t a = 0; a < angles.size(); ++a) {
      if (!angle_applicable(instances[i], angles[a])) {
        ++stream.skipped;
        continue;
      }
      stream.pairs.push_back(make_pair(registry, instances[i], angles[a],
                                       item_policy(policy, i, a, 1)));
    }
  }
  return stream;
}

std::vector<EncodedPair> interleave_equally(const std::vector<PairStream>& streams) {
  std::vector<EncodedPair> out;
  if (streams.empty()) return out;
  std::size_t shortest = streams.front().pairs.size();
  for (const auto& s : streams) shortest = std::min(shortest, s.pairs.size());
  out.reserve(shortest * streams.size());
  for (std::size_t k = 0; k < shortest; ++k) {
    for (const auto& s : streams) out.push_back(s.pairs[k]);
  }
  return out;
}

void write_pairs(std::ostream& os, const SlotRegistry& registry,
                 const std::vector<EncodedPair>& pairs) {
  for (const auto& p : pairs) {
    ojson rec;
    rec["input"] = p.input;
    rec["output"] = p.output;
    rec["id"] = p.instance_id;
    rec["angle"] = format_angle(registry, p.angle);
    os << rec.dump() << '\n';
  }
}

std::vector<EncodedPair> read_pairs(std::istream& is, const SlotRegistry& registry) {
  std::vector<EncodedPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto rec = nlohmann::json::parse(line);
      EncodedPair p;
      p.input = rec.at("input").get<std::string>();
      p.output = rec.at("output").get<std::string>();
      p.instance_id = rec.value("id", std::string{});
      if (rec.contains("angle")) {
        p.angle = parse_angle_spec(registry, rec["angle"].get<std::string>());
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseError, "pairs line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::ParseError, "pairs line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace angleqa
