#include "angleqa/slots.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "angleqa/errors.hpp"
#include "angleqa/text.hpp"

namespace angleqa {

namespace text {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split_list(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(delim, start);
    if (end == std::string_view::npos) end = s.size();
    auto piece = trim(s.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace text

// ---------------------------------------------------------------------------
// SlotRegistry

bool is_valid_slot_name(std::string_view name) noexcept {
  if (name.empty()) return false;
  for (char c : name) {
    if (text::is_space(c) || c == '$' || c == ';') return false;
    if (c >= 'A' && c <= 'Z') return false;
  }
  return true;
}

SlotRegistry SlotRegistry::defaults() {
  SlotRegistry r;
  r.entries_ = {{std::string(kQuestion), 'Q'},
                {std::string(kAnswer), 'A'},
                {std::string(kMcOptions), 'M'},
                {std::string(kContext), 'C'},
                {std::string(kExplanation), 'E'}};
  return r;
}

SlotRegistry SlotRegistry::with_slot(std::string name, char abbrev) const {
  if (!is_valid_slot_name(name)) {
    throw Error(Errc::InvalidName, "slot name '" + name + "'");
  }
  if (abbrev < 'A' || abbrev > 'Z') {
    throw Error(Errc::InvalidName,
                std::string("abbreviation '") + abbrev +
                    "' is not a single uppercase letter");
  }
  for (const auto& e : entries_) {
    if (e.name == name) throw Error(Errc::DuplicateSlot, "name '" + name + "'");
    if (e.abbrev == abbrev) {
      throw Error(Errc::DuplicateSlot, std::string("abbreviation '") + abbrev + "'");
    }
  }
  SlotRegistry r = *this;
  r.entries_.push_back({std::move(name), abbrev});
  return r;
}

bool SlotRegistry::contains(std::string_view name) const noexcept {
  return abbrev_of(name).has_value();
}

std::optional<char> SlotRegistry::abbrev_of(std::string_view name) const noexcept {
  for (const auto& e : entries_) {
    if (e.name == name) return e.abbrev;
  }
  return std::nullopt;
}

std::optional<std::string> SlotRegistry::name_of(char abbrev) const {
  for (const auto& e : entries_) {
    if (e.abbrev == abbrev) return e.name;
  }
  return std::nullopt;
}

std::string SlotRegistry::resolve(std::string_view name_or_abbrev) const {
  auto key = text::trim(name_or_abbrev);
  if (contains(key)) return std::string(key);
  if (key.size() == 1) {
    char c = key[0];
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (auto n = name_of(c)) return *n;
  }
  auto lowered = text::to_lower_ascii(key);
  if (contains(lowered)) return lowered;
  throw Error(Errc::UnknownSlot, "'" + std::string(key) + "'");
}

void SlotRegistry::require(std::string_view name) const {
  if (!contains(name)) throw Error(Errc::UnknownSlot, "'" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Instance

Instance Instance::make(const SlotRegistry& registry, std::string id,
                        SlotValues values, std::optional<std::string> category,
                        std::optional<std::string> source,
                        std::vector<std::string> references) {
  Instance inst;
  inst.id_ = std::move(id);
  for (auto& [slot, value] : values) {
    registry.require(slot);
    auto trimmed = text::trim(value);
    if (trimmed.empty()) {
      throw Error(Errc::EmptyValue,
                  "instance '" + inst.id_ + "' slot '" + slot + "' is blank");
    }
    inst.values_.emplace(slot, std::string(trimmed));
  }
  inst.category_ = std::move(category);
  inst.source_ = std::move(source);
  inst.references_ = std::move(references);
  return inst;
}

bool Instance::has(std::string_view slot) const noexcept {
  return values_.find(slot) != values_.end();
}

const std::string* Instance::find(std::string_view slot) const noexcept {
  auto it = values_.find(slot);
  return it == values_.end() ? nullptr : &it->second;
}

Instance Instance::with_value(const SlotRegistry& registry, std::string slot,
                              std::string value) const {
  SlotValues values = values_;
  values.insert_or_assign(std::move(slot), std::move(value));
  return make(registry, id_, std::move(values), category_, source_, references_);
}

Instance Instance::without(std::string_view slot) const {
  Instance copy = *this;
  if (auto it = copy.values_.find(slot); it != copy.values_.end()) {
    copy.values_.erase(it);
  }
  return copy;
}

// ---------------------------------------------------------------------------
// Angle

Angle Angle::make(const SlotRegistry& registry, std::vector<std::string> sources,
                  std::vector<std::string> targets, double weight) {
  if (targets.empty()) throw Error(Errc::EmptyTargets, "angle has no target slots");
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw Error(Errc::InvalidAngle, "weight must be a positive finite number");
  }
  std::set<std::string, std::less<>> seen_sources;
  for (const auto& s : sources) {
    registry.require(s);
    if (!seen_sources.insert(s).second) {
      throw Error(Errc::InvalidAngle, "source slot '" + s + "' repeated");
    }
  }
  std::set<std::string, std::less<>> seen_targets;
  for (const auto& t : targets) {
    registry.require(t);
    if (seen_sources.count(t)) {
      throw Error(Errc::OverlappingSlots, "slot '" + t + "' is both source and target");
    }
    if (!seen_targets.insert(t).second) {
      throw Error(Errc::InvalidAngle, "target slot '" + t + "' repeated");
    }
  }
  return Angle{std::move(sources), std::move(targets), weight};
}

Angle parse_angle_spec(const SlotRegistry& registry, std::string_view spec) {
  auto s = text::trim(spec);
  auto arrow = s.find("->");
  if (arrow == std::string_view::npos) {
    throw Error(Errc::InvalidAngle, "expected '<letters>-><letters>', got '" +
                                        std::string(s) + "'");
  }
  auto letters = [&](std::string_view side) {
    std::vector<std::string> out;
    for (char c : text::trim(side)) {
      auto name = registry.name_of(c);
      if (!name) {
        throw Error(Errc::UnknownAbbrev, std::string("'") + c + "' in '" +
                                             std::string(s) + "'");
      }
      out.push_back(*name);
    }
    return out;
  };
  auto sources = letters(s.substr(0, arrow));
  auto targets = letters(s.substr(arrow + 2));
  return Angle::make(registry, std::move(sources), std::move(targets), 1.0);
}

Angle parse_weighted_angle(const SlotRegistry& registry, std::string_view spec) {
  auto s = text::trim(spec);
  auto colon = s.find(':');
  if (colon == std::string_view::npos) return parse_angle_spec(registry, s);
  Angle base = parse_angle_spec(registry, s.substr(0, colon));
  auto wtext = std::string(text::trim(s.substr(colon + 1)));
  double weight = 0.0;
  try {
    std::size_t used = 0;
    weight = std::stod(wtext, &used);
    if (used != wtext.size()) throw std::invalid_argument(wtext);
  } catch (const std::exception&) {
    throw Error(Errc::InvalidAngle, "bad weight '" + wtext + "'");
  }
  return Angle::make(registry, base.sources, base.targets, weight);
}

std::vector<Angle> parse_angle_list(const SlotRegistry& registry,
                                    std::string_view specs) {
  std::vector<Angle> out;
  for (const auto& piece : text::split_list(specs, ',')) {
    out.push_back(parse_weighted_angle(registry, piece));
  }
  return out;
}

std::string format_angle(const SlotRegistry& registry, const Angle& angle) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& slots) {
    for (const auto& s : slots) {
      auto a = registry.abbrev_of(s);
      if (!a) throw Error(Errc::UnknownSlot, "'" + s + "'");
      out += *a;
    }
  };
  emit(angle.sources);
  out += "->";
  emit(angle.targets);
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset Dataset::make(std::string name, std::vector<Instance> instances,
                      std::vector<Angle> angles) {
  std::set<std::string, std::less<>> ids;
  for (const auto& inst : instances) {
    if (!ids.insert(inst.id()).second) {
      throw Error(Errc::DuplicateInstanceId, "'" + inst.id() + "' in dataset '" + name + "'");
    }
  }
  Dataset d;
  d.name_ = std::move(name);
  d.instances_ = std::move(instances);
  d.angles_ = std::move(angles);
  return d;
}

Dataset Dataset::with_angles(std::vector<Angle> angles) const {
  Dataset d = *this;
  d.angles_ = std::move(angles);
  return d;
}

Dataset Dataset::with_instances(std::vector<Instance> instances) const {
  return make(name_, std::move(instances), angles_);
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct Preset {
  std::string_view name;
  std::string_view specs;
};

constexpr Preset kPresets[] = {
    {"base:boolq", "QC->A,AC->Q"},
    {"base:narrativeqa", "QC->A,AC->Q"},
    {"base:squad2", "QC->A,AC->Q"},
    {"base:arc", "QMC->A,QC->A,QM->A,QAC->M,MAC->Q,AC->QM"},
    {"base:obqa", "QMC->A,QC->A,QM->A,QAC->M,MAC->Q,AC->QM"},
    {"base:race", "QMC->A,QC->A,QAC->M,MAC->Q"},
    {"base:mctest", "QMC->A,QC->A,QAC->M,MAC->Q"},
    {"finetune:arc",
     "QMC->AE,AQC->M,CQME->A,QME->A,QE->A,QMC->A,QC->AE,QM->AE,QMAC->E,QMA->E"},
    {"finetune:arc-da",
     "QC->AE,Q->AE,QC->A,Q->A,CQE->A,QE->A,AE->Q,AC->Q,QA->E,AQC->E"},
};

}  // namespace

std::vector<Angle> angle_preset(const SlotRegistry& registry, std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return parse_angle_list(registry, p.specs);
  }
  throw Error(Errc::InvalidConfig, "unknown angle preset '" + std::string(name) + "'");
}

std::vector<std::string> angle_preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

}  // namespace angleqa
