#pragma once

// Slots, instances, angles and datasets: the in-memory model every other
// module consumes. All types are immutable values once constructed.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace angleqa {

inline constexpr std::string_view kQuestion = "question";
inline constexpr std::string_view kAnswer = "answer";
inline constexpr std::string_view kMcOptions = "mcoptions";
inline constexpr std::string_view kContext = "context";
inline constexpr std::string_view kExplanation = "explanation";

struct SlotEntry {
  std::string name;
  char abbrev;

  bool operator==(const SlotEntry&) const = default;
};

class SlotRegistry {
 public:
  /// Empty registry. Most callers want defaults().
  SlotRegistry() = default;

  /// question (Q), answer (A), mcoptions (M), context (C), explanation (E).
  static SlotRegistry defaults();

  /// Returns a copy extended by one slot. Throws DuplicateSlot or InvalidName.
  SlotRegistry with_slot(std::string name, char abbrev) const;

  const std::vector<SlotEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  bool contains(std::string_view name) const noexcept;
  std::optional<char> abbrev_of(std::string_view name) const noexcept;
  std::optional<std::string> name_of(char abbrev) const;

  /// Accepts a canonical name or a single-letter abbreviation (either case).
  /// Throws UnknownSlot.
  std::string resolve(std::string_view name_or_abbrev) const;

  /// Throws UnknownSlot when `name` is not registered.
  void require(std::string_view name) const;

 private:
  std::vector<SlotEntry> entries_;
};

/// Canonical-name rules: non-empty, lowercase, no whitespace, no '$' or ';'.
bool is_valid_slot_name(std::string_view name) noexcept;

using SlotValues = std::map<std::string, std::string, std::less<>>;

/// One QA example. Values are whitespace-trimmed at construction.
class Instance {
 public:
  /// Throws UnknownSlot for unregistered keys, EmptyValue for blank values.
  static Instance make(const SlotRegistry& registry, std::string id,
                       SlotValues values,
                       std::optional<std::string> category = std::nullopt,
                       std::optional<std::string> source = std::nullopt,
                       std::vector<std::string> references = {});

  const std::string& id() const noexcept { return id_; }
  const SlotValues& values() const noexcept { return values_; }
  const std::optional<std::string>& category() const noexcept { return category_; }
  const std::optional<std::string>& source() const noexcept { return source_; }

  /// Extra gold answers kept for scoring (e.g. every annotator answer of a
  /// direct-answer question). The answer slot holds only the canonical one.
  const std::vector<std::string>& references() const noexcept { return references_; }

  bool has(std::string_view slot) const noexcept;
  const std::string* find(std::string_view slot) const noexcept;

  Instance with_value(const SlotRegistry& registry, std::string slot,
                      std::string value) const;
  Instance without(std::string_view slot) const;

 private:
  Instance() = default;

  std::string id_;
  SlotValues values_;
  std::optional<std::string> category_;
  std::optional<std::string> source_;
  std::vector<std::string> references_;
};

/// A transformation task: generate `targets` given `sources`.
struct Angle {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  double weight = 1.0;

  /// Validates slot names, disjointness, non-empty targets and weight > 0.
  static Angle make(const SlotRegistry& registry,
                    std::vector<std::string> sources,
                    std::vector<std::string> targets, double weight = 1.0);

  bool operator==(const Angle&) const = default;
};

/// Parses the arrow notation "QMC->AE". Sources and targets keep the written
/// order; weight is 1.0.
Angle parse_angle_spec(const SlotRegistry& registry, std::string_view spec);

/// Accepts an optional ":weight" suffix, e.g. "Q->A:2.5".
Angle parse_weighted_angle(const SlotRegistry& registry, std::string_view spec);

/// Parses a comma-separated list of (optionally weighted) angle specs.
std::vector<Angle> parse_angle_list(const SlotRegistry& registry,
                                    std::string_view specs);

std::string format_angle(const SlotRegistry& registry, const Angle& angle);

class Dataset {
 public:
  /// Throws DuplicateInstanceId.
  static Dataset make(std::string name, std::vector<Instance> instances,
                      std::vector<Angle> angles = {});

  const std::string& name() const noexcept { return name_; }
  const std::vector<Instance>& instances() const noexcept { return instances_; }
  const std::vector<Angle>& angles() const noexcept { return angles_; }

  Dataset with_angles(std::vector<Angle> angles) const;
  Dataset with_instances(std::vector<Instance> instances) const;

 private:
  Dataset() = default;

  std::string name_;
  std::vector<Instance> instances_;
  std::vector<Angle> angles_;
};

/// Named angle sets used when training the multi-angle models (weights 1.0).
/// Known names: base:boolq, base:narrativeqa, base:squad2, base:arc,
/// base:obqa, base:race, base:mctest, finetune:arc, finetune:arc-da.
std::vector<Angle> angle_preset(const SlotRegistry& registry,
                                std::string_view name);
std::vector<std::string> angle_preset_names();

}  // namespace angleqa
