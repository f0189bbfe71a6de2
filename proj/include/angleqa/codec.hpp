#pragma once

// Text encoding of angles:
//
//   INPUT:  "$t1$ ; $t2$ ; $s1$ = v1 ; $s2$ = v2"
//   OUTPUT: "$t1$ = w1 ; $t2$ = w2"
//
// Parsing is keyed on "$<registered-name>$ =" markers, so values may contain
// ';' freely but must never embed a registered marker.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "angleqa/errors.hpp"
#include "angleqa/slots.hpp"

namespace angleqa {

enum class OrderMode { as_given, scrambled };

struct OrderPolicy {
  OrderMode mode = OrderMode::as_given;
  std::uint64_t seed = 0;

  static OrderPolicy as_given() { return {}; }
  static OrderPolicy scrambled(std::uint64_t seed) {
    return {OrderMode::scrambled, seed};
  }
};

std::string_view to_string(OrderMode mode) noexcept;
OrderMode parse_order_mode(std::string_view s);

/// Returns the failure code, or nullopt when the value is encodable.
std::optional<Errc> check_value(const SlotRegistry& registry,
                                std::string_view value) noexcept;

/// Throws EmptyValue or MarkerCollision.
void validate_value(const SlotRegistry& registry, std::string_view value);

/// Slot order actually used for one encoding. The same policy always yields
/// the same target order in both the input and the output text.
struct SlotOrder {
  std::vector<std::string> targets;
  std::vector<std::string> sources;
};

/// as_given keeps declaration order. scrambled permutes targets and sources
/// independently, then moves the context slot (if a source) to the end.
SlotOrder order_slots(const Angle& angle, const OrderPolicy& policy);

std::string encode_input(const SlotRegistry& registry, const Instance& instance,
                         const Angle& angle, const OrderPolicy& policy);

std::string encode_output(const SlotRegistry& registry, const Instance& instance,
                          const Angle& angle, const OrderPolicy& policy);

/// "$<slot>$ = <value>"
std::string format_assignment(std::string_view slot, std::string_view value);

struct ParsedOutput {
  SlotValues values;
  std::vector<std::string> missing;
  std::string raw;
};

/// Total: never throws on malformed text.
ParsedOutput parse_output(const SlotRegistry& registry, std::string_view raw,
                          std::span<const std::string> expected);

struct Marker {
  std::string slot;
  bool assignment = false;   // "$slot$ =" vs a bare "$slot$"
  std::size_t begin = 0;     // offset of the opening '$'
  std::size_t end = 0;       // one past the marker ('=' included for assignments)
};

/// Every registered marker in `text`, left to right.
std::vector<Marker> scan_markers(const SlotRegistry& registry, std::string_view text);

/// Inverse of encode_input: bare markers are requested targets, assignments
/// are source values (in text order; duplicates keep the last value).
struct ParsedInput {
  std::vector<std::string> targets;
  std::vector<std::pair<std::string, std::string>> sources;
};

ParsedInput parse_input(const SlotRegistry& registry, std::string_view text);

}  // namespace angleqa
