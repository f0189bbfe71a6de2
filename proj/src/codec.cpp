#include "angleqa/codec.hpp"

#include <algorithm>

#include "angleqa/random.hpp"
#include "angleqa/text.hpp"

namespace angleqa {

namespace {

constexpr std::string_view kSep = " ; ";

std::string marker(std::string_view slot) {
  std::string m;
  m.reserve(slot.size() + 2);
  m += '$';
  m += slot;
  m += '$';
  return m;
}

const std::string& value_of(const Instance& instance, const std::string& slot,
                            Errc missing_code) {
  const std::string* v = instance.find(slot);
  if (!v) {
    throw Error(missing_code, "instance '" + instance.id() + "' has no '" + slot + "'");
  }
  return *v;
}

}  // namespace

std::string_view to_string(OrderMode mode) noexcept {
  return mode == OrderMode::scrambled ? "scrambled" : "as_given";
}

OrderMode parse_order_mode(std::string_view s) {
  if (s == "as_given") return OrderMode::as_given;
  if (s == "scrambled") return OrderMode::scrambled;
  throw Error(Errc::InvalidConfig, "order must be as_given or scrambled, got '" +
                                       std::string(s) + "'");
}

std::optional<Errc> check_value(const SlotRegistry& registry,
                                std::string_view value) noexcept {
  if (text::trim(value).empty()) return Errc::EmptyValue;
  for (const auto& e : registry.entries()) {
    if (value.find(marker(e.name)) != std::string_view::npos) {
      return Errc::MarkerCollision;
    }
  }
  return std::nullopt;
}

void validate_value(const SlotRegistry& registry, std::string_view value) {
  if (auto err = check_value(registry, value)) {
    if (*err == Errc::EmptyValue) throw Error(*err, "value is blank");
    throw Error(*err, "value embeds a slot marker: '" + std::string(value) + "'");
  }
}

SlotOrder order_slots(const Angle& angle, const OrderPolicy& policy) {
  SlotOrder order{angle.targets, angle.sources};
  if (policy.mode == OrderMode::as_given) return order;

  Rng rng(mix_seed({policy.seed}));
  rng.shuffle(std::span<std::string>(order.targets));

  auto ctx = std::find(order.sources.begin(), order.sources.end(), kContext);
  bool has_context = ctx != order.sources.end();
  if (has_context) order.sources.erase(ctx);
  rng.shuffle(std::span<std::string>(order.sources));
  if (has_context) order.sources.emplace_back(kContext);
  return order;
}

std::string format_assignment(std::string_view slot, std::string_view value) {
  std::string out = marker(slot);
  out += " = ";
  out += value;
  return out;
}

std::string encode_input(const SlotRegistry& registry, const Instance& instance,
                         const Angle& angle, const OrderPolicy& policy) {
  SlotOrder order = order_slots(angle, policy);
  std::vector<std::string> parts;
  parts.reserve(order.targets.size() + order.sources.size());
  for (const auto& t : order.targets) {
    registry.require(t);
    parts.push_back(marker(t));
  }
  for (const auto& s : order.sources) {
    registry.require(s);
    const auto& v = value_of(instance, s, Errc::MissingSourceSlot);
    validate_value(registry, v);
    parts.push_back(format_assignment(s, v));
  }
  return text::join(parts, kSep);
}

std::string encode_output(const SlotRegistry& registry, const Instance& instance,
                          const Angle& angle, const OrderPolicy& policy) {
  SlotOrder order = order_slots(angle, policy);
  std::vector<std::string> parts;
  parts.reserve(order.targets.size());
  for (const auto& t : order.targets) {
    registry.require(t);
    const auto& v = value_of(instance, t, Errc::MissingTargetSlot);
    validate_value(registry, v);
    parts.push_back(format_assignment(t, v));
  }
  return text::join(parts, kSep);
}

std::vector<Marker> scan_markers(const SlotRegistry& registry, std::string_view text) {
  std::vector<Marker> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find('$', pos);
    if (open == std::string_view::npos) break;
    std::size_t close = text.find('$', open + 1);
    if (close == std::string_view::npos) break;
    std::string_view name = text.substr(open + 1, close - open - 1);
    if (!is_valid_slot_name(name) || !registry.contains(name)) {
      // The closing '$' may open the next marker.
      pos = open + 1;
      continue;
    }
    Marker m{std::string(name), false, open, close + 1};
    std::size_t k = close + 1;
    while (k < text.size() && text::is_space(text[k])) ++k;
    if (k < text.size() && text[k] == '=') {
      m.assignment = true;
      m.end = k + 1;
    }
    pos = m.end;
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

// Value text between an assignment marker and the next marker (or the end):
// trimmed, with one trailing " ; " separator removed when another marker
// follows.
std::string_view value_span(std::string_view text, std::size_t begin,
                            std::size_t end, bool followed) {
  auto v = text::trim(text.substr(begin, end - begin));
  if (followed && !v.empty() && v.back() == ';') {
    v.remove_suffix(1);
    v = text::trim(v);
  }
  return v;
}

}  // namespace

ParsedOutput parse_output(const SlotRegistry& registry, std::string_view raw,
                          std::span<const std::string> expected) {
  ParsedOutput out;
  out.raw = std::string(raw);

  std::vector<Marker> assigns;
  for (auto& m : scan_markers(registry, raw)) {
    if (m.assignment) assigns.push_back(std::move(m));
  }
  for (std::size_t i = 0; i < assigns.size(); ++i) {
    bool followed = i + 1 < assigns.size();
    std::size_t end = followed ? assigns[i + 1].begin : raw.size();
    auto v = value_span(raw, assigns[i].end, end, followed);
    // Last occurrence wins, even when it is empty.
    if (v.empty()) {
      if (auto it = out.values.find(assigns[i].slot); it != out.values.end()) {
        out.values.erase(it);
      }
    } else {
      out.values.insert_or_assign(assigns[i].slot, std::string(v));
    }
  }
  for (const auto& slot : expected) {
    if (!out.values.count(slot) &&
        std::find(out.missing.begin(), out.missing.end(), slot) == out.missing.end()) {
      out.missing.push_back(slot);
    }
  }
  return out;
}

ParsedInput parse_input(const SlotRegistry& registry, std::string_view text) {
  ParsedInput out;
  auto markers = scan_markers(registry, text);
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const auto& m = markers[i];
    if (!m.assignment) {
      if (std::find(out.targets.begin(), out.targets.end(), m.slot) == out.targets.end()) {
        out.targets.push_back(m.slot);
      }
      continue;
    }
    bool followed = i + 1 < markers.size();
    std::size_t end = followed ? markers[i + 1].begin : text.size();
    std::string value(value_span(text, m.end, end, followed));
    auto it = std::find_if(out.sources.begin(), out.sources.end(),
                           [&](const auto& p) { return p.first == m.slot; });
    if (it != out.sources.end()) {
      it->second = std::move(value);
    } else {
      out.sources.emplace_back(m.slot, std::move(value));
    }
  }
  return out;
}

}  // namespace angleqa
