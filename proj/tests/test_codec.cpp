#include "doctest.h"

#include <algorithm>
#include <set>

#include "angleqa/codec.hpp"
#include "angleqa/errors.hpp"
#include "support.hpp"

using namespace angleqa;
using angleqa::testing::kRollerInput;
using angleqa::testing::kRollerOutput;

namespace {

const std::vector<std::string> kAE{"answer", "explanation"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

TEST_SUITE("codec") {
  TEST_CASE("wire format fixtures") {
    auto reg = SlotRegistry::defaults();
    auto inst = testing::rollerskating(reg);
    auto angle = parse_angle_spec(reg, "QM->AE");
    CHECK(encode_input(reg, inst, angle, OrderPolicy::as_given()) == kRollerInput);
    CHECK(encode_output(reg, inst, angle, OrderPolicy::as_given()) == kRollerOutput);
    CHECK(encode_output(reg, inst, parse_angle_spec(reg, "QM->A"), {}) == "$answer$ = blacktop");
  }

  TEST_CASE("value validation") {
    auto reg = SlotRegistry::defaults();
    CHECK(!check_value(reg, "blacktop"));
    CHECK(check_value(reg, "see $answer$ above") == Errc::MarkerCollision);
    CHECK(!check_value(reg, "a ; b"));
    CHECK(!check_value(reg, "$notaslot$"));
    CHECK(check_value(reg, "  ") == Errc::EmptyValue);
    CHECK_THROWS_AS(validate_value(reg, "$context$"), Error);
  }

  TEST_CASE("encoding errors") {
    auto reg = SlotRegistry::defaults();
    auto inst = Instance::make(reg, "1", {{"question", "q"}});
    try {
      encode_input(reg, inst, parse_angle_spec(reg, "QC->A"), {});
      FAIL("expected MissingSourceSlot");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MissingSourceSlot);
    }
    try {
      encode_output(reg, inst, parse_angle_spec(reg, "Q->A"), {});
      FAIL("expected MissingTargetSlot");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MissingTargetSlot);
    }
    auto bad = Instance::make(reg, "2", {{"question", "what is $answer$"}, {"answer", "x"}});
    try {
      encode_input(reg, bad, parse_angle_spec(reg, "Q->A"), {});
      FAIL("expected MarkerCollision");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MarkerCollision);
    }
  }

  TEST_CASE("parser examples") {
    auto reg = SlotRegistry::defaults();
    auto p = parse_output(reg, kRollerOutput, kAE);
    CHECK(p.missing.empty());
    CHECK(p.values.at("answer") == "blacktop");
    CHECK(p.values.at("explanation") == "A wheeled vehicle requires smooth surfaces.");
    CHECK(p.raw == kRollerOutput);

    auto none = parse_output(reg, "blacktop", std::vector<std::string>{"answer"});
    CHECK(none.values.empty());
    CHECK(none.missing == std::vector<std::string>{"answer"});

    auto greedy = parse_output(reg, "$answer$ = first ; second ; $explanation$ = e", kAE);
    CHECK(greedy.values.at("answer") == "first ; second");
    CHECK(greedy.values.at("explanation") == "e");
  }

  TEST_CASE("parser edge cases") {
    auto reg = SlotRegistry::defaults();
    // last occurrence wins
    CHECK(parse_output(reg, "$answer$ = a ; $answer$ = b", kAE).values.at("answer") == "b");
    // a final empty occurrence removes the slot
    auto emptied = parse_output(reg, "$answer$ = a ; $answer$ =", kAE);
    CHECK(!emptied.values.count("answer"));
    // whitespace tolerance
    auto loose = parse_output(reg, "  $answer$=blue;$explanation$   =  sky  ", kAE);
    CHECK(loose.values.at("answer") == "blue");
    CHECK(loose.values.at("explanation") == "sky");
    // unregistered spans are text
    CHECK(parse_output(reg, "$answer$ = $foo$ = 3", kAE).values.at("answer") == "$foo$ = 3");
    // garbage is total
    auto junk = parse_output(reg, "$$$ ; = ;;", kAE);
    CHECK(junk.values.empty());
    CHECK(junk.missing == kAE);
    // keys and missing are disjoint and cover expected
    for (const auto& m : emptied.missing) CHECK(!emptied.values.count(m));
  }

  TEST_CASE("parse_input inverts encode_input") {
    auto reg = SlotRegistry::defaults();
    auto p = parse_input(reg, kRollerInput);
    CHECK(p.targets == kAE);
    REQUIRE(p.sources.size() == 2);
    CHECK(p.sources[0] == std::pair<std::string, std::string>{"question", "Which surface is best for rollerskating?"});
    CHECK(p.sources[1].second == "(A) gravel (B) sand (C) blacktop");
    CHECK(scan_markers(reg, kRollerInput).size() == 4);
  }

  TEST_CASE("round trip over random values and policies") {
    auto reg = SlotRegistry::defaults();
    Rng rng(2024);
    const auto angles = angle_preset(reg, "finetune:arc");
    for (int i = 0; i < 1000; ++i) {
      SlotValues v;
      for (const auto& e : reg.entries()) v[e.name] = testing::random_value(rng);
      auto inst = Instance::make(reg, std::to_string(i), v);
      const auto& angle = angles[rng.uniform_index(angles.size())];
      OrderPolicy pol = (i % 2) ? OrderPolicy::scrambled(rng.next()) : OrderPolicy::as_given();
      auto out = encode_output(reg, inst, angle, pol);
      auto parsed = parse_output(reg, out, angle.targets);
      REQUIRE(parsed.missing.empty());
      for (const auto& t : angle.targets) REQUIRE(parsed.values.at(t) == *inst.find(t));
      REQUIRE(parsed.values.size() == angle.targets.size());

      auto in = encode_input(reg, inst, angle, pol);
      auto pin = parse_input(reg, in);
      REQUIRE(pin.sources.size() == angle.sources.size());
      REQUIRE(pin.targets.size() == angle.targets.size());
      for (const auto& [slot, value] : pin.sources) REQUIRE(value == *inst.find(slot));
    }
  }

  TEST_CASE("parsing ignores assignment order") {
    auto reg = SlotRegistry::defaults();
    std::vector<std::string> parts{"$answer$ = a ; b", "$explanation$ = e", "$question$ = q"};
    std::sort(parts.begin(), parts.end());
    std::set<std::map<std::string, std::string>> seen;
    do {
      std::string raw = parts[0] + " ; " + parts[1] + " ; " + parts[2];
      auto p = parse_output(reg, raw, kAE);
      seen.insert(std::map<std::string, std::string>(p.values.begin(), p.values.end()));
    } while (std::next_permutation(parts.begin(), parts.end()));
    CHECK(seen.size() == 1);
  }

  TEST_CASE("scrambled order is seeded and keeps context last") {
    auto reg = SlotRegistry::defaults();
    auto inst = testing::rollerskating(reg).with_value(reg, "context", "Smooth is good.");
    auto angle = parse_angle_spec(reg, "QMCE->A");
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      auto text = encode_input(reg, inst, angle, OrderPolicy::scrambled(seed));
      REQUIRE(ends_with(text, "$context$ = Smooth is good."));
      REQUIRE(text == encode_input(reg, inst, angle, OrderPolicy::scrambled(seed)));
    }
    std::set<std::string> orders;
    auto two = parse_angle_spec(reg, "QM->AE");
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      orders.insert(encode_output(reg, inst, two, OrderPolicy::scrambled(seed)));
    }
    CHECK(orders.size() == 2);
    CHECK(orders.count("$explanation$ = A wheeled vehicle requires smooth surfaces. ; $answer$ = blacktop"));
  }

  TEST_CASE("input and output share the target order") {
    auto reg = SlotRegistry::defaults();
    auto inst = testing::rollerskating(reg);
    auto angle = parse_angle_spec(reg, "QM->AE");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      auto pol = OrderPolicy::scrambled(seed);
      auto in = parse_input(reg, encode_input(reg, inst, angle, pol));
      auto out = scan_markers(reg, encode_output(reg, inst, angle, pol));
      REQUIRE(out.size() == 2);
      CHECK(in.targets[0] == out[0].slot);
    }
  }

  TEST_CASE("order mode names") {
    CHECK(parse_order_mode("scrambled") == OrderMode::scrambled);
    CHECK(to_string(OrderMode::as_given) == "as_given");
    CHECK_THROWS_AS(parse_order_mode("random"), Error);
  }
}
