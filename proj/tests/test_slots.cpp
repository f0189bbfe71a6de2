#include "doctest.h"

#include "angleqa/errors.hpp"
#include "angleqa/random.hpp"
#include "angleqa/slots.hpp"

using namespace angleqa;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("default registry has five slots with their letters") {
    auto reg = SlotRegistry::defaults();
    REQUIRE(reg.size() == 5);
    CHECK(reg.abbrev_of("question") == 'Q');
    CHECK(reg.abbrev_of("answer") == 'A');
    CHECK(reg.abbrev_of("mcoptions") == 'M');
    CHECK(reg.abbrev_of("context") == 'C');
    CHECK(reg.abbrev_of("explanation") == 'E');
    CHECK(reg.resolve("q") == "question");
    CHECK(reg.resolve("E") == "explanation");
    CHECK(reg.resolve("mcoptions") == "mcoptions");
    CHECK(code_of([&] { reg.resolve("foo"); }) == Errc::UnknownSlot);
  }

  TEST_CASE("registry extension rejects duplicates and bad names") {
    auto reg = SlotRegistry::defaults();
    auto ext = reg.with_slot("hint", 'H');
    CHECK(ext.size() == 6);
    CHECK(reg.size() == 5);
    CHECK(code_of([&] { ext.with_slot("hint", 'I'); }) == Errc::DuplicateSlot);
    CHECK(code_of([&] { ext.with_slot("other", 'H'); }) == Errc::DuplicateSlot);
    CHECK(code_of([&] { reg.with_slot("Bad Name", 'B'); }) == Errc::InvalidName);
    CHECK(code_of([&] { reg.with_slot("a$b", 'B'); }) == Errc::InvalidName);
    CHECK(code_of([&] { reg.with_slot("", 'B'); }) == Errc::InvalidName);
  }

  TEST_CASE("instances trim values and reject blanks and unknown slots") {
    auto reg = SlotRegistry::defaults();
    auto inst = Instance::make(reg, "1", {{"question", "  why?  "}});
    CHECK(*inst.find("question") == "why?");
    CHECK(!inst.has("answer"));
    CHECK(code_of([&] { Instance::make(reg, "1", {{"question", "   "}}); }) == Errc::EmptyValue);
    CHECK(code_of([&] { Instance::make(reg, "1", {{"foo", "x"}}); }) == Errc::UnknownSlot);
    auto more = inst.with_value(reg, "answer", "because");
    CHECK(more.has("answer"));
    CHECK(!inst.has("answer"));
    CHECK(!more.without("answer").has("answer"));
  }

  TEST_CASE("angle specs parse in written order") {
    auto reg = SlotRegistry::defaults();
    auto a = parse_angle_spec(reg, "QMC->AE");
    CHECK(a.sources == std::vector<std::string>{"question", "mcoptions", "context"});
    CHECK(a.targets == std::vector<std::string>{"answer", "explanation"});
    CHECK(a.weight == 1.0);
    CHECK(format_angle(reg, a) == "QMC->AE");
    auto w = parse_weighted_angle(reg, "Q->A:2.5");
    CHECK(w.weight == 2.5);
    auto list = parse_angle_list(reg, "QM->AE, Q->A:2");
    REQUIRE(list.size() == 2);
    CHECK(list[1].weight == 2.0);
    CHECK(parse_angle_spec(reg, "->Q").sources.empty());
  }

  TEST_CASE("invalid angles") {
    auto reg = SlotRegistry::defaults();
    CHECK(code_of([&] { parse_angle_spec(reg, "Q->"); }) == Errc::EmptyTargets);
    CHECK(code_of([&] { parse_angle_spec(reg, "QA->A"); }) == Errc::OverlappingSlots);
    CHECK(code_of([&] { parse_angle_spec(reg, "QQ->A"); }) == Errc::InvalidAngle);
    CHECK(code_of([&] { parse_angle_spec(reg, "QX->A"); }) == Errc::UnknownAbbrev);
    CHECK(code_of([&] { parse_angle_spec(reg, "QA"); }) == Errc::InvalidAngle);
    CHECK(code_of([&] { parse_weighted_angle(reg, "Q->A:0"); }) == Errc::InvalidAngle);
    CHECK(code_of([&] { parse_weighted_angle(reg, "Q->A:-1"); }) == Errc::InvalidAngle);
  }

  TEST_CASE("datasets reject duplicate ids") {
    auto reg = SlotRegistry::defaults();
    std::vector<Instance> v{Instance::make(reg, "x", {{"question", "a"}}),
                            Instance::make(reg, "x", {{"question", "b"}})};
    CHECK(code_of([&] { Dataset::make("d", v); }) == Errc::DuplicateInstanceId);
  }

  TEST_CASE("presets") {
    auto reg = SlotRegistry::defaults();
    CHECK(angle_preset(reg, "finetune:arc").size() == 10);
    CHECK(angle_preset(reg, "base:arc").size() == 6);
    CHECK(angle_preset(reg, "base:race").size() == 4);
    CHECK(angle_preset(reg, "base:squad2").size() == 2);
    CHECK(angle_preset(reg, "finetune:arc-da").size() == 10);
    CHECK(format_angle(reg, angle_preset(reg, "finetune:arc").front()) == "QMC->AE");
    CHECK(code_of([&] { angle_preset(reg, "nope"); }) == Errc::InvalidConfig);
  }

  TEST_CASE("rng is reproducible and bounded") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng r(1);
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 30000; ++i) counts[r.uniform_index(3)]++;
    for (int c : counts) CHECK(c == doctest::Approx(10000).epsilon(0.05));
    for (int i = 0; i < 1000; ++i) {
      double u = r.uniform01();
      CHECK((u >= 0.0 && u < 1.0));
    }
    CHECK(mix_seed({1, 2}) != mix_seed({2, 1}));
    CHECK(mix_seed({1, 2}) == mix_seed({1, 2}));
    CHECK(hash_string("abc") == hash_string("abc"));
    CHECK(hash_string("abc") != hash_string("abd"));
  }
}
