#include "doctest.h"

#include <cmath>
#include <numeric>
#include <thread>

#include "angleqa/backend.hpp"
#include "angleqa/errors.hpp"
#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

using namespace angleqa;

namespace {

double seq_prob(const std::vector<double>& lp) {
  return std::exp(std::accumulate(lp.begin(), lp.end(), 0.0));
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::IoError;
}

// Minimal generation server for exercising the remote client.
struct FakeServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  std::string last_input;
  std::mutex mu;

  FakeServer() {
    server.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
      int now = ++in_flight;
      int prev = peak.load();
      while (now > prev && !peak.compare_exchange_weak(prev, now)) {}
      auto j = nlohmann::json::parse(req.body);
      {
        std::lock_guard lock(mu);
        last_input = j.at("input").get<std::string>();
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      --in_flight;
      if (last_input == "fail") {
        res.status = 500;
        res.set_content("model exploded", "text/plain");
        return;
      }
      if (last_input == "garbage") {
        res.set_content("not json", "application/json");
        return;
      }
      res.set_content(nlohmann::json{{"output", "$answer$ = " + j.at("mode").get<std::string>()}}.dump(),
                      "application/json");
    });
    server.Post("/v1/force", [](const httplib::Request& req, httplib::Response& res) {
      auto j = nlohmann::json::parse(req.body);
      if (j.at("output") == "positive") {
        res.set_content(R"({"token_logprobs": [0.5]})", "application/json");
        return;
      }
      res.set_content(R"({"token_logprobs": [-0.5, -0.25]})", "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_SUITE("backend") {
  TEST_CASE("forced scoring closed form") {
    auto toy = testing::toy_v10("memorized question");
    REQUIRE(toy.vocabulary().size() == 10);
    auto lp = toy.force_score("memorized question", "blacktop");
    REQUIRE(lp.size() == 2);
    CHECK(lp[0] == doctest::Approx(std::log(0.91)).epsilon(1e-12));
    CHECK(lp[1] == doctest::Approx(std::log(0.91)).epsilon(1e-12));
    CHECK(std::abs(seq_prob(lp) - 0.8281) < 1e-9);
    auto sand = toy.force_score("memorized question", "sand");
    CHECK(std::abs(seq_prob(sand) - 0.001) < 1e-12);
    auto gravel = toy.force_score("memorized question", "f1");  // in-vocabulary divergence
    CHECK(std::abs(seq_prob(gravel) - 0.001) < 1e-12);
  }

  TEST_CASE("distinct candidates are disjoint events") {
    auto toy = testing::toy_v10("memorized question");
    const std::vector<std::string> vocab_cands{"blacktop", "f1", "f2 f3", "blacktop f4", "f5 f6 f7"};
    double total = 0;
    for (const auto& c : vocab_cands) total += seq_prob(toy.force_score("memorized question", c));
    CHECK(total <= 1.0 + 1e-9);
    // every token sequence of length <= 2 over the vocabulary sums to <= 1
    std::vector<std::string> words;
    for (const auto& w : toy.vocabulary()) if (w != kEndMarker) words.push_back(w);
    double all = 0;
    for (const auto& a : words) {
      all += seq_prob(toy.force_score("memorized question", a));
      for (const auto& b : words) all += seq_prob(toy.force_score("memorized question", a + " " + b));
    }
    CHECK(all <= 1.0 + 1e-9);
  }

  TEST_CASE("memorized path dominates equal-length candidates") {
    auto toy = testing::toy_v10("memorized question");
    double best = seq_prob(toy.force_score("memorized question", "blacktop"));
    for (const auto& w : toy.vocabulary()) {
      if (w == "blacktop" || w == kEndMarker) continue;
      CHECK(seq_prob(toy.force_score("memorized question", w)) < best);
    }
  }

  TEST_CASE("alpha near zero makes the memorized output certain") {
    auto toy = testing::toy_v10("memorized question", 1e-9);
    CHECK(seq_prob(toy.force_score("memorized question", "blacktop")) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("generation and nearest neighbour") {
    auto reg = SlotRegistry::defaults();
    std::vector<std::pair<std::string, std::string>> pairs{
        {testing::kRollerInput, testing::kRollerOutput},
        {"$answer$ ; $question$ = What gas do plants make?", "$answer$ = oxygen"}};
    auto toy = ToyBackend::train(pairs);
    CHECK(toy.name() == "toy");
    CHECK(toy.memorized() == 2);
    auto out = toy.generate(testing::kRollerInput, {});
    CHECK(out.output == testing::kRollerOutput);
    REQUIRE(out.token_logprobs);
    for (double lp : *out.token_logprobs) CHECK(lp <= 0.0);
    std::string near =
        "$answer$ ; $explanation$ ; $question$ = Which surface is best for skating? ; "
        "$mcoptions$ = (A) gravel (B) sand (C) blacktop";
    CHECK(toy.generate(near, {}).output == testing::kRollerOutput);
    DecodeOptions nucleus;
    nucleus.mode = DecodeMode::nucleus;
    nucleus.top_p = 0.9;
    nucleus.seed = 3;
    CHECK(toy.generate(near, nucleus).output == testing::kRollerOutput);
    // equal similarity: lexicographically smaller memorized input wins
    auto tie = ToyBackend::train(std::vector<std::pair<std::string, std::string>>{{"b x", "B"}, {"a x", "A"}});
    CHECK(tie.generate("x", {}).output == "A");
  }

  TEST_CASE("training errors") {
    std::vector<std::pair<std::string, std::string>> none;
    CHECK(code_of([&] { ToyBackend::train(none); }) == Errc::EmptyModel);
    std::vector<std::pair<std::string, std::string>> conflict{{"in", "a"}, {"in", "b"}};
    CHECK(code_of([&] { ToyBackend::train(conflict); }) == Errc::ConflictingPairs);
    std::vector<std::pair<std::string, std::string>> dup{{"in", "a"}, {"in", "a"}};
    CHECK(ToyBackend::train(dup).memorized() == 1);
    CHECK(ToyBackend::train(dup).vocabulary().size() == 2);
    CHECK(code_of([&] { ToyBackend::train(dup, ToyModelParams{1.5}); }) == Errc::InvalidConfig);
    auto toy = ToyBackend::train(dup);
    CHECK(code_of([&] { toy.force_score("in", "  "); }) == Errc::EmptyCandidates);
  }

  TEST_CASE("decode option validation") {
    DecodeOptions d;
    CHECK_NOTHROW(d.validate());
    d.mode = DecodeMode::beam;
    d.beam_size = 0;
    CHECK(code_of([&] { d.validate(); }) == Errc::InvalidDecodeOptions);
    d = {};
    d.mode = DecodeMode::nucleus;
    d.top_p = 0;
    CHECK(code_of([&] { d.validate(); }) == Errc::InvalidDecodeOptions);
    d = {};
    d.max_tokens = 0;
    CHECK(code_of([&] { d.validate(); }) == Errc::InvalidDecodeOptions);
    CHECK(parse_decode_mode("beam") == DecodeMode::beam);
  }

  TEST_CASE("tail truncation keeps the front") {
    CHECK(truncate_tail("a b c d", 2) == "a b");
    CHECK(truncate_tail("a b", 5) == "a b");
  }

  TEST_CASE("remote client speaks the wire protocol") {
    FakeServer fake;
    RemoteBackend remote(fake.url());
    DecodeOptions beam;
    beam.mode = DecodeMode::beam;
    beam.beam_size = 4;
    CHECK(remote.generate("hello", beam).output == "$answer$ = beam");
    auto lp = remote.force_score("hello", "x y");
    CHECK(lp == std::vector<double>{-0.5, -0.25});
    CHECK(code_of([&] { remote.force_score("hello", "positive"); }) == Errc::BackendUnavailable);
    try {
      remote.generate("fail", {});
      FAIL("expected BackendUnavailable");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BackendUnavailable);
      CHECK(e.detail().find("model exploded") != std::string::npos);
    }
    CHECK(code_of([&] { remote.generate("garbage", {}); }) == Errc::BackendUnavailable);
  }

  TEST_CASE("remote client truncates and bounds concurrency") {
    FakeServer fake;
    RemoteOptions opts;
    opts.max_in_flight = 2;
    opts.max_input_tokens = 3;
    RemoteBackend remote(fake.url(), opts);
    remote.generate("one two three four five", {});
    CHECK(fake.last_input == "one two three");
    std::vector<std::thread> ts;
    for (int i = 0; i < 8; ++i) ts.emplace_back([&] { remote.generate("x", {}); });
    for (auto& t : ts) t.join();
    CHECK(fake.peak.load() <= 2);
  }

  TEST_CASE("unreachable remote") {
    RemoteOptions opts;
    opts.timeout_seconds = 1;
    RemoteBackend remote("http://127.0.0.1:1", opts);
    CHECK(code_of([&] { remote.generate("x", {}); }) == Errc::BackendUnavailable);
  }

  TEST_CASE("backend specs") {
    auto reg = SlotRegistry::defaults();
    CHECK(code_of([&] { make_backend("nonsense", reg); }) == Errc::InvalidConfig);
    CHECK(code_of([&] { make_backend("toy:/nonexistent/file.jsonl", reg); }) == Errc::IoError);
    CHECK(make_backend("remote:http://127.0.0.1:9", reg)->name().find("remote:") == 0);
  }
}
