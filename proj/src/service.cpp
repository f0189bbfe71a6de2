#include "angleqa/service.hpp"

#include <httplib.h>

#include <condition_variable>
#include <mutex>
#include <thread>

#include "angleqa/harness.hpp"

namespace angleqa {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

HttpResponse error_response(int status, std::string_view error, const std::string& detail) {
  json body{{"error", std::string(error)}, {"detail", detail}};
  return {status, body.dump()};
}

HttpResponse from_error(const Error& e) {
  const int status = e.code() == Errc::BackendUnavailable ? 502 : 400;
  return error_response(status, to_string(e.code()), e.detail());
}

ojson parse_body(const std::string& body) {
  try {
    auto j = ojson::parse(body);
    if (!j.is_object()) throw Error(Errc::ParseError, "request body must be a JSON object");
    return j;
  } catch (const ojson::exception& e) {
    throw Error(Errc::ParseError, std::string("request body: ") + e.what());
  }
}

// Slot object in request order -> (source order, instance).
std::pair<std::vector<std::string>, Instance> read_slots(const SlotRegistry& registry,
                                                         const ojson& req) {
  std::vector<std::string> order;
  SlotValues values;
  if (req.contains("slots")) {
    const auto& slots = req.at("slots");
    if (!slots.is_object()) throw Error(Errc::ParseError, "\"slots\" must be an object");
    for (const auto& [key, value] : slots.items()) {
      std::string name = registry.resolve(key);
      if (!value.is_string()) {
        throw Error(Errc::ParseError, "slot '" + key + "' must be a string");
      }
      if (!values.emplace(name, value.get<std::string>()).second) {
        throw Error(Errc::DuplicateSlot, "slot '" + name + "' given twice");
      }
      order.push_back(name);
    }
  }
  return {order, Instance::make(registry, "", std::move(values))};
}

}  // namespace

DecodeOptions decode_options_from_json(const json& j) {
  DecodeOptions d;
  if (j.is_null()) return d;
  try {
    if (j.contains("mode")) d.mode = parse_decode_mode(j["mode"].get<std::string>());
    d.beam_size = j.value("beam_size", d.beam_size);
    d.top_p = j.value("top_p", d.top_p);
    d.temperature = j.value("temperature", d.temperature);
    d.max_tokens = j.value("max_tokens", d.max_tokens);
    if (j.contains("seed") && !j["seed"].is_null()) d.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidDecodeOptions, e.what());
  }
  d.validate();
  return d;
}

PlaygroundService::PlaygroundService(SlotRegistry registry,
                                     std::shared_ptr<const Backend> backend,
                                     std::vector<Angle> angles, OrderPolicy policy)
    : registry_(std::move(registry)),
      backend_(std::move(backend)),
      angles_(std::move(angles)),
      policy_(policy) {}

HttpResponse PlaygroundService::handle_ask(const std::string& body) const {
  try {
    const auto req = parse_body(body);
    auto [sources, instance] = read_slots(registry_, req);
    std::vector<std::string> targets;
    if (req.contains("targets")) {
      for (const auto& t : req.at("targets")) targets.push_back(registry_.resolve(t.get<std::string>()));
    }
    const Angle angle = Angle::make(registry_, sources, targets);
    DecodeOptions decode;
    if (req.contains("decode")) decode = decode_options_from_json(json::parse(req["decode"].dump()));

    const std::string raw_input = encode_input(registry_, instance, angle, policy_);
    const auto gen = backend_->generate(raw_input, decode);
    const auto parsed = parse_output(registry_, gen.output, angle.targets);

    ojson res;
    res["raw_input"] = raw_input;
    res["raw_output"] = gen.output;
    res["parsed"] = ojson::object();
    for (const auto& t : angle.targets) {
      if (auto it = parsed.values.find(t); it != parsed.values.end()) res["parsed"][t] = it->second;
    }
    for (const auto& [slot, value] : parsed.values) {
      if (!res["parsed"].contains(slot)) res["parsed"][slot] = value;
    }
    res["missing"] = parsed.missing;
    return {200, res.dump()};
  } catch (const Error& e) {
    return from_error(e);
  } catch (const std::exception& e) {
    return error_response(400, "BadRequest", e.what());
  }
}

HttpResponse PlaygroundService::handle_rank(const std::string& body) const {
  try {
    const auto req = parse_body(body);
    auto [sources, instance] = read_slots(registry_, req);
    std::vector<std::string> candidates;
    if (req.contains("candidates")) {
      candidates = req.at("candidates").get<std::vector<std::string>>();
    }
    const bool include_m = req.value("include_m", false);
    auto ranked = rank_candidates(registry_, instance, candidates, *backend_, include_m, policy_);
    ojson res = ojson::array();
    for (const auto& c : ranked) {
      res.push_back({{"candidate", c.candidate},
                     {"probability", c.probability},
                     {"logprob", c.logprob_sum}});
    }
    return {200, res.dump()};
  } catch (const Error& e) {
    return from_error(e);
  } catch (const std::exception& e) {
    return error_response(400, "BadRequest", e.what());
  }
}

HttpResponse PlaygroundService::handle_meta() const {
  ojson res;
  res["slots"] = ojson::array();
  for (const auto& e : registry_.entries()) {
    res["slots"].push_back({{"name", e.name}, {"abbrev", std::string(1, e.abbrev)}});
  }
  res["angles"] = ojson::array();
  for (const auto& a : angles_) res["angles"].push_back(format_angle(registry_, a));
  res["backend"] = backend_->name();
  res["order"] = std::string(to_string(policy_.mode));
  return {200, res.dump()};
}

// ---------------------------------------------------------------------------

struct PlaygroundServer::Impl {
  std::shared_ptr<const PlaygroundService> service;
  httplib::Server server;
  std::thread thread;
  std::mutex mu;
  std::condition_variable cv;
  bool stopped = false;
};

PlaygroundServer::PlaygroundServer(std::shared_ptr<const PlaygroundService> service)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto& srv = impl_->server;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  auto reply = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  const PlaygroundService* svc = impl_->service.get();
  srv.Post("/api/ask", [svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc->handle_ask(req.body));
  });
  srv.Post("/api/rank", [svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc->handle_rank(req.body));
  });
  srv.Get("/api/meta", [svc, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, svc->handle_meta());
  });
  srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
}

PlaygroundServer::~PlaygroundServer() { stop(); }

int PlaygroundServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) {
    throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void PlaygroundServer::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait(lock, [this] { return impl_->stopped; });
}

void PlaygroundServer::stop() {
  if (!impl_) return;
  std::lock_guard lock(impl_->mu);
  if (impl_->stopped) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->stopped = true;
  impl_->cv.notify_all();
}

}  // namespace angleqa
