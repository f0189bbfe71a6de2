#include <httplib.h>

#include "angleqa/backend.hpp"
#include "angleqa/text.hpp"
#include "json.hpp"

namespace angleqa {

namespace {

using json = nlohmann::json;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing '/'
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto slash = url.find('/', host_start);
  SplitUrl out;
  if (slash == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, slash);
    out.prefix = url.substr(slash);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  if (scheme_end == std::string::npos) out.origin = "http://" + out.origin;
  return out;
}

// Releases the in-flight slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

RemoteBackend::RemoteBackend(std::string base_url, RemoteOptions opts)
    : base_url_(std::move(base_url)), opts_(opts) {
  if (text::trim(base_url_).empty()) {
    throw Error(Errc::InvalidConfig, "remote backend needs a base URL");
  }
  if (opts_.max_in_flight < 1) opts_.max_in_flight = 1;
  in_flight_ = std::make_unique<std::counting_semaphore<>>(
      static_cast<std::ptrdiff_t>(opts_.max_in_flight));
}

std::string RemoteBackend::prepare_input(std::string_view input) const {
  return truncate_tail(input, opts_.max_input_tokens);
}

std::string RemoteBackend::post(const std::string& path, const std::string& body) const {
  SlotGuard guard(*in_flight_);
  auto url = split_url(base_url_);
  httplib::Client client(url.origin);
  client.set_connection_timeout(opts_.timeout_seconds, 0);
  client.set_read_timeout(opts_.timeout_seconds, 0);
  client.set_write_timeout(opts_.timeout_seconds, 0);
  auto res = client.Post(url.prefix + path, body, "application/json");
  if (!res) {
    throw Error(Errc::BackendUnavailable,
                "POST " + base_url_ + path + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(Errc::BackendUnavailable, "POST " + base_url_ + path + " returned " +
                                              std::to_string(res->status) + ": " + res->body);
  }
  return res->body;
}

GenerationResult RemoteBackend::generate(std::string_view input, const DecodeOptions& opts) const {
  opts.validate();
  json req{{"input", prepare_input(input)},
           {"mode", std::string(to_string(opts.mode))},
           {"beam_size", opts.beam_size},
           {"top_p", opts.top_p},
           {"temperature", opts.temperature},
           {"max_tokens", opts.max_tokens}};
  if (opts.seed) req["seed"] = *opts.seed;
  const std::string body = post("/v1/generate", req.dump());
  try {
    auto res = json::parse(body);
    GenerationResult out{res.at("output").get<std::string>(), std::nullopt};
    if (res.contains("token_logprobs") && res["token_logprobs"].is_array()) {
      out.token_logprobs = res["token_logprobs"].get<std::vector<double>>();
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::BackendUnavailable,
                std::string("malformed /v1/generate body (") + e.what() + "): " + body);
  }
}

std::vector<double> RemoteBackend::force_score(std::string_view input,
                                               std::string_view forced_output) const {
  if (text::trim(forced_output).empty()) {
    throw Error(Errc::EmptyCandidates, "forced output is blank");
  }
  json req{{"input", prepare_input(input)}, {"output", std::string(forced_output)}};
  const std::string body = post("/v1/force", req.dump());
  try {
    auto res = json::parse(body);
    auto lp = res.at("token_logprobs").get<std::vector<double>>();
    if (lp.empty()) throw Error(Errc::BackendUnavailable, "empty token_logprobs: " + body);
    for (double x : lp) {
      if (!(x <= 0.0)) {
        throw Error(Errc::BackendUnavailable, "token log-probability above 0: " + body);
      }
    }
    return lp;
  } catch (const json::exception& e) {
    throw Error(Errc::BackendUnavailable,
                std::string("malformed /v1/force body (") + e.what() + "): " + body);
  }
}

}  // namespace angleqa
