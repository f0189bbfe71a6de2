#pragma once

// HTTP facade for the playground UI:
//   POST /api/ask   {"slots": {...}, "targets": [...], "decode": {...}?}
//   POST /api/rank  {"slots": {...}, "candidates": [...], "include_m": bool}
//   GET  /api/meta
// The service keeps no per-client state.

#include <memory>
#include <string>
#include <vector>

#include "angleqa/backend.hpp"
#include "angleqa/codec.hpp"
#include "angleqa/slots.hpp"
#include "json.hpp"

namespace angleqa {

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Reads {"mode","beam_size","top_p","temperature","max_tokens","seed"};
/// absent fields keep their defaults. Throws InvalidDecodeOptions.
DecodeOptions decode_options_from_json(const nlohmann::json& j);

class PlaygroundService {
 public:
  PlaygroundService(SlotRegistry registry, std::shared_ptr<const Backend> backend,
                    std::vector<Angle> angles = {}, OrderPolicy policy = {});

  HttpResponse handle_ask(const std::string& body) const;
  HttpResponse handle_rank(const std::string& body) const;
  HttpResponse handle_meta() const;

  const SlotRegistry& registry() const noexcept { return registry_; }

 private:
  SlotRegistry registry_;
  std::shared_ptr<const Backend> backend_;
  std::vector<Angle> angles_;
  OrderPolicy policy_;
};

/// Serves a PlaygroundService on a background thread.
class PlaygroundServer {
 public:
  explicit PlaygroundServer(std::shared_ptr<const PlaygroundService> service);
  ~PlaygroundServer();
  PlaygroundServer(const PlaygroundServer&) = delete;
  PlaygroundServer& operator=(const PlaygroundServer&) = delete;

  /// Binds and starts listening; port 0 picks a free port. Returns the bound
  /// port. Throws IoError when binding fails.
  int start(const std::string& host, int port);

  /// Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace angleqa
