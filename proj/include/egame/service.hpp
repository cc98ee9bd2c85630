#pragma once

// JSON service over the game engine, routed under /v1. Games are persisted as
// transcripts in the state directory and replayed (re-verified) on start.

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "egame/game.hpp"

namespace httplib {
class Server;
}

namespace egame {

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class Service {
 public:
  explicit Service(std::optional<std::filesystem::path> state_dir = std::nullopt);

  // `target` is the request path with an optional query string.
  Response handle(std::string_view method, std::string_view target, std::string_view body);

  // Transcripts in the state directory that failed to replay.
  const std::vector<std::string>& load_errors() const { return load_errors_; }
  std::size_t game_count() const;

 private:
  struct Game {
    std::mutex write;  // serializes mutations
    std::shared_ptr<const GameState> snapshot;
  };

  Response create_game(std::string_view body);
  Response get_game(const std::string& id);
  Response post_move(const std::string& id, std::string_view body);
  Response get_transcript(const std::string& id);
  Response verify_conjugation(std::string_view body);
  Response builtins(std::string_view query);

  std::shared_ptr<Game> find(const std::string& id) const;
  std::shared_ptr<const GameState> snapshot(const Game& g) const;
  void persist(const std::string& id, const GameState& s) const;

  std::optional<std::filesystem::path> state_dir_;
  mutable std::shared_mutex registry_;
  std::map<std::string, std::shared_ptr<Game>> games_;
  std::atomic<std::uint64_t> next_id_{1};
  std::vector<std::string> load_errors_;
};

// HTTP adapter: every /v1 GET and POST is forwarded to Service::handle.
class HttpFrontend {
 public:
  explicit HttpFrontend(Service& service);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool run();
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace egame
