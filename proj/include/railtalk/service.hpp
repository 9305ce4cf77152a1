#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "railtalk/json_io.hpp"

namespace httplib {
class Server;
}

namespace railtalk {

/// Request failure with a machine-readable code: "not-found", "conflict" or
/// "bad-request".
class ServiceError : public std::runtime_error {
public:
  ServiceError(std::string code, const std::string& message) : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }
  int http_status() const;
  Json body() const;

private:
  std::string code_;
};

struct SessionConfig {
  PipelineOptions options;
  std::uint64_t seed = 0;
};

/// Parses create-session overrides: {"noise": {...}, "tag_noise": {tag: {...}},
/// "state_lm": bool, "seed": n}. Unknown fields are rejected.
SessionConfig parse_overrides(const Json& overrides);

/// Live sessions over shared read-only resources. Turns on one session are
/// serialized by its own lock; different sessions proceed in parallel.
class SessionManager {
public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit SessionManager(std::shared_ptr<const Resources> resources, std::vector<Scenario> scenarios = {},
                          std::chrono::seconds idle_expiry = std::chrono::minutes(30), Clock clock = {});

  /// Descriptor: id, version, config echo, opening system text and state view.
  Json create(const Json& overrides);
  /// Turn record with the state view after the turn.
  Json post_turn(const std::string& id, const std::string& text);
  /// {id, version, state}; the state equals the one returned by the last turn.
  Json get(const std::string& id);
  Json scenarios() const;
  Json metrics() const;
  /// Drops sessions idle longer than the expiry; returns how many.
  std::size_t sweep();
  std::size_t size() const;

private:
  struct Session {
    std::string id;
    SessionConfig config;
    DialogueState state;
    std::uint64_t version = 0;
    std::chrono::steady_clock::time_point created;
    std::chrono::steady_clock::time_point last_active;
    std::mutex mutex;
  };

  std::shared_ptr<Session> find(const std::string& id);
  std::string new_id();
  Json view(const Session& s) const;

  std::shared_ptr<const Resources> resources_;
  std::vector<Scenario> scenarios_;
  std::chrono::seconds expiry_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t id_salt_;
  std::atomic<std::uint64_t> id_counter_{0};
  std::atomic<std::uint64_t> created_{0};
  std::atomic<std::uint64_t> turns_{0};
  std::atomic<std::uint64_t> errors_{0};
  std::atomic<std::uint64_t> expired_{0};
};

/// Registers the endpoints on an existing server.
void install_routes(httplib::Server& server, SessionManager& manager);

/// Blocks serving the HTTP endpoints until the process is stopped.
void serve(SessionManager& manager, const std::string& host, int port);

}  // namespace railtalk
