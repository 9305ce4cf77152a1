#include "railtalk/service.hpp"

#include <cstdio>
#include <random>

#include <httplib.h>

#include "railtalk/state_tags.hpp"

namespace railtalk {

int ServiceError::http_status() const {
  if (code_ == "not-found") return 404;
  if (code_ == "conflict") return 409;
  return 400;
}

Json ServiceError::body() const { return {{"error", {{"code", code_}, {"message", what()}}}}; }

SessionConfig parse_overrides(const Json& overrides) {
  SessionConfig c;
  if (overrides.is_null()) return c;
  if (!overrides.is_object()) throw ServiceError("bad-request", "overrides must be an object");
  try {
    for (const auto& [k, v] : overrides.items()) {
      if (k == "noise") {
        c.options.noise = noise_from_json(v);
      } else if (k == "tag_noise") {
        if (!v.is_object()) throw ServiceError("bad-request", "tag_noise must be an object");
        for (const auto& [tag, n] : v.items()) {
          if (!is_state_tag(tag)) throw ServiceError("bad-request", "unknown state tag '" + tag + "'");
          c.options.tag_noise[tag] = noise_from_json(n);
        }
      } else if (k == "state_lm") {
        c.options.state_lm = v.get<bool>();
      } else if (k == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else {
        throw ServiceError("bad-request", "unknown override '" + k + "'");
      }
    }
  } catch (const ServiceError&) {
    throw;
  } catch (const std::exception& e) {
    throw ServiceError("bad-request", e.what());
  }
  return c;
}

SessionManager::SessionManager(std::shared_ptr<const Resources> resources, std::vector<Scenario> scenarios,
                               std::chrono::seconds idle_expiry, Clock clock)
    : resources_(std::move(resources)),
      scenarios_(std::move(scenarios)),
      expiry_(idle_expiry),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      id_salt_(std::random_device{}()) {
  if (!resources_) throw std::invalid_argument("session manager needs resources");
}

std::string SessionManager::new_id() {
  const std::uint64_t n = id_counter_.fetch_add(1);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mix_seed(id_salt_, n)));
  return buf;
}

Json SessionManager::view(const Session& s) const {
  return {{"id", s.id}, {"version", s.version}, {"state", state_view(s.state)}};
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError("not-found", "no session '" + id + "'");
  if (clock_() - it->second->last_active > expiry_) {
    sessions_.erase(it);
    ++expired_;
    throw ServiceError("not-found", "session '" + id + "' expired");
  }
  return it->second;
}

Json SessionManager::create(const Json& overrides) {
  auto s = std::make_shared<Session>();
  s->config = parse_overrides(overrides);
  s->state = start_session(resources_->strategy);
  s->created = s->last_active = clock_();
  Json tags = Json::object();
  for (const auto& [k, v] : s->config.options.tag_noise) tags[k] = to_json(v);
  Json config = {{"noise", to_json(s->config.options.noise)},
                 {"tag_noise", tags},
                 {"state_lm", s->config.options.state_lm},
                 {"seed", s->config.seed}};
  {
    std::lock_guard lock(mutex_);
    do {
      s->id = new_id();
    } while (sessions_.count(s->id) != 0);
    sessions_[s->id] = s;
  }
  ++created_;
  Json out = view(*s);
  out["config"] = config;
  out["system_text"] = s->state.last_act.text;
  out["act_type"] = std::string(to_string(s->state.last_act.type));
  return out;
}

Json SessionManager::post_turn(const std::string& id, const std::string& text) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (!s->state.open()) {
    throw ServiceError("conflict", "session '" + id + "' is closed with outcome " +
                                       std::string(to_string(s->state.outcome)));
  }
  const std::uint64_t turn_seed = mix_seed(s->config.seed, s->state.turn_log.size() + 1);
  const TurnLogEntry* e = nullptr;
  try {
    e = &run_turn(s->state, *resources_, text, s->config.options, turn_seed);
  } catch (const std::exception& ex) {
    ++errors_;
    throw ServiceError("bad-request", ex.what());
  }
  ++s->version;
  s->last_active = clock_();
  ++turns_;

  Json out = view(*s);
  out["turn"] = to_json(*e);
  out["system_text"] = e->response.text;
  out["act_type"] = std::string(to_string(e->response.type));
  out["symptom"] = std::string(to_string(e->analysis.symptom));
  out["outcome"] = s->state.open() ? Json(nullptr) : Json(std::string(to_string(s->state.outcome)));
  return out;
}

Json SessionManager::get(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  return view(*s);
}

Json SessionManager::scenarios() const {
  Json a = Json::array();
  for (const auto& s : scenarios_) {
    a.push_back({{"id", s.id}, {"departure", s.departure}, {"arrival", s.arrival}, {"date", s.date}, {"time", s.time},
                 {"call", s.call}});
  }
  return {{"scenarios", a}};
}

Json SessionManager::metrics() const {
  return {{"sessions_active", size()},
          {"sessions_created", created_.load()},
          {"sessions_expired", expired_.load()},
          {"turns", turns_.load()},
          {"turn_errors", errors_.load()}};
}

std::size_t SessionManager::sweep() {
  std::lock_guard lock(mutex_);
  const auto now = clock_();
  std::size_t n = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_active > expiry_) {
      it = sessions_.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  expired_ += n;
  return n;
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    reply(res, 200, f());
  } catch (const ServiceError& e) {
    reply(res, e.http_status(), e.body());
  } catch (const Json::exception& e) {
    reply(res, 400, ServiceError("bad-request", e.what()).body());
  }
}

Json parse_body(const std::string& body) {
  if (trim(body).empty()) return Json::object();
  try {
    return Json::parse(body);
  } catch (const Json::exception& e) {
    throw ServiceError("bad-request", std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

void install_routes(httplib::Server& server, SessionManager& manager) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"status", "ok"}});
  });
  server.Get("/metrics", [&](const httplib::Request&, httplib::Response& res) {
    manager.sweep();
    reply(res, 200, manager.metrics());
  });
  server.Get("/scenarios", [&](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, manager.scenarios());
  });
  server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return manager.create(parse_body(req.body)); });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/turns)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json body = parse_body(req.body);
      if (!body.contains("text") || !body["text"].is_string()) {
        throw ServiceError("bad-request", "body needs a string field 'text'");
      }
      return manager.post_turn(req.matches[1], body["text"].get<std::string>());
    });
  });
  server.Get(R"(/sessions/([0-9a-f]+))", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return manager.get(req.matches[1]); });
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) reply(res, res.status, ServiceError("not-found", "no such endpoint").body());
  });
}

void serve(SessionManager& manager, const std::string& host, int port) {
  httplib::Server server;
  install_routes(server, manager);
  if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace railtalk
