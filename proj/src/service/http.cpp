#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "safechat/error.hpp"
#include "safechat/service.hpp"

namespace safechat::service {

namespace {

using nlohmann::json;

int status_for(Errc code) {
  switch (code) {
    case Errc::unknown_session: return 404;
    case Errc::expired_session: return 410;
    case Errc::session_ended:
    case Errc::terminal_state: return 409;
    case Errc::capacity: return 503;
    case Errc::parse:
    case Errc::bad_format: return 400;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

template <class F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    const int status = status_for(e.code());
    if (status >= 500 && e.code() != Errc::capacity) spdlog::error("http: {}", e.what());
    send_error(res, status, errc_name(e.code()), e.what());
  } catch (const std::exception& e) {
    spdlog::error("http: {}", e.what());
    send_error(res, 500, "internal", "internal error");
  }
}

json status_json(const LoadStatus& s) { return {{"loaded", s.loaded}, {"detail", s.detail}}; }

}  // namespace

json health_json(const Health& h, std::size_t active_sessions) {
  return {{"status", h.ok() ? "ok" : "degraded"},
          {"model", status_json(h.model)},
          {"gazetteer", status_json(h.gazetteer)},
          {"phrases", status_json(h.phrases)},
          {"guidance", status_json(h.guidance)},
          {"store", status_json(h.store)},
          {"sessions", active_sessions}};
}

json reply_json(const Reply& r) {
  json replies = json::array();
  for (const auto& b : r.replies) {
    replies.push_back({{"text", b.text}, {"kind", dialogue::reply_kind_name(b.kind)}});
  }
  return {{"session_id", r.session_id}, {"replies", replies}, {"state", dialogue::to_string(r.state)}};
}

struct HttpServer::Impl {
  httplib::Server server;
  std::mutex mutex;
  bool serving = false;
  bool stop_requested = false;
};

HttpServer::HttpServer(SessionManager& sessions, Health health,
                       std::optional<std::filesystem::path> static_dir, int threads)
    : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  const auto pool_size = static_cast<std::size_t>(std::max(1, threads));
  srv.new_task_queue = [pool_size] { return new httplib::ThreadPool(pool_size); };
  // Spelling correction is the per-token hot spot; a bounded body bounds the work per turn.
  srv.set_payload_max_length(kMaxBodyBytes);

  srv.Post("/sessions", [&sessions](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 201, reply_json(sessions.create())); });
  });

  srv.Post(R"(/sessions/([0-9a-f]+)/messages)",
           [&sessions](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] {
               const auto body = json::parse(req.body, nullptr, false);
               if (body.is_discarded() || !body.is_object() || !body.contains("text") ||
                   !body.at("text").is_string()) {
                 send_error(res, 400, "bad_request", "expected a JSON object with a string 'text'");
                 return;
               }
               const auto text = body.at("text").get<std::string>();
               send_json(res, 200, reply_json(sessions.post(req.matches[1], text)));
             });
           });

  srv.Get("/health", [&sessions, health](const httplib::Request&, httplib::Response& res) {
    send_json(res, health.ok() ? 200 : 503, health_json(health, sessions.active()));
  });

  if (static_dir) {
    if (!srv.set_mount_point("/", static_dir->string())) {
      spdlog::warn("http: static directory {} not found", static_dir->string());
    }
  }
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int chosen = srv.bind_to_any_port(host);
    if (chosen < 0) return false;
    port_ = chosen;
    return true;
  }
  if (!srv.bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void HttpServer::serve() {
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->stop_requested) return;
    impl_->serving = true;
  }
  impl_->server.listen_after_bind();
  std::lock_guard lock(impl_->mutex);
  impl_->serving = false;
}

void HttpServer::stop() {
  if (!impl_) return;
  std::lock_guard lock(impl_->mutex);
  impl_->stop_requested = true;
  if (impl_->serving) {
    impl_->server.wait_until_ready();
    impl_->server.stop();
  }
}

}  // namespace safechat::service
