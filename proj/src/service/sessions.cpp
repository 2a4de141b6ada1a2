#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "safechat/error.hpp"
#include "safechat/service.hpp"

namespace safechat::service {

SessionManager::SessionManager(dialogue::Services services, std::shared_ptr<ReportStore> store,
                               SessionLimits limits, Now now)
    : services_(std::move(services)), store_(std::move(store)), limits_(limits), now_(std::move(now)) {
  if (limits_.max_sessions == 0) throw Error(Errc::invalid_config, "sessions: max_sessions is 0");
  services_.persist = [this](const dialogue::SessionContext& ctx) { persist(ctx); };
}

std::string SessionManager::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  // The counter suffix keeps ids unique for the service lifetime even if random bits collide.
  return fmt::format("{:016x}{:016x}{:08x}", rng(), rng(), ++id_counter_);
}

void SessionManager::sweep_locked(Clock::time_point now) {
  std::erase_if(sessions_, [&](const auto& kv) {
    std::unique_lock lock(kv.second->mutex, std::try_to_lock);
    return lock.owns_lock() && kv.second->next_ticket == kv.second->serving &&
           now > kv.second->updated + limits_.idle;
  });
}

Reply SessionManager::create() {
  const auto now = now_();
  std::lock_guard lock(mutex_);
  sweep_locked(now);
  if (sessions_.size() >= limits_.max_sessions) {
    throw Error(Errc::capacity, "sessions: capacity of " + std::to_string(limits_.max_sessions) +
                                    " sessions reached");
  }
  auto step = dialogue::start(services_);
  auto s = std::make_shared<Session>();
  s->id = new_id();
  s->state = step.state;
  s->ctx = std::move(step.context);
  s->created = s->updated = now;
  sessions_.emplace(s->id, s);
  return {std::move(step.replies), s->state, s->id};
}

Reply SessionManager::post(const std::string& id, std::string_view text) {
  std::shared_ptr<Session> s;
  {
    const auto now = now_();
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(Errc::unknown_session, "sessions: unknown session " + id);
    s = it->second;
    std::lock_guard session_lock(s->mutex);
    if (s->next_ticket == s->serving && now > s->updated + limits_.idle) {
      sessions_.erase(it);
      throw Error(Errc::expired_session, "sessions: session " + id + " expired");
    }
  }

  std::unique_lock lock(s->mutex);
  const auto ticket = s->next_ticket++;
  s->turn_cv.wait(lock, [&] { return s->serving == ticket; });
  // The turn is ours until serving advances; the mutex is released while the
  // dialogue runs so later arrivals can take their tickets.
  struct Release {
    Session& s;
    std::unique_lock<std::mutex>& lock;
    ~Release() {
      if (!lock.owns_lock()) lock.lock();
      ++s.serving;
      s.turn_cv.notify_all();
    }
  } release{*s, lock};

  if (s->state.phase == dialogue::Phase::ended) {
    throw Error(Errc::session_ended, "sessions: conversation " + id + " has ended");
  }
  const auto state = s->state;
  auto ctx = s->ctx;
  lock.unlock();
  auto step = dialogue::advance(state, std::move(ctx), text, services_);
  lock.lock();
  s->state = step.state;
  s->ctx = std::move(step.context);
  s->updated = now_();
  return {std::move(step.replies), s->state, s->id};
}

std::size_t SessionManager::active() {
  std::lock_guard lock(mutex_);
  sweep_locked(now_());
  return sessions_.size();
}

std::optional<dialogue::SessionContext> SessionManager::context(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  return s->ctx;
}

void SessionManager::persist(const dialogue::SessionContext& ctx) {
  if (!store_) {
    spdlog::error("store: consent given but no store is configured");
    ++store_failures_;
    return;
  }
  try {
    store_->append(make_report(ctx, now_()));
    ++stored_;
  } catch (const std::exception& ex) {
    // The user still gets the goodbye; the failure is an operator concern.
    spdlog::error("store: {}", ex.what());
    ++store_failures_;
  }
}

}  // namespace safechat::service
