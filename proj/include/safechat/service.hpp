#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "safechat/dialogue.hpp"

// Session-keyed chat service over the dialogue machine, with consent-gated
// anonymized persistence.
namespace safechat::service {

using Clock = std::chrono::system_clock;

// ---- stored report ------------------------------------------------------------

inline constexpr int kSchemaVersion = 1;

// Normalized values only: no message text, names or session ids.
struct StoredReport {
  int schema_version = kSchemaVersion;
  classify::TypeSet intents;
  std::optional<std::string> location;
  std::optional<std::string> date;  // ISO calendar date
  std::optional<std::string> time;  // "HH:MM", "HH:MM (am/pm unclear)" or a bucket name
  std::array<double, 4> probabilities{};  // indexed by classify::Task
  std::string consent_timestamp;          // ISO 8601 UTC

  bool operator==(const StoredReport&) const = default;
};

// Only confirmed slots are kept.
StoredReport make_report(const dialogue::SessionContext& ctx, Clock::time_point consent_time);

// One line of JSON, schema_version first.
std::string to_json_line(const StoredReport& r);
StoredReport report_from_json(std::string_view line);

std::string iso_utc(Clock::time_point t);

// Append-only JSONL file. Each record goes out in a single O_APPEND write, so
// concurrent writers never interleave and a crash leaves at most one partial tail line.
class ReportStore {
 public:
  explicit ReportStore(std::filesystem::path path);

  void append(const StoredReport& r);
  // Complete records only; a truncated final line is ignored.
  std::vector<StoredReport> read_all() const;
  const std::filesystem::path& path() const noexcept { return path_; }
  bool writable() const;

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

// ---- configuration -----------------------------------------------------------------

struct ServiceConfig {
  std::filesystem::path bundle;
  std::filesystem::path gazetteer;
  std::optional<std::filesystem::path> gazetteer_stoplist;
  std::filesystem::path phrases;
  std::filesystem::path guidance;
  std::filesystem::path store;
  std::optional<std::filesystem::path> kb_fixture;
  std::optional<std::filesystem::path> static_dir;
  std::optional<std::filesystem::path> resources;  // preprocessing lexicon directory
  bool live_kb = false;
  ner::WikidataConfig kb;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_sessions = 1000;
  int idle_minutes = 30;
  int gate_cap = 10;
  int threads = 8;

  // Relative paths resolve against the config file's directory. Unknown keys and
  // wrong types are rejected with the offending key in the message.
  static ServiceConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static ServiceConfig load(const std::filesystem::path& path);
  // SAFECHAT_PORT and SAFECHAT_STORE override the file.
  void apply_env(const std::function<const char*(const char*)>& getenv_fn);
  void validate() const;
};

// ---- sessions --------------------------------------------------------------------

struct Reply {
  std::vector<dialogue::BotReply> replies;
  dialogue::DialogueState state;
  std::string session_id;
};

struct SessionLimits {
  std::size_t max_sessions = 1000;
  std::chrono::seconds idle{30 * 60};
};

// Sessions share the read-only services; each session's turns run one at a time
// in arrival (ticket) order.
class SessionManager {
 public:
  using Now = std::function<Clock::time_point()>;

  SessionManager(dialogue::Services services, std::shared_ptr<ReportStore> store,
                 SessionLimits limits, Now now = [] { return Clock::now(); });

  Reply create();
  Reply post(const std::string& id, std::string_view text);

  std::size_t active();
  std::size_t stored() const noexcept { return stored_.load(); }
  std::size_t store_failures() const noexcept { return store_failures_.load(); }

  // Snapshot for tests and diagnostics.
  std::optional<dialogue::SessionContext> context(const std::string& id);

 private:
  struct Session {
    std::string id;
    dialogue::DialogueState state;
    dialogue::SessionContext ctx;
    Clock::time_point created;
    Clock::time_point updated;
    std::mutex mutex;
    std::condition_variable turn_cv;
    std::uint64_t next_ticket = 0;
    std::uint64_t serving = 0;
  };

  std::string new_id();
  void sweep_locked(Clock::time_point now);
  void persist(const dialogue::SessionContext& ctx);

  dialogue::Services services_;
  std::shared_ptr<ReportStore> store_;
  SessionLimits limits_;
  Now now_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t id_counter_ = 0;
  std::atomic<std::size_t> stored_{0};
  std::atomic<std::size_t> store_failures_{0};
};

// ---- HTTP ---------------------------------------------------------------------------

struct LoadStatus {
  bool loaded = false;
  std::string detail;  // path, entry count or error
};

struct Health {
  LoadStatus model;
  LoadStatus gazetteer;
  LoadStatus phrases;
  LoadStatus guidance;
  LoadStatus store;
  bool ok() const noexcept {
    return model.loaded && gazetteer.loaded && phrases.loaded && guidance.loaded && store.loaded;
  }
};

nlohmann::json health_json(const Health& h, std::size_t active_sessions);
nlohmann::json reply_json(const Reply& r);

// POST /sessions, POST /sessions/{id}/messages, GET /health, and static files under /.
class HttpServer {
 public:
  static constexpr std::size_t kMaxBodyBytes = 64 * 1024;
  HttpServer(SessionManager& sessions, Health health,
             std::optional<std::filesystem::path> static_dir = std::nullopt, int threads = 8);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns false when the address is in use.
  bool bind(const std::string& host, int port);
  int port() const noexcept { return port_; }
  // Blocks until stop(); in-flight requests complete before it returns.
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace safechat::service
