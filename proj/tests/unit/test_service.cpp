#include <doctest.h>

#include <algorithm>
#include <barrier>
#include <fstream>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/service.hpp"
#include "scenarios.hpp"

using namespace safechat;
using namespace safechat::service;
using nlohmann::json;

namespace {

struct World {
  ner::Gazetteer gazetteer = ner::Gazetteer::load(support::data_dir() / "gazetteer.csv",
                                                  support::data_dir() / "gazetteer_stoplist.txt");
  dialogue::Phrases phrases = dialogue::Phrases::load(support::data_dir() / "phrases.json");
  dialogue::GuidanceDirectory guidance =
      dialogue::GuidanceDirectory::load(support::data_dir() / "guidance.json");

  dialogue::Services services(std::chrono::milliseconds extract_delay = {}) const {
    dialogue::Services s;
    s.classify = support::keyword_classifier;
    s.extract = [this, extract_delay](std::string_view text) {
      if (extract_delay.count() > 0) std::this_thread::sleep_for(extract_delay);
      return ner::extract_all(text, support::scenario_ref(), gazetteer, nullptr);
    };
    s.phrases = &phrases;
    s.guidance = &guidance;
    return s;
  }
};

const World& world() {
  static const World w;
  return w;
}

StoredReport sample_report() {
  StoredReport r;
  r.intents.insert(classify::HarassmentType::physical);
  r.intents.insert(classify::HarassmentType::verbal);
  r.location = "Maastricht";
  r.date = "2019-07-05";
  r.probabilities = {0.91, 0.12, 0.875, 0.3};
  r.consent_timestamp = "2019-07-06T10:00:00Z";
  return r;
}

Errc error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::io;
}

// Fake clock for idle expiry.
struct FakeClock {
  std::shared_ptr<std::atomic<long long>> seconds = std::make_shared<std::atomic<long long>>(1'000'000);
  SessionManager::Now fn() const {
    return [s = seconds] { return Clock::time_point(std::chrono::seconds(s->load())); };
  }
};

}  // namespace

TEST_CASE("stored report round-trips through one JSON line") {
  const auto r = sample_report();
  const auto line = to_json_line(r);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line.rfind(R"({"schema_version":1,"intents":["PHYSICAL","VERBAL"])", 0) == 0);
  CHECK(line.find(R"("time":null)") != std::string::npos);
  CHECK(report_from_json(line) == r);
  CHECK_THROWS_AS(report_from_json("{not json"), Error);
}

TEST_CASE("iso_utc formats whole seconds in UTC") {
  CHECK(iso_utc(Clock::time_point(std::chrono::seconds(0))) == "1970-01-01T00:00:00Z");
  CHECK(iso_utc(Clock::time_point(std::chrono::seconds(1562407200))) == "2019-07-06T10:00:00Z");
}

TEST_CASE("store appends records and ignores a partial tail line") {
  support::TempDir dir("store");
  ReportStore store(dir / "nested" / "reports.jsonl");
  CHECK(store.read_all().empty());
  CHECK(store.writable());
  auto a = sample_report();
  auto b = sample_report();
  b.location.reset();
  b.time = "22:00";
  store.append(a);
  store.append(b);
  {
    std::ofstream out(store.path(), std::ios::app | std::ios::binary);
    out << R"({"schema_version":1,"intents":["phys)";
  }
  const auto all = store.read_all();
  REQUIRE(all.size() == 2);
  CHECK(all[0] == a);
  CHECK(all[1] == b);
}

TEST_CASE("sessions get distinct ids and respect the capacity") {
  SessionManager many(world().services(), nullptr, {});
  std::set<std::string> ids;
  for (int i = 0; i < 50; ++i) {
    const auto r = many.create();
    CHECK(r.session_id.size() == 40);
    CHECK(r.session_id.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(r.state == dialogue::DialogueState::at(dialogue::Phase::await_incident));
    CHECK_FALSE(r.replies.empty());
    ids.insert(r.session_id);
  }
  CHECK(ids.size() == 50);
  CHECK(many.active() == 50);

  SessionManager one(world().services(), nullptr, {.max_sessions = 1});
  one.create();
  CHECK(error_code([&] { one.create(); }) == Errc::capacity);
  CHECK_THROWS_AS(SessionManager(world().services(), nullptr, {.max_sessions = 0}), Error);
}

TEST_CASE("unknown, expired and ended sessions are rejected") {
  FakeClock clock;
  support::TempDir dir("sessions");
  auto store = std::make_shared<ReportStore>(dir / "reports.jsonl");
  SessionManager sm(world().services(), store, {.max_sessions = 10, .idle = std::chrono::seconds(60)},
                    clock.fn());

  CHECK(error_code([&] { sm.post("00ff", "hi"); }) == Errc::unknown_session);

  const auto idle = sm.create().session_id;
  *clock.seconds += 61;
  CHECK(error_code([&] { sm.post(idle, "hello"); }) == Errc::expired_session);
  CHECK(error_code([&] { sm.post(idle, "hello"); }) == Errc::unknown_session);

  const auto id = sm.create().session_id;
  Reply last;
  for (const auto& line : support::read_script("scenario1")) {
    *clock.seconds += 30;  // activity keeps the session alive past the idle limit
    last = sm.post(id, line);
  }
  CHECK(last.state == dialogue::DialogueState::at(dialogue::Phase::ended));
  CHECK(error_code([&] { sm.post(id, "one more thing"); }) == Errc::session_ended);
  CHECK(sm.stored() == 1);
  CHECK(sm.store_failures() == 0);
  const auto reports = store->read_all();
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].location == std::optional<std::string>("Maastricht"));
  CHECK(reports[0].date == std::optional<std::string>("2019-07-05"));
  CHECK(reports[0].intents.contains(classify::HarassmentType::physical));
}

TEST_CASE("idle sessions are swept when new ones arrive") {
  FakeClock clock;
  SessionManager sm(world().services(), nullptr, {.max_sessions = 2, .idle = std::chrono::seconds(60)},
                    clock.fn());
  sm.create();
  sm.create();
  CHECK(error_code([&] { sm.create(); }) == Errc::capacity);
  *clock.seconds += 61;
  CHECK_NOTHROW(sm.create());
  CHECK(sm.active() == 1);
}

TEST_CASE("consent without a store counts a failure and still says goodbye") {
  SessionManager sm(world().services(), nullptr, {});
  const auto id = sm.create().session_id;
  Reply last;
  for (const auto& line : support::read_script("scenario1")) last = sm.post(id, line);
  CHECK(last.state == dialogue::DialogueState::at(dialogue::Phase::ended));
  CHECK_FALSE(last.replies.empty());
  CHECK(sm.stored() == 0);
  CHECK(sm.store_failures() == 1);
}

TEST_CASE("concurrent posts to one session run one at a time") {
  const auto& w = world();
  const std::string incident = "A man kept staring at me and followed me for a long time";
  const std::string answer = "I do not know";
  constexpr std::size_t kPosts = 6;

  SessionManager serial(w.services(), nullptr, {});
  const auto sid = serial.create().session_id;
  serial.post(sid, incident);
  std::vector<std::string> serial_states;
  for (std::size_t i = 0; i < kPosts; ++i) {
    serial_states.push_back(dialogue::to_string(serial.post(sid, answer).state));
  }
  const auto expected = *serial.context(sid);

  // A slow extractor widens the window in which unserialized turns would read the same context.
  SessionManager sm(w.services(std::chrono::milliseconds(10)), nullptr, {});
  const auto id = sm.create().session_id;
  sm.post(id, incident);
  std::vector<std::string> states(kPosts);
  std::barrier start(static_cast<std::ptrdiff_t>(kPosts));
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < kPosts; ++i) {
    threads.emplace_back([&, i] {
      start.arrive_and_wait();
      states[i] = dialogue::to_string(sm.post(id, answer).state);
    });
  }
  for (auto& t : threads) t.join();

  const auto got = *sm.context(id);
  CHECK(got.transcript == expected.transcript);
  CHECK(got.accumulated_text == expected.accumulated_text);
  std::sort(states.begin(), states.end());
  std::sort(serial_states.begin(), serial_states.end());
  CHECK(states == serial_states);
}

TEST_CASE("stored reports carry no user text beyond slot values") {
  support::TempDir dir("leak");
  auto store = std::make_shared<ReportStore>(dir / "reports.jsonl");
  SessionManager sm(world().services(), store, {});
  const auto id = sm.create().session_id;
  const std::vector<std::string> inputs = {
      "Hi, I am Johanna Verbeek and my number is 0612345678",
      "Yesterday at 10pm a man grabbed me and touched me against my will in Maastricht",
      "yes", "yes", "yes", "no", "yes", "no", "yes"};
  for (const auto& line : inputs) sm.post(id, line);
  REQUIRE(store->read_all().size() == 1);
  const auto line = io::read_file(store->path());
  const auto r = store->read_all().front();
  // Any 8-byte window of what the user typed may appear only inside a slot value.
  for (const auto& input : inputs) {
    for (std::size_t i = 0; i + 8 <= input.size(); ++i) {
      const auto window = input.substr(i, 8);
      if (line.find(window) == std::string::npos) continue;
      const bool in_slot = (r.location && r.location->find(window) != std::string::npos) ||
                           (r.date && r.date->find(window) != std::string::npos) ||
                           (r.time && r.time->find(window) != std::string::npos);
      CHECK_MESSAGE(in_slot, "stored line leaks '" << window << "'");
    }
  }
  CHECK(line.find(id) == std::string::npos);
  CHECK(line.find("Johanna") == std::string::npos);
}

TEST_CASE("config rejects bad keys by name and takes env overrides") {
  const json base = {{"bundle", "m.mtmb"},       {"gazetteer", "g.csv"}, {"phrases", "p.json"},
                     {"guidance", "guide.json"}, {"store", "r.jsonl"}};
  const auto cfg = ServiceConfig::from_json(base, "/srv/safechat");
  CHECK(cfg.bundle == std::filesystem::path("/srv/safechat/m.mtmb"));
  CHECK(cfg.port == 8080);
  CHECK(cfg.host == "127.0.0.1");

  auto message = [&](json j) -> std::string {
    try {
      ServiceConfig::from_json(j, ".").validate();
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_config);
      return e.what();
    }
    return {};
  };
  auto with = [&](const char* key, json v) {
    auto j = base;
    j[key] = std::move(v);
    return j;
  };
  CHECK(message(with("colour", "blue")).find("'colour'") != std::string::npos);
  CHECK(message(with("port", 70000)).find("'port'") != std::string::npos);
  CHECK(message(with("port", "80")).find("'port'") != std::string::npos);
  CHECK(message(with("live_kb", 1)).find("'live_kb'") != std::string::npos);
  auto missing = base;
  missing.erase("store");
  CHECK(message(missing).find("'store'") != std::string::npos);

  std::map<std::string, std::string> env = {{"SAFECHAT_PORT", "9191"}, {"SAFECHAT_STORE", "/tmp/x.jsonl"}};
  auto getenv_fn = [&](const char* k) -> const char* {
    const auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  auto over = cfg;
  over.apply_env(getenv_fn);
  CHECK(over.port == 9191);
  CHECK(over.store == std::filesystem::path("/tmp/x.jsonl"));
  env["SAFECHAT_PORT"] = "eighty";
  CHECK_THROWS_AS(over.apply_env(getenv_fn), Error);
}

TEST_CASE("config files resolve paths against their directory") {
  support::TempDir dir("config");
  io::write_file(dir / "service.json",
                 R"({"bundle":"m.mtmb","gazetteer":"g.csv","phrases":"p.json","guidance":"x.json",)"
                 R"("store":"out/r.jsonl","port":0,"threads":2})");
  const auto cfg = ServiceConfig::load(dir / "service.json");
  CHECK(cfg.store == dir / "out/r.jsonl");
  CHECK(cfg.threads == 2);
  io::write_file(dir / "broken.json", "{");
  CHECK_THROWS_AS(ServiceConfig::load(dir / "broken.json"), Error);
}

namespace {

Health healthy() {
  Health h;
  for (auto* s : {&h.model, &h.gazetteer, &h.phrases, &h.guidance, &h.store}) *s = {true, "ok"};
  return h;
}

struct Served {
  SessionManager& sessions;
  HttpServer server;
  httplib::Client client;
  std::thread thread;

  Served(SessionManager& sm, Health health)
      : sessions(sm), server(sm, std::move(health), std::nullopt, 4), client("127.0.0.1", bound_port()) {
    thread = std::thread([this] { server.serve(); });
  }
  int bound_port() {
    if (!server.bind("127.0.0.1", 0)) throw std::runtime_error("cannot bind a test port");
    return server.port();
  }
  ~Served() {
    server.stop();
    thread.join();
  }
};

json body_of(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

TEST_CASE("http endpoints speak the JSON wire protocol") {
  SessionManager sm(world().services(), nullptr, {.max_sessions = 2});
  Served s(sm, healthy());

  auto health = s.client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(body_of(health)["status"] == "ok");
  CHECK(body_of(health)["model"]["loaded"] == true);

  auto created = s.client.Post("/sessions", "", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(created->get_header_value("Content-Type").rfind("application/json", 0) == 0);
  const auto c = body_of(created);
  const auto id = c.at("session_id").get<std::string>();
  CHECK(c.at("state") == "AWAIT_INCIDENT");
  REQUIRE(c.at("replies").is_array());
  REQUIRE_FALSE(c.at("replies").empty());
  CHECK(c["replies"][0].at("text").is_string());
  CHECK(c["replies"][0].at("kind").is_string());

  const auto path = "/sessions/" + id + "/messages";
  auto reply = s.client.Post(path, json{{"text", "A man kept staring at me"}}.dump(), "application/json");
  REQUIRE(reply);
  CHECK(reply->status == 200);
  CHECK(body_of(reply).at("session_id") == id);
  CHECK(body_of(reply).at("state").get<std::string>().rfind("ASK_SLOT", 0) == 0);

  auto err = [&](const std::string& p, const std::string& body) {
    auto r = s.client.Post(p, body, "application/json");
    REQUIRE(r);
    const auto j = json::parse(r->body, nullptr, false);
    const auto code = j.is_object() && j.contains("error") ? j["error"].value("code", "") : std::string();
    return std::pair{r->status, code};
  };
  CHECK(err(path, "not json") == std::pair{400, std::string("bad_request")});
  CHECK(err(path, R"({"text":5})") == std::pair{400, std::string("bad_request")});
  CHECK(err(path, R"(["text"])") == std::pair{400, std::string("bad_request")});
  CHECK(err(path, json{{"text", std::string(HttpServer::kMaxBodyBytes, 'a')}}.dump()).first == 413);
  CHECK(err("/sessions/abc123/messages", R"({"text":"hi"})") ==
        std::pair{404, std::string("unknown_session")});

  s.client.Post("/sessions", "", "application/json");
  CHECK(err("/sessions", "") == std::pair{503, std::string("capacity")});
  CHECK(body_of(s.client.Get("/health"))["sessions"] == 2);
}

TEST_CASE("http reports an ended conversation as a conflict") {
  SessionManager sm(world().services(), nullptr, {});
  Served s(sm, healthy());
  const auto id = body_of(s.client.Post("/sessions", "", "application/json"))["session_id"].get<std::string>();
  const auto path = "/sessions/" + id + "/messages";
  for (const auto& line : support::read_script("scenario3")) {
    REQUIRE(s.client.Post(path, json{{"text", line}}.dump(), "application/json")->status == 200);
  }
  auto r = s.client.Post(path, R"({"text":"hello?"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 409);
  CHECK(body_of(r)["error"]["code"] == "session_ended");
}

TEST_CASE("http health is 503 when a component failed to load") {
  SessionManager sm(world().services(), nullptr, {});
  auto h = healthy();
  h.store = {false, "cannot write /nope/reports.jsonl"};
  Served s(sm, h);
  auto r = s.client.Get("/health");
  REQUIRE(r);
  CHECK(r->status == 503);
  const auto j = body_of(r);
  CHECK(j["status"] == "degraded");
  CHECK(j["store"]["loaded"] == false);
  CHECK(j["store"]["detail"] == "cannot write /nope/reports.jsonl");
}
