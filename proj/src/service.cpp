#include "ae/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <httplib.h>

#include "ae/harness.hpp"
#include "ae/remote.hpp"

namespace ae {

std::string_view to_string(Author a) { return a == Author::user ? "user" : "partner"; }

Author parse_author(std::string_view s) {
  if (s == "user") return Author::user;
  if (s == "partner") return Author::partner;
  throw ServiceError("invalid_argument", "author must be 'user' or 'partner'", 400);
}

nlohmann::json to_json(const Session& s) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : s.turns) {
    nlohmann::json jt = {{"author", to_string(t.author)}, {"text", t.text}};
    if (t.author == Author::user) jt["manual"] = t.manual;
    turns.push_back(std::move(jt));
  }
  return {{"id", s.id},
          {"turns", turns},
          {"created_at", s.created_at},
          {"backend", s.backend},
          {"k", s.k},
          {"context_mode", to_string(s.context_mode)}};
}

namespace {

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

ServiceError not_found(const std::string& id) { return ServiceError("not_found", "unknown session: " + id, 404); }

}  // namespace

SessionStore::SessionStore(BackendMap backends) : SessionStore(std::move(backends), Options{}) {}

SessionStore::SessionStore(BackendMap backends, Options options)
    : backends_(std::move(backends)), options_(std::move(options)), id_salt_(std::random_device{}()) {
  id_salt_ = (id_salt_ << 32) ^ std::random_device{}();
  if (options_.journal_dir) std::filesystem::create_directories(*options_.journal_dir);
}

std::string SessionStore::new_id() {
  std::uint64_t n;
  {
    std::lock_guard lock(id_mu_);
    n = ++id_counter_;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << derive_seed(id_salt_, "session", n) << std::setw(4)
     << (n & 0xffff);
  return os.str();
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw not_found(id);
  return it->second;
}

void SessionStore::journal(const std::string& id, const nlohmann::json& event) const {
  if (!options_.journal_dir) return;
  std::ofstream out(*options_.journal_dir / (id + ".jsonl"), std::ios::app);
  out << event.dump() << '\n';
}

Session SessionStore::create_session(const std::string& backend, int k, ContextMode mode) {
  if (!backends_.count(backend)) throw ServiceError("unknown_backend", "unknown backend: " + backend, 400);
  if (k < 1) throw ServiceError("invalid_argument", "k must be >= 1", 400);
  auto entry = std::make_shared<Entry>();
  entry->session.id = new_id();
  entry->session.created_at = now_iso8601();
  entry->session.backend = backend;
  entry->session.k = k;
  entry->session.context_mode = mode;
  Session copy = entry->session;
  {
    std::unique_lock lock(mu_);
    sessions_.emplace(copy.id, std::move(entry));
  }
  journal(copy.id, {{"event", "create"},
                    {"backend", backend},
                    {"k", k},
                    {"context_mode", to_string(mode)},
                    {"created_at", copy.created_at}});
  return copy;
}

Session SessionStore::add_turn(const std::string& id, Author author, const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ServiceError("invalid_argument", "turn text must not be empty", 400);
  auto e = find(id);
  std::lock_guard lock(e->mu);
  e->session.turns.push_back({author, text, false});
  journal(id, {{"event", "turn"}, {"author", to_string(author)}, {"text", text}, {"manual", false}});
  return e->session;
}

SessionExpansion SessionStore::expand_in_session(const std::string& id, const std::string& abbreviation,
                                                 bool noisy, std::optional<int> k) {
  if (abbreviation.empty()) throw ServiceError("invalid_argument", "abbreviation must not be empty", 400);
  if (abbreviation.find_first_of(" \t\r\n") != std::string::npos)
    throw ServiceError("invalid_argument", "abbreviation must not contain whitespace", 400);
  auto e = find(id);

  SessionExpansion out;
  std::shared_ptr<const Expander> backend;
  std::size_t turn_count;
  {
    std::lock_guard lock(e->mu);
    std::vector<std::string> history;
    for (const auto& t : e->session.turns) history.push_back(t.text);
    out.query.context = select_context(history, e->session.context_mode);
    out.query.k = k.value_or(e->session.k);
    backend = backends_.at(e->session.backend);
    turn_count = e->session.turns.size();
  }
  if (out.query.k < 1) throw ServiceError("invalid_argument", "k must be >= 1", 400);
  out.query.abbreviation = abbreviation;
  out.query.noisy = noisy;

  std::uint64_t seed = derive_seed(options_.seed, abbreviation, turn_count);
  try {
    out.result = backend->expand(out.query, seed);
  } catch (const RemoteError& err) {
    throw ServiceError("backend_error", err.what(), 502, err.retryable());
  } catch (const std::invalid_argument& err) {
    throw ServiceError("invalid_argument", err.what(), 400);
  } catch (const std::exception& err) {
    throw ServiceError("backend_error", err.what(), 502, false);
  }

  std::lock_guard lock(e->mu);
  e->last_offered.clear();
  for (const auto& o : out.result.options) e->last_offered.push_back(o.phrase);
  return out;
}

Session SessionStore::select_option(const std::string& id, const std::string& phrase, std::optional<bool> manual) {
  if (phrase.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ServiceError("invalid_argument", "phrase must not be empty", 400);
  auto e = find(id);
  std::lock_guard lock(e->mu);
  const bool offered = std::find(e->last_offered.begin(), e->last_offered.end(),
                                 normalize_phrase(phrase).normalized) != e->last_offered.end();
  const bool is_manual = manual.value_or(!offered);
  e->session.turns.push_back({Author::user, phrase, is_manual});
  e->last_offered.clear();
  journal(id, {{"event", "turn"}, {"author", "user"}, {"text", phrase}, {"manual", is_manual}});
  return e->session;
}

Session SessionStore::get(const std::string& id) const {
  auto e = find(id);
  std::lock_guard lock(e->mu);
  return e->session;
}

std::vector<std::string> SessionStore::backend_ids() const {
  std::vector<std::string> ids;
  for (const auto& [k, v] : backends_) ids.push_back(k);
  return ids;
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

std::size_t SessionStore::recover() {
  if (!options_.journal_dir) return 0;
  std::size_t restored = 0;
  for (const auto& file : std::filesystem::directory_iterator(*options_.journal_dir)) {
    if (file.path().extension() != ".jsonl") continue;
    auto entry = std::make_shared<Entry>();
    entry->session.id = file.path().stem().string();
    std::ifstream in(file.path());
    std::string line;
    bool created = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json ev;
      try {
        ev = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        break;  // torn final write
      }
      const auto kind = ev.value("event", "");
      if (kind == "create") {
        entry->session.backend = ev.value("backend", "");
        entry->session.k = ev.value("k", 5);
        entry->session.context_mode = parse_context_mode(ev.value("context_mode", std::string("full")));
        entry->session.created_at = ev.value("created_at", "");
        created = true;
      } else if (kind == "turn") {
        entry->session.turns.push_back({parse_author(ev.value("author", "partner")), ev.value("text", ""),
                                        ev.value("manual", false)});
      }
    }
    if (!created || !backends_.count(entry->session.backend)) continue;
    std::unique_lock lock(mu_);
    if (sessions_.emplace(entry->session.id, entry).second) ++restored;
  }
  return restored;
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ServiceError& err) {
  send_json(res, err.http_status(), {{"code", err.code()}, {"message", err.what()}, {"retryable", err.retryable()}});
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw ServiceError("invalid_argument", "request body must be a JSON object", 400);
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ServiceError("invalid_argument", std::string("malformed JSON: ") + e.what(), 400);
  }
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e);
    } catch (const nlohmann::json::exception& e) {
      send_error(res, ServiceError("invalid_argument", e.what(), 400));
    } catch (const std::invalid_argument& e) {
      send_error(res, ServiceError("invalid_argument", e.what(), 400));
    } catch (const std::exception& e) {
      send_error(res, ServiceError("internal", e.what(), 500));
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, SessionStore& store, std::string default_backend,
                     std::string cors_origin) {
  server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/sessions", guarded([&store, default_backend](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const auto mode = parse_context_mode(body.value("context_mode", std::string("full")));
                const auto s = store.create_session(body.value("backend", default_backend), body.value("k", 5), mode);
                send_json(res, 201, to_json(s));
              }));

  server.Get(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, to_json(store.get(req.matches[1])));
             }));

  server.Post(R"(/sessions/([^/]+)/turns)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const auto author = parse_author(body.value("author", std::string("partner")));
                send_json(res, 200, to_json(store.add_turn(req.matches[1], author, body.at("text").get<std::string>())));
              }));

  server.Post(R"(/sessions/([^/]+)/expand)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                std::optional<int> k;
                if (body.contains("k")) k = body["k"].get<int>();
                const auto out = store.expand_in_session(req.matches[1], body.at("abbreviation").get<std::string>(),
                                                         body.value("noisy", false), k);
                nlohmann::json options = nlohmann::json::array();
                for (const auto& o : out.result.options) options.push_back({{"phrase", o.phrase}, {"count", o.count}});
                send_json(res, 200, {{"options", options}, {"context", out.query.context}});
              }));

  server.Post(R"(/sessions/([^/]+)/select)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                std::optional<bool> manual;
                if (body.contains("manual")) manual = body["manual"].get<bool>();
                send_json(res, 200,
                          to_json(store.select_option(req.matches[1], body.at("phrase").get<std::string>(), manual)));
              }));
}

}  // namespace ae
