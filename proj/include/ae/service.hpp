#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ae/dialog.hpp"
#include "ae/expander.hpp"

namespace httplib {
class Server;
}

namespace ae {

enum class Author { user, partner };

std::string_view to_string(Author a);
Author parse_author(std::string_view s);

struct SessionTurn {
  Author author = Author::partner;
  std::string text;
  bool manual = false;  ///< user turn typed in full instead of picked from the offered options
};

struct Session {
  std::string id;
  std::vector<SessionTurn> turns;
  std::string created_at;  ///< ISO-8601 UTC
  std::string backend;
  int k = 5;
  ContextMode context_mode = ContextMode::full;
};

nlohmann::json to_json(const Session& s);

/// Error surfaced to clients as {code, message, retryable}.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(std::string code, const std::string& message, int http_status, bool retryable = false)
      : std::runtime_error(message), code_(std::move(code)), status_(http_status), retryable_(retryable) {}
  const std::string& code() const { return code_; }
  int http_status() const { return status_; }
  bool retryable() const { return retryable_; }

 private:
  std::string code_;
  int status_;
  bool retryable_;
};

struct SessionExpansion {
  ExpansionResult result;
  ExpansionQuery query;  ///< exactly what the backend received
};

/// In-memory conversation sessions over a set of named backends.
///
/// Sessions are independent: each has its own lock, and a backend call for
/// one session never blocks another. With a journal directory, every
/// mutation is appended to `<dir>/<id>.jsonl` and replayed by recover().
class SessionStore {
 public:
  struct Options {
    std::optional<std::filesystem::path> journal_dir;
    std::uint64_t seed = 0;
  };

  using BackendMap = std::map<std::string, std::shared_ptr<const Expander>>;

  explicit SessionStore(BackendMap backends);
  SessionStore(BackendMap backends, Options options);

  Session create_session(const std::string& backend, int k = 5, ContextMode mode = ContextMode::full);
  Session add_turn(const std::string& id, Author author, const std::string& text);
  Session add_partner_turn(const std::string& id, const std::string& text) {
    return add_turn(id, Author::partner, text);
  }
  /// Leaves the transcript untouched. Options are remembered so that a later
  /// selection can be flagged manual when it was not offered.
  SessionExpansion expand_in_session(const std::string& id, const std::string& abbreviation, bool noisy,
                                     std::optional<int> k = std::nullopt);
  /// Appends `phrase` as a user turn; `manual` defaults to "not among the last offered options".
  Session select_option(const std::string& id, const std::string& phrase, std::optional<bool> manual = std::nullopt);
  Session get(const std::string& id) const;

  std::vector<std::string> backend_ids() const;
  std::size_t size() const;

  /// Reloads journaled sessions; returns how many were restored.
  std::size_t recover();

 private:
  struct Entry {
    mutable std::mutex mu;
    Session session;
    std::vector<std::string> last_offered;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void journal(const std::string& id, const nlohmann::json& event) const;
  std::string new_id();

  BackendMap backends_;
  Options options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex id_mu_;
  std::uint64_t id_counter_ = 0;
  std::uint64_t id_salt_;
};

/// JSON/HTTP routes:
///   POST /sessions                 {backend?, k?, context_mode?} -> session
///   POST /sessions/{id}/turns      {author, text}                -> session
///   POST /sessions/{id}/expand     {abbreviation, noisy?, k?}    -> {options, context}
///   POST /sessions/{id}/select     {phrase, manual?}             -> session
///   GET  /sessions/{id}                                          -> session
/// Errors are {code, message, retryable}. Every response carries CORS headers.
void register_routes(httplib::Server& server, SessionStore& store, std::string default_backend,
                     std::string cors_origin = "*");

}  // namespace ae
