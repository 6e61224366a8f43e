#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ae/expander.hpp"
#include "ae/prompt.hpp"

namespace ae {

struct SamplingConfig {
  double temperature = 1.0;
  int top_k_logits = 40;
  int num_samples = 128;
  int max_tokens = 16;
};

void to_json(nlohmann::json& j, const SamplingConfig& s);
void from_json(const nlohmann::json& j, SamplingConfig& s);

struct EndpointConfig {
  std::string url;    ///< e.g. http://localhost:8080/v1/complete
  std::string token;  ///< sent as "Authorization: Bearer <token>" when non-empty
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_multiplier = 2.0;
  std::chrono::seconds timeout{30};
  int max_in_flight = 8;

  /// Reads {url, token, max_retries, initial_backoff_ms, backoff_multiplier,
  /// timeout_s, max_in_flight}; AE_ENDPOINT_URL / AE_API_TOKEN override.
  static EndpointConfig from_json(const nlohmann::json& j);
  static EndpointConfig from_file(const std::string& path);
  static EndpointConfig from_env();
};

class RemoteError : public std::runtime_error {
 public:
  RemoteError(const std::string& what, bool retryable) : std::runtime_error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

/// The endpoint could not be reached (after retries) or kept failing with 5xx.
class TransportError : public RemoteError {
 public:
  TransportError(const std::string& what, int attempts) : RemoteError(what, true), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

/// The endpoint answered, but not with {samples: [...]} of the requested size.
class MalformedResponseError : public RemoteError {
 public:
  MalformedResponseError(const std::string& what, std::string excerpt)
      : RemoteError(what + ": " + excerpt, false), excerpt_(std::move(excerpt)) {}
  const std::string& excerpt() const { return excerpt_; }

 private:
  std::string excerpt_;
};

/// JSON-over-HTTP completion client. Request body:
///   {"prompt", "temperature", "top_k", "num_samples", "max_tokens"}
/// Response body: {"samples": [text, ...]}.
class RemoteClient {
 public:
  explicit RemoteClient(EndpointConfig config);

  /// Raw continuations, each cut at its first '}'. Transport failures and
  /// 5xx answers are retried with exponential backoff.
  std::vector<std::string> complete(const std::string& prompt, const SamplingConfig& sampling) const;

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  std::string host_;
  std::string path_;
  std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

std::vector<std::string> remote_expand(const RemoteClient& client, const PromptSpec& spec,
                                       const SamplingConfig& sampling, const ExpansionQuery& query);

class RemoteExpander final : public Expander {
 public:
  RemoteExpander(std::shared_ptr<const RemoteClient> client, PromptSpec spec, SamplingConfig sampling)
      : client_(std::move(client)), spec_(std::move(spec)), sampling_(sampling) {}

  ExpansionResult expand(const ExpansionQuery& query, std::uint64_t seed) const override;

 private:
  std::shared_ptr<const RemoteClient> client_;
  PromptSpec spec_;
  SamplingConfig sampling_;
};

}  // namespace ae
