#include "ae/remote.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

namespace ae {

void to_json(nlohmann::json& j, const SamplingConfig& s) {
  j = {{"temperature", s.temperature},
       {"top_k", s.top_k_logits},
       {"num_samples", s.num_samples},
       {"max_tokens", s.max_tokens}};
}

void from_json(const nlohmann::json& j, SamplingConfig& s) {
  s.temperature = j.value("temperature", 1.0);
  s.top_k_logits = j.value("top_k", 40);
  s.num_samples = j.value("num_samples", 128);
  s.max_tokens = j.value("max_tokens", 16);
}

EndpointConfig EndpointConfig::from_json(const nlohmann::json& j) {
  EndpointConfig c;
  c.url = j.value("url", "");
  c.token = j.value("token", "");
  c.max_retries = j.value("max_retries", c.max_retries);
  c.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", 200));
  c.backoff_multiplier = j.value("backoff_multiplier", c.backoff_multiplier);
  c.timeout = std::chrono::seconds(j.value("timeout_s", 30));
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  if (const char* u = std::getenv("AE_ENDPOINT_URL")) c.url = u;
  if (const char* t = std::getenv("AE_API_TOKEN")) c.token = t;
  return c;
}

EndpointConfig EndpointConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open endpoint config " + path);
  return from_json(nlohmann::json::parse(in));
}

EndpointConfig EndpointConfig::from_env() { return from_json(nlohmann::json::object()); }

RemoteClient::RemoteClient(EndpointConfig config) : config_(std::move(config)) {
  const auto scheme = config_.url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("endpoint url needs a scheme: " + config_.url);
  const auto slash = config_.url.find('/', scheme + 3);
  host_ = config_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.url.substr(slash);
  if (config_.max_in_flight < 1 || config_.max_in_flight > 1024)
    throw std::invalid_argument("max_in_flight must be in [1, 1024]");
  slots_ = std::make_unique<std::counting_semaphore<1024>>(config_.max_in_flight);
}

namespace {

std::string excerpt(const std::string& s) { return s.size() <= 200 ? s : s.substr(0, 200) + "..."; }

struct SlotGuard {
  std::counting_semaphore<1024>& sem;
  explicit SlotGuard(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
  ~SlotGuard() { sem.release(); }
};

}  // namespace

std::vector<std::string> RemoteClient::complete(const std::string& prompt,
                                                const SamplingConfig& sampling) const {
  SlotGuard guard(*slots_);
  const nlohmann::json body = {{"prompt", prompt},
                               {"temperature", sampling.temperature},
                               {"top_k", sampling.top_k_logits},
                               {"num_samples", sampling.num_samples},
                               {"max_tokens", sampling.max_tokens}};
  const auto payload = body.dump();

  httplib::Client cli(host_);
  cli.set_connection_timeout(config_.timeout);
  cli.set_read_timeout(config_.timeout);
  cli.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

  auto backoff = config_.initial_backoff;
  std::string last_error;
  const int attempts = config_.max_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else if (res->status != 200) {
      throw RemoteError("endpoint returned HTTP " + std::to_string(res->status) + ": " + excerpt(res->body),
                        false);
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception&) {
        throw MalformedResponseError("response is not JSON", excerpt(res->body));
      }
      if (!j.is_object() || !j.contains("samples") || !j["samples"].is_array())
        throw MalformedResponseError("response lacks a samples array", excerpt(res->body));
      const auto& arr = j["samples"];
      if (arr.size() != static_cast<std::size_t>(sampling.num_samples))
        throw MalformedResponseError("expected " + std::to_string(sampling.num_samples) + " samples, got " +
                                         std::to_string(arr.size()),
                                     excerpt(res->body));
      std::vector<std::string> out;
      out.reserve(arr.size());
      for (const auto& s : arr) {
        if (!s.is_string()) throw MalformedResponseError("non-string sample", excerpt(res->body));
        auto text = s.get<std::string>();
        if (auto close = text.find('}'); close != std::string::npos) text.resize(close);
        out.push_back(std::move(text));
      }
      return out;
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(backoff.count()) * config_.backoff_multiplier));
    }
  }
  throw TransportError("endpoint " + config_.url + " failed after " + std::to_string(attempts) +
                           " attempts: " + last_error,
                       attempts);
}

std::vector<std::string> remote_expand(const RemoteClient& client, const PromptSpec& spec,
                                       const SamplingConfig& sampling, const ExpansionQuery& query) {
  validate(query);
  return client.complete(build_prompt(spec, query), sampling);
}

ExpansionResult RemoteExpander::expand(const ExpansionQuery& query, std::uint64_t) const {
  return filter_and_rank(remote_expand(*client_, spec_, sampling_, query), query);
}

}  // namespace ae
