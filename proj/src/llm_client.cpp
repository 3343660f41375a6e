#include "xes/llm_client.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "xes/errors.hpp"

namespace xes::llm {

using nlohmann::json;

MockChatClient::MockChatClient(std::vector<std::string> script) : script_(std::move(script)) {
  if (script_.empty()) throw std::invalid_argument("MockChatClient: script is empty");
}

ChatResponse MockChatClient::complete(const ModelSpec& spec, const prompt::PromptBundle& bundle) {
  check_context_fit(spec, bundle);
  std::lock_guard lock(mutex_);
  ChatResponse response;
  response.text = script_[next_];
  next_ = (next_ + 1) % script_.size();
  response.model_name = spec.model_name;
  return response;
}

std::string build_request_body(const ModelSpec& spec, const prompt::PromptBundle& bundle) {
  json body;
  body["model"] = spec.model_name;
  body["messages"] = json::array({{{"role", "user"}, {"content", bundle.text}}});
  body["temperature"] = spec.temperature;
  body["max_tokens"] = spec.max_output_tokens;
  return body.dump();
}

ChatResponse parse_response_body(const std::string& body, const ModelSpec& spec) {
  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("chat response is not valid JSON: ") + e.what());
  }
  if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty()) {
    throw std::runtime_error("chat response has no choices");
  }
  const json& message = parsed["choices"][0].value("message", json::object());
  if (!message.contains("content") || !message["content"].is_string()) {
    throw std::runtime_error("chat response has no message content");
  }
  ChatResponse response;
  response.text = message["content"].get<std::string>();
  response.model_name = parsed.value("model", spec.model_name);
  if (parsed.contains("usage") && parsed["usage"].is_object()) {
    const json& usage = parsed["usage"];
    if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number()) {
      response.prompt_tokens = usage["prompt_tokens"].get<long>();
    }
    if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number()) {
      response.completion_tokens = usage["completion_tokens"].get<long>();
    }
  }
  return response;
}

std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const std::size_t scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("base_url must start with a scheme: " + base_url);
  }
  const std::size_t path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string origin = base_url.substr(0, path_start);
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {origin, prefix};
}

std::chrono::milliseconds retry_delay(int attempt, double jitter_u) {
  const double base = 1000.0 * std::pow(2.0, attempt);
  const double jitter = 1.0 + 0.2 * (2.0 * jitter_u - 1.0);  // within [0.8, 1.2]
  return std::chrono::milliseconds(static_cast<long>(base * jitter));
}

void check_context_fit(const ModelSpec& spec, const prompt::PromptBundle& bundle) {
  if (bundle.token_estimate > spec.context_length) {
    throw ContextOverflowError(bundle.token_estimate, spec.context_length);
  }
}

std::optional<std::string> api_key_for(const ModelSpec& spec) {
  if (spec.api_key_env.empty()) {
    const char* fallback = std::getenv(kDefaultApiKeyEnv);
    if (fallback != nullptr && *fallback != '\0') return std::string(fallback);
    return std::nullopt;
  }
  const char* value = std::getenv(spec.api_key_env.c_str());
  if (value == nullptr || *value == '\0') {
    throw std::runtime_error("API key environment variable " + spec.api_key_env + " is not set");
  }
  return std::string(value);
}

ChatResponse HttpChatClient::complete(const ModelSpec& spec, const prompt::PromptBundle& bundle) {
  check_context_fit(spec, bundle);
  const std::optional<std::string> api_key = api_key_for(spec);
  const auto [origin, prefix] = split_base_url(spec.base_url);
  const std::string path = prefix + "/chat/completions";
  const std::string payload = build_request_body(spec, bundle);

  httplib::Client client(origin);
  client.set_connection_timeout(spec.request_timeout);
  client.set_read_timeout(spec.request_timeout);
  client.set_write_timeout(spec.request_timeout);
  httplib::Headers headers;
  if (api_key) headers.emplace("Authorization", "Bearer " + *api_key);

  std::mt19937_64 jitter_rng(std::random_device{}());
  std::string last_error;
  for (int attempt = 0;; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    httplib::Result result = client.Post(path, headers, payload, "application/json");
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    if (result) {
      if (result->status >= 200 && result->status < 300) {
        ChatResponse response = parse_response_body(result->body, spec);
        response.latency = latency;
        return response;
      }
      if (result->status < 500) throw HttpError(result->status, result->body);
      last_error = "HTTP status " + std::to_string(result->status);
      if (attempt >= spec.max_retries) throw HttpError(result->status, result->body);
    } else {
      last_error = httplib::to_string(result.error());
      if (attempt >= spec.max_retries) {
        throw std::runtime_error("request to " + origin + path + " failed: " + last_error);
      }
    }

    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(jitter_rng);
    std::this_thread::sleep_for(retry_delay(attempt, u));
  }
}

}  // namespace xes::llm
