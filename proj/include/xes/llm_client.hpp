#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xes/prompting.hpp"

namespace xes::llm {

/// Default environment variable consulted for the API key when a model does
/// not name its own.
inline constexpr const char* kDefaultApiKeyEnv = "XES_LLM_API_KEY";

/// One OpenAI-compatible chat endpoint plus the sampling settings used
/// against it. temperature defaults to 0.0 for near-deterministic output.
struct ModelSpec {
  std::string model_name;   // e.g. "llama3:70b"
  std::string base_url;     // e.g. "http://localhost:11434/v1"
  std::string api_key_env;  // env var holding the key; empty falls back to kDefaultApiKeyEnv
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::size_t context_length = 8192;
  std::chrono::milliseconds request_timeout{60000};
  int max_retries = 3;
};

struct ChatResponse {
  std::string text;
  std::string model_name;
  std::chrono::milliseconds latency{0};
  std::optional<long> prompt_tokens;
  std::optional<long> completion_tokens;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;

  /// Returns the completion text for the bundle. Throws ContextOverflowError
  /// before any request when the bundle cannot fit the model's context.
  virtual ChatResponse complete(const ModelSpec& spec, const prompt::PromptBundle& bundle) = 0;
};

/// Scripted stand-in for tests and dry runs: successive calls return
/// successive script entries, cycling. Safe for concurrent use.
class MockChatClient : public ChatClient {
 public:
  explicit MockChatClient(std::vector<std::string> script);
  ChatResponse complete(const ModelSpec& spec, const prompt::PromptBundle& bundle) override;

 private:
  std::vector<std::string> script_;
  std::size_t next_ = 0;
  std::mutex mutex_;
};

/// POST {base_url}/chat/completions with a single user message. Transient
/// failures (network errors, 5xx) are retried with exponential backoff up to
/// max_retries; 4xx statuses are never retried. The request payload is built
/// once and reused verbatim across retries.
class HttpChatClient : public ChatClient {
 public:
  ChatResponse complete(const ModelSpec& spec, const prompt::PromptBundle& bundle) override;
};

// Building blocks, exposed so tests can pin the wire format.

/// JSON body: model, messages [{role:"user", content}], temperature, max_tokens.
std::string build_request_body(const ModelSpec& spec, const prompt::PromptBundle& bundle);

/// Pulls choices[0].message.content and the usage counters out of a
/// chat/completions response body.
ChatResponse parse_response_body(const std::string& body, const ModelSpec& spec);

/// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
std::pair<std::string, std::string> split_base_url(const std::string& base_url);

/// Delay before retry `attempt` (0-based): 1s base, doubling, +/-20% jitter
/// with jitter_u in [0, 1].
std::chrono::milliseconds retry_delay(int attempt, double jitter_u);

/// Throws ContextOverflowError when the bundle exceeds spec.context_length.
void check_context_fit(const ModelSpec& spec, const prompt::PromptBundle& bundle);

/// Resolves the API key. A model without a configured variable uses
/// kDefaultApiKeyEnv when that is set and otherwise goes unauthenticated; a
/// configured variable that is unset is an error. Error messages name the
/// variable, never the key.
std::optional<std::string> api_key_for(const ModelSpec& spec);

}  // namespace xes::llm
