#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypokg/common/error.hpp"

namespace hypokg::llm {

enum class Role { system, user, assistant };

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Throws InvalidArgument when a user or assistant message is empty.
void validate(const std::vector<ChatMessage>& messages);

/// The six agent roles.
inline constexpr const char* kAgentCypherQuery = "cypher_query";
inline constexpr const char* kAgentQueryVerification = "query_verification";
inline constexpr const char* kAgentTextEvaluator = "text_evaluator";
inline constexpr const char* kAgentReasoning = "reasoning";
inline constexpr const char* kAgentSummarizer = "summarizer";
inline constexpr const char* kAgentPredictionInterpreter = "prediction_interpreter";

const std::vector<std::string>& agent_names();
bool is_agent_name(std::string_view name);

enum class BackendKind { openai_compatible, local_http, mock };

std::string_view to_string(BackendKind k);
BackendKind backend_kind_from_string(std::string_view s);

/// Ordered (substring -> response) rules over the last user message; first
/// match wins. "{{input}}" in a response is replaced by that message.
struct MockScript {
  struct Rule {
    std::string match;
    std::string response;
  };
  std::vector<Rule> rules;
  std::string fallback = "OK";

  std::string respond(const std::vector<ChatMessage>& messages) const;
  static MockScript from_json(const nlohmann::json& j);
};

inline constexpr const char* kLocalDefaultEndpoint = "http://localhost:11434";
inline constexpr const char* kOpenAiDefaultEndpoint = "https://api.openai.com/v1";
inline constexpr const char* kApiKeyFileEnv = "HYPOKG_API_KEY_FILE";

struct AgentConfig {
  std::string agent_name;
  BackendKind backend = BackendKind::mock;
  std::string model;
  std::string endpoint;
  double temperature = 0.0;
  int max_retries = 2;  // retries after the first attempt
  std::string api_key_file;
  MockScript mock;

  /// Throws InvalidArgument for an unknown agent, negative temperature or retries.
  void validate() const;
};

/// JSON object keyed by agent name: {backend, model, endpoint, temperature,
/// max_retries, api_key_file, mock}. A top-level "api_key_file" applies to
/// agents that do not set one. Relative key paths resolve against `base_dir`.
std::map<std::string, AgentConfig> parse_agent_configs(const nlohmann::json& j, const std::string& base_dir = "");
std::map<std::string, AgentConfig> load_agent_configs(const std::string& path);

/// All six agents on the mock backend with the given script.
std::map<std::string, AgentConfig> mock_agent_configs(const MockScript& script = {});

/// Named placeholders are written {name}; names are [A-Za-z0-9_].
class PromptTemplate {
 public:
  PromptTemplate() = default;
  PromptTemplate(std::string name, std::string text);

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }
  const std::set<std::string>& required_placeholders() const { return required_; }

  /// Single-pass substitution; values are inserted literally. Throws
  /// InvalidArgument naming every missing binding.
  std::string render(const std::map<std::string, std::string>& bindings) const;

 private:
  std::string name_;
  std::string text_;
  std::set<std::string> required_;
};

class PromptLibrary {
 public:
  /// Built-in prompts for every pipeline step.
  static PromptLibrary defaults();
  /// JSON object name -> template text, layered over the defaults.
  static PromptLibrary load(const std::string& path);

  void set(const std::string& name, const std::string& text);
  /// Throws NotFound.
  const PromptTemplate& get(const std::string& name) const;
  std::string render(const std::string& name, const std::map<std::string, std::string>& bindings) const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

/// All retries failed, or the network switch is off.
class BackendUnavailable : public Error {
 public:
  BackendUnavailable(std::string agent, const std::string& why)
      : Error("backend unavailable for agent '" + agent + "': " + why), agent_(std::move(agent)) {}
  const std::string& agent() const { return agent_; }

 private:
  std::string agent_;
};

/// Non-2xx reply; body truncated to kErrorBodyLimit bytes.
class BackendHttpError : public Error {
 public:
  static constexpr std::size_t kErrorBodyLimit = 200;
  BackendHttpError(std::string agent, int status, const std::string& body);
  const std::string& agent() const { return agent_; }
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  std::string agent_;
  int status_;
  std::string body_;
};

/// Backends throw TransportError for retryable failures and BackendHttpError
/// for non-2xx replies.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Wire payload sent for this call, recorded in the call log.
  virtual nlohmann::json request(const AgentConfig& agent, const std::vector<ChatMessage>& messages) const = 0;
  virtual std::string complete(const AgentConfig& agent, const nlohmann::json& request,
                               const std::string& api_key) = 0;
};

/// POST {endpoint}/chat/completions with {model, messages, temperature}.
class OpenAiCompatibleBackend : public ChatBackend {
 public:
  nlohmann::json request(const AgentConfig& agent, const std::vector<ChatMessage>& messages) const override;
  std::string complete(const AgentConfig& agent, const nlohmann::json& request, const std::string& api_key) override;
};

/// POST {endpoint}/api/chat with {model, messages, stream: false, options}.
class LocalHttpBackend : public ChatBackend {
 public:
  nlohmann::json request(const AgentConfig& agent, const std::vector<ChatMessage>& messages) const override;
  std::string complete(const AgentConfig& agent, const nlohmann::json& request, const std::string& api_key) override;
};

class MockBackend : public ChatBackend {
 public:
  nlohmann::json request(const AgentConfig& agent, const std::vector<ChatMessage>& messages) const override;
  std::string complete(const AgentConfig& agent, const nlohmann::json& request, const std::string& api_key) override;
};

/// One attempt of one outbound call.
struct CallRecord {
  std::string agent;
  std::string backend;
  std::string model;
  int attempt = 1;
  nlohmann::json request;
  std::optional<std::string> response;
  std::optional<std::string> error;
};

nlohmann::json to_json(const CallRecord& r);

using CallSink = std::function<void(const CallRecord&)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Routes agent calls to their configured backend. Shareable across threads.
class Gateway {
 public:
  explicit Gateway(std::map<std::string, AgentConfig> agents);

  /// Replaces the backend used for a kind (fault injection, alternate transports).
  void set_backend(BackendKind kind, std::shared_ptr<ChatBackend> backend);
  /// Called between retries; defaults to std::this_thread::sleep_for.
  void set_sleeper(Sleeper sleeper);
  /// Delay before retry n (1-based) is base * 2^(n-1).
  void set_backoff_base(std::chrono::milliseconds base) { backoff_base_ = base; }

  bool has_agent(std::string_view agent) const;
  const AgentConfig& agent(std::string_view agent) const;

  /// Every attempt is passed to `sink` before this returns or throws.
  /// Throws NotFound for an unconfigured agent, BackendUnavailable when
  /// retries are exhausted, BackendHttpError on a non-2xx reply.
  std::string complete(std::string_view agent, const std::vector<ChatMessage>& messages,
                       const CallSink& sink = {}) const;

 private:
  std::map<std::string, AgentConfig, std::less<>> agents_;
  std::map<BackendKind, std::shared_ptr<ChatBackend>> backends_;
  Sleeper sleeper_;
  std::chrono::milliseconds backoff_base_{200};
  mutable std::mutex key_mutex_;
  mutable std::map<std::string, std::string> key_cache_;

  std::string api_key(const AgentConfig& agent) const;
};

/// Reads the first line of a key file, trimmed. Throws IoError.
std::string read_api_key(const std::string& path);

}  // namespace hypokg::llm
