#include "hypokg/llm/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "hypokg/common/http.hpp"
#include "hypokg/common/text.hpp"

namespace hypokg::llm {

using nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw FormatError("unknown chat role '" + std::string(s) + "'");
}

void validate(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw InvalidArgument("chat request has no messages");
  for (const auto& m : messages) {
    if (m.role != Role::system && trim(m.content).empty()) {
      throw InvalidArgument(std::string(to_string(m.role)) + " message content is empty");
    }
  }
}

const std::vector<std::string>& agent_names() {
  static const std::vector<std::string> names{kAgentCypherQuery, kAgentQueryVerification, kAgentTextEvaluator,
                                              kAgentReasoning,   kAgentSummarizer,        kAgentPredictionInterpreter};
  return names;
}

bool is_agent_name(std::string_view name) {
  const auto& names = agent_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::openai_compatible: return "openai_compatible";
    case BackendKind::local_http: return "local_http";
    case BackendKind::mock: return "mock";
  }
  return "mock";
}

BackendKind backend_kind_from_string(std::string_view s) {
  if (s == "openai_compatible" || s == "openai") return BackendKind::openai_compatible;
  if (s == "local_http" || s == "ollama") return BackendKind::local_http;
  if (s == "mock") return BackendKind::mock;
  throw FormatError("unknown backend '" + std::string(s) + "'");
}

// ---- mock -------------------------------------------------------------------

std::string MockScript::respond(const std::vector<ChatMessage>& messages) const {
  std::string input;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::user) {
      input = it->content;
      break;
    }
  }
  const Rule* hit = nullptr;
  for (const auto& r : rules) {
    if (input.find(r.match) != std::string::npos) {
      hit = &r;
      break;
    }
  }
  std::string out = hit ? hit->response : fallback;
  static constexpr std::string_view kInput = "{{input}}";
  for (std::size_t pos = out.find(kInput); pos != std::string::npos; pos = out.find(kInput, pos + input.size())) {
    out.replace(pos, kInput.size(), input);
  }
  return out;
}

MockScript MockScript::from_json(const json& j) {
  MockScript s;
  if (!j.is_object()) throw FormatError("mock script must be a JSON object");
  if (j.contains("default")) s.fallback = j.at("default").get<std::string>();
  if (j.contains("rules")) {
    for (const auto& r : j.at("rules")) {
      s.rules.push_back({r.at("match").get<std::string>(), r.at("response").get<std::string>()});
    }
  }
  return s;
}

// ---- config -----------------------------------------------------------------

void AgentConfig::validate() const {
  if (!is_agent_name(agent_name)) throw InvalidArgument("unknown agent '" + agent_name + "'");
  if (!(temperature >= 0.0)) throw InvalidArgument("agent '" + agent_name + "': temperature must be >= 0");
  if (max_retries < 0) throw InvalidArgument("agent '" + agent_name + "': max_retries must be >= 0");
}

namespace {

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).string();
}

}  // namespace

std::map<std::string, AgentConfig> parse_agent_configs(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw FormatError("agent config must be a JSON object");
  const std::string shared_key = j.contains("api_key_file") ? j.at("api_key_file").get<std::string>() : "";
  std::map<std::string, AgentConfig> out;
  try {
    for (const auto& [name, v] : j.items()) {
      if (name == "api_key_file") continue;
      AgentConfig c;
      c.agent_name = name;
      c.backend = backend_kind_from_string(v.value("backend", "mock"));
      c.model = v.value("model", "");
      c.endpoint = v.value("endpoint", "");
      c.temperature = v.value("temperature", 0.0);
      c.max_retries = v.value("max_retries", 2);
      c.api_key_file = resolve(v.value("api_key_file", shared_key), base_dir);
      if (v.contains("mock")) c.mock = MockScript::from_json(v.at("mock"));
      c.validate();
      out.emplace(name, std::move(c));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("agent config: ") + e.what());
  }
  return out;
}

std::map<std::string, AgentConfig> load_agent_configs(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError("agent config '" + path + "': " + e.what());
  }
  return parse_agent_configs(j, std::filesystem::path(path).parent_path().string());
}

std::map<std::string, AgentConfig> mock_agent_configs(const MockScript& script) {
  std::map<std::string, AgentConfig> out;
  for (const auto& name : agent_names()) {
    AgentConfig c;
    c.agent_name = name;
    c.model = "mock";
    c.mock = script;
    out.emplace(name, std::move(c));
  }
  return out;
}

// ---- prompts ----------------------------------------------------------------

namespace {

bool placeholder_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Calls on_text(literal) and on_name(name) in order over the template.
template <typename Text, typename Name>
void scan_template(const std::string& t, Text on_text, Name on_name) {
  std::size_t i = 0;
  while (i < t.size()) {
    const auto open = t.find('{', i);
    if (open == std::string::npos) break;
    std::size_t j = open + 1;
    while (j < t.size() && placeholder_char(t[j])) ++j;
    if (j < t.size() && t[j] == '}' && j > open + 1) {
      on_text(std::string_view(t).substr(i, open - i));
      on_name(t.substr(open + 1, j - open - 1));
      i = j + 1;
    } else {
      on_text(std::string_view(t).substr(i, open + 1 - i));
      i = open + 1;
    }
  }
  on_text(std::string_view(t).substr(std::min(i, t.size())));
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string text) : name_(std::move(name)), text_(std::move(text)) {
  scan_template(text_, [](std::string_view) {}, [&](const std::string& n) { required_.insert(n); });
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
  std::vector<std::string> missing;
  for (const auto& n : required_) {
    if (!bindings.count(n)) missing.push_back(n);
  }
  if (!missing.empty()) {
    throw InvalidArgument("prompt '" + name_ + "' is missing bindings: " + join(missing, ", "));
  }
  std::string out;
  scan_template(text_, [&](std::string_view s) { out += s; }, [&](const std::string& n) { out += bindings.at(n); });
  return out;
}

PromptLibrary PromptLibrary::defaults() {
  PromptLibrary lib;
  lib.set("cypher_query",
          "Write one Cypher query that answers the question against the knowledge graph.\n"
          "Nodes carry a namespace label and the properties name, id and description. "
          "Relationships carry the property type.\n"
          "Graph schema:\n{schema}\n"
          "Linked entities:\n{entities}\n"
          "Question: {question}\n"
          "Reply with the query only.");
  lib.set("query_verification",
          "The Cypher query below failed validation. Repair it so it answers the question.\n"
          "Graph schema:\n{schema}\n"
          "Question: {question}\n"
          "Query:\n{query}\n"
          "Diagnostic: {diagnostics}\n"
          "Reply with the corrected query only.");
  lib.set("cypher_reformulate",
          "The Cypher query below returned no rows. Reformulate it, for example by relaxing filters.\n"
          "Graph schema:\n{schema}\n"
          "Question: {question}\n"
          "Query:\n{query}\n"
          "Reply with the new query only.");
  lib.set("query_answer",
          "Answer the question using only the query result.\n"
          "Question: {question}\n"
          "Cypher query:\n{query}\n"
          "Result (tab separated):\n{table}");
  lib.set("text_evaluator",
          "Decide whether the document is relevant to the question. Reply with one line: "
          "\"relevant: <reason>\" or \"irrelevant: <reason>\".\n"
          "Question: {question}\n"
          "Document PMID {pmid}: {title}\n"
          "Excerpt:\n{excerpt}");
  lib.set("literature_synthesis",
          "Synthesize the evidence below into a short assessment of the question. Cite documents by PMID.\n"
          "Question: {question}\n"
          "Evidence:\n{evidence}");
  lib.set("prediction_interpreter",
          "Explain the biological implications of the predicted link using the influential edges and the "
          "existing relations.\n"
          "Predicted link: {head} -- {tail} (probability {probability})\n"
          "Influential edges:\n{edges}\n"
          "Existing relations among involved nodes:\n{relations}");
  lib.set("chat",
          "Continue the conversation. Use only information from earlier turns.\n"
          "Earlier turns:\n{history}\n"
          "User: {message}");
  lib.set("summarize_text", "Summarize the following text.\n{text}");
  lib.set("session_summary", "Summarize this research session for later analysis.\n{transcript}");
  return lib;
}

PromptLibrary PromptLibrary::load(const std::string& path) {
  PromptLibrary lib = defaults();
  json j;
  try {
    j = json::parse(read_file(path));
    if (!j.is_object()) throw FormatError("prompt file '" + path + "' must be a JSON object");
    for (const auto& [name, text] : j.items()) lib.set(name, text.get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError("prompt file '" + path + "': " + e.what());
  }
  return lib;
}

void PromptLibrary::set(const std::string& name, const std::string& text) {
  templates_.insert_or_assign(name, PromptTemplate(name, text));
}

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) throw NotFound("no prompt named '" + name + "'");
  return it->second;
}

std::string PromptLibrary::render(const std::string& name, const std::map<std::string, std::string>& bindings) const {
  return get(name).render(bindings);
}

// ---- backends ---------------------------------------------------------------

BackendHttpError::BackendHttpError(std::string agent, int status, const std::string& body)
    : Error("agent '" + agent + "': HTTP " + std::to_string(status) + ": " + body.substr(0, kErrorBodyLimit)),
      agent_(std::move(agent)),
      status_(status),
      body_(body.substr(0, kErrorBodyLimit)) {}

namespace {

json messages_json(const std::vector<ChatMessage>& messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return arr;
}

std::vector<ChatMessage> messages_from_json(const json& arr) {
  std::vector<ChatMessage> out;
  for (const auto& m : arr) out.push_back({role_from_string(m.at("role").get<std::string>()), m.at("content")});
  return out;
}

std::string with_suffix(std::string base, std::string_view suffix) {
  while (!base.empty() && base.back() == '/') base.pop_back();
  if (base.size() >= suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) return base;
  return base + std::string(suffix);
}

json post_json(const AgentConfig& agent, const std::string& url, const json& body,
               const std::map<std::string, std::string>& headers) {
  const auto res = http_post(url, body.dump(), headers);
  if (res.status < 200 || res.status >= 300) throw BackendHttpError(agent.agent_name, res.status, res.body);
  try {
    return json::parse(res.body);
  } catch (const json::exception& e) {
    throw FormatError("agent '" + agent.agent_name + "': malformed reply: " + e.what());
  }
}

}  // namespace

json OpenAiCompatibleBackend::request(const AgentConfig& agent, const std::vector<ChatMessage>& messages) const {
  return {{"model", agent.model}, {"messages", messages_json(messages)}, {"temperature", agent.temperature}};
}

std::string OpenAiCompatibleBackend::complete(const AgentConfig& agent, const json& request,
                                              const std::string& api_key) {
  const auto url = with_suffix(agent.endpoint.empty() ? kOpenAiDefaultEndpoint : agent.endpoint, "/chat/completions");
  std::map<std::string, std::string> headers;
  if (!api_key.empty()) headers["Authorization"] = "Bearer " + api_key;
  const json reply = post_json(agent, url, request, headers);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError("agent '" + agent.agent_name + "': reply has no choices[0].message.content");
  }
}

json LocalHttpBackend::request(const AgentConfig& agent, const std::vector<ChatMessage>& messages) const {
  return {{"model", agent.model},
          {"messages", messages_json(messages)},
          {"stream", false},
          {"options", {{"temperature", agent.temperature}}}};
}

std::string LocalHttpBackend::complete(const AgentConfig& agent, const json& request, const std::string& api_key) {
  const auto url = with_suffix(agent.endpoint.empty() ? kLocalDefaultEndpoint : agent.endpoint, "/api/chat");
  std::map<std::string, std::string> headers;
  if (!api_key.empty()) headers["Authorization"] = "Bearer " + api_key;
  const json reply = post_json(agent, url, request, headers);
  try {
    return reply.at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError("agent '" + agent.agent_name + "': reply has no message.content");
  }
}

json MockBackend::request(const AgentConfig& agent, const std::vector<ChatMessage>& messages) const {
  return {{"model", agent.model}, {"messages", messages_json(messages)}};
}

std::string MockBackend::complete(const AgentConfig& agent, const json& request, const std::string&) {
  return agent.mock.respond(messages_from_json(request.at("messages")));
}

// ---- gateway ----------------------------------------------------------------

json to_json(const CallRecord& r) {
  json j{{"type", "llm_call"},
         {"agent", r.agent},
         {"backend", r.backend},
         {"model", r.model},
         {"attempt", r.attempt},
         {"request", r.request}};
  j["response"] = r.response ? json(*r.response) : json(nullptr);
  if (r.error) j["error"] = *r.error;
  return j;
}

std::string read_api_key(const std::string& path) {
  const auto text = read_file(path);
  return std::string(trim(text.substr(0, text.find('\n'))));
}

Gateway::Gateway(std::map<std::string, AgentConfig> agents) {
  for (auto& [name, c] : agents) {
    c.agent_name = name;
    c.validate();
    agents_.emplace(name, std::move(c));
  }
  backends_[BackendKind::openai_compatible] = std::make_shared<OpenAiCompatibleBackend>();
  backends_[BackendKind::local_http] = std::make_shared<LocalHttpBackend>();
  backends_[BackendKind::mock] = std::make_shared<MockBackend>();
  sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void Gateway::set_backend(BackendKind kind, std::shared_ptr<ChatBackend> backend) {
  if (!backend) throw InvalidArgument("backend must not be null");
  backends_[kind] = std::move(backend);
}

void Gateway::set_sleeper(Sleeper sleeper) {
  if (!sleeper) throw InvalidArgument("sleeper must not be empty");
  sleeper_ = std::move(sleeper);
}

bool Gateway::has_agent(std::string_view agent) const { return agents_.find(agent) != agents_.end(); }

const AgentConfig& Gateway::agent(std::string_view agent) const {
  const auto it = agents_.find(agent);
  if (it == agents_.end()) throw NotFound("agent '" + std::string(agent) + "' is not configured");
  return it->second;
}

std::string Gateway::api_key(const AgentConfig& agent) const {
  if (agent.backend == BackendKind::mock) return {};
  std::string path = agent.api_key_file;
  if (const char* env = std::getenv(kApiKeyFileEnv); env && *env) path = env;
  if (path.empty()) return {};
  std::lock_guard lock(key_mutex_);
  auto it = key_cache_.find(path);
  if (it == key_cache_.end()) it = key_cache_.emplace(path, read_api_key(path)).first;
  return it->second;
}

std::string Gateway::complete(std::string_view agent_name, const std::vector<ChatMessage>& messages,
                              const CallSink& sink) const {
  const AgentConfig& agent = this->agent(agent_name);
  validate(messages);
  ChatBackend& backend = *backends_.at(agent.backend);
  const json request = backend.request(agent, messages);
  const std::string key = api_key(agent);

  CallRecord record;
  record.agent = agent.agent_name;
  record.backend = std::string(to_string(agent.backend));
  record.model = agent.model;
  record.request = request;
  auto emit = [&] {
    if (sink) sink(record);
  };

  std::string last_error;
  for (int attempt = 1; attempt <= agent.max_retries + 1; ++attempt) {
    record.attempt = attempt;
    record.response.reset();
    record.error.reset();
    try {
      auto text = backend.complete(agent, request, key);
      record.response = text;
      emit();
      return text;
    } catch (const NetworkDisabled& e) {
      record.error = e.what();
      emit();
      throw BackendUnavailable(agent.agent_name, e.what());
    } catch (const TransportError& e) {
      record.error = e.what();
      emit();
      last_error = e.what();
    } catch (const std::exception& e) {
      record.error = e.what();
      emit();
      throw;
    }
    if (attempt <= agent.max_retries) sleeper_(backoff_base_ * (1LL << (attempt - 1)));
  }
  throw BackendUnavailable(agent.agent_name, std::to_string(agent.max_retries + 1) + " attempts failed; last error: " +
                                                 last_error);
}

}  // namespace hypokg::llm
