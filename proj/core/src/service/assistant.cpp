#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "hypokg/common/text.hpp"
#include "hypokg/service/service.hpp"

namespace hypokg::service {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::bad_request: return "bad_request";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::backend_unavailable: return "backend_unavailable";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

namespace {

int default_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::bad_request: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::backend_unavailable: return 503;
    case ErrorCode::internal: return 500;
  }
  return 500;
}

std::string random_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

json trace_json(const std::vector<agents::TraceEntry>& trace) {
  json out = json::array();
  for (const auto& t : trace) {
    out.push_back({{"agent", t.agent},
                   {"input", t.input},
                   {"output", t.output},
                   {"input_digest", t.input_digest},
                   {"output_digest", t.output_digest}});
  }
  return out;
}

}  // namespace

ServiceError::ServiceError(ErrorCode code, const std::string& message, std::string trace_id, int http_status)
    : Error(message), code_(code), trace_id_(std::move(trace_id)), status_(http_status ? http_status : default_status(code)) {}

json ServiceError::to_json() const {
  return {{"error", {{"code", std::string(to_string(code_))}, {"message", what()}, {"trace_id", trace_id_}}}};
}

void append_log(const std::string& path, const json& record) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot open log file " + path);
  out << record.dump() << '\n';
  out.flush();
  if (!out) throw IoError("cannot write log file " + path);
}

std::vector<std::string> transcript_lines(const Session& session) {
  std::vector<std::string> out;
  for (const auto& t : session.turns) out.push_back("User: " + t.input + "\nAssistant: " + t.response.answer_text);
  return out;
}

Assistant::Assistant(const agents::Resources& resources, AssistantOptions options)
    : res_(resources), opts_(std::move(options)) {
  if (!res_.graph || !res_.gateway || !res_.prompts) throw InvalidArgument("assistant needs a graph, gateway and prompts");
  if (!opts_.clock) {
    opts_.clock = [] {
      return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  if (!opts_.ids) opts_.ids = random_id;
  fs::create_directories(opts_.log_dir);
}

std::int64_t Assistant::now() const { return opts_.clock(); }

std::string Assistant::next_trace_id() {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trace-%06llu", static_cast<unsigned long long>(++traces_));
  return buf;
}

std::shared_ptr<Session> Assistant::create_session() {
  auto s = std::make_shared<Session>();
  s->created_at = now();
  {
    std::lock_guard lock(mutex_);
    for (int tries = 0;; ++tries) {
      s->id = opts_.ids();
      if (!s->id.empty() && !sessions_.count(s->id)) break;
      if (tries == 16) throw ServiceError(ErrorCode::internal, "session id generator keeps repeating ids");
    }
    s->log_path =
        (fs::path(opts_.log_dir) / ("session_" + s->id + "_" + iso8601_utc(s->created_at, true) + ".jsonl")).string();
    sessions_[s->id] = s;
  }
  append_log(s->log_path, {{"type", "session"}, {"session_id", s->id}, {"created_at", iso8601_utc(s->created_at)}});
  return s;
}

std::shared_ptr<Session> Assistant::session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(ErrorCode::not_found, "unknown session '" + id + "'");
  return it->second;
}

std::string Assistant::log_text(const std::string& session_id) const { return read_file(session(session_id)->log_path); }

std::shared_ptr<const explain::Explanation> Assistant::explanation(const std::string& prediction_id) const {
  std::lock_guard lock(mutex_);
  auto it = explanations_.find(prediction_id);
  if (it == explanations_.end()) throw ServiceError(ErrorCode::not_found, "unknown prediction '" + prediction_id + "'");
  return it->second;
}

ServiceError Assistant::service_error(ErrorCode code, const std::string& message, int http_status) {
  ServiceError e(code, message, next_trace_id(), http_status);
  try {
    append_log((fs::path(opts_.log_dir) / "service.jsonl").string(),
               {{"type", "error"},
                {"trace_id", e.trace_id()},
                {"code", std::string(to_string(code))},
                {"message", message},
                {"timestamp", iso8601_utc(now())}});
  } catch (const IoError&) {
    // the error itself is still reported to the caller
  }
  return e;
}

agents::AgentResponse Assistant::dispatch(Session& s, const agents::Command& command, agents::Pipeline& p) {
  using agents::CommandKind;
  if (command.usage_error) {
    agents::AgentResponse r;
    r.answer_text = *command.usage_error;
    return r;
  }
  switch (command.kind) {
    case CommandKind::query: return agents::respond_query(p, command.payload);
    case CommandKind::search: return agents::respond_search(p, command.payload);
    case CommandKind::predict: {
      auto r = agents::respond_predict(p, command.payload, s.id + "-" + std::to_string(s.turns.size() + 1));
      std::lock_guard lock(mutex_);
      for (const auto& e : r.evidence) {
        if (const auto* pe = std::get_if<agents::PredictionEvidence>(&e); pe && pe->explanation) {
          explanations_[pe->id] = pe->explanation;
        }
      }
      return r;
    }
    case CommandKind::summarize: {
      auto out = agents::summarize_session(p, transcript_lines(s), opts_.summary_dir, s.id, iso8601_utc(now(), true));
      agents::AgentResponse r;
      r.answer_text = out.text + "\n\nSummary saved to " + fs::path(out.path).filename().string();
      return r;
    }
    case CommandKind::chat: return agents::respond_chat(p, join(transcript_lines(s), "\n"), command.payload);
  }
  throw ServiceError(ErrorCode::internal, "unhandled command");
}

agents::AgentResponse Assistant::handle(Session& s, const std::string& text) {
  std::unique_lock turn(s.turn_mutex, std::try_to_lock);
  if (!turn.owns_lock()) throw ServiceError(ErrorCode::bad_request, "turn in progress", {}, 409);

  const std::size_t index = s.turns.size() + 1;
  const auto command = agents::route(text);
  agents::Pipeline p(res_, [&](const llm::CallRecord& call) {
    auto record = llm::to_json(call);
    record["session_id"] = s.id;
    record["turn"] = index;
    append_log(s.log_path, record);
  });

  auto fail = [&](ErrorCode code, const std::string& message) {
    ServiceError e(code, message, next_trace_id());
    ++s.errors;
    append_log(s.log_path, {{"type", "error"},
                            {"session_id", s.id},
                            {"turn", index},
                            {"trace_id", e.trace_id()},
                            {"code", std::string(to_string(code))},
                            {"message", message},
                            {"input", text},
                            {"timestamp", iso8601_utc(now())},
                            {"agent_trace", trace_json(p.trace())}});
    return e;
  };

  agents::AgentResponse response;
  try {
    response = dispatch(s, command, p);
  } catch (const ServiceError& e) {
    throw fail(e.code(), e.what());
  } catch (const llm::BackendUnavailable& e) {
    throw fail(ErrorCode::backend_unavailable, e.what());
  } catch (const llm::BackendHttpError& e) {
    throw fail(ErrorCode::backend_unavailable, e.what());
  } catch (const InvalidArgument& e) {
    throw fail(ErrorCode::bad_request, e.what());
  } catch (const std::exception& e) {
    throw fail(ErrorCode::internal, e.what());
  }
  for (auto& t : p.take_trace()) response.agent_trace.push_back(std::move(t));

  Turn t{text, std::move(response), now()};
  if (!s.turns.empty() && t.timestamp < s.turns.back().timestamp) t.timestamp = s.turns.back().timestamp;
  json record = {{"type", "turn"},
                 {"session_id", s.id},
                 {"turn", index},
                 {"timestamp", iso8601_utc(t.timestamp)},
                 {"input", text},
                 {"command", std::string(agents::to_string(command.kind))},
                 {"response", agents::to_json(t.response)},
                 {"agent_trace", trace_json(t.response.agent_trace)}};
  append_log(s.log_path, record);
  s.turns.push_back(std::move(t));
  return s.turns.back().response;
}

}  // namespace hypokg::service
