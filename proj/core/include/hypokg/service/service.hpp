#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypokg/agents/agents.hpp"

namespace hypokg::service {

// ---- configuration --------------------------------------------------------------

struct EmbedderConfig {
  std::string kind = "reference";  // "reference" or "http"
  std::size_t dimension = embed::kDefaultDimension;
  std::string url;
  std::string model;
  std::string api_key_file;
};

/// Every path is absolute after parsing; relative paths in the file are
/// resolved against the directory holding the config.
struct ServiceConfig {
  std::vector<std::string> kg_edges;    // knowledge-base edge lists
  std::vector<std::string> text_edges;  // text-mined edge lists
  std::string node_text;
  std::string node_features;
  std::string corpus;
  std::string agents;      // empty: every agent is a mock answering "OK"
  std::string prompts;     // empty: built-in prompts
  std::string checkpoint;  // empty: predict is unavailable
  EmbedderConfig embedder;
  embed::ChunkSizes chunk_sizes;
  std::string kg_index;   // prebuilt index; empty: built at startup
  std::string doc_index;  // prebuilt index; empty: built at startup
  std::string log_dir = "log";
  std::string summary_dir = ".";
  agents::PipelineSettings settings;
};

ServiceConfig parse_config(const nlohmann::json& j, const std::string& base_dir);
ServiceConfig load_config(const std::string& path);

/// A configured data file does not exist.
class MissingDataFile : public IoError {
 public:
  explicit MissingDataFile(std::string path) : IoError("missing data file: " + path), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Immutable state shared by every session.
struct ServiceData {
  kg::KnowledgeGraph graph;
  corpus::DocumentSet corpus;
  std::unique_ptr<embed::Embedder> embedder;
  std::unique_ptr<embed::EmbeddingIndex> kg_index;
  std::unique_ptr<embed::EmbeddingIndex> doc_index;
  std::optional<linkpred::LinkModel> model;
  llm::PromptLibrary prompts;
  std::unique_ptr<llm::Gateway> gateway;
  agents::PipelineSettings settings;

  agents::Resources resources() const;
};

/// Checks every configured path first and throws MissingDataFile naming the
/// first absent one.
std::unique_ptr<ServiceData> load_data(const ServiceConfig& config);

// ---- errors ---------------------------------------------------------------------

enum class ErrorCode { bad_request, not_found, backend_unavailable, internal };

std::string_view to_string(ErrorCode c);

class ServiceError : public Error {
 public:
  ServiceError(ErrorCode code, const std::string& message, std::string trace_id = {}, int http_status = 0);
  ErrorCode code() const { return code_; }
  const std::string& trace_id() const { return trace_id_; }
  int http_status() const { return status_; }
  /// {"error": {"code", "message", "trace_id"}}
  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  std::string trace_id_;
  int status_;
};

// ---- sessions -------------------------------------------------------------------

using Clock = std::function<std::int64_t()>;  // unix seconds
using IdGenerator = std::function<std::string()>;

struct Turn {
  std::string input;
  agents::AgentResponse response;
  std::int64_t timestamp = 0;
};

struct Session {
  std::string id;
  std::int64_t created_at = 0;
  std::string log_path;
  std::vector<Turn> turns;
  std::size_t errors = 0;
  std::mutex turn_mutex;  // held for the whole of a turn
};

struct AssistantOptions {
  std::string log_dir = "log";
  std::string summary_dir = ".";
  Clock clock;        // defaults to the system clock
  IdGenerator ids;    // defaults to random 64-bit hex
};

/// Routes user turns to the agent pipelines and keeps the session logs.
/// Shareable across threads; turns within one session never interleave.
class Assistant {
 public:
  Assistant(const agents::Resources& resources, AssistantOptions options = {});

  /// Creates the session and writes its log header.
  std::shared_ptr<Session> create_session();
  /// Throws ServiceError(not_found).
  std::shared_ptr<Session> session(const std::string& id) const;

  /// Runs one turn. The turn record is flushed to the log before this
  /// returns. A turn already running in the session gives
  /// ServiceError(bad_request, 409); pipeline failures are logged with a
  /// trace id and rethrown as ServiceError.
  agents::AgentResponse handle(Session& session, const std::string& text);

  /// Raw JSON-lines log of a session.
  std::string log_text(const std::string& session_id) const;

  /// Throws ServiceError(not_found).
  std::shared_ptr<const explain::Explanation> explanation(const std::string& prediction_id) const;

  /// Records an error that is not tied to a session in <log_dir>/service.jsonl.
  ServiceError service_error(ErrorCode code, const std::string& message, int http_status = 0);

 private:
  agents::AgentResponse dispatch(Session& session, const agents::Command& command, agents::Pipeline& pipeline);
  std::string next_trace_id();
  std::int64_t now() const;

  agents::Resources res_;
  AssistantOptions opts_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<const explain::Explanation>> explanations_;
  std::atomic<std::uint64_t> traces_{0};
};

/// Appends one JSON record and flushes. Throws IoError.
void append_log(const std::string& path, const nlohmann::json& record);

/// "User: <input>\nAssistant: <answer>" lines for each turn.
std::vector<std::string> transcript_lines(const Session& session);

// ---- front ends -----------------------------------------------------------------

/// Answer text followed by each evidence block, as the REPL prints it.
std::string render_response(const agents::AgentResponse& response);

/// Reads lines until "exit" or EOF; prints each reply. Returns 0.
int repl_loop(Assistant& assistant, std::istream& in, std::ostream& out);

/// Loads the data named by the config and runs the REPL. Returns 1 with the
/// missing path on `err` when a data file is absent.
int run_repl(const ServiceConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

/// JSON API over an Assistant.
class HttpService {
 public:
  explicit HttpService(Assistant& assistant);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds to host:port (port 0 picks a free port) and returns the port.
  /// Throws IoError when the port is taken.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Loads the data and serves until the process is stopped. Returns 1 with the
/// missing path on `err` when a data file is absent.
int serve_http(const ServiceConfig& config, const std::string& host, int port, std::ostream& err);

}  // namespace hypokg::service
