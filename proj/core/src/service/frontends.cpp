#include <istream>
#include <ostream>

#include "hypokg/common/text.hpp"
#include "hypokg/service/service.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a _res macro.
#include <httplib.h>

namespace hypokg::service {

using nlohmann::json;

std::string render_response(const agents::AgentResponse& response) {
  std::string out = response.answer_text;
  if (out.empty() || out.back() != '\n') out += '\n';
  for (const auto& e : response.evidence) out += "\n" + agents::render_evidence(e);
  return out;
}

int repl_loop(Assistant& assistant, std::istream& in, std::ostream& out) {
  auto session = assistant.create_session();
  out << "Session " << session->id << " started. Commands: query, predict, search, summarize, exit.\n";
  std::string line;
  while (true) {
    out << "> " << std::flush;
    if (!std::getline(in, line)) {
      out << '\n';
      break;
    }
    const auto text = std::string(trim(line));
    if (text.empty()) continue;
    if (to_lower_ascii(text) == "exit") break;
    try {
      out << render_response(assistant.handle(*session, text)) << '\n';
    } catch (const ServiceError& e) {
      out << "error (" << to_string(e.code()) << "): " << e.what() << " [trace " << e.trace_id() << "]\n\n";
    }
  }
  return 0;
}

int run_repl(const ServiceConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  std::unique_ptr<ServiceData> data;
  try {
    data = load_data(config);
  } catch (const MissingDataFile& e) {
    err << e.what() << '\n';
    return 1;
  }
  AssistantOptions opts;
  opts.log_dir = config.log_dir;
  opts.summary_dir = config.summary_dir;
  Assistant assistant(data->resources(), opts);
  return repl_loop(assistant, in, out);
}

// ---- HTTP -------------------------------------------------------------------------

struct HttpService::Impl {
  Assistant& assistant;
  httplib::Server server;

  explicit Impl(Assistant& a) : assistant(a) { routes(); }

  static void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, const ServiceError& e) { send_json(res, e.to_json(), e.http_status()); }

  template <typename F>
  void guarded(httplib::Response& res, F&& body) {
    try {
      body();
    } catch (const ServiceError& e) {
      send_error(res, e.trace_id().empty() ? assistant.service_error(e.code(), e.what(), e.http_status()) : e);
    } catch (const std::exception& e) {
      send_error(res, assistant.service_error(ErrorCode::internal, e.what()));
    }
  }

  void routes() {
    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"status", "ok"}});
    });

    server.Post("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        auto s = assistant.create_session();
        send_json(res, {{"session_id", s->id}}, 201);
      });
    });

    server.Post(R"(/api/sessions/([^/]+)/message)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto s = assistant.session(req.matches[1]);
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::parse_error&) {
          throw ServiceError(ErrorCode::bad_request, "request body is not JSON");
        }
        if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
          throw ServiceError(ErrorCode::bad_request, "request body needs a string field 'text'");
        }
        send_json(res, agents::to_json(assistant.handle(*s, body["text"].get<std::string>())));
      });
    });

    server.Get(R"(/api/sessions/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        res.status = 200;
        res.set_content(assistant.log_text(req.matches[1]), "application/x-ndjson");
      });
    });

    server.Get(R"(/api/predictions/([^/]+)/explanation)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, agents::to_json(*assistant.explanation(req.matches[1]))); });
    });

    server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      const auto code = res.status == 404 ? ErrorCode::not_found
                        : res.status < 500 ? ErrorCode::bad_request
                                           : ErrorCode::internal;
      send_error(res, assistant.service_error(code, "no route for " + req.method + " " + req.path, res.status));
    });

    server.set_exception_handler([this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "unexpected failure";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      send_error(res, assistant.service_error(ErrorCode::internal, message));
    });
  }
};

HttpService::HttpService(Assistant& assistant) : impl_(std::make_unique<Impl>(assistant)) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_) impl_->server.stop();
}

int serve_http(const ServiceConfig& config, const std::string& host, int port, std::ostream& err) {
  std::unique_ptr<ServiceData> data;
  try {
    data = load_data(config);
  } catch (const MissingDataFile& e) {
    err << e.what() << '\n';
    return 1;
  }
  AssistantOptions opts;
  opts.log_dir = config.log_dir;
  opts.summary_dir = config.summary_dir;
  Assistant assistant(data->resources(), opts);
  HttpService service(assistant);
  const int bound = service.bind(host, port);
  err << "serving on http://" << host << ":" << bound << '\n';
  service.listen();
  return 0;
}

}  // namespace hypokg::service
