#include "hypokg/common/http.hpp"

#include <httplib.h>

#include <atomic>

namespace hypokg {

namespace {
std::atomic<bool> g_network_enabled{true};
}  // namespace

void set_network_enabled(bool enabled) { g_network_enabled = enabled; }
bool network_enabled() { return g_network_enabled; }

HttpResponse http_post(const std::string& url, const std::string& body,
                       const std::map<std::string, std::string>& headers, std::chrono::milliseconds timeout,
                       const std::string& content_type) {
  if (!network_enabled()) throw NetworkDisabled("network access is disabled (POST " + url + ")");
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("malformed URL '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body, content_type);
  if (!res) throw TransportError("POST " + url + " failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

}  // namespace hypokg
