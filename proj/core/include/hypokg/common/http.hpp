#pragma once

#include <chrono>
#include <map>
#include <string>

#include "hypokg/common/error.hpp"

namespace hypokg {

/// Raised when outbound HTTP is attempted while the network switch is off.
class NetworkDisabled : public Error {
 public:
  using Error::Error;
};

/// Transport-level failure (connection refused, timeout, TLS).
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Process-wide switch consulted by every outbound HTTP client.
void set_network_enabled(bool enabled);
bool network_enabled();

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// POSTs `body` to `url` ("http[s]://host[:port]/path"). Throws
/// NetworkDisabled, TransportError, or InvalidArgument for a malformed URL.
/// Non-2xx statuses are returned, not thrown.
HttpResponse http_post(const std::string& url, const std::string& body,
                       const std::map<std::string, std::string>& headers,
                       std::chrono::milliseconds timeout = std::chrono::seconds(120),
                       const std::string& content_type = "application/json");

}  // namespace hypokg
