#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hypokg/service/service.hpp"

namespace hypokg::testing {

/// Fixed clock and id for the scripted session.
inline constexpr std::int64_t kGoldenClock = 1790000000;
inline constexpr const char* kGoldenSessionId = "golden";

/// Service data from tests/data/session/config.json with logs and summaries
/// under `work_dir`.
struct SessionFixture {
  explicit SessionFixture(const std::string& work_dir);

  service::ServiceConfig config;
  std::unique_ptr<service::ServiceData> data;

  /// Deterministic options: clock fixed at kGoldenClock, ids "golden",
  /// "golden-2", ...
  service::AssistantOptions options() const;
};

/// Lines of tests/data/session/script.txt.
std::vector<std::string> golden_script();

/// REPL output for the golden script under `work_dir`.
std::string run_golden_session(const std::string& work_dir);

}  // namespace hypokg::testing
