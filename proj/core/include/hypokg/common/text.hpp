#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hypokg {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

/// Fixed-precision rendering ("%.<digits>f").
std::string format_fixed(double value, int digits);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// 16 lowercase hex characters of fnv1a64(data).
std::string digest_hex(std::string_view data);

std::string to_lower_ascii(std::string_view s);

std::string_view trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char delimiter);

std::string join(const std::vector<std::string>& parts, std::string_view separator);

bool starts_with_ci(std::string_view text, std::string_view prefix);

/// Parse a complete string as a double; false on trailing garbage or empty input.
bool parse_real(std::string_view text, double& out);

/// UTC timestamp "YYYY-MM-DDTHH:MM:SSZ"; `compact` drops ':' for file names.
std::string iso8601_utc(std::int64_t unix_seconds, bool compact = false);

std::string read_file(const std::string& path);

void write_file(const std::string& path, std::string_view contents);

}  // namespace hypokg
