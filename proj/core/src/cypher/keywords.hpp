#pragma once

#include <string>
#include <string_view>

namespace hypokg::cypher {

/// Reserved words of the dialect, including unsupported clause keywords so
/// they are rejected rather than read as identifiers.
bool is_keyword(std::string_view word);

/// Bare when [A-Za-z_][A-Za-z0-9_]* and not a keyword, else backticked.
std::string quote_identifier(std::string_view name);

/// Levenshtein distance, used for "did you mean" suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace hypokg::cypher
