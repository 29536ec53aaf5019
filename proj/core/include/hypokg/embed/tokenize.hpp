#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hypokg::embed {

/// Splits on Unicode whitespace, then peels leading and trailing ASCII
/// punctuation off each word as one-character tokens.
/// "Atenolol (DB00335)" -> ["Atenolol", "(", "DB00335", ")"].
std::vector<std::string> tokenize(std::string_view text);

std::size_t token_count(std::string_view text);

}  // namespace hypokg::embed
