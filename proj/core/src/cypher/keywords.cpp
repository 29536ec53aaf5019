#include "keywords.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>
#include <vector>

#include "hypokg/common/text.hpp"

namespace hypokg::cypher {

namespace {

constexpr std::array<std::string_view, 44> kKeywords = {
    "all",      "and",      "as",       "asc",     "ascending", "by",       "call",
    "case",     "contains", "create",   "delete",  "desc",      "descending", "detach",
    "distinct", "else",     "end",      "ends",    "exists",    "false",    "foreach",
    "in",       "is",       "limit",    "load",    "match",     "merge",    "not",
    "null",     "on",       "optional", "or",      "order",     "remove",   "return",
    "set",      "skip",     "starts",   "then",    "true",      "union",    "unwind",
    "when",     "with"};

}  // namespace

bool is_keyword(std::string_view word) {
  const std::string lower = to_lower_ascii(word);
  return std::find(kKeywords.begin(), kKeywords.end(), lower) != kKeywords.end() ||
         lower == "xor";
}

std::string quote_identifier(std::string_view name) {
  bool simple = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') simple = false;
  }
  if (simple && !is_keyword(name)) return std::string(name);
  std::string out = "`";
  for (char c : name) {
    out += c;
    if (c == '`') out += '`';
  }
  return out + "`";
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace hypokg::cypher
