#include "hypokg/embed/tokenize.hpp"

#include <cctype>
#include <cstdint>

namespace hypokg::embed {

namespace {

// Length in bytes of a Unicode whitespace sequence starting at `i`, or 0.
std::size_t whitespace_at(std::string_view s, std::size_t i) {
  const auto b = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char c = b(i);
  if (c == ' ' || (c >= 0x09 && c <= 0x0d)) return 1;
  if (c == 0xc2 && i + 1 < s.size() && (b(i + 1) == 0x85 || b(i + 1) == 0xa0)) return 2;
  if (i + 2 >= s.size()) return 0;
  const std::uint32_t cp = (c == 0xe1 || c == 0xe2 || c == 0xe3)
                               ? ((c & 0x0fu) << 12) | ((b(i + 1) & 0x3fu) << 6) | (b(i + 2) & 0x3fu)
                               : 0;
  if (cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200a) || cp == 0x2028 || cp == 0x2029 ||
      cp == 0x202f || cp == 0x205f || cp == 0x3000) {
    return 3;
  }
  return 0;
}

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

void emit_word(std::string_view word, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = word.size();
  while (begin < end && is_punct(word[begin])) out.emplace_back(1, word[begin++]);
  std::size_t trail = end;
  while (trail > begin && is_punct(word[trail - 1])) --trail;
  if (trail > begin) out.emplace_back(word.substr(begin, trail - begin));
  for (std::size_t k = trail; k < end; ++k) out.emplace_back(1, word[k]);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  std::size_t start = 0;
  while (i < text.size()) {
    const std::size_t ws = whitespace_at(text, i);
    if (ws == 0) {
      ++i;
      continue;
    }
    if (i > start) emit_word(text.substr(start, i - start), out);
    i += ws;
    start = i;
  }
  if (text.size() > start) emit_word(text.substr(start), out);
  return out;
}

std::size_t token_count(std::string_view text) { return tokenize(text).size(); }

}  // namespace hypokg::embed
