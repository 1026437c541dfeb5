#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lao {

// All offsets in this project count Unicode scalar values, not bytes.
// Decoding is strict: invalid UTF-8 raises ParseError.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Half-open [begin, end) span in scalar-value offsets.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const TokenSpan&) const = default;
};

bool is_space_char(char32_t c);

// Maximal runs of non-whitespace characters.
std::vector<TokenSpan> tokenize(const std::u32string& chars);

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);

} // namespace lao
