#pragma once

#include <string>
#include <string_view>

namespace vstemma::unicode {

// Strict UTF-8 decoding; throws InputError on malformed input.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view text);

std::u32string nfc(std::u32string_view text);
std::u32string nfd(std::u32string_view text);
std::u32string to_lower(std::u32string_view text);

// General category Mn.
bool is_nonspacing_mark(char32_t c);
// Unicode White_Space property (spaces, tabs, line and paragraph breaks).
bool is_whitespace(char32_t c);
bool is_scalar_value(char32_t c);

}  // namespace vstemma::unicode
