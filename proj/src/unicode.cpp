#include "vstemma/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <vector>

#include "vstemma/error.hpp"

namespace vstemma::unicode {

namespace {

icu::UnicodeString to_icu(std::u32string_view text) {
    return icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(text.data()), static_cast<int32_t>(text.size()));
}

std::u32string from_icu(const icu::UnicodeString& s) {
    UErrorCode status = U_ZERO_ERROR;
    const int32_t len = s.toUTF32(nullptr, 0, status);
    std::u32string out(static_cast<std::size_t>(len), U'\0');
    status = U_ZERO_ERROR;
    s.toUTF32(reinterpret_cast<UChar32*>(out.data()), len, status);
    if (U_FAILURE(status)) throw InputError("unicode conversion failed");
    return out;
}

std::u32string normalize_with(const icu::Normalizer2* (*get)(UErrorCode&), std::u32string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = get(status);
    if (U_FAILURE(status)) throw InputError("ICU normalizer unavailable");
    icu::UnicodeString out = norm->normalize(to_icu(text), status);
    if (U_FAILURE(status)) throw InputError("unicode normalization failed");
    return from_icu(out);
}

}  // namespace

bool is_scalar_value(char32_t c) { return c <= 0x10FFFF && (c < 0xD800 || c > 0xDFFF); }

std::u32string decode_utf8(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    auto bad = [&](std::size_t at) -> void {
        throw InputError("invalid UTF-8 at byte offset " + std::to_string(at));
    };
    while (i < bytes.size()) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        int extra = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            extra = 1;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            extra = 2;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            extra = 3;
            cp = b0 & 0x07;
        } else {
            bad(i);
        }
        if (i + static_cast<std::size_t>(extra) >= bytes.size()) bad(i);
        for (int k = 1; k <= extra; ++k) {
            const auto b = static_cast<unsigned char>(bytes[i + k]);
            if ((b & 0xC0) != 0x80) bad(i);
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr char32_t min_for_len[] = {0, 0x80, 0x800, 0x10000};
        if (cp < min_for_len[extra] || !is_scalar_value(cp)) bad(i);
        out.push_back(cp);
        i += static_cast<std::size_t>(extra) + 1;
    }
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t c : text) {
        if (!is_scalar_value(c)) throw InputError("cannot encode a non-scalar code point as UTF-8");
        if (c < 0x80) {
            out += static_cast<char>(c);
        } else if (c < 0x800) {
            out += static_cast<char>(0xC0 | (c >> 6));
            out += static_cast<char>(0x80 | (c & 0x3F));
        } else if (c < 0x10000) {
            out += static_cast<char>(0xE0 | (c >> 12));
            out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (c & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (c >> 18));
            out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (c & 0x3F));
        }
    }
    return out;
}

std::u32string nfc(std::u32string_view text) { return normalize_with(&icu::Normalizer2::getNFCInstance, text); }

std::u32string nfd(std::u32string_view text) { return normalize_with(&icu::Normalizer2::getNFDInstance, text); }

std::u32string to_lower(std::u32string_view text) {
    icu::UnicodeString s = to_icu(text);
    s.toLower(icu::Locale::getRoot());
    return from_icu(s);
}

bool is_nonspacing_mark(char32_t c) { return u_charType(static_cast<UChar32>(c)) == U_NON_SPACING_MARK; }

bool is_whitespace(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

}  // namespace vstemma::unicode
