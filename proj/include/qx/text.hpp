#pragma once

/// Text utilities: UTF-8 decoding, case folding and the lexical tokenizer
/// shared by indexing, retrieval and keyword handling.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qx {

/// Bumped whenever tokenize() output can change for some input. Persisted in
/// index manifests so stale indexes are rejected on load.
inline constexpr int kTokenizerVersion = 1;

namespace detail {

struct DecodedCodepoint {
    char32_t value;
    std::size_t length;  // bytes consumed, >= 1
    bool valid;
};

inline DecodedCodepoint decode_utf8(std::string_view s, std::size_t pos) noexcept {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    const unsigned char lead = byte(pos);
    if (lead < 0x80) return {lead, 1, true};

    std::size_t len = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        return {0xFFFD, 1, false};
    }
    if (pos + len > s.size()) return {0xFFFD, 1, false};
    for (std::size_t i = 1; i < len; ++i) {
        const unsigned char c = byte(pos + i);
        if ((c & 0xC0) != 0x80) return {0xFFFD, 1, false};
        cp = (cp << 6) | (c & 0x3F);
    }
    // Overlong encodings and surrogates are rejected.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        return {0xFFFD, 1, false};
    }
    return {cp, len, true};
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline bool in_range(char32_t cp, char32_t lo, char32_t hi) noexcept { return cp >= lo && cp <= hi; }

// Word characters: ASCII alphanumerics plus every non-ASCII code point outside
// the punctuation, symbol, space and control blocks listed here. Combining
// marks stay attached to their word.
inline bool is_word_char(char32_t cp) noexcept {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
    }
    if (in_range(cp, 0x80, 0xBF)) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp == 0x037E || cp == 0x0387) return false;                       // Greek punctuation
    if (in_range(cp, 0x055A, 0x055F) || cp == 0x0589) return false;      // Armenian punctuation
    if (cp == 0x05BE || cp == 0x05C0 || cp == 0x05C3 || cp == 0x05C6) return false;
    if (in_range(cp, 0x060C, 0x060D) || cp == 0x061B || cp == 0x061F || in_range(cp, 0x066A, 0x066D)) {
        return false;
    }
    if (in_range(cp, 0x0964, 0x0965)) return false;                      // Devanagari danda
    if (cp == 0x1680) return false;
    if (in_range(cp, 0x2000, 0x2BFF)) return false;  // punctuation, symbols, arrows, math, box drawing
    if (in_range(cp, 0x2E00, 0x2E7F)) return false;
    if (in_range(cp, 0x3000, 0x3004) || in_range(cp, 0x3008, 0x3020) || cp == 0x3030) return false;
    if (in_range(cp, 0xFE10, 0xFE1F) || in_range(cp, 0xFE30, 0xFE6F)) return false;
    if (in_range(cp, 0xFF00, 0xFF0F) || in_range(cp, 0xFF1A, 0xFF20) || in_range(cp, 0xFF3B, 0xFF40) ||
        in_range(cp, 0xFF5B, 0xFF65)) {
        return false;
    }
    if (in_range(cp, 0xFFF0, 0xFFFF)) return false;
    if (in_range(cp, 0x1F000, 0x1FAFF)) return false;  // emoji and pictographs
    if (in_range(cp, 0xE0000, 0xE007F)) return false;  // tags
    return true;
}

inline char32_t to_lower(char32_t cp) noexcept {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp < 0x80) return cp;
    if (in_range(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
    if (in_range(cp, 0x100, 0x137) || in_range(cp, 0x14A, 0x177)) return (cp % 2 == 0) ? cp + 1 : cp;
    if (in_range(cp, 0x139, 0x148) || in_range(cp, 0x179, 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x178) return 0xFF;
    if (cp == 0x386) return 0x3AC;
    if (in_range(cp, 0x388, 0x38A)) return cp + 0x25;
    if (cp == 0x38C) return 0x3CC;
    if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
    if (in_range(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
    if (in_range(cp, 0x400, 0x40F)) return cp + 0x50;
    if (in_range(cp, 0x410, 0x42F)) return cp + 0x20;
    if (in_range(cp, 0x460, 0x481) || in_range(cp, 0x48A, 0x4BF)) return (cp % 2 == 0) ? cp + 1 : cp;
    if (in_range(cp, 0x531, 0x556)) return cp + 0x30;
    if (in_range(cp, 0x1E00, 0x1E95) || in_range(cp, 0x1EA0, 0x1EFF)) return (cp % 2 == 0) ? cp + 1 : cp;
    if (in_range(cp, 0xFF21, 0xFF3A)) return cp + 0x20;
    return cp;
}

}  // namespace detail

/// Lowercases ASCII and the Latin, Greek, Cyrillic and Armenian cased blocks.
/// Invalid UTF-8 bytes are copied through unchanged.
inline std::string to_lower(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto d = detail::decode_utf8(text, pos);
        if (d.valid) {
            detail::append_utf8(out, detail::to_lower(d.value));
        } else {
            out.push_back(text[pos]);
        }
        pos += d.length;
    }
    return out;
}

/// Lowercased word segmentation. Runs of word characters form terms; every
/// other code point (punctuation, symbols, whitespace, invalid bytes) is a
/// separator. No stemming and no stopword removal.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto d = detail::decode_utf8(text, pos);
        pos += d.length;
        if (d.valid && detail::is_word_char(d.value)) {
            detail::append_utf8(current, detail::to_lower(d.value));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

inline std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

inline bool is_blank(std::string_view s) noexcept { return trim(s).empty(); }

/// Longest prefix of `text` holding at most `max_codepoints` code points.
/// Never splits a multi-byte sequence.
inline std::string_view utf8_prefix(std::string_view text, std::size_t max_codepoints) noexcept {
    std::size_t pos = 0;
    std::size_t count = 0;
    while (pos < text.size() && count < max_codepoints) {
        pos += detail::decode_utf8(text, pos).length;
        ++count;
    }
    return text.substr(0, pos);
}

inline std::size_t utf8_length(std::string_view text) noexcept {
    std::size_t pos = 0;
    std::size_t count = 0;
    while (pos < text.size()) {
        pos += detail::decode_utf8(text, pos).length;
        ++count;
    }
    return count;
}

}  // namespace qx
