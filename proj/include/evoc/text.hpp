#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evoc {

/// Decodes UTF-8 into codepoints. Each malformed byte becomes U+FFFD.
inline std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            const unsigned char bk = static_cast<unsigned char>(s[i + k]);
            if ((bk & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (bk & 0x3F);
        }
        if (!ok || (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
            (len == 4 && cp < 0x10000) || cp > 0x10FFFF) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
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

inline std::string encode_utf8(const std::vector<char32_t>& cps, std::size_t begin,
                               std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) append_utf8(out, cps[i]);
    return out;
}

inline bool is_space_cp(char32_t cp) {
    switch (cp) {
        case U' ':
        case U'\t':
        case U'\n':
        case U'\r':
        case U'\v':
        case U'\f':
        case 0x0085:
        case 0x00A0:
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

/// Punctuation for word pre-splitting: the four ASCII punctuation ranges plus
/// the common Unicode punctuation blocks (general, CJK, fullwidth forms).
/// This is the usual BERT basic-tokenizer approximation, not full category P.
inline bool is_punct_cp(char32_t cp) {
    if ((cp >= 33 && cp <= 47) || (cp >= 58 && cp <= 64) || (cp >= 91 && cp <= 96) ||
        (cp >= 123 && cp <= 126)) {
        return true;
    }
    switch (cp) {
        case 0x00A1:  // inverted exclamation
        case 0x00A7:  // section sign
        case 0x00AB:  // left guillemet
        case 0x00B6:  // pilcrow
        case 0x00B7:  // middle dot
        case 0x00BB:  // right guillemet
        case 0x00BF:  // inverted question mark
            return true;
        default:
            break;
    }
    if (cp >= 0x2010 && cp <= 0x2027) return true;  // dashes, quotes, daggers
    if (cp >= 0x2030 && cp <= 0x205E) return true;  // permille through punctuation tail
    if (cp >= 0x3001 && cp <= 0x3003) return true;  // CJK comma, stop, ditto
    if (cp >= 0x3008 && cp <= 0x3011) return true;  // CJK brackets
    if (cp >= 0x3014 && cp <= 0x301F) return true;
    if (cp >= 0xFF01 && cp <= 0xFF0F) return true;  // fullwidth ASCII punct
    if (cp >= 0xFF1A && cp <= 0xFF20) return true;
    if (cp >= 0xFF3B && cp <= 0xFF40) return true;
    if (cp >= 0xFF5B && cp <= 0xFF65) return true;
    return false;
}

/// ASCII plus Latin-1 lowercasing; other scripts pass through unchanged.
inline char32_t lower_cp(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 32;
    return cp;
}

inline std::string lowercase_utf8(std::string_view s) {
    const std::vector<char32_t> cps = decode_utf8(s);
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : cps) append_utf8(out, lower_cp(cp));
    return out;
}

/// Splits text into words on whitespace, with every punctuation codepoint
/// emitted as its own single-character word.
inline std::vector<std::string> pre_split(std::string_view text) {
    const std::vector<char32_t> cps = decode_utf8(text);
    std::vector<std::string> words;
    std::string current;
    for (char32_t cp : cps) {
        if (is_space_cp(cp)) {
            if (!current.empty()) {
                words.push_back(std::move(current));
                current.clear();
            }
        } else if (is_punct_cp(cp)) {
            if (!current.empty()) {
                words.push_back(std::move(current));
                current.clear();
            }
            std::string p;
            append_utf8(p, cp);
            words.push_back(std::move(p));
        } else {
            append_utf8(current, cp);
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

inline bool is_pure_punctuation(std::string_view word) {
    const std::vector<char32_t> cps = decode_utf8(word);
    if (cps.empty()) return false;
    for (char32_t cp : cps) {
        if (!is_punct_cp(cp)) return false;
    }
    return true;
}

}  // namespace evoc
