#pragma once

// UTF-8 decoding and the small slice of Unicode case handling the feature
// templates need (Latin, Greek and Cyrillic alphabets).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tweetner/error.hpp"

namespace tweetner::utf8 {

/// Decodes a UTF-8 string into Unicode scalar values. Overlong forms,
/// surrogates and truncated sequences throw InvalidUtf8.
inline std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  auto fail = [&](const char* why) {
    throw Error(ErrorKind::InvalidUtf8, std::string(why) + " at byte " + std::to_string(i));
  };
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    char32_t cp = 0;
    std::size_t extra = 0;
    if (lead < 0x80) {
      out.push_back(lead);
      ++i;
      continue;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      extra = 3;
    } else {
      fail("invalid lead byte");
    }
    if (i + extra >= text.size()) fail("truncated sequence");
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) fail("invalid continuation byte");
      cp = (cp << 6) | (cont & 0x3F);
    }
    static constexpr char32_t min_for_len[] = {0, 0x80, 0x800, 0x10000};
    if (cp < min_for_len[extra]) fail("overlong encoding");
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid scalar value");
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
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

inline std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

inline bool is_valid(std::string_view text) {
  try {
    decode(text);
    return true;
  } catch (const Error&) {
    return false;
  }
}

inline bool is_whitespace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

/// Lowercase counterpart of an uppercase letter, or 0 when cp is not an
/// uppercase letter of a supported alphabet.
inline char32_t lower_of(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return 'i';
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) return (cp & 1) ? cp + 1 : 0;
    if (cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F) return 0;
    return (cp & 1) ? 0 : cp + 1;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return 0;
}

inline bool is_upper(char32_t cp) { return lower_of(cp) != 0; }

inline bool is_lower(char32_t cp) {
  if (cp >= 'a' && cp <= 'z') return true;
  if (cp >= 0xDF && cp <= 0xFF && cp != 0xF7) return true;
  if (cp >= 0x100 && cp <= 0x17F) return !is_upper(cp);
  if (cp >= 0x3AC && cp <= 0x3CE) return true;
  if (cp >= 0x430 && cp <= 0x45F) return true;
  return cp == 0xB5;
}

inline bool is_letter(char32_t cp) { return is_upper(cp) || is_lower(cp); }

inline char32_t to_lower(char32_t cp) {
  const char32_t l = lower_of(cp);
  return l != 0 ? l : cp;
}

inline std::string to_lower(std::string_view text) {
  std::u32string cps = decode(text);
  for (auto& cp : cps) cp = to_lower(cp);
  return encode(cps);
}

}  // namespace tweetner::utf8
