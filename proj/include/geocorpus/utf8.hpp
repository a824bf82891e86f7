#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace geocorpus {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes UTF-8 into code points. Invalid byte sequences produce U+FFFD
// (one per rejected byte) and bump *replacements when provided.
inline std::u32string utf8_decode(std::string_view bytes, std::size_t* replacements = nullptr) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const auto n = bytes.size();
  auto bad = [&](std::size_t advance) {
    out.push_back(kReplacementChar);
    if (replacements != nullptr) ++*replacements;
    i += advance;
  };
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      bad(1);
      continue;
    }
    if (i + static_cast<std::size_t>(len) > n) {
      bad(1);
      continue;
    }
    bool ok = true;
    char32_t acc = cp;
    for (int k = 1; k < len; ++k) {
      const auto bk = static_cast<unsigned char>(bytes[i + static_cast<std::size_t>(k)]);
      if ((bk & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      acc = (acc << 6) | (bk & 0x3F);
    }
    if (!ok) {
      bad(1);
      continue;
    }
    // Reject overlong encodings, surrogates and out-of-range values.
    const bool overlong = (len == 2 && acc < 0x80) || (len == 3 && acc < 0x800) ||
                          (len == 4 && acc < 0x10000);
    if (overlong || acc > 0x10FFFF || (acc >= 0xD800 && acc <= 0xDFFF)) {
      bad(static_cast<std::size_t>(len));
      continue;
    }
    out.push_back(acc);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
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

inline std::string utf8_encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) utf8_append(out, cp);
  return out;
}

// Replaces invalid sequences with U+FFFD, counting them. Valid input is returned unchanged.
inline std::string utf8_sanitize(std::string_view bytes, std::size_t* replacements = nullptr) {
  std::size_t local = 0;
  std::u32string cps = utf8_decode(bytes, &local);
  if (replacements != nullptr) *replacements += local;
  if (local == 0) return std::string(bytes);
  return utf8_encode(cps);
}

inline std::size_t utf8_length(std::string_view bytes) {
  std::size_t count = 0;
  for (char c : bytes) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++count;
  }
  return count;
}

}  // namespace geocorpus
