#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geocorpus/config.hpp"
#include "geocorpus/errors.hpp"
#include "geocorpus/utf8.hpp"

namespace geocorpus {

enum class ScriptClass { alphabetic, cjk, other_nonalphabetic };

inline std::string_view to_string(ScriptClass s) {
  switch (s) {
    case ScriptClass::alphabetic: return "alphabetic";
    case ScriptClass::cjk: return "cjk";
    case ScriptClass::other_nonalphabetic: return "other-nonalphabetic";
  }
  return "?";
}

namespace detail {

inline bool is_cjk(char32_t cp) {
  return (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x4E00 && cp <= 0x9FFF) ||
         (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x20000 && cp <= 0x2EBEF) ||
         (cp >= 0x3040 && cp <= 0x30FF) ||  // hiragana + katakana
         (cp >= 0x31F0 && cp <= 0x31FF) || (cp >= 0x1100 && cp <= 0x11FF) ||
         (cp >= 0xAC00 && cp <= 0xD7AF) || (cp >= 0xA960 && cp <= 0xA97F);
}

// Scripts without alphabetic word boundaries that are not CJK.
inline bool is_other_nonalphabetic(char32_t cp) {
  return (cp >= 0x0E00 && cp <= 0x0EFF) ||  // thai + lao
         (cp >= 0x1000 && cp <= 0x109F) ||  // myanmar
         (cp >= 0x1780 && cp <= 0x17FF) ||  // khmer
         (cp >= 0x0F00 && cp <= 0x0FFF);    // tibetan
}

inline bool is_emoji(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
         (cp >= 0x2B00 && cp <= 0x2BFF) || (cp >= 0xFE00 && cp <= 0xFE0F) || cp == 0x200D ||
         cp == 0x20E3;
}

inline bool is_symbol_or_punct(char32_t cp) {
  if (cp < 0x80) {
    return !(cp >= '0' && cp <= '9') && !(cp >= 'A' && cp <= 'Z') && !(cp >= 'a' && cp <= 'z');
  }
  return (cp >= 0x2000 && cp <= 0x206F) || (cp >= 0x20A0 && cp <= 0x20CF) ||
         (cp >= 0x2100 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F) ||
         (cp >= 0x2E00 && cp <= 0x2E7F) || (cp >= 0xFE30 && cp <= 0xFE4F) ||
         (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) || cp == 0x00A6 ||
         cp == 0x00A9 || cp == 0x00AE || cp == 0x00B0 || cp == 0x00B7;
}

inline bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == 0x00A0 || cp == 0x3000;
}

inline bool token_is_url(const std::u32string& tok) {
  static const std::u32string needles[] = {U"http://", U"https://", U"ftp://"};
  for (const auto& n : needles) {
    if (tok.find(n) != std::u32string::npos) return true;
  }
  return tok.rfind(U"www.", 0) == 0;
}

}  // namespace detail

// Removes url tokens, #hashtags, @mentions, emoji code points and tokens made
// only of symbols; collapses runs of spaces. Line breaks are preserved, but
// lines left empty by the removals are dropped.
inline std::string strip_noise(std::string_view raw) {
  const std::u32string cps = utf8_decode(raw);
  std::u32string out;
  out.reserve(cps.size());
  std::u32string token;
  bool line_has_content = false;
  bool line_written = false;

  auto flush_token = [&]() {
    if (token.empty()) return;
    std::u32string kept;
    if (!detail::token_is_url(token) &&
        !((token[0] == U'#' || token[0] == U'@') && token.size() > 1)) {
      for (char32_t cp : token) {
        if (!detail::is_emoji(cp)) kept.push_back(cp);
      }
      bool wordy = false;
      for (char32_t cp : kept) {
        if (!detail::is_symbol_or_punct(cp)) {
          wordy = true;
          break;
        }
      }
      if (!wordy) kept.clear();
    }
    if (!kept.empty()) {
      if (line_has_content) out.push_back(U' ');
      out += kept;
      line_has_content = true;
    }
    token.clear();
  };

  for (char32_t cp : cps) {
    if (cp == U'\n' || cp == U'\r') {
      flush_token();
      if (line_has_content) {
        out.push_back(U'\n');
        line_written = true;
      }
      line_has_content = false;
    } else if (detail::is_space(cp)) {
      flush_token();
    } else {
      token.push_back(cp);
    }
  }
  flush_token();
  if (!line_has_content && line_written && !out.empty() && out.back() == U'\n') {
    out.pop_back();  // no trailing break when the last line vanished
  }
  return utf8_encode(out);
}

// Majority vote over non-space code points. Ties break cjk, then
// other-nonalphabetic, then alphabetic.
inline ScriptClass classify_script(std::string_view text) {
  std::size_t cjk = 0;
  std::size_t other = 0;
  std::size_t alpha = 0;
  for (char32_t cp : utf8_decode(text)) {
    if (cp == U' ' || cp == U'\n' || cp == U'\t' || cp == U'\r') continue;
    if (detail::is_cjk(cp)) {
      ++cjk;
    } else if (detail::is_other_nonalphabetic(cp)) {
      ++other;
    } else {
      ++alpha;
    }
  }
  if (cjk >= other && cjk >= alpha && cjk > 0) return ScriptClass::cjk;
  if (other >= alpha && other > 0) return ScriptClass::other_nonalphabetic;
  return ScriptClass::alphabetic;
}

// Pluggable word segmenter for scripts without whitespace boundaries.
using Segmenter = std::function<std::vector<std::string>(std::u32string_view)>;

// Built-in heuristic: every CJK code point is one unit; maximal interleaved
// non-CJK runs are one unit each.
inline std::vector<std::string> heuristic_cjk_segmenter(std::u32string_view text) {
  std::vector<std::string> tokens;
  std::u32string run;
  auto flush_run = [&]() {
    if (!run.empty()) {
      tokens.push_back(utf8_encode(run));
      run.clear();
    }
  };
  for (char32_t cp : text) {
    if (cp == U' ' || cp == U'\n' || cp == U'\t' || cp == U'\r') {
      flush_run();
    } else if (detail::is_cjk(cp)) {
      flush_run();
      tokens.push_back(utf8_encode(std::u32string(1, cp)));
    } else {
      run.push_back(cp);
    }
  }
  flush_run();
  return tokens;
}

// Splits text into word tokens according to its script class.
inline std::vector<std::string> tokenize_words(std::string_view text, ScriptClass script,
                                               const Segmenter& segmenter = nullptr) {
  if (script == ScriptClass::cjk) {
    const std::u32string cps = utf8_decode(text);
    if (segmenter) return segmenter(cps);
    return heuristic_cjk_segmenter(cps);
  }
  std::vector<std::string> tokens;
  std::string tok;
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      if (!tok.empty()) tokens.push_back(std::move(tok));
      tok.clear();
    } else {
      tok.push_back(c);
    }
  }
  if (!tok.empty()) tokens.push_back(std::move(tok));
  return tokens;
}

inline std::size_t count_words(std::string_view text, ScriptClass script,
                               const Segmenter& segmenter = nullptr) {
  return tokenize_words(text, script, segmenter).size();
}

// Simple per-code-point lowercase covering Latin, Greek and Cyrillic blocks.
inline char32_t fold_cp(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp == 0x130) return U'i';  // dotted capital I
  if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E && cp % 2 == 1) return cp + 1;
  if (cp >= 0x200 && cp <= 0x232 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x1E00 && cp <= 0x1EFF && cp % 2 == 0) return cp + 1;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

inline std::string case_fold(std::string_view text) {
  std::u32string cps = utf8_decode(text);
  for (auto& cp : cps) cp = fold_cp(cp);
  return utf8_encode(cps);
}

enum class RejectReason { none, min_words, min_chars, error_words, nav_chars };

inline std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::none: return "none";
    case RejectReason::min_words: return "min-words";
    case RejectReason::min_chars: return "min-chars";
    case RejectReason::error_words: return "error-words";
    case RejectReason::nav_chars: return "nav-chars";
  }
  return "?";
}

// Heuristic sample filters. Length thresholds apply after cleaning; the
// non-alphabetic threshold counts characters instead of words.
struct FilterConfig {
  std::size_t min_words_alphabetic = 15;
  std::size_t min_chars_nonalphabetic = 50;
  std::vector<std::string> error_words = {"error", "404"};
  std::size_t error_word_limit = 2;  // reject at >= this many occurrences
  std::u32string nav_chars = U"|";
  std::size_t nav_char_limit = 4;  // reject at more than this many
  std::optional<std::size_t> country_page_ceiling;

  void validate() const {
    if (min_words_alphabetic < 1 || min_chars_nonalphabetic < 1 || error_word_limit < 1 ||
        nav_char_limit < 1) {
      throw ConfigError("filter thresholds must be >= 1");
    }
    if (error_words.empty() || nav_chars.empty()) {
      throw ConfigError("filter word/char sets must be non-empty");
    }
  }

  static FilterConfig from_config(const KeyValueConfig& cfg) {
    FilterConfig f;
    f.min_words_alphabetic =
        static_cast<std::size_t>(cfg.get_int("min_words_alphabetic", 15));
    f.min_chars_nonalphabetic =
        static_cast<std::size_t>(cfg.get_int("min_chars_nonalphabetic", 50));
    if (cfg.has("error_words")) {
      f.error_words.clear();
      std::string buf;
      for (char c : cfg.get("error_words", "")) {
        if (c == ',' || c == ' ') {
          if (!buf.empty()) f.error_words.push_back(buf);
          buf.clear();
        } else {
          buf.push_back(c);
        }
      }
      if (!buf.empty()) f.error_words.push_back(buf);
    }
    f.error_word_limit = static_cast<std::size_t>(cfg.get_int("error_word_limit", 2));
    if (cfg.has("nav_chars")) f.nav_chars = utf8_decode(cfg.get("nav_chars", "|"));
    f.nav_char_limit = static_cast<std::size_t>(cfg.get_int("nav_char_limit", 4));
    const auto ceiling = cfg.get_int("country_page_ceiling", -1);
    if (ceiling >= 0) f.country_page_ceiling = static_cast<std::size_t>(ceiling);
    f.validate();
    return f;
  }
};

namespace detail {

inline std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace detail

struct FilterVerdict {
  bool passed = true;
  RejectReason reason = RejectReason::none;
};

// Applies the rules in fixed order: length (alphabetic words / non-alphabetic
// chars), then error words, then navigation characters. The reason names the
// first failing rule.
inline FilterVerdict passes_filters(std::string_view cleaned_text, ScriptClass script,
                                    std::size_t word_count, const FilterConfig& cfg) {
  if (script == ScriptClass::alphabetic) {
    if (word_count < cfg.min_words_alphabetic) return {false, RejectReason::min_words};
  } else {
    std::size_t chars = 0;
    for (char32_t cp : utf8_decode(cleaned_text)) {
      if (cp != U' ' && cp != U'\n' && cp != U'\t' && cp != U'\r') ++chars;
    }
    if (chars < cfg.min_chars_nonalphabetic) return {false, RejectReason::min_chars};
  }

  const std::string folded = case_fold(cleaned_text);
  std::size_t error_hits = 0;
  for (const auto& w : cfg.error_words) {
    error_hits += detail::count_occurrences(folded, case_fold(w));
  }
  if (error_hits >= cfg.error_word_limit) return {false, RejectReason::error_words};

  std::size_t nav_hits = 0;
  for (char32_t cp : utf8_decode(cleaned_text)) {
    if (cfg.nav_chars.find(cp) != std::u32string::npos) ++nav_hits;
  }
  if (nav_hits > cfg.nav_char_limit) return {false, RejectReason::nav_chars};

  return {true, RejectReason::none};
}

}  // namespace geocorpus
