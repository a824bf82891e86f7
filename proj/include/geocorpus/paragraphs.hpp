#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "geocorpus/public_suffix.hpp"
#include "geocorpus/records.hpp"
#include "geocorpus/tld.hpp"

namespace geocorpus {

// One <p>-block sample with its provenance.
struct Paragraph {
  std::string site;  // registrable domain of url
  std::string url;
  std::string period;
  std::string text;  // raw block text, inner markup stripped
};

namespace detail {

// True if s[pos..] opens the given tag name (case-insensitive), i.e. "<p>" or
// "<p attr...>". Returns the position right after the closing '>' via *after.
inline bool match_open_tag(std::string_view s, std::size_t pos, std::string_view name,
                           std::size_t* after) {
  if (pos + name.size() + 1 >= s.size() || s[pos] != '<') return false;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[pos + 1 + i])) != name[i]) return false;
  }
  std::size_t j = pos + 1 + name.size();
  if (s[j] != '>' && s[j] != ' ' && s[j] != '\t' && s[j] != '\n' && s[j] != '\r' && s[j] != '/') {
    return false;
  }
  const auto close = s.find('>', j);
  if (close == std::string_view::npos) return false;
  *after = close + 1;
  return true;
}

inline bool match_close_tag(std::string_view s, std::size_t pos, std::string_view name,
                            std::size_t* after) {
  if (pos + name.size() + 2 >= s.size() || s[pos] != '<' || s[pos + 1] != '/') return false;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[pos + 2 + i])) != name[i]) return false;
  }
  const auto close = s.find('>', pos + 2 + name.size());
  if (close == std::string_view::npos) return false;
  *after = close + 1;
  return true;
}

// Strips tags from block-inner text. <br> variants become line breaks; a '<'
// that does not open a plausible tag is kept as literal text. A small set of
// common entities is decoded (never to '<' or '>').
inline std::string strip_inline_markup(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '<') {
      if (i + 1 < s.size() &&
          (std::isalpha(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '/' ||
           s[i + 1] == '!')) {
        const bool is_br = (i + 2 < s.size() &&
                            std::tolower(static_cast<unsigned char>(s[i + 1])) == 'b' &&
                            std::tolower(static_cast<unsigned char>(s[i + 2])) == 'r');
        const auto close = s.find('>', i);
        if (close != std::string_view::npos) {
          if (is_br) out.push_back('\n');
          i = close + 1;
          continue;
        }
      }
      out.push_back(c);
      ++i;
    } else if (c == '&') {
      struct Entity {
        std::string_view name;
        std::string_view value;
      };
      static constexpr Entity entities[] = {
          {"&amp;", "&"}, {"&nbsp;", " "}, {"&quot;", "\""}, {"&apos;", "'"}, {"&#39;", "'"},
      };
      bool replaced = false;
      for (const auto& e : entities) {
        if (s.substr(i, e.name.size()) == e.name) {
          out += e.value;
          i += e.name.size();
          replaced = true;
          break;
        }
      }
      if (!replaced) {
        out.push_back(c);
        ++i;
      }
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

inline bool all_whitespace(std::string_view s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') return false;
  }
  return true;
}

inline std::string trim_outer_ws(std::string s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\n' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\n' || s[e - 1] == '\r')) {
    --e;
  }
  return s.substr(b, e - b);
}

}  // namespace detail

// Extracts one sample per <p>...</p> block. When blocks nest, the innermost
// text wins (the block restarts at the latest opening tag). Blocks that are
// empty after markup removal are dropped.
inline std::vector<Paragraph> extract_paragraphs(const RawRecord& record,
                                                 const PublicSuffixList& psl) {
  std::vector<Paragraph> out;
  const std::string_view payload = record.payload;
  const std::string host = url_host(record.url);
  const std::string site = psl.registrable_domain(host);

  std::size_t i = 0;
  std::size_t block_start = std::string_view::npos;
  while (i < payload.size()) {
    if (payload[i] == '<') {
      std::size_t after = 0;
      if (detail::match_open_tag(payload, i, "p", &after)) {
        block_start = after;
        i = after;
        continue;
      }
      if (block_start != std::string_view::npos &&
          detail::match_close_tag(payload, i, "p", &after)) {
        std::string text = detail::trim_outer_ws(
            detail::strip_inline_markup(payload.substr(block_start, i - block_start)));
        if (!text.empty() && !detail::all_whitespace(text)) {
          out.push_back(Paragraph{site, record.url, record.period, std::move(text)});
        }
        block_start = std::string_view::npos;
        i = after;
        continue;
      }
    }
    ++i;
  }
  return out;
}

}  // namespace geocorpus
