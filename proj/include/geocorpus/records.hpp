#pragma once

#include <istream>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "geocorpus/errors.hpp"
#include "geocorpus/tld.hpp"
#include "geocorpus/utf8.hpp"

namespace geocorpus {

// One crawl page: URL, collection period (YYYY-MM) and raw body text.
struct RawRecord {
  std::string url;
  std::string period;
  std::string payload;
};

inline bool valid_period(std::string_view p) {
  if (p.size() != 7 || p[4] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u}) {
    if (p[i] < '0' || p[i] > '9') return false;
  }
  const int month = (p[5] - '0') * 10 + (p[6] - '0');
  return month >= 1 && month <= 12;
}

struct ParseCounters {
  std::size_t records = 0;
  std::size_t skipped = 0;
  std::size_t utf8_replacements = 0;
};

// Streaming record source. Malformed records are skipped and counted;
// resynchronization never disturbs the parse of later records.
class RecordReader {
 public:
  virtual ~RecordReader() = default;
  virtual bool next(RawRecord& out) = 0;
  const ParseCounters& counters() const { return counters_; }

 protected:
  bool accept(RawRecord& out, std::string url, std::string period, std::string payload) {
    if (!valid_period(period) || url_host(url).empty()) {
      ++counters_.skipped;
      return false;
    }
    out.url = std::move(url);
    out.period = std::move(period);
    out.payload = std::move(payload);
    ++counters_.records;
    return true;
  }

  ParseCounters counters_;
};

// One JSON object per line with `url`, `period`, `payload` string fields.
class JsonlReader final : public RecordReader {
 public:
  explicit JsonlReader(std::istream& in) : in_(in) {}

  bool next(RawRecord& out) override {
    std::string line;
    while (std::getline(in_, line)) {
      if (trim_ws(line).empty()) continue;
      const std::string clean = utf8_sanitize(line, &counters_.utf8_replacements);
      const nlohmann::json j = nlohmann::json::parse(clean, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("url") || !j.contains("period") ||
          !j.contains("payload") || !j["url"].is_string() || !j["period"].is_string() ||
          !j["payload"].is_string()) {
        ++counters_.skipped;
        continue;
      }
      if (accept(out, j["url"].get<std::string>(), j["period"].get<std::string>(),
                 j["payload"].get<std::string>())) {
        return true;
      }
    }
    return false;
  }

 private:
  static std::string_view trim_ws(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
      s.remove_suffix(1);
    }
    return s;
  }

  std::istream& in_;
};

// WARC-like archive: records are announced by a line equal to "WARC/1.0",
// followed by `Key: Value` header lines, a blank line, and payload lines up to
// the next announcement. URL comes from WARC-Target-URI (or URL); the period
// from a Period header or the YYYY-MM prefix of WARC-Date.
class WarcLikeReader final : public RecordReader {
 public:
  explicit WarcLikeReader(std::istream& in) : in_(in) {
    // position on the first record boundary
    std::string line;
    while (std::getline(in_, line)) {
      if (strip_cr(line) == kBoundary) {
        at_boundary_ = true;
        break;
      }
    }
  }

  bool next(RawRecord& out) override {
    while (at_boundary_) {
      std::string url;
      std::string period;
      std::string payload;
      bool in_headers = true;
      bool header_ok = true;
      at_boundary_ = false;
      std::string line;
      while (std::getline(in_, line)) {
        const std::string_view sv = strip_cr(line);
        if (sv == kBoundary) {
          at_boundary_ = true;
          break;
        }
        if (in_headers) {
          if (sv.empty()) {
            in_headers = false;
            continue;
          }
          const auto colon = sv.find(": ");
          if (colon == std::string_view::npos) {
            header_ok = false;
            continue;
          }
          const std::string_view key = sv.substr(0, colon);
          const std::string_view value = sv.substr(colon + 2);
          if (key == "WARC-Target-URI" || key == "URL") {
            url = std::string(value);
          } else if (key == "Period") {
            period = std::string(value);
          } else if (key == "WARC-Date" && period.empty() && value.size() >= 7) {
            period = std::string(value.substr(0, 7));
          }
        } else {
          if (!payload.empty()) payload.push_back('\n');
          payload += std::string(sv);
        }
      }
      if (!header_ok || url.empty() || period.empty()) {
        ++counters_.skipped;
        continue;
      }
      const std::string clean_payload = utf8_sanitize(payload, &counters_.utf8_replacements);
      if (accept(out, utf8_sanitize(url, &counters_.utf8_replacements), period, clean_payload)) {
        return true;
      }
    }
    return false;
  }

 private:
  static constexpr std::string_view kBoundary = "WARC/1.0";

  static std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
  }

  std::istream& in_;
  bool at_boundary_ = false;
};

enum class RecordFormat { warc_like, jsonl };

inline RecordFormat record_format_from_tag(std::string_view tag) {
  if (tag == "warc-like" || tag == "warc") return RecordFormat::warc_like;
  if (tag == "jsonl") return RecordFormat::jsonl;
  throw ConfigError("unknown record format tag: " + std::string(tag));
}

inline std::unique_ptr<RecordReader> make_record_reader(std::istream& in, RecordFormat format) {
  if (format == RecordFormat::jsonl) return std::make_unique<JsonlReader>(in);
  return std::make_unique<WarcLikeReader>(in);
}

}  // namespace geocorpus
