#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "geocorpus/csv.hpp"
#include "geocorpus/errors.hpp"

namespace geocorpus {

// Country/region assignment derived from a host's country-code TLD.
struct GeoRef {
  std::string tld;      // lowercase, decoded form for IDN ccTLDs
  std::string country;  // ISO 3166 alpha-3
  std::string region;
};

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// Extracts the host from an absolute URL. Returns "" when the URL does not
// yield one. IPv6 literal hosts are treated as non-geographic.
inline std::string url_host(std::string_view url) {
  const auto scheme = url.find("://");
  std::string_view rest = scheme == std::string_view::npos ? url : url.substr(scheme + 3);
  if (scheme == std::string_view::npos) return "";
  const auto end = rest.find_first_of("/?#");
  std::string_view authority = end == std::string_view::npos ? rest : rest.substr(0, end);
  const auto at = authority.rfind('@');
  if (at != std::string_view::npos) authority = authority.substr(at + 1);
  if (!authority.empty() && authority.front() == '[') return "";
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos &&
      authority.find_first_not_of("0123456789", colon + 1) == std::string_view::npos) {
    authority = authority.substr(0, colon);
  }
  if (authority.empty() || authority.front() == '.' || authority.back() == '.') return "";
  return ascii_lower(authority);
}

// Bundled lookup tables: ASCII ccTLD -> country, IDN ccTLD (punycode and
// decoded forms) -> country, country -> region, plus the exclusion list of
// ccTLDs used for non-geographic purposes.
class TldTables {
 public:
  static TldTables load(const std::filesystem::path& dir) {
    TldTables t;
    t.load_tld_country(dir / "tld_country.csv");
    t.load_idn(dir / "idn_tld_country.csv");
    t.load_regions(dir / "country_region.csv");
    t.load_excluded(dir / "excluded_tlds.csv");
    t.check_integrity();
    return t;
  }

  // Returns std::nullopt for hosts without a geographic ccTLD and for TLDs on
  // the exclusion list.
  std::optional<GeoRef> georeference(std::string_view url) const {
    const std::string host = url_host(url);
    if (host.empty()) return std::nullopt;
    const auto dot = host.rfind('.');
    if (dot == std::string::npos || dot + 1 >= host.size()) return std::nullopt;
    std::string label = host.substr(dot + 1);

    std::string decoded;
    std::string country;
    if (label.rfind("xn--", 0) == 0) {
      auto it = idn_by_punycode_.find(label);
      if (it == idn_by_punycode_.end()) return std::nullopt;
      decoded = it->second.first;
      country = it->second.second;
    } else if (std::any_of(label.begin(), label.end(),
                           [](char c) { return static_cast<unsigned char>(c) >= 0x80; })) {
      auto it = idn_by_decoded_.find(label);
      if (it == idn_by_decoded_.end()) return std::nullopt;
      decoded = label;
      country = it->second;
    } else {
      auto it = tld_country_.find(label);
      if (it == tld_country_.end()) return std::nullopt;
      decoded = label;
      country = it->second;
    }
    if (excluded_.count(label) != 0 || excluded_.count(decoded) != 0) return std::nullopt;
    auto rit = country_region_.find(country);
    if (rit == country_region_.end()) return std::nullopt;
    return GeoRef{decoded, country, rit->second};
  }

  const std::unordered_map<std::string, std::string>& country_region() const {
    return country_region_;
  }
  const std::unordered_set<std::string>& excluded() const { return excluded_; }
  std::size_t tld_count() const { return tld_country_.size(); }

 private:
  static std::ifstream open(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open table: " + p.string());
    return in;
  }

  static bool header_row(const std::vector<std::string>& row) {
    return !row.empty() && (row[0] == "tld" || row[0] == "country" || row[0] == "punycode");
  }

  void load_tld_country(const std::filesystem::path& p) {
    auto in = open(p);
    CsvReader r(in);
    std::vector<std::string> row;
    while (r.read_row(row)) {
      if (row.size() < 2 || header_row(row) || row[0].empty()) continue;
      tld_country_[ascii_lower(row[0])] = row[1];
    }
  }

  void load_idn(const std::filesystem::path& p) {
    auto in = open(p);
    CsvReader r(in);
    std::vector<std::string> row;
    while (r.read_row(row)) {
      if (row.size() < 3 || header_row(row) || row[0].empty()) continue;
      idn_by_punycode_[ascii_lower(row[0])] = {row[1], row[2]};
      idn_by_decoded_[row[1]] = row[2];
    }
  }

  void load_regions(const std::filesystem::path& p) {
    auto in = open(p);
    CsvReader r(in);
    std::vector<std::string> row;
    while (r.read_row(row)) {
      if (row.size() < 2 || header_row(row) || row[0].empty()) continue;
      country_region_[row[0]] = row[1];
    }
  }

  void load_excluded(const std::filesystem::path& p) {
    auto in = open(p);
    CsvReader r(in);
    std::vector<std::string> row;
    while (r.read_row(row)) {
      if (row.empty() || header_row(row) || row[0].empty()) continue;
      excluded_.insert(ascii_lower(row[0]));
    }
  }

  // Every country referenced by a TLD row must have a region.
  void check_integrity() const {
    for (const auto& [tld, country] : tld_country_) {
      if (country_region_.count(country) == 0) {
        throw ConfigError("tld table references country without region: " + country + " (." +
                          tld + ")");
      }
    }
    for (const auto& [pc, entry] : idn_by_punycode_) {
      if (country_region_.count(entry.second) == 0) {
        throw ConfigError("idn table references country without region: " + entry.second + " (" +
                          pc + ")");
      }
    }
  }

  std::unordered_map<std::string, std::string> tld_country_;
  std::unordered_map<std::string, std::pair<std::string, std::string>> idn_by_punycode_;
  std::unordered_map<std::string, std::string> idn_by_decoded_;
  std::unordered_map<std::string, std::string> country_region_;
  std::unordered_set<std::string> excluded_;
};

}  // namespace geocorpus
