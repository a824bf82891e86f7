#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geocorpus/csv.hpp"
#include "geocorpus/errors.hpp"
#include "geocorpus/similarity.hpp"

namespace geocorpus {

// Census ground truth for one country. Missing values stay unset and are
// removed pairwise before any correlation.
struct CountryStats {
  std::string country;  // ISO 3166 alpha-3
  std::optional<double> population;
  std::optional<double> gdp_per_capita;
  std::optional<double> internet_share;  // fraction in [0,1]
};

// country,population,gdp_per_capita,internet_share with empty fields as nulls.
inline std::vector<CountryStats> read_census_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read census file: " + path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  std::vector<CountryStats> out;
  bool first = true;
  auto parse_opt = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
  };
  while (reader.read_row(row)) {
    if (row.size() < 4) continue;
    if (first && row[0] == "country") {
      first = false;
      continue;
    }
    first = false;
    CountryStats cs;
    cs.country = row[0];
    cs.population = parse_opt(row[1]);
    cs.gdp_per_capita = parse_opt(row[2]);
    cs.internet_share = parse_opt(row[3]);
    if (cs.population && *cs.population <= 0) throw ConfigError("population must be positive: " + cs.country);
    if (cs.gdp_per_capita && *cs.gdp_per_capita <= 0) throw ConfigError("gdp must be positive: " + cs.country);
    if (cs.internet_share && (*cs.internet_share < 0 || *cs.internet_share > 1)) {
      throw ConfigError("internet share must be in [0,1]: " + cs.country);
    }
    out.push_back(cs);
  }
  return out;
}

struct PearsonResult {
  double r = 0;
  std::size_t n = 0;  // pairs used after null removal
};

// Pearson over country-aligned optional series: pairs with a null on either
// side are removed first. Needs >= 3 surviving pairs and two non-constant
// series.
inline PearsonResult pearson(const std::vector<std::optional<double>>& x,
                             const std::vector<std::optional<double>>& y) {
  if (x.size() != y.size()) throw ContractError("pearson: series lengths differ");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] && y[i]) {
      xs.push_back(*x[i]);
      ys.push_back(*y[i]);
    }
  }
  if (xs.size() < 3) {
    throw UndefinedStatError("pearson undefined: fewer than 3 pairs after null removal");
  }
  return PearsonResult{pearson_of(xs, ys), xs.size()};
}

// population x internet share.
inline double digital_population(double population, double internet_share) {
  return population * internet_share;
}

inline std::optional<double> digital_population(const CountryStats& cs) {
  if (!cs.population || !cs.internet_share) return std::nullopt;
  return digital_population(*cs.population, *cs.internet_share);
}

// Multiplicative, mean-normalized GDP weight: digital population scaled by
// gdp / mean(gdp over the countries given). The normalizer keeps the estimate
// in population-like units.
inline double mean_gdp(const std::vector<CountryStats>& stats) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& cs : stats) {
    if (cs.gdp_per_capita) {
      sum += *cs.gdp_per_capita;
      ++n;
    }
  }
  if (n == 0) throw UndefinedStatError("no gdp values: normalizer undefined");
  return sum / static_cast<double>(n);
}

inline std::optional<double> weighted_digital_estimate(const CountryStats& cs,
                                                       double gdp_normalizer) {
  if (gdp_normalizer <= 0) throw ContractError("gdp normalizer must be positive");
  const auto dp = digital_population(cs);
  if (!dp || !cs.gdp_per_capita) return std::nullopt;
  return *dp * (*cs.gdp_per_capita / gdp_normalizer);
}

// words per country for one source.
using DensityTable = std::map<std::string, std::uint64_t>;

inline DensityTable read_density_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read density file: " + path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  DensityTable out;
  bool first = true;
  while (reader.read_row(row)) {
    if (row.size() < 2) continue;
    if (first && row[0] == "country") {
      first = false;
      continue;
    }
    first = false;
    out[row[0]] += std::stoull(row[1]);
  }
  return out;
}

struct CorrelationRow {
  std::string variable;
  double r = 0;
  std::size_t n = 0;
  std::string error;  // non-empty when undefined
};

struct DensityReport {
  std::string source;
  std::vector<CorrelationRow> rows;
};

// Correlates one source's words-per-country against every census variable and
// the combined estimates.
inline DensityReport density_correlations(const std::string& source_name,
                                          const DensityTable& density,
                                          const std::vector<CountryStats>& stats) {
  const double normalizer = mean_gdp(stats);
  std::vector<std::optional<double>> words;
  std::map<std::string, std::vector<std::optional<double>>> variables;
  for (const auto& cs : stats) {
    const auto it = density.find(cs.country);
    words.push_back(it == density.end() ? std::nullopt
                                        : std::optional<double>(static_cast<double>(it->second)));
    variables["population"].push_back(cs.population);
    variables["gdp_per_capita"].push_back(cs.gdp_per_capita);
    variables["internet_share"].push_back(cs.internet_share);
    variables["digital_population"].push_back(digital_population(cs));
    variables["weighted_digital_estimate"].push_back(weighted_digital_estimate(cs, normalizer));
  }
  DensityReport report;
  report.source = source_name;
  for (const auto& name : {"population", "gdp_per_capita", "internet_share",
                           "digital_population", "weighted_digital_estimate"}) {
    CorrelationRow row;
    row.variable = name;
    try {
      const auto pr = pearson(words, variables[name]);
      row.r = pr.r;
      row.n = pr.n;
    } catch (const UndefinedStatError& e) {
      row.error = e.what();
    }
    report.rows.push_back(row);
  }
  return report;
}

// Pearson between two sources' words-per-country over the union of countries,
// countries missing from a source treated as nulls.
inline CorrelationRow cross_source_density_correlation(const DensityTable& a,
                                                       const DensityTable& b) {
  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> joined;
  for (const auto& [country, words] : a) joined[country].first = static_cast<double>(words);
  for (const auto& [country, words] : b) joined[country].second = static_cast<double>(words);
  std::vector<std::optional<double>> xs;
  std::vector<std::optional<double>> ys;
  for (const auto& [country, pair] : joined) {
    xs.push_back(pair.first);
    ys.push_back(pair.second);
  }
  CorrelationRow row;
  row.variable = "cross_source";
  try {
    const auto pr = pearson(xs, ys);
    row.r = pr.r;
    row.n = pr.n;
  } catch (const UndefinedStatError& e) {
    row.error = e.what();
  }
  return row;
}

// share of a country's corpus words in each language; shares per country sum
// to 1 by construction. Countries with zero words are omitted.
struct LanguageProfile {
  std::string language;
  std::map<std::string, double> share_by_country;
};

inline std::map<std::string, LanguageProfile> language_profiles(
    const std::map<std::pair<std::string, std::string>, std::uint64_t>& words_by_country_language) {
  std::map<std::string, std::uint64_t> country_totals;
  for (const auto& [key, words] : words_by_country_language) {
    country_totals[key.first] += words;
  }
  std::map<std::string, LanguageProfile> profiles;
  for (const auto& [key, words] : words_by_country_language) {
    const auto& [country, language] = key;
    if (country_totals[country] == 0) continue;
    auto& profile = profiles[language];
    profile.language = language;
    profile.share_by_country[country] =
        static_cast<double>(words) / static_cast<double>(country_totals[country]);
  }
  return profiles;
}

// Country-by-country Pearson between two sources' shares of one language.
// Countries present in only one profile are nulls and removed pairwise.
inline CorrelationRow profile_correlation(const LanguageProfile& a, const LanguageProfile& b) {
  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> joined;
  for (const auto& [country, share] : a.share_by_country) joined[country].first = share;
  for (const auto& [country, share] : b.share_by_country) joined[country].second = share;
  std::vector<std::optional<double>> xs;
  std::vector<std::optional<double>> ys;
  for (const auto& [country, pair] : joined) {
    xs.push_back(pair.first);
    ys.push_back(pair.second);
  }
  CorrelationRow row;
  row.variable = a.language;
  try {
    const auto pr = pearson(xs, ys);
    row.r = pr.r;
    row.n = pr.n;
  } catch (const UndefinedStatError& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace geocorpus
