#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "geocorpus/errors.hpp"
#include "geocorpus/frequency.hpp"

namespace geocorpus {

// Average (fractional) ranks, ties sharing the mean of their rank positions.
inline std::vector<double> average_ranks(const std::vector<std::uint64_t>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share rank mean of (i+1..j+1)
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

inline double pearson_of(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0;
  double my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0;
  double sxx = 0;
  double syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedStatError("correlation undefined: constant series");
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

// Spearman rank correlation of the two aligned count columns.
inline double spearman(const AlignedVocab& aligned) {
  if (aligned.size() < 2) {
    throw UndefinedStatError("spearman undefined: fewer than 2 aligned tokens");
  }
  return pearson_of(average_ranks(aligned.counts_a), average_ranks(aligned.counts_b));
}

struct ChiSquareResult {
  double statistic = 0;
  std::size_t tokens_skipped = 0;
};

// Two-corpus chi-square over the aligned tokens, expected counts proportional
// to the corpus totals. Size-sensitive; provided for comparison, off by
// default in reports.
inline ChiSquareResult chi_square_similarity(const AlignedVocab& aligned) {
  if (aligned.size() < 1) throw UndefinedStatError("chi-square undefined: empty alignment");
  if (aligned.total_a == 0 || aligned.total_b == 0) {
    throw UndefinedStatError("chi-square undefined: zero corpus total");
  }
  const double ta = static_cast<double>(aligned.total_a);
  const double tb = static_cast<double>(aligned.total_b);
  const double share_a = ta / (ta + tb);
  const double share_b = tb / (ta + tb);
  ChiSquareResult out;
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    const double oa = static_cast<double>(aligned.counts_a[i]);
    const double ob = static_cast<double>(aligned.counts_b[i]);
    const double ea = (oa + ob) * share_a;
    const double eb = (oa + ob) * share_b;
    if (ea == 0.0 || eb == 0.0) {
      ++out.tokens_skipped;
      continue;
    }
    out.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  return out;
}

struct SimilarityObservation {
  std::string language;
  std::string country;
  double rho = 0;
  std::size_t n_aligned = 0;
};

struct LanguageSummary {
  std::size_t n_observations = 0;
  double mean = 0;
  double stddev = 0;  // population
};

// Mean and population standard deviation per language. Population stddev
// keeps single-observation rows well defined (stddev 0).
inline std::map<std::string, LanguageSummary> summarize_by_language(
    const std::vector<SimilarityObservation>& observations) {
  std::map<std::string, std::vector<double>> grouped;
  for (const auto& obs : observations) grouped[obs.language].push_back(obs.rho);
  std::map<std::string, LanguageSummary> out;
  for (const auto& [language, rhos] : grouped) {
    LanguageSummary s;
    s.n_observations = rhos.size();
    for (double r : rhos) s.mean += r;
    s.mean /= static_cast<double>(rhos.size());
    double var = 0;
    for (double r : rhos) var += (r - s.mean) * (r - s.mean);
    var /= static_cast<double>(rhos.size());
    s.stddev = std::sqrt(var);
    out[language] = s;
  }
  return out;
}

struct CrossSourceResult {
  std::vector<SimilarityObservation> observations;
  std::map<std::string, LanguageSummary> per_language;
  // pairs meeting the word floor whose similarity was undefined
  std::vector<std::pair<std::string, std::string>> undefined_pairs;
};

// One observation per (language, country) with at least min_words in both
// registers.
inline CrossSourceResult cross_source_similarity(const std::vector<FrequencyList>& source_a,
                                                 const std::vector<FrequencyList>& source_b,
                                                 std::uint64_t min_words = 1'000'000,
                                                 const FrequencyThreshold& thr = {}) {
  std::map<std::pair<std::string, std::string>, const FrequencyList*> index_b;
  for (const auto& fl : source_b) index_b[{fl.language, fl.country}] = &fl;

  CrossSourceResult result;
  std::vector<const FrequencyList*> ordered_a;
  for (const auto& fl : source_a) ordered_a.push_back(&fl);
  std::sort(ordered_a.begin(), ordered_a.end(), [](const auto* x, const auto* y) {
    return std::tie(x->language, x->country) < std::tie(y->language, y->country);
  });
  for (const auto* fa : ordered_a) {
    if (fa->total_tokens < min_words) continue;
    const auto it = index_b.find({fa->language, fa->country});
    if (it == index_b.end() || it->second->total_tokens < min_words) continue;
    const auto aligned = align(*fa, *it->second, thr);
    try {
      const double rho = spearman(aligned);
      result.observations.push_back(
          SimilarityObservation{fa->language, fa->country, rho, aligned.size()});
    } catch (const UndefinedStatError&) {
      result.undefined_pairs.emplace_back(fa->language, fa->country);
    }
  }
  result.per_language = summarize_by_language(result.observations);
  return result;
}

struct WithinSourceRow {
  std::string language;
  std::size_t n_countries = 0;
  std::size_t n_pairs = 0;
  double mean = 0;
  double stddev = 0;  // population, 0 for a single pair
};

struct WithinSourceResult {
  std::vector<WithinSourceRow> rows;
  std::vector<std::string> skipped_languages;  // fewer than 2 qualifying countries
};

// Reciprocal similarity inside one register: every unordered country pair for
// each language with at least two qualifying countries.
inline WithinSourceResult within_source_similarity(const std::vector<FrequencyList>& source,
                                                   std::uint64_t min_words = 1'000'000,
                                                   const FrequencyThreshold& thr = {}) {
  std::map<std::string, std::vector<const FrequencyList*>> by_language;
  for (const auto& fl : source) {
    if (fl.total_tokens >= min_words) by_language[fl.language].push_back(&fl);
  }
  WithinSourceResult result;
  for (auto& [language, lists] : by_language) {
    if (lists.size() < 2) {
      result.skipped_languages.push_back(language);
      continue;
    }
    std::sort(lists.begin(), lists.end(), [](const auto* x, const auto* y) {
      return x->country < y->country;
    });
    std::vector<double> rhos;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      for (std::size_t j = i + 1; j < lists.size(); ++j) {
        try {
          rhos.push_back(spearman(align(*lists[i], *lists[j], thr)));
        } catch (const UndefinedStatError&) {
          // undefined pair contributes nothing
        }
      }
    }
    if (rhos.empty()) {
      result.skipped_languages.push_back(language);
      continue;
    }
    WithinSourceRow row;
    row.language = language;
    row.n_countries = lists.size();
    row.n_pairs = rhos.size();
    for (double r : rhos) row.mean += r;
    row.mean /= static_cast<double>(rhos.size());
    double var = 0;
    for (double r : rhos) var += (r - row.mean) * (r - row.mean);
    row.stddev = std::sqrt(var / static_cast<double>(rhos.size()));
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace geocorpus
