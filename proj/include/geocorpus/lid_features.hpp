#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "geocorpus/errors.hpp"
#include "geocorpus/hash.hpp"
#include "geocorpus/utf8.hpp"

namespace geocorpus {

inline constexpr std::size_t kWindowChars = 50;
inline constexpr std::uint32_t kTrigramsPerWindow = 48;
inline constexpr std::uint32_t kDefaultHashDim = 216000;

// Sparse hashed character-trigram features for one 50-character window.
// Entries are sorted by bucket id; at most 48 of them.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::uint32_t dim = 0;

  double sum() const {
    double s = 0;
    for (const auto& [idx, v] : entries) s += v;
    return s;
  }
};

// Non-overlapping consecutive 50-code-point windows; the trailing remainder
// is dropped. Texts shorter than one window yield nothing.
inline std::vector<std::u32string> windows(std::string_view cleaned_text) {
  const std::u32string cps = utf8_decode(cleaned_text);
  std::vector<std::u32string> out;
  const std::size_t n = cps.size() / kWindowChars;
  out.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    out.emplace_back(cps.substr(w * kWindowChars, kWindowChars));
  }
  return out;
}

// All 48 overlapping code-point trigrams hashed into [0, dim). Values are
// trigram relative frequencies (counts / 48) unless normalize is off, in
// which case they are raw counts.
inline FeatureVector featurize(std::u32string_view window, std::uint32_t dim,
                               std::uint64_t hash_seed = kDefaultHashSeed,
                               bool normalize = true) {
  if (window.size() != kWindowChars) {
    throw ContractError("featurize expects a 50-character window, got " +
                        std::to_string(window.size()));
  }
  if (dim == 0) throw ContractError("hashing dimension must be positive");

  const std::size_t n_trigrams = window.size() - 2;
  std::vector<std::pair<std::uint32_t, double>> buckets;
  buckets.reserve(n_trigrams);
  std::string bytes;
  for (std::size_t i = 0; i < n_trigrams; ++i) {
    bytes.clear();
    utf8_append(bytes, window[i]);
    utf8_append(bytes, window[i + 1]);
    utf8_append(bytes, window[i + 2]);
    buckets.emplace_back(static_cast<std::uint32_t>(stable_hash64(bytes, hash_seed) % dim), 1.0);
  }
  std::sort(buckets.begin(), buckets.end());

  FeatureVector fv;
  fv.dim = dim;
  fv.entries.reserve(buckets.size());
  for (const auto& [idx, one] : buckets) {
    if (!fv.entries.empty() && fv.entries.back().first == idx) {
      fv.entries.back().second += 1.0;
    } else {
      fv.entries.emplace_back(idx, 1.0);
    }
  }
  if (normalize) {
    const double denom = static_cast<double>(n_trigrams);
    for (auto& [idx, v] : fv.entries) v /= denom;
  }
  return fv;
}

}  // namespace geocorpus
