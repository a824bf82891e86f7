#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geocorpus/clean.hpp"
#include "geocorpus/csv.hpp"
#include "geocorpus/errors.hpp"

namespace geocorpus {

// Unigram counts for one (register, language, country) sub-corpus. Tokens are
// case-folded word forms from the same tokenizer the cleaning stage uses.
struct FrequencyList {
  std::string register_tag;
  std::string language;  // ISO 639-3
  std::string country;   // ISO 3166 alpha-3
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total_tokens = 0;

  void add_token(std::string_view token) {
    ++counts[case_fold(token)];
    ++total_tokens;
  }

  void add_text(std::string_view text, ScriptClass script, const Segmenter& segmenter = nullptr) {
    for (const auto& tok : tokenize_words(text, script, segmenter)) add_token(tok);
  }
};

// The frequency threshold: keep tokens occurring at least `numerator` times
// per `denominator` words. Evaluated in exact integer arithmetic; the
// boundary is inclusive.
struct FrequencyThreshold {
  std::uint64_t numerator = 5;
  std::uint64_t denominator = 10'000'000;

  bool retains(std::uint64_t count, std::uint64_t total) const {
    if (total == 0) return false;
    return count * denominator >= numerator * total;
  }
};

inline std::vector<std::string> apply_threshold(const FrequencyList& fl,
                                                const FrequencyThreshold& thr = {}) {
  std::vector<std::string> kept;
  for (const auto& [token, count] : fl.counts) {
    if (thr.retains(count, fl.total_tokens)) kept.push_back(token);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

// Tokens above the threshold in both lists, with both count columns.
struct AlignedVocab {
  std::vector<std::string> tokens;  // sorted
  std::vector<std::uint64_t> counts_a;
  std::vector<std::uint64_t> counts_b;
  std::uint64_t total_a = 0;  // corpus totals, pre-threshold
  std::uint64_t total_b = 0;

  std::size_t size() const { return tokens.size(); }
};

inline AlignedVocab align(const FrequencyList& a, const FrequencyList& b,
                          const FrequencyThreshold& thr = {}) {
  if (a.language != b.language) {
    throw ContractError("align requires the same language: " + a.language + " vs " + b.language);
  }
  const auto kept_a = apply_threshold(a, thr);
  AlignedVocab out;
  out.total_a = a.total_tokens;
  out.total_b = b.total_tokens;
  for (const auto& token : kept_a) {
    const auto it = b.counts.find(token);
    if (it == b.counts.end() || !thr.retains(it->second, b.total_tokens)) continue;
    out.tokens.push_back(token);
    out.counts_a.push_back(a.counts.at(token));
    out.counts_b.push_back(it->second);
  }
  return out;
}

// --- on-disk layout: <root>/<register>/<language>/<COUNTRY>.csv ------------

inline std::filesystem::path frequency_list_path(const std::filesystem::path& root,
                                                 const FrequencyList& fl) {
  return root / fl.register_tag / fl.language / (fl.country + ".csv");
}

// token,count rows sorted by descending count then token.
inline void write_frequency_csv(const std::filesystem::path& root, const FrequencyList& fl) {
  const auto path = frequency_list_path(root, fl);
  std::filesystem::create_directories(path.parent_path());
  std::vector<std::pair<std::string, std::uint64_t>> rows(fl.counts.begin(), fl.counts.end());
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write frequency list: " + path.string());
  csv_write_row(out, {"token", "count"});
  for (const auto& [token, count] : rows) {
    csv_write_row(out, {token, std::to_string(count)});
  }
  if (!out) throw IoError("short write: " + path.string());
}

inline FrequencyList read_frequency_csv(const std::filesystem::path& path,
                                        std::string register_tag, std::string language,
                                        std::string country) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read frequency list: " + path.string());
  FrequencyList fl;
  fl.register_tag = std::move(register_tag);
  fl.language = std::move(language);
  fl.country = std::move(country);
  CsvReader reader(in);
  std::vector<std::string> row;
  bool first = true;
  while (reader.read_row(row)) {
    if (row.size() < 2) continue;
    if (first && row[0] == "token") {
      first = false;
      continue;
    }
    first = false;
    const std::uint64_t count = std::stoull(row[1]);
    fl.counts[row[0]] += count;
    fl.total_tokens += count;
  }
  return fl;
}

// Loads every list under <root>/<register>/ into memory.
inline std::vector<FrequencyList> read_frequency_tree(const std::filesystem::path& root,
                                                      const std::string& register_tag) {
  std::vector<FrequencyList> lists;
  const auto reg_dir = root / register_tag;
  if (!std::filesystem::exists(reg_dir)) return lists;
  std::vector<std::filesystem::path> files;
  for (const auto& lang_entry : std::filesystem::directory_iterator(reg_dir)) {
    if (!lang_entry.is_directory()) continue;
    for (const auto& file : std::filesystem::directory_iterator(lang_entry.path())) {
      if (file.path().extension() == ".csv") files.push_back(file.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    lists.push_back(read_frequency_csv(f, register_tag, f.parent_path().filename().string(),
                                       f.stem().string()));
  }
  return lists;
}

}  // namespace geocorpus
