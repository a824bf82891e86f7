#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "geocorpus/errors.hpp"
#include "geocorpus/hash.hpp"

namespace geocorpus {

enum class DedupScope { site, period };

// Digest normalization: whitespace runs collapse to one space, outer
// whitespace trimmed, case preserved.
inline std::string normalize_for_digest(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

inline std::uint64_t content_digest(std::string_view text,
                                    std::uint64_t seed = kDefaultHashSeed) {
  return stable_hash64(normalize_for_digest(text), seed);
}

// Per-scope duplicate tracker. Probe-and-insert is atomic per digest (sharded
// locking); the survivor set depends only on the multiset of digests, never on
// insertion order, so results are identical for any worker partitioning.
class DedupState {
 public:
  explicit DedupState(DedupScope scope, std::string scope_id = {})
      : scope_(scope), scope_id_(std::move(scope_id)) {}

  DedupScope scope() const { return scope_; }
  const std::string& scope_id() const { return scope_id_; }

  void add(std::uint64_t digest) {
    auto& shard = shards_[digest % kShards];
    std::lock_guard<std::mutex> lock(shard.mutex);
    auto [it, inserted] = shard.counts.try_emplace(digest, 0u);
    ++it->second;
  }

  std::uint32_t count(std::uint64_t digest) const {
    const auto& shard = shards_[digest % kShards];
    std::lock_guard<std::mutex> lock(shard.mutex);
    const auto it = shard.counts.find(digest);
    return it == shard.counts.end() ? 0u : it->second;
  }

  std::size_t distinct() const {
    std::size_t n = 0;
    for (const auto& s : shards_) {
      std::lock_guard<std::mutex> lock(s.mutex);
      n += s.counts.size();
    }
    return n;
  }

 private:
  static constexpr std::size_t kShards = 64;
  struct Shard {
    mutable std::mutex mutex;
    std::unordered_map<std::uint64_t, std::uint32_t> counts;
  };
  std::array<Shard, kShards> shards_;
  DedupScope scope_;
  std::string scope_id_;
};

// Removes every copy of any text that appears more than once within the
// scope. With keep_first, the first occurrence (input order) survives instead.
// Returns surviving indices in input order.
template <typename T, typename TextOf>
std::vector<std::size_t> dedup_indices(const std::vector<T>& samples, DedupState& state,
                                       TextOf&& text_of, bool keep_first = false) {
  std::vector<std::uint64_t> digests(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    digests[i] = content_digest(text_of(samples[i]));
    state.add(digests[i]);
  }
  std::vector<std::size_t> survivors;
  survivors.reserve(samples.size());
  std::unordered_set<std::uint64_t> emitted;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto n = state.count(digests[i]);
    if (n == 1) {
      survivors.push_back(i);
    } else if (keep_first && emitted.insert(digests[i]).second) {
      survivors.push_back(i);
    }
  }
  return survivors;
}

template <typename T, typename TextOf>
std::vector<T> dedup(const std::vector<T>& samples, DedupScope scope, TextOf&& text_of,
                     bool keep_first = false) {
  DedupState state(scope);
  std::vector<T> out;
  for (std::size_t i : dedup_indices(samples, state, text_of, keep_first)) {
    out.push_back(samples[i]);
  }
  return out;
}

// Digest counter with a spill threshold for scopes that may exceed memory
// (a whole crawl period). Digests accumulate in memory; past the budget the
// sorted batch is written to a temp run file. finalize() merges the runs and
// keeps only digests seen at least twice, which is the set dedup needs.
class SpillingDigestCounter {
 public:
  explicit SpillingDigestCounter(std::size_t max_in_memory = 4u << 20,
                                 std::filesystem::path spill_dir = {})
      : budget_(std::max<std::size_t>(max_in_memory, 1024)),
        spill_dir_(spill_dir.empty() ? std::filesystem::temp_directory_path() : spill_dir) {}

  ~SpillingDigestCounter() {
    for (const auto& p : runs_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }

  void add(std::uint64_t digest) {
    if (finalized_) throw ContractError("SpillingDigestCounter::add after finalize");
    auto [it, inserted] = counts_.try_emplace(digest, 0u);
    ++it->second;
    if (counts_.size() >= budget_) spill();
  }

  void finalize() {
    if (finalized_) return;
    if (!runs_.empty()) {
      spill();
      merge_runs();
    } else {
      for (const auto& [digest, count] : counts_) {
        if (count >= 2) duplicates_.insert(digest);
      }
    }
    counts_.clear();
    finalized_ = true;
  }

  bool is_duplicate(std::uint64_t digest) const {
    if (!finalized_) throw ContractError("SpillingDigestCounter queried before finalize");
    return duplicates_.count(digest) != 0;
  }

  std::size_t duplicate_count() const { return duplicates_.size(); }
  std::size_t spill_count() const { return spills_; }

 private:
  void spill() {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> batch(counts_.begin(), counts_.end());
    std::sort(batch.begin(), batch.end());
    const auto path =
        spill_dir_ / ("geocorpus-dedup-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
                      "-" + std::to_string(runs_.size()) + ".run");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open spill file: " + path.string());
    for (const auto& [digest, count] : batch) {
      out.write(reinterpret_cast<const char*>(&digest), sizeof(digest));
      out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    }
    out.close();
    runs_.push_back(path);
    counts_.clear();
    ++spills_;
  }

  void merge_runs() {
    struct Run {
      std::ifstream in;
      std::uint64_t digest = 0;
      std::uint32_t count = 0;
      bool ok = false;
      void advance() {
        ok = static_cast<bool>(in.read(reinterpret_cast<char*>(&digest), sizeof(digest))) &&
             static_cast<bool>(in.read(reinterpret_cast<char*>(&count), sizeof(count)));
      }
    };
    std::vector<Run> rs(runs_.size());
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      rs[i].in.open(runs_[i], std::ios::binary);
      if (!rs[i].in) throw IoError("cannot reopen spill file: " + runs_[i].string());
      rs[i].advance();
    }
    // k-way merge on sorted runs; sum counts per digest across runs
    while (true) {
      std::uint64_t lowest = UINT64_MAX;
      bool any = false;
      for (const auto& r : rs) {
        if (r.ok && r.digest <= lowest) {
          lowest = r.digest;
          any = true;
        }
      }
      if (!any) break;
      std::uint64_t total = 0;
      for (auto& r : rs) {
        while (r.ok && r.digest == lowest) {
          total += r.count;
          r.advance();
        }
      }
      if (total >= 2) duplicates_.insert(lowest);
    }
  }

  std::size_t budget_;
  std::filesystem::path spill_dir_;
  std::unordered_map<std::uint64_t, std::uint32_t> counts_;
  std::unordered_set<std::uint64_t> duplicates_;
  std::vector<std::filesystem::path> runs_;
  std::size_t spills_ = 0;
  bool finalized_ = false;
};

}  // namespace geocorpus
