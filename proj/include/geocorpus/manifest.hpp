#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "geocorpus/errors.hpp"

namespace geocorpus {

// Exact per-stage accounting for one run. Written as a machine-readable
// key=value report beside the outputs. Counters are exact, never sampled.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> inputs;  // path, content digest (hex)
  std::map<std::string, std::string> config;
  std::map<std::string, std::uint64_t> counters;
  std::map<std::string, double> stage_ms;

  void bump(const std::string& key, std::uint64_t by = 1) { counters[key] += by; }

  std::uint64_t counter(const std::string& key) const {
    const auto it = counters.find(key);
    return it == counters.end() ? 0 : it->second;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << "# geocorpus run manifest\n";
    for (const auto& [p, digest] : inputs) {
      out << "input." << digest << " = " << p << "\n";
    }
    for (const auto& [k, v] : config) out << "config." << k << " = " << v << "\n";
    for (const auto& [k, v] : counters) out << "count." << k << " = " << v << "\n";
    for (const auto& [k, v] : stage_ms) out << "time_ms." << k << " = " << v << "\n";
    if (!out) throw IoError("short write: " + path.string());
  }

  // The conservation identity the pipeline guarantees:
  // paragraphs = filtered + deduped + unidentifiable + ceiling-dropped + written.
  bool arithmetic_closes() const {
    const std::uint64_t paragraphs = counter("paragraphs_extracted");
    const std::uint64_t accounted =
        counter("site_dedup_removed") + counter("cleaned_empty") + counter("filter_rejected") +
        counter("period_dedup_removed") + counter("lid_unidentifiable_paragraphs") +
        counter("ceiling_dropped_paragraphs") + counter("written_paragraphs");
    const std::uint64_t records = counter("records_read");
    const std::uint64_t records_accounted = counter("records_geo_dropped") +
                                            counter("records_no_paragraphs") +
                                            counter("records_paragraph_yielding");
    return paragraphs == accounted && records == records_accounted;
  }
};

}  // namespace geocorpus
