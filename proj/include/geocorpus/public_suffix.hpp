#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "geocorpus/errors.hpp"

namespace geocorpus {

// Public-suffix matcher over a bundled snapshot. Rules follow the usual list
// syntax: plain rules, `*.` wildcards (one label) and `!` exceptions. A host
// with no matching rule falls back to its last label as the suffix.
class PublicSuffixList {
 public:
  static PublicSuffixList load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open public suffix snapshot: " + path.string());
    PublicSuffixList psl;
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line.empty() || line.rfind("//", 0) == 0) continue;
      if (line[0] == '!') {
        psl.exceptions_.insert(line.substr(1));
      } else {
        psl.rules_.insert(line);
      }
    }
    return psl;
  }

  static PublicSuffixList from_rules(const std::vector<std::string>& rules) {
    PublicSuffixList psl;
    for (const auto& r : rules) {
      if (!r.empty() && r[0] == '!') {
        psl.exceptions_.insert(r.substr(1));
      } else {
        psl.rules_.insert(r);
      }
    }
    return psl;
  }

  // Registrable domain: the public suffix plus one label. Hosts that are
  // themselves a suffix (or empty) are returned unchanged.
  std::string registrable_domain(std::string_view host) const {
    const std::vector<std::string> labels = split_labels(host);
    if (labels.size() <= 1) return std::string(host);

    // Longest matching rule wins; an exception overrides and shortens by one.
    int suffix_len = 1;  // implicit "*" rule: last label
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::string cand = join(labels, i);
      if (exceptions_.count(cand) != 0) {
        suffix_len = static_cast<int>(labels.size() - i) - 1;
        break;
      }
      if (rules_.count(cand) != 0) {
        suffix_len = std::max(suffix_len, static_cast<int>(labels.size() - i));
      }
      if (i + 1 < labels.size()) {
        const std::string wild = "*." + join(labels, i + 1);
        if (rules_.count(wild) != 0) {
          suffix_len = std::max(suffix_len, static_cast<int>(labels.size() - i));
        }
      }
    }
    const int keep = suffix_len + 1;
    if (keep >= static_cast<int>(labels.size())) return std::string(host);
    return join(labels, labels.size() - static_cast<std::size_t>(keep));
  }

  std::size_t rule_count() const { return rules_.size() + exceptions_.size(); }

 private:
  static std::vector<std::string> split_labels(std::string_view host) {
    std::vector<std::string> labels;
    std::size_t start = 0;
    while (start <= host.size()) {
      const auto dot = host.find('.', start);
      if (dot == std::string_view::npos) {
        labels.emplace_back(host.substr(start));
        break;
      }
      labels.emplace_back(host.substr(start, dot - start));
      start = dot + 1;
    }
    return labels;
  }

  static std::string join(const std::vector<std::string>& labels, std::size_t from) {
    std::string out;
    for (std::size_t i = from; i < labels.size(); ++i) {
      if (i != from) out.push_back('.');
      out += labels[i];
    }
    return out;
  }

  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> exceptions_;
};

}  // namespace geocorpus
