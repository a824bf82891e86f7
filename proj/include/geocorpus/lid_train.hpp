#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geocorpus/errors.hpp"
#include "geocorpus/hash.hpp"
#include "geocorpus/lid_features.hpp"
#include "geocorpus/lid_model.hpp"
#include "geocorpus/parallel.hpp"

namespace geocorpus {

enum class Split { train, test, eval };

// Split assignment is a pure function of the window text, so it is stable
// across runs and identical windows always land in the same split.
inline Split assign_split(std::u32string_view window, std::uint64_t split_seed = 7) {
  const std::uint64_t h = stable_hash64(utf8_encode(window), split_seed);
  const auto bucket = h % 10;
  if (bucket < 8) return Split::train;
  return bucket == 8 ? Split::test : Split::eval;
}

struct LabeledSample {
  FeatureVector fv;
  std::uint32_t label = 0;
  std::uint32_t domain = 0;
  Split split = Split::train;
};

// Windowed, featurized dataset with a stable label/domain inventory.
struct LidDataset {
  std::vector<std::string> labels;   // sorted ISO 639-3 codes
  std::vector<std::string> domains;  // sorted register tags
  std::vector<LabeledSample> samples;

  std::uint32_t label_id(const std::string& name) {
    return intern(labels, name);
  }
  std::uint32_t domain_id(const std::string& name) {
    return intern(domains, name);
  }

  // Adds every full window of cleaned text under (language, domain).
  void add_text(std::string_view cleaned_text, const std::string& language,
                const std::string& domain, std::uint32_t dim, std::uint64_t hash_seed,
                bool normalize = true) {
    const auto ws = windows(cleaned_text);
    const std::uint32_t lab = label_id(language);
    const std::uint32_t dom = domain_id(domain);
    for (const auto& w : ws) {
      samples.push_back(LabeledSample{featurize(w, dim, hash_seed, normalize), lab, dom,
                                      assign_split(w)});
    }
  }

 private:
  static std::uint32_t intern(std::vector<std::string>& pool, const std::string& name) {
    const auto it = std::lower_bound(pool.begin(), pool.end(), name);
    if (it != pool.end() && *it == name) return static_cast<std::uint32_t>(it - pool.begin());
    throw ContractError("name not interned: " + name);
  }
};

// Builds the sorted inventories before any ids are handed out.
class LidDatasetBuilder {
 public:
  void note(const std::string& language, const std::string& domain) {
    languages_.insert(language);
    domains_.insert(domain);
  }
  LidDataset freeze() const {
    LidDataset d;
    d.labels.assign(languages_.begin(), languages_.end());
    d.domains.assign(domains_.begin(), domains_.end());
    return d;
  }

 private:
  std::set<std::string> languages_;
  std::set<std::string> domains_;
};

struct TrainConfig {
  std::uint32_t dim = kDefaultHashDim;
  std::uint64_t hash_seed = kDefaultHashSeed;
  std::vector<std::uint32_t> hidden = {300, 300, 300};
  double dropout = 0.25;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint32_t batch_size = 256;
  std::uint32_t epochs = 30;
  std::uint32_t samples_per_pair = 1000;
  std::uint64_t seed = 1;
  std::uint32_t workers = 1;
  bool normalize_features = true;
};

// Draws the per-epoch sample list: the same number of observations from every
// (language, domain) pair. Pairs short of the target are drawn with
// replacement so the equal-count contract holds regardless of pair size.
class BalancedSampler {
 public:
  BalancedSampler(const LidDataset& data, std::uint32_t samples_per_pair, std::uint64_t seed)
      : target_(samples_per_pair), seed_(seed) {
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      const auto& s = data.samples[i];
      if (s.split != Split::train) continue;
      pairs_[{s.label, s.domain}].push_back(i);
    }
    if (pairs_.empty()) throw ContractError("no training samples");
  }

  std::size_t pair_count() const { return pairs_.size(); }

  // Sample indices for one epoch, shuffled. Deterministic in (seed, epoch).
  std::vector<std::size_t> epoch_indices(std::uint32_t epoch) const {
    std::vector<std::size_t> out;
    out.reserve(pairs_.size() * target_);
    std::uint64_t pair_id = 0;
    for (const auto& [key, members] : pairs_) {
      draw_pair(members, epoch, pair_id++, out);
    }
    // Fisher-Yates with counter-based randomness
    for (std::size_t i = out.size(); i > 1; --i) {
      const std::size_t j = mix_counters(seed_, 0x5u, epoch, i) % i;
      std::swap(out[i - 1], out[j]);
    }
    return out;
  }

  // Drawn count per (label, domain) for auditing the balance contract.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> drawn_counts(
      std::uint32_t epoch, const LidDataset& data) const {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> counts;
    for (std::size_t idx : epoch_indices(epoch)) {
      const auto& s = data.samples[idx];
      ++counts[{s.label, s.domain}];
    }
    return counts;
  }

 private:
  void draw_pair(const std::vector<std::size_t>& members, std::uint32_t epoch,
                 std::uint64_t pair_id, std::vector<std::size_t>& out) const {
    const std::size_t n = members.size();
    if (n >= target_) {
      // partial Fisher-Yates: first target_ elements of a seeded permutation
      std::vector<std::size_t> perm(members);
      for (std::size_t i = 0; i < target_; ++i) {
        const std::size_t j = i + mix_counters(seed_, 0x1u + pair_id, epoch, i) % (n - i);
        std::swap(perm[i], perm[j]);
        out.push_back(perm[i]);
      }
    } else {
      for (std::size_t i = 0; i < target_; ++i) {
        out.push_back(members[mix_counters(seed_, 0x1u + pair_id, epoch, i) % n]);
      }
    }
  }

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> pairs_;
  std::uint32_t target_;
  std::uint64_t seed_;
};

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct EvalReport {
  std::map<std::string, double> per_domain_macro_f1;
  std::map<std::string, std::size_t> per_domain_support;
  std::map<std::string, ClassMetrics> per_language;
  // confusion[true][pred] over the full eval set
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  double macro_f1 = 0;
};

namespace detail {

inline double f1_of(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

// Macro F1 over the classes present as gold labels.
inline double macro_f1(const std::vector<std::uint32_t>& gold,
                       const std::vector<std::uint32_t>& pred) {
  std::map<std::uint32_t, std::array<std::size_t, 3>> tally;  // tp, fp, fn
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) {
      ++tally[gold[i]][0];
    } else {
      ++tally[gold[i]][2];
      ++tally[pred[i]][1];
    }
  }
  double sum = 0;
  std::size_t n = 0;
  std::set<std::uint32_t> gold_set(gold.begin(), gold.end());
  for (std::uint32_t cls : gold_set) {
    const auto& t = tally[cls];
    sum += f1_of(t[0], t[1], t[2]);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace detail

template <typename Scalar>
std::vector<std::uint32_t> predict_batch(const Mlp<Scalar>& model,
                                         const std::vector<const FeatureVector*>& fvs,
                                         std::size_t workers) {
  std::vector<std::uint32_t> preds(fvs.size());
  parallel_chunks(fvs.size(), workers, 64, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto probs = model.forward(*fvs[i], RunMode::infer);
      preds[i] = static_cast<std::uint32_t>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
  });
  return preds;
}

struct EpochMetrics {
  std::uint32_t epoch = 0;
  double train_loss = 0;
  double test_macro_f1 = 0;
};

struct TrainResult {
  std::vector<EpochMetrics> epochs;
  std::uint32_t best_epoch = 0;
  double best_test_f1 = 0;
};

// Mini-batch gradient descent with momentum. Gradients are accumulated over a
// fixed chunk grid and merged in chunk order, so training is reproducible for
// any worker count. First-layer velocity decay touches only rows that have
// ever received a gradient (identical to dense decay, since untouched rows
// stay exactly zero).
template <typename Scalar>
class Trainer {
 public:
  Trainer(Mlp<Scalar>& model, const LidDataset& data, TrainConfig cfg)
      : model_(model), data_(data), cfg_(cfg) {
    if (model_.n_labels() < 2) throw ContractError("training needs at least two labels");
    if (model_.n_labels() != data_.labels.size()) {
      throw ContractError("model label count does not match dataset inventory");
    }
    for (std::uint32_t lab = 0; lab < model_.n_labels(); ++lab) {
      bool found = false;
      for (const auto& s : data_.samples) {
        if (s.label == lab && s.split == Split::train) {
          found = true;
          break;
        }
      }
      if (!found) {
        throw ConfigError("label has no training samples: " + data_.labels[lab]);
      }
    }
    velocity_w_.resize(model_.layer_count());
    velocity_b_.resize(model_.layer_count());
    for (std::size_t l = 0; l < model_.layer_count(); ++l) {
      if (l > 0) velocity_w_[l].assign(model_.weights(l).size(), Scalar(0));
      velocity_b_[l].assign(model_.biases(l).size(), Scalar(0));
    }
    const std::size_t h0 = model_.dims()[1];
    velocity_first_.assign(static_cast<std::size_t>(model_.input_dim()) * h0, Scalar(0));
    first_row_active_.assign(model_.input_dim(), false);
  }

  TrainResult train() {
    BalancedSampler sampler(data_, cfg_.samples_per_pair, cfg_.seed);
    TrainResult result;
    std::vector<Scalar> best_snapshot;
    double best_f1 = -1;
    std::uint32_t best_epoch = 0;
    std::uint64_t step = 0;
    for (std::uint32_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
      const auto order = sampler.epoch_indices(epoch);
      double loss_sum = 0;
      std::size_t loss_n = 0;
      for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg_.batch_size);
        const auto batch_loss = run_batch(order, start, end, epoch, step++);
        loss_sum += batch_loss.first;
        loss_n += batch_loss.second;
      }
      const double test_f1 = evaluate_split(Split::test);
      result.epochs.push_back(EpochMetrics{
          epoch, loss_n == 0 ? 0 : loss_sum / static_cast<double>(loss_n), test_f1});
      if (test_f1 > best_f1) {
        best_f1 = test_f1;
        best_epoch = epoch;
        snapshot(best_snapshot);
      }
    }
    if (!best_snapshot.empty()) restore(best_snapshot);
    result.best_epoch = best_epoch;
    result.best_test_f1 = best_f1;
    return result;
  }

  double evaluate_split(Split split) const {
    std::vector<const FeatureVector*> fvs;
    std::vector<std::uint32_t> gold;
    for (const auto& s : data_.samples) {
      if (s.split != split) continue;
      fvs.push_back(&s.fv);
      gold.push_back(s.label);
    }
    if (fvs.empty()) return 0;
    const auto preds = predict_batch(model_, fvs, cfg_.workers);
    return detail::macro_f1(gold, preds);
  }

 private:
  static constexpr std::size_t kGradChunk = 32;

  std::pair<double, std::size_t> run_batch(const std::vector<std::size_t>& order,
                                           std::size_t start, std::size_t end,
                                           std::uint32_t epoch, std::uint64_t step) {
    const std::size_t n = end - start;
    const std::size_t n_chunks = chunk_count(n, kGradChunk);
    std::vector<typename Mlp<Scalar>::Gradients> partials(n_chunks);
    parallel_chunks(n, cfg_.workers, kGradChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
      auto& g = partials[c];
      g.init(model_.dims());
      typename Mlp<Scalar>::Trace trace;
      for (std::size_t i = b; i < e; ++i) {
        const auto& sample = data_.samples[order[start + i]];
        // sample_id ties the dropout mask to the epoch position, not the thread
        const DropoutCtx ctx{cfg_.seed ^ 0xD120u, (static_cast<std::uint64_t>(epoch) << 40) ^
                                                      (start + i)};
        model_.forward(sample.fv, RunMode::train, ctx, &trace);
        model_.backward(sample.fv, sample.label, trace, ctx, g);
      }
    });
    // merge in chunk order, then one SGD step
    auto& total = partials[0];
    for (std::size_t c = 1; c < n_chunks; ++c) merge(total, partials[c]);
    apply(total, static_cast<Scalar>(n));
    return {total.loss_sum, total.count};
  }

  void merge(typename Mlp<Scalar>::Gradients& into,
             const typename Mlp<Scalar>::Gradients& from) const {
    for (std::size_t l = 0; l < into.dense_w.size(); ++l) {
      for (std::size_t i = 0; i < into.dense_w[l].size(); ++i) {
        into.dense_w[l][i] += from.dense_w[l][i];
      }
    }
    for (std::size_t l = 0; l < into.db.size(); ++l) {
      for (std::size_t i = 0; i < into.db[l].size(); ++i) into.db[l][i] += from.db[l][i];
    }
    std::vector<std::uint32_t> rows;
    rows.reserve(from.first.size());
    for (const auto& [row, g] : from.first) rows.push_back(row);
    std::sort(rows.begin(), rows.end());
    for (std::uint32_t row : rows) {
      const auto& g = from.first.at(row);
      auto [it, inserted] = into.first.try_emplace(row);
      if (inserted) it->second.assign(g.size(), Scalar(0));
      for (std::size_t j = 0; j < g.size(); ++j) it->second[j] += g[j];
    }
    into.loss_sum += from.loss_sum;
    into.count += from.count;
  }

  void apply(typename Mlp<Scalar>::Gradients& grads, Scalar batch_n) {
    const Scalar lr = static_cast<Scalar>(cfg_.learning_rate);
    const Scalar mu = static_cast<Scalar>(cfg_.momentum);
    const Scalar inv_n = Scalar(1) / batch_n;
    const std::size_t h0 = model_.dims()[1];

    // first layer: decay all active rows, add new gradient rows
    std::vector<std::uint32_t> rows;
    rows.reserve(grads.first.size());
    for (const auto& [row, g] : grads.first) rows.push_back(row);
    std::sort(rows.begin(), rows.end());
    for (std::uint32_t row : rows) {
      if (!first_row_active_[row]) {
        first_row_active_[row] = true;
        active_rows_.push_back(row);
      }
    }
    std::sort(active_rows_.begin(), active_rows_.end());
    auto& w0 = model_.weights(0);
    for (std::uint32_t row : active_rows_) {
      Scalar* v = velocity_first_.data() + static_cast<std::size_t>(row) * h0;
      Scalar* w = w0.data() + static_cast<std::size_t>(row) * h0;
      const auto it = grads.first.find(row);
      if (it != grads.first.end()) {
        const auto& g = it->second;
        for (std::size_t j = 0; j < h0; ++j) {
          v[j] = mu * v[j] - lr * g[j] * inv_n;
          w[j] += v[j];
        }
      } else {
        for (std::size_t j = 0; j < h0; ++j) {
          v[j] = mu * v[j];
          w[j] += v[j];
        }
      }
    }

    for (std::size_t l = 1; l < model_.layer_count(); ++l) {
      auto& w = model_.weights(l);
      auto& v = velocity_w_[l];
      const auto& g = grads.dense_w[l - 1];
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = mu * v[i] - lr * g[i] * inv_n;
        w[i] += v[i];
      }
    }
    for (std::size_t l = 0; l < model_.layer_count(); ++l) {
      auto& b = model_.biases(l);
      auto& v = velocity_b_[l];
      const auto& g = grads.db[l];
      for (std::size_t i = 0; i < b.size(); ++i) {
        v[i] = mu * v[i] - lr * g[i] * inv_n;
        b[i] += v[i];
      }
    }
  }

  void snapshot(std::vector<Scalar>& out) const {
    out.clear();
    for (std::size_t l = 0; l < model_.layer_count(); ++l) {
      out.insert(out.end(), model_.weights(l).begin(), model_.weights(l).end());
      out.insert(out.end(), model_.biases(l).begin(), model_.biases(l).end());
    }
  }
  void restore(const std::vector<Scalar>& snap) {
    std::size_t off = 0;
    for (std::size_t l = 0; l < model_.layer_count(); ++l) {
      auto& w = model_.weights(l);
      std::copy(snap.begin() + off, snap.begin() + off + w.size(), w.begin());
      off += w.size();
      auto& b = model_.biases(l);
      std::copy(snap.begin() + off, snap.begin() + off + b.size(), b.begin());
      off += b.size();
    }
  }

  Mlp<Scalar>& model_;
  const LidDataset& data_;
  TrainConfig cfg_;
  std::vector<std::vector<Scalar>> velocity_w_;
  std::vector<std::vector<Scalar>> velocity_b_;
  std::vector<Scalar> velocity_first_;
  std::vector<bool> first_row_active_;
  std::vector<std::uint32_t> active_rows_;
};

// Full evaluation grouped by domain, plus global per-language metrics.
template <typename Scalar>
EvalReport evaluate(const Mlp<Scalar>& model, const LidDataset& data, Split split = Split::eval,
                    std::size_t workers = 1) {
  EvalReport report;
  std::vector<const FeatureVector*> fvs;
  std::vector<std::uint32_t> gold;
  std::vector<std::uint32_t> domains;
  for (const auto& s : data.samples) {
    if (s.split != split) continue;
    fvs.push_back(&s.fv);
    gold.push_back(s.label);
    domains.push_back(s.domain);
  }
  const auto preds = predict_batch(model, fvs, workers);

  std::map<std::uint32_t, std::vector<std::size_t>> by_domain;
  for (std::size_t i = 0; i < gold.size(); ++i) by_domain[domains[i]].push_back(i);
  for (const auto& [dom, idxs] : by_domain) {
    std::vector<std::uint32_t> g;
    std::vector<std::uint32_t> p;
    for (std::size_t i : idxs) {
      g.push_back(gold[i]);
      p.push_back(preds[i]);
    }
    report.per_domain_macro_f1[data.domains[dom]] = detail::macro_f1(g, p);
    report.per_domain_support[data.domains[dom]] = idxs.size();
  }

  std::map<std::uint32_t, std::array<std::size_t, 3>> tally;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    report.confusion[data.labels[gold[i]]][data.labels[preds[i]]]++;
    if (gold[i] == preds[i]) {
      ++tally[gold[i]][0];
    } else {
      ++tally[gold[i]][2];
      ++tally[preds[i]][1];
    }
  }
  std::set<std::uint32_t> gold_set(gold.begin(), gold.end());
  double sum = 0;
  for (std::uint32_t cls : gold_set) {
    const auto& t = tally[cls];
    ClassMetrics m;
    m.support = t[0] + t[2];
    m.precision = t[0] + t[1] == 0 ? 0.0
                                   : static_cast<double>(t[0]) / static_cast<double>(t[0] + t[1]);
    m.recall = m.support == 0 ? 0.0 : static_cast<double>(t[0]) / static_cast<double>(m.support);
    m.f1 = detail::f1_of(t[0], t[1], t[2]);
    report.per_language[data.labels[cls]] = m;
    sum += m.f1;
  }
  report.macro_f1 = gold_set.empty() ? 0.0 : sum / static_cast<double>(gold_set.size());
  return report;
}

struct ContaminationReport {
  std::vector<std::size_t> kept;  // surviving sample indices
  std::map<std::string, std::size_t> dropped_by_label;
};

// Drops samples whose top prediction is a contaminant language while their
// nominal label is outside the contaminant set.
template <typename Scalar>
ContaminationReport filter_contamination(const Mlp<Scalar>& model, const LidDataset& data,
                                         const std::vector<std::string>& contaminants,
                                         std::size_t workers = 1) {
  std::vector<bool> is_contaminant_label(data.labels.size(), false);
  std::vector<std::uint32_t> contaminant_ids;
  for (const auto& name : contaminants) {
    const int model_idx = model.label_index(name);
    if (model_idx < 0) throw ConfigError("contaminant label unknown to model: " + name);
    contaminant_ids.push_back(static_cast<std::uint32_t>(model_idx));
    const auto it = std::lower_bound(data.labels.begin(), data.labels.end(), name);
    if (it != data.labels.end() && *it == name) {
      is_contaminant_label[static_cast<std::size_t>(it - data.labels.begin())] = true;
    }
  }
  std::vector<const FeatureVector*> fvs;
  fvs.reserve(data.samples.size());
  for (const auto& s : data.samples) fvs.push_back(&s.fv);
  const auto preds = predict_batch(model, fvs, workers);

  ContaminationReport report;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const bool predicted_contaminant =
        std::find(contaminant_ids.begin(), contaminant_ids.end(), preds[i]) !=
        contaminant_ids.end();
    if (predicted_contaminant && !is_contaminant_label[data.samples[i].label]) {
      report.dropped_by_label[data.labels[data.samples[i].label]]++;
    } else {
      report.kept.push_back(i);
    }
  }
  return report;
}

struct DocumentPrediction {
  std::string language;
  double confidence = 0;
  std::size_t n_windows = 0;
};

// Mean of per-window probability vectors, argmax over the mean. Texts that
// yield no window are unidentifiable.
template <typename Scalar>
std::optional<DocumentPrediction> predict_document(const Mlp<Scalar>& model,
                                                   std::string_view cleaned_text) {
  const auto ws = windows(cleaned_text);
  if (ws.empty()) return std::nullopt;
  std::vector<double> mean(model.n_labels(), 0.0);
  for (const auto& w : ws) {
    const auto fv = featurize(w, model.input_dim(), model.hash_seed());
    const auto probs = model.forward(fv, RunMode::infer);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += static_cast<double>(probs[j]);
  }
  for (auto& v : mean) v /= static_cast<double>(ws.size());
  const auto arg = std::max_element(mean.begin(), mean.end()) - mean.begin();
  DocumentPrediction out;
  out.language = model.labels().empty() ? std::to_string(arg)
                                        : model.labels()[static_cast<std::size_t>(arg)];
  out.confidence = mean[static_cast<std::size_t>(arg)];
  out.n_windows = ws.size();
  return out;
}

}  // namespace geocorpus
