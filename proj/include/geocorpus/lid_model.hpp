#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "geocorpus/errors.hpp"
#include "geocorpus/hash.hpp"
#include "geocorpus/lid_features.hpp"

namespace geocorpus {

enum class RunMode { train, infer };

// Deterministic per-(sample, layer, unit) dropout decisions. Counter-based so
// masks do not depend on evaluation order or thread count.
struct DropoutCtx {
  std::uint64_t seed = 0;
  std::uint64_t sample_id = 0;
};

// Multi-layer perceptron over sparse hashed features: dim -> hidden... ->
// labels, ReLU activations, inverted dropout on every hidden layer, softmax
// output. First-layer weights are stored input-major so sparse inputs touch
// only the rows of their nonzero buckets.
template <typename Scalar>
class Mlp {
 public:
  Mlp() = default;

  // Fan-in scaled uniform init, seeded. For the sparse first layer the
  // effective fan-in is the number of active buckets per window (typically
  // 48 trigrams), not the hashing dimension; first_layer_fanin declares it.
  // Normalized trigram frequencies are ~1/fanin each, which would freeze the
  // first layer at any init that keeps activations healthy, so the model
  // scales incoming values by fanin (equivalent to training on raw counts
  // with He init). Hidden biases start slightly positive so no unit sits
  // dead at the ReLU kink; the output layer starts at zero (uniform softmax).
  Mlp(std::uint32_t input_dim, std::vector<std::uint32_t> hidden, std::uint32_t n_labels,
      double dropout_rate, std::uint64_t init_seed, std::uint64_t hash_seed = kDefaultHashSeed,
      std::uint32_t first_layer_fanin = 0)
      : input_dim_(input_dim), dropout_rate_(dropout_rate), hash_seed_(hash_seed),
        input_scale_(first_layer_fanin > 0 ? static_cast<Scalar>(first_layer_fanin) : Scalar(1)) {
    if (hidden.empty()) throw ContractError("mlp needs at least one hidden layer");
    if (n_labels < 2) throw ContractError("mlp needs at least two labels");
    dims_.push_back(input_dim);
    for (auto h : hidden) dims_.push_back(h);
    dims_.push_back(n_labels);
    weights_.resize(layer_count());
    biases_.resize(layer_count());
    for (std::size_t l = 0; l < layer_count(); ++l) {
      const std::size_t in = dims_[l];
      const std::size_t out = dims_[l + 1];
      weights_[l].assign(in * out, Scalar(0));
      biases_[l].assign(out, Scalar(0));
      if (l + 1 == layer_count()) continue;  // output layer starts at zero
      const double fanin = (l == 0 && first_layer_fanin > 0)
                               ? static_cast<double>(first_layer_fanin)
                               : static_cast<double>(in);
      const double limit = std::sqrt(6.0 / fanin);
      for (std::size_t i = 0; i < in; ++i) {
        for (std::size_t j = 0; j < out; ++j) {
          const double u = unit_real(mix_counters(init_seed, l, i, j));
          weights_[l][i * out + j] = static_cast<Scalar>((2.0 * u - 1.0) * limit);
        }
      }
      for (auto& b : biases_[l]) b = Scalar(0.01);
    }
  }

  std::size_t layer_count() const { return dims_.size() - 1; }
  std::uint32_t input_dim() const { return input_dim_; }
  std::uint32_t n_labels() const { return dims_.back(); }
  double dropout_rate() const { return dropout_rate_; }
  std::uint64_t hash_seed() const { return hash_seed_; }
  Scalar input_scale() const { return input_scale_; }
  const std::vector<std::uint32_t>& dims() const { return dims_; }

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels) {
    if (labels.size() != n_labels()) throw ContractError("label table size mismatch");
    labels_ = std::move(labels);
    label_index_.clear();
    for (std::size_t i = 0; i < labels_.size(); ++i) label_index_[labels_[i]] = i;
  }
  int label_index(const std::string& name) const {
    auto it = label_index_.find(name);
    return it == label_index_.end() ? -1 : static_cast<int>(it->second);
  }

  std::vector<Scalar>& weights(std::size_t layer) { return weights_[layer]; }
  const std::vector<Scalar>& weights(std::size_t layer) const { return weights_[layer]; }
  std::vector<Scalar>& biases(std::size_t layer) { return biases_[layer]; }
  const std::vector<Scalar>& biases(std::size_t layer) const { return biases_[layer]; }

  // Everything the backward pass needs from one forward evaluation.
  struct Trace {
    std::vector<std::vector<Scalar>> pre;    // pre-activation per layer
    std::vector<std::vector<Scalar>> post;   // post relu (+ dropout) per hidden layer
    std::vector<Scalar> probs;
  };

  std::vector<Scalar> forward(const FeatureVector& fv, RunMode mode,
                              const DropoutCtx& ctx = {}, Trace* trace = nullptr) const {
    if (fv.dim != input_dim_) {
      throw ContractError("feature dimension " + std::to_string(fv.dim) +
                          " does not match model input " + std::to_string(input_dim_));
    }
    if (trace != nullptr) {
      trace->pre.assign(layer_count(), {});
      trace->post.assign(layer_count() - 1, {});
    }
    const bool use_dropout = mode == RunMode::train && dropout_rate_ > 0.0;
    const Scalar keep_scale =
        use_dropout ? static_cast<Scalar>(1.0 / (1.0 - dropout_rate_)) : Scalar(1);

    // first layer: sparse input
    std::vector<Scalar> act(dims_[1], Scalar(0));
    {
      const std::size_t out = dims_[1];
      for (const auto& [idx, val] : fv.entries) {
        const Scalar v = static_cast<Scalar>(val) * input_scale_;
        const Scalar* row = weights_[0].data() + static_cast<std::size_t>(idx) * out;
        for (std::size_t j = 0; j < out; ++j) act[j] += v * row[j];
      }
      for (std::size_t j = 0; j < out; ++j) act[j] += biases_[0][j];
    }

    for (std::size_t l = 0;; ++l) {
      if (trace != nullptr) trace->pre[l] = act;
      if (l + 1 == layer_count()) {
        softmax_inplace(act);
        if (trace != nullptr) trace->probs = act;
        return act;
      }
      // relu + inverted dropout on the hidden activation
      for (std::size_t j = 0; j < act.size(); ++j) {
        Scalar a = act[j] > Scalar(0) ? act[j] : Scalar(0);
        if (use_dropout && a != Scalar(0)) {
          const double u = unit_real(mix_counters(ctx.seed, ctx.sample_id, l, j));
          a = u < dropout_rate_ ? Scalar(0) : a * keep_scale;
        }
        act[j] = a;
      }
      if (trace != nullptr) trace->post[l] = act;
      // dense layer l+1
      const std::size_t in = dims_[l + 1];
      const std::size_t out = dims_[l + 2];
      std::vector<Scalar> next(biases_[l + 1].begin(), biases_[l + 1].end());
      const Scalar* w = weights_[l + 1].data();
      for (std::size_t i = 0; i < in; ++i) {
        const Scalar a = act[i];
        if (a == Scalar(0)) continue;
        const Scalar* row = w + i * out;
        for (std::size_t j = 0; j < out; ++j) next[j] += a * row[j];
      }
      act = std::move(next);
    }
  }

  // Sparse first-layer gradient plus dense gradients for the other layers.
  struct Gradients {
    std::unordered_map<std::uint32_t, std::vector<Scalar>> first;  // bucket -> d W0[row]
    std::vector<std::vector<Scalar>> dense_w;                      // layers 1..
    std::vector<std::vector<Scalar>> db;                           // all layers
    double loss_sum = 0;
    std::size_t count = 0;

    void init(const std::vector<std::uint32_t>& dims) {
      dense_w.assign(dims.size() - 2, {});
      db.assign(dims.size() - 1, {});
      for (std::size_t l = 1; l + 1 < dims.size(); ++l) {
        dense_w[l - 1].assign(static_cast<std::size_t>(dims[l]) * dims[l + 1], Scalar(0));
      }
      for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        db[l].assign(dims[l + 1], Scalar(0));
      }
      first.clear();
      loss_sum = 0;
      count = 0;
    }
  };

  // Accumulates d(cross-entropy)/d(params) for one sample into grads.
  // The dropout ctx must match the one used in the forward pass.
  void backward(const FeatureVector& fv, std::uint32_t target, const Trace& trace,
                const DropoutCtx& ctx, Gradients& grads) const {
    const bool use_dropout = dropout_rate_ > 0.0;
    const Scalar keep_scale =
        use_dropout ? static_cast<Scalar>(1.0 / (1.0 - dropout_rate_)) : Scalar(1);
    const std::size_t last = layer_count() - 1;

    std::vector<Scalar> delta = trace.probs;  // dL/dlogits = probs - onehot
    delta[target] -= Scalar(1);
    grads.loss_sum += -std::log(std::max(1e-30, static_cast<double>(trace.probs[target])));
    grads.count += 1;

    for (std::size_t l = last;; --l) {
      // bias gradient
      for (std::size_t j = 0; j < delta.size(); ++j) grads.db[l][j] += delta[j];
      const std::size_t out = dims_[l + 1];
      if (l == 0) {
        // sparse weight gradient: only rows of nonzero buckets
        for (const auto& [idx, val] : fv.entries) {
          auto [it, inserted] = grads.first.try_emplace(idx);
          if (inserted) it->second.assign(out, Scalar(0));
          const Scalar v = static_cast<Scalar>(val) * input_scale_;
          for (std::size_t j = 0; j < out; ++j) it->second[j] += v * delta[j];
        }
        return;
      }
      const std::size_t in = dims_[l];
      const std::vector<Scalar>& input_act = trace.post[l - 1];
      Scalar* dw = grads.dense_w[l - 1].data();
      const Scalar* w = weights_[l].data();
      std::vector<Scalar> prev(in, Scalar(0));
      for (std::size_t i = 0; i < in; ++i) {
        const Scalar a = input_act[i];
        const Scalar* wrow = w + i * out;
        Scalar acc(0);
        if (a != Scalar(0)) {
          Scalar* dwrow = dw + i * out;
          for (std::size_t j = 0; j < out; ++j) {
            dwrow[j] += a * delta[j];
            acc += wrow[j] * delta[j];
          }
        } else {
          for (std::size_t j = 0; j < out; ++j) acc += wrow[j] * delta[j];
        }
        prev[i] = acc;
      }
      // back through dropout+relu of hidden layer l-1
      const std::vector<Scalar>& pre = trace.pre[l - 1];
      for (std::size_t i = 0; i < in; ++i) {
        Scalar g = pre[i] > Scalar(0) ? prev[i] : Scalar(0);
        if (g != Scalar(0) && use_dropout) {
          const double u = unit_real(mix_counters(ctx.seed, ctx.sample_id, l - 1, i));
          g = u < dropout_rate_ ? Scalar(0) : g * keep_scale;
        }
        prev[i] = g;
      }
      delta = std::move(prev);
    }
  }

  // Flat parameter access for finite-difference checks.
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      n += weights_[l].size() + biases_[l].size();
    }
    return n;
  }
  Scalar get_parameter(std::size_t flat) const {
    auto [l, is_bias, off] = locate(flat);
    return is_bias ? biases_[l][off] : weights_[l][off];
  }
  void set_parameter(std::size_t flat, Scalar v) {
    auto [l, is_bias, off] = locate(flat);
    (is_bias ? biases_[l][off] : weights_[l][off]) = v;
  }

  static void softmax_inplace(std::vector<Scalar>& logits) {
    Scalar mx = logits[0];
    for (Scalar v : logits) mx = std::max(mx, v);
    Scalar sum(0);
    for (auto& v : logits) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (auto& v : logits) v /= sum;
  }

  // --- serialization: versioned little-endian container, float32 weights ---

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path.string());
    out.write(kMagic, 8);
    write_u32(out, 1);  // version
    write_u64(out, hash_seed_);
    write_u32(out, static_cast<std::uint32_t>(dims_.size()));
    for (auto d : dims_) write_u32(out, d);
    const float rate = static_cast<float>(dropout_rate_);
    write_u32(out, std::bit_cast<std::uint32_t>(rate));
    const float scale = static_cast<float>(input_scale_);
    write_u32(out, std::bit_cast<std::uint32_t>(scale));
    write_u32(out, static_cast<std::uint32_t>(labels_.size()));
    for (const auto& label : labels_) {
      write_u32(out, static_cast<std::uint32_t>(label.size()));
      out.write(label.data(), static_cast<std::streamsize>(label.size()));
    }
    for (std::size_t l = 0; l < layer_count(); ++l) {
      for (Scalar v : weights_[l]) write_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      for (Scalar v : biases_[l]) write_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    if (!out) throw IoError("short write: " + path.string());
  }

  static Mlp load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
      throw IoError("not a model file: " + path.string());
    }
    const std::uint32_t version = read_u32(in);
    if (version != 1) throw IoError("unsupported model version " + std::to_string(version));
    Mlp m;
    m.hash_seed_ = read_u64(in);
    const std::uint32_t nd = read_u32(in);
    if (nd < 3 || nd > 64) throw IoError("corrupt model: bad layer count");
    m.dims_.resize(nd);
    for (auto& d : m.dims_) d = read_u32(in);
    m.input_dim_ = m.dims_.front();
    m.dropout_rate_ = std::bit_cast<float>(read_u32(in));
    m.input_scale_ = static_cast<Scalar>(std::bit_cast<float>(read_u32(in)));
    const std::uint32_t nl = read_u32(in);
    if (nl != m.dims_.back()) throw IoError("corrupt model: label table size mismatch");
    std::vector<std::string> labels(nl);
    for (auto& label : labels) {
      const std::uint32_t len = read_u32(in);
      if (len > 64) throw IoError("corrupt model: label too long");
      label.resize(len);
      in.read(label.data(), len);
    }
    m.weights_.resize(m.layer_count());
    m.biases_.resize(m.layer_count());
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
      const std::size_t in_dim = m.dims_[l];
      const std::size_t out_dim = m.dims_[l + 1];
      m.weights_[l].resize(in_dim * out_dim);
      for (auto& v : m.weights_[l]) v = static_cast<Scalar>(std::bit_cast<float>(read_u32(in)));
      m.biases_[l].resize(out_dim);
      for (auto& v : m.biases_[l]) v = static_cast<Scalar>(std::bit_cast<float>(read_u32(in)));
    }
    if (!in) throw IoError("truncated model file: " + path.string());
    m.set_labels(std::move(labels));
    return m;
  }

 private:
  std::tuple<std::size_t, bool, std::size_t> locate(std::size_t flat) const {
    for (std::size_t l = 0; l < layer_count(); ++l) {
      if (flat < weights_[l].size()) return {l, false, flat};
      flat -= weights_[l].size();
      if (flat < biases_[l].size()) return {l, true, flat};
      flat -= biases_[l].size();
    }
    throw ContractError("parameter index out of range");
  }

  static void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
  }
  static void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFu));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
  }
  static std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  static std::uint64_t read_u64(std::istream& in) {
    const std::uint64_t lo = read_u32(in);
    const std::uint64_t hi = read_u32(in);
    return lo | (hi << 32);
  }

  static constexpr char kMagic[9] = "GCLIDML1";

  std::uint32_t input_dim_ = 0;
  std::vector<std::uint32_t> dims_;
  std::vector<std::vector<Scalar>> weights_;  // layer 0 input-major, rest in-major
  std::vector<std::vector<Scalar>> biases_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> label_index_;
  double dropout_rate_ = 0.0;
  std::uint64_t hash_seed_ = kDefaultHashSeed;
  Scalar input_scale_ = Scalar(1);
};

using LidModel = Mlp<float>;

}  // namespace geocorpus
