#include "daa/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "daa/simd.hpp"

namespace daa {

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act)
    : in(in_dim), out(out_dim), weights(in_dim * out_dim, 0.0), bias(out_dim, 0.0), activation(act) {}

Classifier::Classifier(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("classifier: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.in == 0 || layer.out == 0) throw std::invalid_argument("classifier: zero-width layer");
    if (layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      throw std::invalid_argument("classifier: layer " + std::to_string(l) + " storage mismatch");
    }
    if (l > 0 && layers_[l - 1].out != layer.in) {
      throw std::invalid_argument("classifier: layer " + std::to_string(l) + " input width " +
                                  std::to_string(layer.in) + " does not chain from " +
                                  std::to_string(layers_[l - 1].out));
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(layer.weights.begin(), layer.weights.end(), finite) ||
        !std::all_of(layer.bias.begin(), layer.bias.end(), finite)) {
      throw std::invalid_argument("classifier: non-finite parameter in layer " + std::to_string(l));
    }
  }
}

Classifier Classifier::make_mlp(std::size_t input_dim, std::span<const std::size_t> hidden,
                                std::size_t num_classes, RngSeed seed) {
  std::vector<DenseLayer> layers;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l <= hidden.size(); ++l) {
    const bool last = l == hidden.size();
    const std::size_t out = last ? num_classes : hidden[l];
    DenseLayer layer(in, out, last ? Activation::identity : Activation::relu);
    CounterRng rng(seed, l);
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    for (double& w : layer.weights) w = limit * (2.0 * rng.next_unit() - 1.0);
    layers.push_back(std::move(layer));
    in = out;
  }
  return Classifier(std::move(layers));
}

std::size_t Classifier::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> Classifier::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void Classifier::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("classifier: expected " + std::to_string(parameter_count()) +
                                " parameters, got " + std::to_string(flat.size()));
  }
  auto it = flat.begin();
  for (auto& l : layers_) {
    std::copy_n(it, l.weights.size(), l.weights.begin());
    it += static_cast<std::ptrdiff_t>(l.weights.size());
    std::copy_n(it, l.bias.size(), l.bias.begin());
    it += static_cast<std::ptrdiff_t>(l.bias.size());
  }
}

std::string_view loss_name(LossKind kind) noexcept {
  return kind.tag == LossTag::cross_entropy ? "ce" : "cw";
}

LossKind parse_loss(std::string_view name, double kappa) {
  if (name == "ce" || name == "cross_entropy") return LossKind::cross_entropy();
  if (name == "cw" || name == "cw_inf") return LossKind::cw(kappa);
  throw std::invalid_argument("unknown loss '" + std::string(name) + "' (expected ce or cw)");
}

namespace {

// Activations of every layer for one batch: outputs[0] is the input,
// outputs[l + 1] the post-activation of layer l.
struct ForwardCache {
  std::vector<Tensor> outputs;
};

void check_batch(const Classifier& c, const Tensor& batch) {
  if (c.layers().empty()) throw std::invalid_argument("forward: empty classifier");
  if (batch.rank() != 2 || batch.row_size() != c.input_dim()) {
    throw std::invalid_argument("forward: batch shape " + shape_string(batch.shape()) +
                                " does not match input width " + std::to_string(c.input_dim()));
  }
}

void check_labels(std::span<const int> labels, std::size_t rows, std::size_t classes) {
  if (labels.size() != rows) throw std::invalid_argument("labels: one label per row required");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw std::out_of_range("labels: label " + std::to_string(y) + " outside [0, " +
                              std::to_string(classes) + ")");
    }
  }
}

Tensor dense_forward(const DenseLayer& layer, const Tensor& x) {
  const auto& k = simd::active();
  const std::size_t n = x.rows();
  Tensor z({n, layer.out});
  std::size_t r = 0;
  for (; r + 4 <= n; r += 4) {
    const double* x0 = x.row(r).data();
    const double* x1 = x.row(r + 1).data();
    const double* x2 = x.row(r + 2).data();
    const double* x3 = x.row(r + 3).data();
    for (std::size_t u = 0; u < layer.out; ++u) {
      double s[4];
      k.dot4(layer.weights.data() + u * layer.in, x0, x1, x2, x3, layer.in, s);
      for (std::size_t q = 0; q < 4; ++q) z.at(r + q, u) = s[q] + layer.bias[u];
    }
  }
  for (; r < n; ++r) {
    for (std::size_t u = 0; u < layer.out; ++u) {
      z.at(r, u) = k.dot(layer.weights.data() + u * layer.in, x.row(r).data(), layer.in) + layer.bias[u];
    }
  }
  if (layer.activation == Activation::relu) {
    for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
  }
  return z;
}

ForwardCache run_forward(const Classifier& c, const Tensor& batch) {
  check_batch(c, batch);
  ForwardCache cache;
  cache.outputs.reserve(c.layers().size() + 1);
  cache.outputs.push_back(batch);
  for (const auto& layer : c.layers()) cache.outputs.push_back(dense_forward(layer, cache.outputs.back()));
  return cache;
}

int runner_up(std::span<const double> z, int label) {
  int best = -1;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (static_cast<int>(i) == label) continue;
    if (best < 0 || z[i] > z[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

// Per-sample loss and d loss / d logits.
std::vector<double> loss_and_logit_gradient(const Tensor& logits, std::span<const int> labels,
                                            LossKind kind, Tensor& dlogits) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.row_size();
  std::vector<double> losses(n);
  dlogits = Tensor(logits.shape());
  for (std::size_t r = 0; r < n; ++r) {
    const auto z = logits.row(r);
    auto g = dlogits.row(r);
    const int y = labels[r];
    const auto yi = static_cast<std::size_t>(y);
    if (kind.tag == LossTag::cross_entropy) {
      const double lse = log_sum_exp(z);
      losses[r] = lse - z[yi];
      for (std::size_t i = 0; i < k; ++i) g[i] = std::exp(z[i] - lse);
      g[yi] -= 1.0;
    } else {
      if (k < 2) throw std::invalid_argument("cw_inf loss needs at least two classes");
      const int ru = runner_up(z, y);
      const double margin = z[static_cast<std::size_t>(ru)] - z[yi];
      if (margin > -kind.kappa) {
        losses[r] = margin;
        g[static_cast<std::size_t>(ru)] = 1.0;
        g[yi] = -1.0;
      } else {
        losses[r] = -kind.kappa;
      }
    }
  }
  return losses;
}

// Backpropagates `delta` (d loss / d logits) through the network. Writes the
// input gradient when `dinput` is set and accumulates the parameter gradient
// into `dparams` when it is non-empty.
void backward(const Classifier& c, const ForwardCache& cache, Tensor delta, Tensor* dinput,
              std::span<double> dparams) {
  const auto& k = simd::active();
  const auto& layers = c.layers();
  std::vector<std::size_t> offsets(layers.size());
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    offsets[l] = off;
    off += layers[l].weights.size() + layers[l].bias.size();
  }
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& layer = layers[li];
    const Tensor& out = cache.outputs[li + 1];
    const Tensor& in = cache.outputs[li];
    const std::size_t n = in.rows();
    if (layer.activation == Activation::relu) {
      // relu'(0) = 0; out == 0 exactly where the pre-activation was <= 0.
      for (std::size_t i = 0; i < delta.size(); ++i) {
        if (!(out[i] > 0.0)) delta[i] = 0.0;
      }
    }
    if (!dparams.empty()) {
      double* dw = dparams.data() + offsets[li];
      double* db = dw + layer.weights.size();
      for (std::size_t r = 0; r < n; ++r) {
        const double* x = in.row(r).data();
        for (std::size_t u = 0; u < layer.out; ++u) {
          const double d = delta.at(r, u);
          if (d == 0.0) continue;
          k.axpy(dw + u * layer.in, d, x, layer.in);
          db[u] += d;
        }
      }
    }
    if (li == 0 && dinput == nullptr) break;
    Tensor prev({n, layer.in});
    for (std::size_t r = 0; r < n; ++r) {
      double* p = prev.row(r).data();
      for (std::size_t u = 0; u < layer.out; ++u) {
        const double d = delta.at(r, u);
        if (d == 0.0) continue;
        k.axpy(p, d, layer.weights.data() + u * layer.in, layer.in);
      }
    }
    delta = std::move(prev);
  }
  if (dinput != nullptr) *dinput = std::move(delta);
}

}  // namespace

Tensor forward(const Classifier& c, const Tensor& batch) {
  return std::move(run_forward(c, batch).outputs.back());
}

std::vector<int> argmax_rows(const Tensor& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto z = logits.row(r);
    out[r] = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }
  return out;
}

std::vector<int> predict(const Classifier& c, const Tensor& batch) { return argmax_rows(forward(c, batch)); }

std::vector<double> loss_per_sample(const Tensor& logits, std::span<const int> labels, LossKind kind) {
  check_labels(labels, logits.rows(), logits.row_size());
  Tensor unused;
  return loss_and_logit_gradient(logits, labels, kind, unused);
}

LossAndInputGradient loss_and_input_gradient(const Classifier& c, const Tensor& batch,
                                             std::span<const int> labels, LossKind kind) {
  const ForwardCache cache = run_forward(c, batch);
  check_labels(labels, batch.rows(), c.num_classes());
  Tensor delta;
  LossAndInputGradient result;
  result.losses = loss_and_logit_gradient(cache.outputs.back(), labels, kind, delta);
  backward(c, cache, std::move(delta), &result.gradient, {});
  return result;
}

Tensor input_gradient(const Classifier& c, const Tensor& batch, std::span<const int> labels,
                      LossKind kind) {
  return loss_and_input_gradient(c, batch, labels, kind).gradient;
}

LossAndParameterGradient loss_and_parameter_gradient(const Classifier& c, const Tensor& batch,
                                                     std::span<const int> labels, LossKind kind) {
  const ForwardCache cache = run_forward(c, batch);
  check_labels(labels, batch.rows(), c.num_classes());
  if (batch.rows() == 0) throw std::invalid_argument("parameter_gradient: empty batch");
  Tensor delta;
  const auto losses = loss_and_logit_gradient(cache.outputs.back(), labels, kind, delta);
  const double inv_n = 1.0 / static_cast<double>(batch.rows());
  for (double& d : delta.values()) d *= inv_n;

  LossAndParameterGradient result;
  result.gradient.assign(c.parameter_count(), 0.0);
  backward(c, cache, std::move(delta), nullptr, result.gradient);
  double total = 0.0;
  for (double l : losses) total += l;
  result.mean_loss = total * inv_n;
  const auto pred = argmax_rows(cache.outputs.back());
  for (std::size_t r = 0; r < pred.size(); ++r) result.correct += pred[r] == labels[r] ? 1 : 0;
  return result;
}

std::vector<double> parameter_gradient(const Classifier& c, const Tensor& batch,
                                       std::span<const int> labels, LossKind kind) {
  return loss_and_parameter_gradient(c, batch, labels, kind).gradient;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'A', 'A', 'F'};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  std::vector<std::uint8_t> bytes;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (remaining() < n) {
      throw CheckpointError(CheckpointError::Kind::truncated,
                            "checkpoint: truncated at byte " + std::to_string(pos_));
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

bool same_architecture(const Classifier& a, const Classifier& b) {
  if (a.layers().size() != b.layers().size()) return false;
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    const auto& x = a.layers()[l];
    const auto& y = b.layers()[l];
    if (x.in != y.in || x.out != y.out || x.activation != y.activation) return false;
  }
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Classifier& c) {
  ByteWriter w;
  for (auto m : kMagic) w.u8(m);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(c.layers().size()));
  w.u64(c.input_dim());
  for (const auto& l : c.layers()) {
    w.u64(l.out);
    w.u8(static_cast<std::uint8_t>(l.activation));
  }
  const auto params = c.parameters();
  w.u64(params.size());
  for (double p : params) w.f64(p);
  return std::move(w.bytes);
}

void save_checkpoint(const Classifier& c, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: write failed for " + path.string());
}

Classifier decode_checkpoint(std::span<const std::uint8_t> bytes) {
  using Kind = CheckpointError::Kind;
  ByteReader r(bytes);
  for (auto m : kMagic) {
    if (r.remaining() == 0) throw CheckpointError(Kind::truncated, "checkpoint: truncated magic");
    if (r.u8() != m) throw CheckpointError(Kind::bad_magic, "checkpoint: bad magic bytes");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::version_mismatch, "checkpoint: unsupported version " + std::to_string(version) +
                                                      " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t layer_count = r.u32();
  std::uint64_t in = r.u64();
  if (layer_count == 0 || in == 0) {
    throw CheckpointError(Kind::architecture_mismatch, "checkpoint: empty architecture");
  }
  std::vector<DenseLayer> layers;
  std::uint64_t expected_params = 0;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const std::uint64_t out = r.u64();
    const std::uint8_t act = r.u8();
    if (out == 0 || act > static_cast<std::uint8_t>(Activation::identity)) {
      throw CheckpointError(Kind::architecture_mismatch, "checkpoint: invalid layer " + std::to_string(l));
    }
    layers.emplace_back(in, out, static_cast<Activation>(act));
    expected_params += in * out + out;
    in = out;
  }
  const std::uint64_t count = r.u64();
  if (count != expected_params) {
    throw CheckpointError(Kind::architecture_mismatch,
                          "checkpoint: parameter count " + std::to_string(count) +
                              " does not match architecture (" + std::to_string(expected_params) + ")");
  }
  if (r.remaining() < count * 8) throw CheckpointError(Kind::truncated, "checkpoint: truncated parameter block");
  std::vector<double> params(count);
  for (double& p : params) p = r.f64();
  if (r.remaining() != 0) throw CheckpointError(Kind::truncated, "checkpoint: trailing bytes");
  for (auto& layer : layers) {
    layer.weights.assign(layer.in * layer.out, 0.0);
    layer.bias.assign(layer.out, 0.0);
  }
  Classifier c(std::move(layers));
  c.set_parameters(params);
  return c;
}

Classifier load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

Classifier load_checkpoint(const std::filesystem::path& path, const Classifier& expected) {
  Classifier c = load_checkpoint(path);
  if (!same_architecture(c, expected)) {
    throw CheckpointError(CheckpointError::Kind::architecture_mismatch,
                          "checkpoint: architecture of " + path.string() + " differs from the expected model");
  }
  return c;
}

}  // namespace daa
