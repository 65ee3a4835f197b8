#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "daa/core_math.hpp"
#include "daa/tensor.hpp"

namespace daa {

enum class Activation : std::uint8_t { relu = 0, identity = 1 };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out
  Activation activation = Activation::relu;

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act);

  std::span<const double> weight_row(std::size_t unit) const { return {weights.data() + unit * in, in}; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feed-forward stack of dense layers. Immutable during attacks; training
/// updates it through set_parameters().
class Classifier {
 public:
  Classifier() = default;
  explicit Classifier(std::vector<DenseLayer> layers);

  /// He-uniform weights, zero biases, ReLU hidden layers, identity output layer.
  static Classifier make_mlp(std::size_t input_dim, std::span<const std::size_t> hidden,
                             std::size_t num_classes, RngSeed seed);

  std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t num_classes() const noexcept { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::size_t parameter_count() const noexcept;
  /// Layer by layer: weights row-major, then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  friend bool operator==(const Classifier&, const Classifier&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

enum class LossTag : std::uint8_t { cross_entropy, cw_inf };

struct LossKind {
  LossTag tag = LossTag::cross_entropy;
  double kappa = 0.0;  // cw_inf only

  static LossKind cross_entropy() { return {LossTag::cross_entropy, 0.0}; }
  static LossKind cw(double kappa = 0.0) { return {LossTag::cw_inf, kappa}; }
};

std::string_view loss_name(LossKind kind) noexcept;
LossKind parse_loss(std::string_view name, double kappa = 0.0);

Tensor forward(const Classifier& c, const Tensor& batch);

std::vector<int> predict(const Classifier& c, const Tensor& batch);

/// Row-wise argmax; ties go to the lowest index.
std::vector<int> argmax_rows(const Tensor& logits);

/// cross_entropy: -log softmax(z)[y]. cw_inf: max(max_{i!=y} z_i - z_y, -kappa).
std::vector<double> loss_per_sample(const Tensor& logits, std::span<const int> labels, LossKind kind);

struct LossAndInputGradient {
  std::vector<double> losses;
  Tensor gradient;  // same shape as the batch; row i = d loss_i / d x_i
};

LossAndInputGradient loss_and_input_gradient(const Classifier& c, const Tensor& batch,
                                             std::span<const int> labels, LossKind kind);

Tensor input_gradient(const Classifier& c, const Tensor& batch, std::span<const int> labels,
                      LossKind kind);

struct LossAndParameterGradient {
  double mean_loss = 0.0;
  std::size_t correct = 0;
  std::vector<double> gradient;  // d mean_loss / d parameters, flat order
};

LossAndParameterGradient loss_and_parameter_gradient(const Classifier& c, const Tensor& batch,
                                                     std::span<const int> labels, LossKind kind);

std::vector<double> parameter_gradient(const Classifier& c, const Tensor& batch,
                                       std::span<const int> labels, LossKind kind);

// Checkpoint file: "DAAF", u32 version, u32 layer count, u64 input dim, then
// per layer u64 output dim and u8 activation, then u64 parameter count and the
// parameters as little-endian IEEE-754 doubles.

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, version_mismatch, truncated, architecture_mismatch };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

void save_checkpoint(const Classifier& c, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_checkpoint(const Classifier& c);

Classifier load_checkpoint(const std::filesystem::path& path);
Classifier decode_checkpoint(std::span<const std::uint8_t> bytes);
/// Also rejects a file whose architecture differs from `expected`.
Classifier load_checkpoint(const std::filesystem::path& path, const Classifier& expected);

}  // namespace daa
