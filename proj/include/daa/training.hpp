#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "daa/attacks.hpp"
#include "daa/model.hpp"

namespace daa {

enum class Optimizer { sgd, sgd_momentum };

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 50;
  double learning_rate = 0.05;
  /// Step decay: multiply the rate by decay_factor every decay_every epochs
  /// (0 keeps it constant).
  std::size_t decay_every = 0;
  double decay_factor = 0.1;
  Optimizer optimizer = Optimizer::sgd_momentum;
  double momentum = 0.9;
  LossKind loss = LossKind::cross_entropy();
  bool adversarial = false;
  /// Inner PGD settings, present iff adversarial. Labels are the true labels.
  std::optional<AttackConfig> inner;
  /// Inner alpha and step size grow linearly over the first ramp epochs
  /// (epoch e uses the fraction (e+1)/ramp) before holding at full strength.
  std::size_t alpha_ramp_epochs = 0;
  RngSeed seed{};

  void validate() const;
  double rate_for_epoch(std::size_t epoch) const;
  double inner_fraction(std::size_t epoch) const;
};

/// Default inner maximization: 7 PGD steps with random start.
AttackConfig default_inner_pgd(double alpha, double step_size);

struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  std::size_t correct = 0;
  std::size_t n = 0;

  double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  Classifier model;
  TrainLog log;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, const std::string& what) : std::runtime_error(what), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Minibatch training of `model` on (images, labels). Each epoch visits the
/// samples in a fresh seeded permutation. Adversarial configs replace every
/// minibatch by its PGD counterpart against the current parameters.
TrainResult train(Classifier model, const Tensor& images, std::span<const int> labels, const TrainConfig& cfg);

/// Same as train(), but requires cfg.adversarial.
TrainResult train_pgd_adversarial(Classifier model, const Tensor& images, std::span<const int> labels,
                                  const TrainConfig& cfg);

/// One line per epoch: "epoch=<e> lr=<rate> loss=<mean> accuracy=<acc> correct=<k>/<n>".
void write_training_log(const TrainLog& log, const std::filesystem::path& path);
std::string format_training_log(const TrainLog& log);

}  // namespace daa
