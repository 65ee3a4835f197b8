#include "daa/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "daa/simd.hpp"

namespace daa {

namespace {
constexpr std::uint64_t kShuffleTag = 0x73687566;  // "shuf"
constexpr std::uint64_t kInnerTag = 0x696e6e72;    // "innr"
}  // namespace

void TrainConfig::validate() const {
  const auto bad = [](const std::string& what) { throw std::invalid_argument("train config: " + what); };
  if (epochs == 0) bad("epochs must be positive");
  if (batch_size == 0) bad("batch_size must be positive");
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) bad("learning_rate must be finite and >= 0");
  if (!std::isfinite(decay_factor) || decay_factor <= 0.0) bad("decay_factor must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) bad("momentum must lie in [0, 1)");
  if (adversarial != inner.has_value()) bad("inner attack config present iff adversarial");
  if (inner) inner->validate();
}

double TrainConfig::rate_for_epoch(std::size_t epoch) const {
  if (decay_every == 0) return learning_rate;
  return learning_rate * std::pow(decay_factor, static_cast<double>(epoch / decay_every));
}

double TrainConfig::inner_fraction(std::size_t epoch) const {
  if (alpha_ramp_epochs == 0 || epoch + 1 >= alpha_ramp_epochs) return 1.0;
  return static_cast<double>(epoch + 1) / static_cast<double>(alpha_ramp_epochs);
}

AttackConfig default_inner_pgd(double alpha, double step_size) {
  AttackConfig a;
  a.alpha = alpha;
  a.step_size = step_size;
  a.total_iters = 7;
  a.rounds = 1;
  a.random_start = true;
  a.interaction = {0.0, 1.0, 0.0};
  return a;
}

TrainResult train(Classifier model, const Tensor& images, std::span<const int> labels, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = images.rows();
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  if (labels.size() != n) throw std::invalid_argument("train: one label per sample required");

  const auto& k = simd::active();
  std::vector<double> params = model.parameters();
  std::vector<double> velocity(params.size(), 0.0);
  TrainLog log;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const RngSeed epoch_seed = derive_seed(cfg.seed, epoch);
    CounterRng shuffle(derive_seed(epoch_seed, kShuffleTag), 0);
    const auto perm = random_permutation(n, shuffle);
    const double lr = cfg.rate_for_epoch(epoch);
    EpochRecord rec{epoch, lr, 0.0, 0, n};
    double loss_total = 0.0;

    for (std::size_t begin = 0, batch = 0; begin < n; begin += cfg.batch_size, ++batch) {
      const std::span<const std::size_t> rows(perm.data() + begin, std::min(cfg.batch_size, n - begin));
      Tensor xb = images.gather_rows(rows);
      std::vector<int> yb;
      yb.reserve(rows.size());
      for (auto i : rows) yb.push_back(labels[i]);

      if (cfg.adversarial) {
        AttackConfig inner = *cfg.inner;
        if (const double f = cfg.inner_fraction(epoch); f < 1.0) {
          inner.alpha *= f;
          inner.step_size *= f;
        }
        inner.targeted = false;
        inner.seed = derive_seed(derive_seed(epoch_seed, kInnerTag), batch);
        const ClassifierSurface surface(model, inner.loss);
        xb = pgd(surface, AttackInput{xb, yb, rows}, inner).adversarial;
      }

      const auto step = loss_and_parameter_gradient(model, xb, yb, cfg.loss);
      if (!std::isfinite(step.mean_loss)) {
        throw TrainingDiverged(epoch, "train: non-finite loss in epoch " + std::to_string(epoch));
      }
      loss_total += step.mean_loss * static_cast<double>(rows.size());
      rec.correct += step.correct;

      if (cfg.optimizer == Optimizer::sgd) {
        k.axpy(params.data(), -lr, step.gradient.data(), params.size());
      } else {
        for (double& v : velocity) v *= cfg.momentum;
        k.axpy(velocity.data(), 1.0, step.gradient.data(), velocity.size());
        k.axpy(params.data(), -lr, velocity.data(), params.size());
      }
      model.set_parameters(params);
    }
    rec.mean_loss = loss_total / static_cast<double>(n);
    if (!std::isfinite(rec.mean_loss)) {
      throw TrainingDiverged(epoch, "train: non-finite loss in epoch " + std::to_string(epoch));
    }
    log.epochs.push_back(rec);
  }
  return {std::move(model), std::move(log)};
}

TrainResult train_pgd_adversarial(Classifier model, const Tensor& images, std::span<const int> labels,
                                  const TrainConfig& cfg) {
  if (!cfg.adversarial) throw std::invalid_argument("train_pgd_adversarial: config is not adversarial");
  return train(std::move(model), images, labels, cfg);
}

std::string format_training_log(const TrainLog& log) {
  std::string out;
  char line[256];
  for (const auto& e : log.epochs) {
    std::snprintf(line, sizeof line, "epoch=%zu lr=%.6g loss=%.6g accuracy=%.6g correct=%zu/%zu\n", e.epoch,
                  e.learning_rate, e.mean_loss, e.accuracy(), e.correct, e.n);
    out += line;
  }
  return out;
}

void write_training_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("training log: cannot write " + path.string());
  out << format_training_log(log);
}

}  // namespace daa
