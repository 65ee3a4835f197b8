#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "daa/core_math.hpp"
#include "daa/kernel.hpp"
#include "daa/model.hpp"
#include "daa/tensor.hpp"

namespace daa {

/// Differentiable objective an attack ascends. Rows are independent samples.
class LossSurface {
 public:
  virtual ~LossSurface() = default;
  virtual LossAndInputGradient evaluate(const Tensor& x, std::span<const int> labels) const = 0;
  virtual std::vector<int> predict(const Tensor& x) const = 0;
};

class ClassifierSurface final : public LossSurface {
 public:
  ClassifierSurface(const Classifier& model, LossKind loss) : model_(model), loss_(loss) {}

  LossAndInputGradient evaluate(const Tensor& x, std::span<const int> labels) const override {
    return loss_and_input_gradient(model_, x, labels, loss_);
  }
  std::vector<int> predict(const Tensor& x) const override { return daa::predict(model_, x); }

 private:
  const Classifier& model_;
  LossKind loss_;
};

enum class AttackMethod { fgsm, rand_fgsm, pgd, mi_fgsm, momentum_pgd, daa_blob, daa_dgf };

std::string_view attack_name(AttackMethod m) noexcept;
AttackMethod parse_attack(std::string_view name);
std::span<const AttackMethod> all_attacks() noexcept;

struct AttackConfig {
  double step_size = 0.01;     // per-iteration step, pixel units
  double alpha = 0.3;          // final l-inf budget
  std::size_t total_iters = 40;
  std::size_t rounds = 1;      // must divide total_iters
  std::size_t minibatch = 200;
  InteractionConfig interaction{1.1, 1.0, 1.0};
  LossKind loss = LossKind::cross_entropy();
  double momentum = 1.0;       // MI-FGSM and momentum PGD
  bool random_start = false;
  std::size_t restarts = 1;
  bool targeted = false;       // labels are then target classes and the loss is descended
  double lo = 0.0;
  double hi = 1.0;
  RngSeed seed{};

  void validate() const;
};

/// Minibatch of particles: current iterates next to their clean originals.
struct ParticleBatch {
  Tensor current;
  Tensor originals;
  std::vector<int> labels;
  std::vector<std::size_t> indices;  // positions in the attacked dataset

  /// Throws std::logic_error when an iterate leaves the alpha-box or pixel range.
  void check_invariants(double alpha, double lo, double hi) const;
};

struct AttackResult {
  Tensor adversarial;
  std::vector<bool> success;
  std::vector<double> final_losses;
  std::vector<double> loss_trace;  // mean objective before each iteration
  std::vector<std::vector<std::size_t>> permutations;  // one per round (DAA only)
};

/// Reported after every projected update: which dataset rows moved and where
/// they are now.
struct StepEvent {
  std::size_t iteration;
  std::span<const std::size_t> rows;
  const Tensor& current;
  const Tensor& originals;
};
using StepObserver = std::function<void(const StepEvent&)>;

/// Shared inputs of every attack. `ids` key the per-sample random streams and
/// default to 0..N-1.
struct AttackInput {
  const Tensor& images;
  std::span<const int> labels;
  std::span<const std::size_t> ids = {};
};

AttackResult fgsm(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                  const StepObserver& observe = {});
AttackResult rand_fgsm(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                       const StepObserver& observe = {});
AttackResult pgd(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                 const StepObserver& observe = {});
AttackResult mi_fgsm(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                     const StepObserver& observe = {});
AttackResult momentum_pgd(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                          const StepObserver& observe = {});

/// One DAA-BLOB update of a minibatch: x_i <- clip(x_i + eps sign(g_i + blob_i)).
ParticleBatch daa_blob_step(ParticleBatch pb, const LossSurface& f, const AttackConfig& cfg);
/// One DAA-DGF update of a minibatch: x_i <- clip(x_i + eps sign(g_i - dgf_i)).
ParticleBatch daa_dgf_step(ParticleBatch pb, const LossSurface& f, const AttackConfig& cfg);

enum class DaaMethod { blob, dgf };

/// Full distributional schedule: optional random start, then `rounds` rounds,
/// each permuting the samples and running total_iters/rounds sweeps over
/// consecutive minibatches of the permutation. The last minibatch of a sweep
/// holds the remainder when minibatch does not divide N.
AttackResult run_daa(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg, DaaMethod method,
                     const StepObserver& observe = {});

AttackResult run_attack(AttackMethod method, const LossSurface& f, const AttackInput& in,
                        const AttackConfig& cfg, const StepObserver& observe = {});

/// Seed of restart r; restarts are reproducible individually.
RngSeed restart_seed(RngSeed master, std::size_t restart) noexcept;

struct RestartReport {
  std::size_t n = 0;
  std::size_t clean_correct = 0;
  std::vector<std::size_t> correct_per_restart;
  /// worst_correct[r]: samples that survived restarts 0..r.
  std::vector<std::size_t> worst_correct;
  /// success[r][i]: restart r fooled sample i.
  std::vector<std::vector<bool>> success;

  std::size_t worst_case_correct() const { return worst_correct.empty() ? n : worst_correct.back(); }
  double worst_case_accuracy() const;
  double restart_accuracy(std::size_t r) const;
  double clean_accuracy() const;
};

/// A sample counts as robust only if no restart fools it.
RestartReport worst_case_over_restarts(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                                       AttackMethod method);

}  // namespace daa
