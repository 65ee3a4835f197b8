#include "daa/attacks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "daa/simd.hpp"

namespace daa {

namespace {

constexpr std::array kAttacks{AttackMethod::fgsm,         AttackMethod::rand_fgsm, AttackMethod::pgd,
                              AttackMethod::mi_fgsm,      AttackMethod::momentum_pgd,
                              AttackMethod::daa_blob,     AttackMethod::daa_dgf};

constexpr std::uint64_t kPermutationTag = 0x7065726d;  // "perm"
constexpr std::uint64_t kRestartTag = 0x72737472;      // "rstr"

std::vector<std::size_t> default_ids(const AttackInput& in) {
  std::vector<std::size_t> ids(in.images.rows());
  if (in.ids.empty()) {
    std::iota(ids.begin(), ids.end(), std::size_t{0});
  } else {
    if (in.ids.size() != ids.size()) throw std::invalid_argument("attack: one id per sample required");
    std::copy(in.ids.begin(), in.ids.end(), ids.begin());
  }
  return ids;
}

void check_input(const AttackInput& in, const AttackConfig& cfg) {
  cfg.validate();
  if (in.images.rank() != 2) throw std::invalid_argument("attack: images must be a 2-D batch");
  if (in.labels.size() != in.images.rows()) throw std::invalid_argument("attack: one label per sample required");
}

struct Ascent {
  std::vector<double> losses;
  Tensor direction;
};

// Gradient of the attack objective: the loss itself, or its negation toward
// a target class.
Ascent ascent(const LossSurface& f, const Tensor& x, std::span<const int> labels, const AttackConfig& cfg) {
  auto eval = f.evaluate(x, labels);
  if (cfg.targeted) {
    for (double& g : eval.gradient.values()) g = -g;
  }
  return {std::move(eval.losses), std::move(eval.gradient)};
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Tensor start_point(const AttackInput& in, const AttackConfig& cfg, std::span<const std::size_t> ids) {
  if (!cfg.random_start) return in.images;
  const Tensor noise = uniform_noise(in.images.shape(), cfg.alpha, cfg.seed, ids);
  Tensor moved = in.images;
  simd::active().axpy(moved.data(), 1.0, noise.data(), moved.size());
  return clip_projection(moved, in.images, cfg.alpha, cfg.lo, cfg.hi);
}

void apply_sign_step(Tensor& x, const Tensor& direction, const Tensor& originals, double step,
                     const AttackConfig& cfg) {
  simd::active().sign_step(x.data(), direction.data(), originals.data(), step, cfg.alpha, cfg.lo, cfg.hi,
                           x.size());
}

void notify(const StepObserver& observe, std::size_t iteration, std::span<const std::size_t> rows,
            const Tensor& current, const Tensor& originals) {
  if (observe) observe(StepEvent{iteration, rows, current, originals});
}

AttackResult finish(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg, Tensor adversarial,
                    std::vector<double> trace) {
  AttackResult r;
  r.final_losses = f.evaluate(adversarial, in.labels).losses;
  const auto pred = f.predict(adversarial);
  r.success.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    r.success[i] = cfg.targeted ? pred[i] == in.labels[i] : pred[i] != in.labels[i];
  }
  r.adversarial = std::move(adversarial);
  r.loss_trace = std::move(trace);
  return r;
}

// Per-row l1-normalized gradient folded into the momentum accumulator.
void accumulate_momentum(Tensor& g, const Tensor& grad, double mu) {
  const auto& k = simd::active();
  const std::size_t w = grad.row_size();
  for (double& v : g.values()) v *= mu;
  for (std::size_t r = 0; r < grad.rows(); ++r) {
    const double l1 = k.l1_norm(grad.row(r).data(), w);
    k.axpy(g.row(r).data(), l1 > 0.0 ? 1.0 / l1 : 1.0, grad.row(r).data(), w);
  }
}

enum class Projection { every_step, final_only };

AttackResult momentum_attack(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                             const StepObserver& observe, Projection projection) {
  check_input(in, cfg);
  const auto ids = default_ids(in);
  Tensor x = projection == Projection::every_step ? start_point(in, cfg, ids) : in.images;
  Tensor g(in.images.shape());
  Tensor step_sign(in.images.shape());
  std::vector<double> trace;
  const auto& k = simd::active();
  for (std::size_t l = 0; l < cfg.total_iters; ++l) {
    auto a = ascent(f, x, in.labels, cfg);
    trace.push_back(mean(a.losses));
    accumulate_momentum(g, a.direction, cfg.momentum);
    if (projection == Projection::every_step) {
      apply_sign_step(x, g, in.images, cfg.step_size, cfg);
      notify(observe, l, ids, x, in.images);
    } else {
      k.sign(step_sign.data(), g.data(), g.size());
      k.axpy(x.data(), cfg.step_size, step_sign.data(), x.size());
    }
  }
  if (projection == Projection::final_only) {
    x = clip_projection(x, in.images, cfg.alpha, cfg.lo, cfg.hi);
    notify(observe, cfg.total_iters - 1, ids, x, in.images);
  }
  return finish(f, in, cfg, std::move(x), std::move(trace));
}

ParticleBatch daa_step(ParticleBatch pb, const LossSurface& f, const AttackConfig& cfg, DaaMethod method,
                       double* loss_sum) {
  if (pb.current.rows() == 0) throw std::invalid_argument("daa step: empty particle batch");
  require_same_shape(pb.current, pb.originals, "daa step");
  auto a = ascent(f, pb.current, pb.labels, cfg);
  if (loss_sum != nullptr) {
    for (double l : a.losses) *loss_sum += l;
  }
  Tensor& dir = a.direction;
  if (method == DaaMethod::blob) {
    const Tensor term = blob_interaction(pb.current, dir, cfg.interaction);
    simd::active().axpy(dir.data(), 1.0, term.data(), dir.size());
  } else {
    const Tensor term = dgf_interaction(pb.current, cfg.interaction);
    simd::active().axpy(dir.data(), -1.0, term.data(), dir.size());
  }
  apply_sign_step(pb.current, dir, pb.originals, cfg.step_size, cfg);
  return pb;
}

}  // namespace

std::string_view attack_name(AttackMethod m) noexcept {
  switch (m) {
    case AttackMethod::fgsm: return "fgsm";
    case AttackMethod::rand_fgsm: return "rand_fgsm";
    case AttackMethod::pgd: return "pgd";
    case AttackMethod::mi_fgsm: return "mi_fgsm";
    case AttackMethod::momentum_pgd: return "momentum_pgd";
    case AttackMethod::daa_blob: return "daa_blob";
    case AttackMethod::daa_dgf: return "daa_dgf";
  }
  return "unknown";
}

AttackMethod parse_attack(std::string_view name) {
  for (auto m : kAttacks) {
    if (attack_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown attack '" + std::string(name) + "'");
}

std::span<const AttackMethod> all_attacks() noexcept { return kAttacks; }

void AttackConfig::validate() const {
  const auto bad = [](const std::string& what) { throw std::invalid_argument("attack config: " + what); };
  if (!std::isfinite(step_size) || step_size < 0.0) bad("step_size must be finite and >= 0");
  if (!std::isfinite(alpha) || alpha < 0.0) bad("alpha must be finite and >= 0");
  if (total_iters == 0) bad("total_iters must be positive");
  if (rounds == 0 || total_iters % rounds != 0) bad("rounds must divide total_iters");
  if (minibatch == 0) bad("minibatch must be positive");
  if (!(momentum >= 0.0 && momentum <= 1.0)) bad("momentum must lie in [0, 1]");
  if (restarts == 0) bad("restarts must be positive");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) bad("pixel range needs finite lo < hi");
  if (!std::isfinite(loss.kappa) || loss.kappa < 0.0) bad("kappa must be finite and >= 0");
  interaction.validate();
}

void ParticleBatch::check_invariants(double alpha, double lo, double hi) const {
  require_same_shape(current, originals, "particle batch");
  for (std::size_t i = 0; i < current.size(); ++i) {
    const double v = current[i];
    if (v < lo || v > hi || std::abs(v - originals[i]) > alpha + 1e-12) {
      throw std::logic_error("particle batch: entry " + std::to_string(i) + " left the feasible box");
    }
  }
}

AttackResult fgsm(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                  const StepObserver& observe) {
  check_input(in, cfg);
  const auto ids = default_ids(in);
  Tensor x = in.images;
  auto a = ascent(f, x, in.labels, cfg);
  apply_sign_step(x, a.direction, in.images, cfg.alpha, cfg);
  notify(observe, 0, ids, x, in.images);
  return finish(f, in, cfg, std::move(x), {mean(a.losses)});
}

AttackResult rand_fgsm(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                       const StepObserver& observe) {
  check_input(in, cfg);
  const auto ids = default_ids(in);
  AttackConfig start = cfg;
  start.random_start = true;
  Tensor x = start_point(in, start, ids);
  auto a = ascent(f, x, in.labels, cfg);
  apply_sign_step(x, a.direction, in.images, cfg.step_size, cfg);
  notify(observe, 0, ids, x, in.images);
  return finish(f, in, cfg, std::move(x), {mean(a.losses)});
}

AttackResult pgd(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg, const StepObserver& observe) {
  check_input(in, cfg);
  const auto ids = default_ids(in);
  Tensor x = start_point(in, cfg, ids);
  std::vector<double> trace;
  trace.reserve(cfg.total_iters);
  for (std::size_t l = 0; l < cfg.total_iters; ++l) {
    auto a = ascent(f, x, in.labels, cfg);
    trace.push_back(mean(a.losses));
    apply_sign_step(x, a.direction, in.images, cfg.step_size, cfg);
    notify(observe, l, ids, x, in.images);
  }
  return finish(f, in, cfg, std::move(x), std::move(trace));
}

AttackResult mi_fgsm(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                     const StepObserver& observe) {
  return momentum_attack(f, in, cfg, observe, Projection::final_only);
}

AttackResult momentum_pgd(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                          const StepObserver& observe) {
  return momentum_attack(f, in, cfg, observe, Projection::every_step);
}

ParticleBatch daa_blob_step(ParticleBatch pb, const LossSurface& f, const AttackConfig& cfg) {
  cfg.validate();
  return daa_step(std::move(pb), f, cfg, DaaMethod::blob, nullptr);
}

ParticleBatch daa_dgf_step(ParticleBatch pb, const LossSurface& f, const AttackConfig& cfg) {
  cfg.validate();
  return daa_step(std::move(pb), f, cfg, DaaMethod::dgf, nullptr);
}

AttackResult run_daa(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg, DaaMethod method,
                     const StepObserver& observe) {
  check_input(in, cfg);
  const std::size_t n = in.images.rows();
  if (n == 0) throw std::invalid_argument("run_daa: empty dataset");
  const auto ids = default_ids(in);
  Tensor x = start_point(in, cfg, ids);
  const std::size_t sweeps = cfg.total_iters / cfg.rounds;
  const std::size_t m = std::min(cfg.minibatch, n);

  AttackResult result;
  std::vector<double> trace(cfg.total_iters, 0.0);
  CounterRng perm_rng(derive_seed(cfg.seed, kPermutationTag), 0);
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    auto perm = random_permutation(n, perm_rng);
    for (std::size_t k = 0; k < sweeps; ++k) {
      const std::size_t l = r * sweeps + k;
      double loss_sum = 0.0;
      for (std::size_t begin = 0; begin < n; begin += m) {
        const std::span<const std::size_t> rows(perm.data() + begin, std::min(m, n - begin));
        ParticleBatch pb;
        pb.current = x.gather_rows(rows);
        pb.originals = in.images.gather_rows(rows);
        pb.labels.reserve(rows.size());
        pb.indices.assign(rows.begin(), rows.end());
        for (auto i : rows) pb.labels.push_back(in.labels[i]);
        pb = daa_step(std::move(pb), f, cfg, method, &loss_sum);
        x.scatter_rows(rows, pb.current);
        notify(observe, l, rows, pb.current, pb.originals);
      }
      trace[l] = loss_sum / static_cast<double>(n);
    }
    result.permutations.push_back(std::move(perm));
  }
  auto done = finish(f, in, cfg, std::move(x), std::move(trace));
  done.permutations = std::move(result.permutations);
  return done;
}

AttackResult run_attack(AttackMethod method, const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                        const StepObserver& observe) {
  switch (method) {
    case AttackMethod::fgsm: return fgsm(f, in, cfg, observe);
    case AttackMethod::rand_fgsm: return rand_fgsm(f, in, cfg, observe);
    case AttackMethod::pgd: return pgd(f, in, cfg, observe);
    case AttackMethod::mi_fgsm: return mi_fgsm(f, in, cfg, observe);
    case AttackMethod::momentum_pgd: return momentum_pgd(f, in, cfg, observe);
    case AttackMethod::daa_blob: return run_daa(f, in, cfg, DaaMethod::blob, observe);
    case AttackMethod::daa_dgf: return run_daa(f, in, cfg, DaaMethod::dgf, observe);
  }
  throw std::invalid_argument("run_attack: unknown method");
}

RngSeed restart_seed(RngSeed master, std::size_t restart) noexcept {
  return derive_seed(derive_seed(master, kRestartTag), restart);
}

double RestartReport::worst_case_accuracy() const {
  return n == 0 ? 0.0 : static_cast<double>(worst_case_correct()) / static_cast<double>(n);
}

double RestartReport::restart_accuracy(std::size_t r) const {
  return n == 0 ? 0.0 : static_cast<double>(correct_per_restart.at(r)) / static_cast<double>(n);
}

double RestartReport::clean_accuracy() const {
  return n == 0 ? 0.0 : static_cast<double>(clean_correct) / static_cast<double>(n);
}

RestartReport worst_case_over_restarts(const LossSurface& f, const AttackInput& in, const AttackConfig& cfg,
                                       AttackMethod method) {
  check_input(in, cfg);
  RestartReport rep;
  rep.n = in.images.rows();
  const auto clean = f.predict(in.images);
  for (std::size_t i = 0; i < rep.n; ++i) {
    const bool fooled = cfg.targeted ? clean[i] == in.labels[i] : clean[i] != in.labels[i];
    rep.clean_correct += fooled ? 0 : 1;
  }
  std::vector<bool> robust(rep.n, true);
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    AttackConfig run = cfg;
    run.seed = restart_seed(cfg.seed, r);
    const auto result = run_attack(method, f, in, run);
    std::size_t correct = 0;
    std::size_t survivors = 0;
    for (std::size_t i = 0; i < rep.n; ++i) {
      correct += result.success[i] ? 0 : 1;
      if (result.success[i]) robust[i] = false;
      survivors += robust[i] ? 1 : 0;
    }
    rep.correct_per_restart.push_back(correct);
    rep.worst_correct.push_back(survivors);
    rep.success.push_back(result.success);
  }
  return rep;
}

}  // namespace daa
