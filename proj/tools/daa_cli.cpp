// Command-line front end: train, attack, curve, compare, report.
//
// Every command reads one JSON config (--config) and lets a handful of flags
// override it. Relative data and checkpoint paths resolve against the config
// file's directory.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "daa/attacks.hpp"
#include "daa/data.hpp"
#include "daa/evaluate.hpp"
#include "daa/model.hpp"
#include "daa/training.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> attack;
  std::optional<double> alpha;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> restarts;
  std::optional<std::string> loss;
  std::string out;
};

struct Context {
  ordered_json cfg;
  fs::path base_dir;

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
};

ordered_json section(const ordered_json& cfg, const char* key) {
  return cfg.contains(key) ? cfg.at(key) : ordered_json::object();
}

template <class T>
T value_or(const ordered_json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Context load_context(const std::string& config_path, const Overrides& o) {
  Context ctx;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot read config " + config_path);
    ctx.cfg = ordered_json::parse(in);
    ctx.base_dir = fs::absolute(config_path).parent_path();
  } else {
    ctx.cfg = ordered_json::object();
    ctx.base_dir = fs::current_path();
  }
  auto& c = ctx.cfg;
  if (o.seed) c["seed"] = *o.seed;
  if (!c.contains("attack")) c["attack"] = ordered_json::object();
  auto& a = c["attack"];
  if (o.attack) a["name"] = *o.attack;
  if (o.alpha) a["alpha"] = *o.alpha;
  if (o.steps) a["steps"] = *o.steps;
  if (o.restarts) a["restarts"] = *o.restarts;
  if (o.loss) a["loss"] = *o.loss;
  return ctx;
}

daa::Dataset load_data(const Context& ctx, const char* key) {
  const auto d = section(ctx.cfg, key);
  daa::Dataset data;
  if (d.contains("synthetic")) {
    const auto& s = d.at("synthetic");
    data = daa::synthetic_gaussians(value_or<std::size_t>(s, "classes", 2), value_or<std::size_t>(s, "dim", 2),
                                    value_or<std::size_t>(s, "per_class", 50), value_or(s, "separation", 1.0),
                                    daa::RngSeed{value_or<std::uint64_t>(s, "seed", 0)},
                                    value_or(s, "sigma", 0.1));
  } else if (d.contains("images")) {
    data = daa::load_idx_pair(ctx.resolve(d.at("images").get<std::string>()),
                              ctx.resolve(d.at("labels").get<std::string>()));
  } else {
    throw std::runtime_error(std::string("config needs a '") + key + "' section with images/labels or synthetic");
  }
  if (d.contains("offset") || d.contains("limit")) {
    data = data.slice(value_or<std::size_t>(d, "offset", 0), value_or<std::size_t>(d, "limit", data.size()));
  }
  if (ctx.cfg.contains("pixel_range")) {
    const auto r = ctx.cfg.at("pixel_range").get<std::vector<double>>();
    if (r.size() != 2) throw std::runtime_error("pixel_range needs two values");
    data.lo = r[0];
    data.hi = r[1];
  }
  data.validate();
  return data;
}

daa::AttackConfig attack_config(const Context& ctx, const ordered_json& a) {
  daa::AttackConfig cfg;
  cfg.alpha = value_or(a, "alpha", cfg.alpha);
  cfg.step_size = value_or(a, "step_size", cfg.step_size);
  cfg.total_iters = value_or(a, "steps", cfg.total_iters);
  cfg.rounds = value_or(a, "rounds", cfg.rounds);
  cfg.minibatch = value_or(a, "minibatch", cfg.minibatch);
  cfg.interaction.c = value_or(a, "c", cfg.interaction.c);
  cfg.interaction.lambda = value_or(a, "lambda", cfg.interaction.lambda);
  cfg.interaction.dgf_scale = value_or(a, "dgf_scale", cfg.interaction.dgf_scale);
  cfg.momentum = value_or(a, "momentum", cfg.momentum);
  cfg.random_start = value_or(a, "random_start", cfg.random_start);
  cfg.restarts = value_or(a, "restarts", cfg.restarts);
  cfg.targeted = value_or(a, "targeted", cfg.targeted);
  cfg.loss = daa::parse_loss(value_or<std::string>(a, "loss", "ce"), value_or(a, "kappa", 0.0));
  cfg.seed = daa::RngSeed{value_or<std::uint64_t>(ctx.cfg, "seed", 0)};
  if (ctx.cfg.contains("pixel_range")) {
    const auto r = ctx.cfg.at("pixel_range").get<std::vector<double>>();
    cfg.lo = r.at(0);
    cfg.hi = r.at(1);
  }
  cfg.validate();
  return cfg;
}

daa::Classifier load_model(const Context& ctx) {
  const auto m = section(ctx.cfg, "model");
  if (!m.contains("checkpoint")) throw std::runtime_error("config needs model.checkpoint");
  return daa::load_checkpoint(ctx.resolve(m.at("checkpoint").get<std::string>()));
}

std::string config_hash(const Context& ctx) { return daa::fnv1a_hex(ctx.cfg.dump()); }

daa::ReportMetadata metadata(const Context& ctx, const daa::Classifier& model, const daa::Dataset& data) {
  return {value_or<std::uint64_t>(ctx.cfg, "seed", 0), config_hash(ctx),
          daa::fnv1a_hex(daa::encode_checkpoint(model)), data.name};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

fs::path require_out(const Overrides& o) {
  if (o.out.empty()) throw std::runtime_error("--out is required");
  return o.out;
}

int cmd_train(const Context& ctx, const Overrides& o, const std::string& log_path) {
  const daa::Dataset data = load_data(ctx, "data");
  const auto t = section(ctx.cfg, "train");
  const auto m = section(ctx.cfg, "model");
  const auto hidden = value_or<std::vector<std::size_t>>(m, "hidden", {64});
  const std::size_t classes = value_or<std::size_t>(m, "classes", 10);
  const daa::RngSeed seed{value_or<std::uint64_t>(ctx.cfg, "seed", 0)};

  daa::TrainConfig cfg;
  cfg.epochs = value_or(t, "epochs", cfg.epochs);
  cfg.batch_size = value_or(t, "batch_size", cfg.batch_size);
  cfg.learning_rate = value_or(t, "learning_rate", cfg.learning_rate);
  cfg.decay_every = value_or(t, "decay_every", cfg.decay_every);
  cfg.decay_factor = value_or(t, "decay_factor", cfg.decay_factor);
  cfg.optimizer = value_or<std::string>(t, "optimizer", "sgd_momentum") == "sgd" ? daa::Optimizer::sgd
                                                                                 : daa::Optimizer::sgd_momentum;
  cfg.momentum = value_or(t, "momentum", cfg.momentum);
  cfg.seed = seed;
  cfg.adversarial = value_or(t, "adversarial", false);
  cfg.alpha_ramp_epochs = value_or(t, "alpha_ramp_epochs", cfg.alpha_ramp_epochs);
  if (cfg.adversarial) {
    const auto inner = section(t, "inner");
    daa::AttackConfig a = daa::default_inner_pgd(value_or(inner, "alpha", 0.3), value_or(inner, "step_size", 0.1));
    a.total_iters = value_or(inner, "steps", a.total_iters);
    a.random_start = value_or(inner, "random_start", a.random_start);
    a.lo = data.lo;
    a.hi = data.hi;
    cfg.inner = a;
  }

  const auto init = daa::Classifier::make_mlp(data.images.row_size(), hidden, classes, seed);
  const auto result = daa::train(init, data.images, data.labels, cfg);
  const fs::path out = require_out(o);
  daa::save_checkpoint(result.model, out);
  daa::write_training_log(result.log, log_path.empty() ? fs::path(out.string() + ".log") : fs::path(log_path));
  const auto& last = result.log.epochs.back();
  std::printf("trained %zu epochs: loss %.6g, accuracy %zu/%zu\n", result.log.epochs.size(), last.mean_loss,
              last.correct, last.n);
  return 0;
}

int cmd_attack(const Context& ctx, const Overrides& o, const std::string& report_path) {
  const daa::Classifier model = load_model(ctx);
  const daa::Dataset data = load_data(ctx, "data");
  const auto a = section(ctx.cfg, "attack");
  const auto method = daa::parse_attack(value_or<std::string>(a, "name", "pgd"));
  daa::AttackConfig cfg = attack_config(ctx, a);
  cfg.lo = data.lo;
  cfg.hi = data.hi;
  const daa::ClassifierSurface surface(model, cfg.loss);
  const daa::AttackInput input{data.images, data.labels};

  const auto start = std::chrono::steady_clock::now();
  const auto restarts = daa::worst_case_over_restarts(surface, input, cfg, method);
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;

  daa::AttackConfig first = cfg;
  first.seed = daa::restart_seed(cfg.seed, 0);
  const auto adv = daa::run_attack(method, surface, input, first);
  daa::save_tensor(adv.adversarial, require_out(o));

  daa::AttackReport report;
  report.meta = metadata(ctx, model, data);
  report.rows.push_back(daa::make_report_row(method, cfg.loss, cfg, restarts, took.count()));
  report.check_consistency();
  const fs::path rp = report_path.empty() ? fs::path(o.out + ".json") : fs::path(report_path);
  daa::emit_report(report, daa::format_for_path(rp), rp);
  const auto& row = report.rows.front();
  std::printf("%s alpha=%g: clean %zu/%zu, adversarial %zu/%zu, worst-case %zu/%zu\n", row.attack.c_str(),
              row.alpha, row.clean_correct, row.n, row.adversarial_correct, row.n, row.worst_correct, row.n);
  return 0;
}

int cmd_curve(const Context& ctx, const Overrides& o) {
  const daa::Classifier model = load_model(ctx);
  const daa::Dataset data = load_data(ctx, "data");
  const auto c = section(ctx.cfg, "curve");
  const auto a = section(ctx.cfg, "attack");
  daa::ExperimentSpec spec;
  spec.base = attack_config(ctx, a);
  for (const auto& name : value_or<std::vector<std::string>>(c, "attacks", {value_or<std::string>(a, "name", "pgd")}))
    spec.attacks.push_back(daa::parse_attack(name));
  for (const auto& name : value_or<std::vector<std::string>>(c, "losses", {value_or<std::string>(a, "loss", "ce")}))
    spec.losses.push_back(daa::parse_loss(name, spec.base.loss.kappa));
  spec.alphas = value_or<std::vector<double>>(c, "alphas", {spec.base.alpha});
  spec.config_hash = config_hash(ctx);
  spec.model_hash = daa::fnv1a_hex(daa::encode_checkpoint(model));
  auto report = daa::evaluate_curve(model, data, spec);
  report.meta.dataset = data.name;
  const fs::path out = require_out(o);
  daa::emit_report(report, daa::format_for_path(out), out);
  std::fputs(daa::render_csv(report).c_str(), stdout);
  return 0;
}

int cmd_compare(const Context& ctx, const Overrides& o) {
  const daa::Classifier model = load_model(ctx);
  const daa::Dataset data = load_data(ctx, "data");
  const auto cmp = section(ctx.cfg, "compare");
  const auto a = section(ctx.cfg, "attack");
  daa::AttackConfig cfg = attack_config(ctx, a);
  cfg.lo = data.lo;
  cfg.hi = data.hi;
  const auto first = daa::parse_attack(value_or<std::string>(cmp, "attack_a", value_or<std::string>(a, "name", "pgd")));
  const auto second = daa::parse_attack(value_or<std::string>(cmp, "attack_b", "daa_blob"));
  const auto r = daa::compare_attacks(model, data, first, second, cfg, value_or<std::size_t>(cmp, "seeds", 5));
  const std::string json = daa::render_comparison_json(r, metadata(ctx, model, data));
  write_text(require_out(o), json);
  std::fputs(json.c_str(), stdout);
  return 0;
}

int cmd_report(const std::string& in_path, const Overrides& o) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read report " + in_path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto report = daa::parse_json_report(text);
  if (o.out.empty()) {
    std::fputs(daa::render_csv(report).c_str(), stdout);
  } else {
    daa::emit_report(report, daa::format_for_path(o.out), o.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally adversarial attack toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;
  std::string log_path, report_path, report_in;

  const auto common = [&](CLI::App* sub, bool attack_flags) {
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output path");
    if (attack_flags) {
      sub->add_option("--attack", o.attack, "attack name");
      sub->add_option("--alpha", o.alpha, "l-inf budget");
      sub->add_option("--steps", o.steps, "iterations");
      sub->add_option("--restarts", o.restarts, "random restarts");
      sub->add_option("--loss", o.loss, "loss kind")->check(CLI::IsMember({"ce", "cw"}));
    }
  };

  auto* train = app.add_subcommand("train", "train a classifier, optionally with PGD adversarial training");
  common(train, false);
  train->add_option("--log", log_path, "training log path (default <out>.log)");
  auto* attack = app.add_subcommand("attack", "attack a dataset; writes the adversarial tensor and a report");
  common(attack, true);
  attack->add_option("--report", report_path, "report path, .csv or .json (default <out>.json)");
  auto* curve = app.add_subcommand("curve", "accuracy against alpha for every attack and loss");
  common(curve, true);
  auto* compare = app.add_subcommand("compare", "two attacks over several seeds plus a paired t-test");
  common(compare, true);
  auto* report = app.add_subcommand("report", "re-emit a JSON report as CSV or JSON");
  report->add_option("--in", report_in, "JSON report")->required();
  report->add_option("--out", o.out, "output path (stdout CSV if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) return cmd_report(report_in, o);
    const Context ctx = load_context(config_path, o);
    if (train->parsed()) return cmd_train(ctx, o, log_path);
    if (attack->parsed()) return cmd_attack(ctx, o, report_path);
    if (curve->parsed()) return cmd_curve(ctx, o);
    if (compare->parsed()) return cmd_compare(ctx, o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
