#include "daa/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace daa {

using nlohmann::ordered_json;

namespace {

double ratio(std::size_t k, std::size_t n) {
  return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n);
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string success_bits(const std::vector<bool>& s) {
  std::string bits(s.size(), '0');
  for (std::size_t i = 0; i < s.size(); ++i) bits[i] = s[i] ? '1' : '0';
  return bits;
}

constexpr const char* kCsvHeader =
    "attack,loss,alpha,steps,restarts,n,clean_correct,clean_accuracy,adversarial_correct,"
    "adversarial_accuracy,worst_correct,worst_case_accuracy,wall_time_s";

}  // namespace

double round6(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(fmt6(v));
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fnv1a_hex(std::span<const std::uint8_t> bytes) {
  return fnv1a_hex(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void ExperimentSpec::validate() const {
  if (attacks.empty()) throw std::invalid_argument("experiment: no attacks");
  if (losses.empty()) throw std::invalid_argument("experiment: no loss kinds");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] >= 0.0)) throw std::invalid_argument("experiment: alpha values must be nonnegative");
    if (i > 0 && alphas[i] < alphas[i - 1]) throw std::invalid_argument("experiment: alpha sweep must ascend");
  }
  base.validate();
}

double ReportRow::clean_accuracy() const { return ratio(clean_correct, n); }
double ReportRow::adversarial_accuracy() const { return ratio(adversarial_correct, n); }
double ReportRow::worst_case_accuracy() const { return ratio(worst_correct, n); }

void AttackReport::check_consistency() const {
  for (const auto& r : rows) {
    for (auto c : r.restart_correct) {
      if (r.worst_correct > c) {
        throw std::logic_error("report: worst-case count exceeds a per-restart count for " + r.attack);
      }
    }
  }
}

ReportRow make_report_row(AttackMethod method, LossKind loss, const AttackConfig& cfg, const RestartReport& r,
                          double wall_time_s) {
  ReportRow row;
  row.attack = std::string(attack_name(method));
  row.loss = std::string(loss_name(loss));
  row.alpha = cfg.alpha;
  row.steps = method == AttackMethod::fgsm || method == AttackMethod::rand_fgsm ? 1 : cfg.total_iters;
  row.restarts = cfg.restarts;
  row.n = r.n;
  row.clean_correct = r.clean_correct;
  row.adversarial_correct = r.correct_per_restart.empty() ? r.n : r.correct_per_restart.front();
  row.worst_correct = r.worst_case_correct();
  row.restart_correct = r.correct_per_restart;
  for (const auto& s : r.success) row.success.push_back(success_bits(s));
  row.wall_time_s = wall_time_s;
  return row;
}

AttackReport evaluate_curve(const Classifier& model, const Dataset& data, const ExperimentSpec& spec) {
  spec.validate();
  AttackReport report;
  report.meta = {spec.base.seed.value, spec.config_hash, spec.model_hash, data.name};
  const AttackInput input{data.images, data.labels};
  for (auto method : spec.attacks) {
    for (auto loss : spec.losses) {
      const ClassifierSurface surface(model, loss);
      for (double alpha : spec.alphas) {
        AttackConfig cfg = spec.base;
        cfg.alpha = alpha;
        cfg.loss = loss;
        cfg.lo = data.lo;
        cfg.hi = data.hi;
        const auto start = std::chrono::steady_clock::now();
        const auto restarts = worst_case_over_restarts(surface, input, cfg, method);
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        report.rows.push_back(make_report_row(method, loss, cfg, restarts, took.count()));
      }
    }
  }
  report.check_consistency();
  return report;
}

ReportFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? ReportFormat::csv : ReportFormat::json;
}

std::string render_csv(const AttackReport& report) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : report.rows) {
    out += r.attack + ',' + r.loss + ',' + fmt6(r.alpha) + ',' + std::to_string(r.steps) + ',' +
           std::to_string(r.restarts) + ',' + std::to_string(r.n) + ',' + std::to_string(r.clean_correct) + ',' +
           fmt6(r.clean_accuracy()) + ',' + std::to_string(r.adversarial_correct) + ',' +
           fmt6(r.adversarial_accuracy()) + ',' + std::to_string(r.worst_correct) + ',' +
           fmt6(r.worst_case_accuracy()) + ',' + fmt6(r.wall_time_s) + '\n';
  }
  return out;
}

std::string render_json(const AttackReport& report) {
  ordered_json j;
  j["metadata"] = {{"seed", report.meta.seed},
                   {"config_hash", report.meta.config_hash},
                   {"model_hash", report.meta.model_hash},
                   {"dataset", report.meta.dataset}};
  j["rows"] = ordered_json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"attack", r.attack},
                         {"loss", r.loss},
                         {"alpha", round6(r.alpha)},
                         {"steps", r.steps},
                         {"restarts", r.restarts},
                         {"n", r.n},
                         {"clean_correct", r.clean_correct},
                         {"clean_accuracy", round6(r.clean_accuracy())},
                         {"adversarial_correct", r.adversarial_correct},
                         {"adversarial_accuracy", round6(r.adversarial_accuracy())},
                         {"worst_correct", r.worst_correct},
                         {"worst_case_accuracy", round6(r.worst_case_accuracy())},
                         {"restart_correct", r.restart_correct},
                         {"success", r.success},
                         {"wall_time_s", round6(r.wall_time_s)}});
  }
  return j.dump(2) + "\n";
}

AttackReport parse_json_report(const std::string& text) {
  const auto j = ordered_json::parse(text);
  AttackReport rep;
  const auto& m = j.at("metadata");
  rep.meta = {m.at("seed").get<std::uint64_t>(), m.at("config_hash").get<std::string>(),
              m.at("model_hash").get<std::string>(), m.at("dataset").get<std::string>()};
  for (const auto& r : j.at("rows")) {
    ReportRow row;
    row.attack = r.at("attack").get<std::string>();
    row.loss = r.at("loss").get<std::string>();
    row.alpha = r.at("alpha").get<double>();
    row.steps = r.at("steps").get<std::size_t>();
    row.restarts = r.at("restarts").get<std::size_t>();
    row.n = r.at("n").get<std::size_t>();
    row.clean_correct = r.at("clean_correct").get<std::size_t>();
    row.adversarial_correct = r.at("adversarial_correct").get<std::size_t>();
    row.worst_correct = r.at("worst_correct").get<std::size_t>();
    row.restart_correct = r.at("restart_correct").get<std::vector<std::size_t>>();
    row.success = r.at("success").get<std::vector<std::string>>();
    row.wall_time_s = r.at("wall_time_s").get<double>();
    rep.rows.push_back(std::move(row));
  }
  rep.check_consistency();
  return rep;
}

void emit_report(const AttackReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("report: cannot write " + path.string());
  out << (format == ReportFormat::csv ? render_csv(report) : render_json(report));
  if (!out) throw std::runtime_error("report: write failed for " + path.string());
}

ComparisonResult compare_attacks(const Classifier& model, const Dataset& data, AttackMethod a, AttackMethod b,
                                 const AttackConfig& cfg, std::size_t seeds) {
  if (seeds < 2) throw std::invalid_argument("compare: need at least two seeds");
  ComparisonResult r;
  r.attack_a = std::string(attack_name(a));
  r.attack_b = std::string(attack_name(b));
  const ClassifierSurface surface(model, cfg.loss);
  const AttackInput input{data.images, data.labels};
  for (std::size_t s = 0; s < seeds; ++s) {
    AttackConfig run = cfg;
    run.seed = derive_seed(cfg.seed, s);
    run.restarts = 1;
    for (auto [method, acc] : {std::pair{a, &r.accuracy_a}, std::pair{b, &r.accuracy_b}}) {
      const auto res = run_attack(method, surface, input, run);
      std::size_t correct = 0;
      for (bool fooled : res.success) correct += fooled ? 0 : 1;
      acc->push_back(ratio(correct, data.size()));
    }
  }
  try {
    r.test = paired_t_test(r.accuracy_a, r.accuracy_b);
  } catch (const std::invalid_argument&) {
    r.degenerate = true;
  }
  return r;
}

std::string render_comparison_json(const ComparisonResult& r, const ReportMetadata& meta) {
  std::vector<double> a, b;
  for (double v : r.accuracy_a) a.push_back(round6(v));
  for (double v : r.accuracy_b) b.push_back(round6(v));
  ordered_json j;
  j["metadata"] = {{"seed", meta.seed},
                   {"config_hash", meta.config_hash},
                   {"model_hash", meta.model_hash},
                   {"dataset", meta.dataset}};
  j["sampling_unit"] = "per-seed adversarial accuracy pairs";
  j["attack_a"] = r.attack_a;
  j["attack_b"] = r.attack_b;
  j["accuracy_a"] = a;
  j["accuracy_b"] = b;
  j["degenerate"] = r.degenerate;
  if (!r.degenerate) {
    j["n"] = r.test.n;
    j["mean_difference"] = round6(r.test.mean_difference);
    j["t"] = round6(r.test.t);
    j["p_two_sided"] = round6(r.test.p);
    j["p_b_better"] = round6(r.test.p_greater());
  }
  return j.dump(2) + "\n";
}

}  // namespace daa
