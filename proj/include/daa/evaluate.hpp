#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "daa/attacks.hpp"
#include "daa/data.hpp"
#include "daa/model.hpp"
#include "daa/stats.hpp"

namespace daa {

/// One accuracy-vs-alpha sweep: every attack x loss x alpha combination.
struct ExperimentSpec {
  std::vector<AttackMethod> attacks;
  std::vector<LossKind> losses;
  std::vector<double> alphas;  // nonnegative, ascending
  AttackConfig base;           // alpha and loss are overridden per row
  std::string model_hash;
  std::string config_hash;

  void validate() const;
};

/// One (attack, loss, alpha) cell of a report. Accuracies are exact counts
/// over n; "adversarial" is restart 0 and "worst" survives every restart.
struct ReportRow {
  std::string attack;
  std::string loss;
  double alpha = 0.0;
  std::size_t steps = 0;
  std::size_t restarts = 0;
  std::size_t n = 0;
  std::size_t clean_correct = 0;
  std::size_t adversarial_correct = 0;
  std::size_t worst_correct = 0;
  std::vector<std::size_t> restart_correct;
  std::vector<std::string> success;  // per restart, one '0'/'1' per sample
  double wall_time_s = 0.0;

  double clean_accuracy() const;
  double adversarial_accuracy() const;
  double worst_case_accuracy() const;
};

struct ReportMetadata {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string model_hash;
  std::string dataset;
};

struct AttackReport {
  ReportMetadata meta;
  std::vector<ReportRow> rows;

  /// Throws std::logic_error if a worst-case count exceeds a restart count.
  void check_consistency() const;
};

ReportRow make_report_row(AttackMethod method, LossKind loss, const AttackConfig& cfg, const RestartReport& r,
                          double wall_time_s);

AttackReport evaluate_curve(const Classifier& model, const Dataset& data, const ExperimentSpec& spec);

enum class ReportFormat { csv, json };

/// Picks csv for a ".csv" extension, json otherwise.
ReportFormat format_for_path(const std::filesystem::path& path);

std::string render_csv(const AttackReport& report);
std::string render_json(const AttackReport& report);
AttackReport parse_json_report(const std::string& text);
void emit_report(const AttackReport& report, ReportFormat format, const std::filesystem::path& path);

/// Head-to-head comparison over seeds: adversarial accuracy of attack A and
/// attack B under seeds derived from the master seed, then a paired t-test on
/// the per-seed accuracy pairs (a - b).
struct ComparisonResult {
  std::string attack_a;
  std::string attack_b;
  std::vector<double> accuracy_a;
  std::vector<double> accuracy_b;
  PairedTTest test;
  bool degenerate = false;  // zero-variance differences; test not computed
};

ComparisonResult compare_attacks(const Classifier& model, const Dataset& data, AttackMethod a, AttackMethod b,
                                 const AttackConfig& cfg, std::size_t seeds);

std::string render_comparison_json(const ComparisonResult& r, const ReportMetadata& meta);

/// Rounds to 6 significant digits, the precision used in every report.
double round6(double v);

/// FNV-1a 64-bit digest as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string fnv1a_hex(std::span<const std::uint8_t> bytes);

}  // namespace daa
