#pragma once

// Within-subject comparison of the two conditions: a Shapiro-Wilk gate on
// the paired differences selects a paired t-test or a Wilcoxon signed-rank
// test. Also questionnaire scoring and completion-time summaries.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loco/task_engine.hpp"

namespace loco::analysis {

inline constexpr double kAlpha = 0.05;

struct PairedSample {
  std::string label_a = "scooter";
  std::string label_b = "joystick";
  std::vector<double> values_a;
  std::vector<double> values_b;

  /// Throws Error(InsufficientData) for fewer than 3 pairs or unequal
  /// lengths, Error(Validation) for non-finite values.
  void validate() const;
  std::vector<double> differences() const;  // a - b
};

struct NormalityResult {
  double w = 0.0;
  double p = 0.0;
};

/// Royston (1995, AS R94) approximation; valid for 3 <= n <= 5000.
NormalityResult shapiro_wilk(std::span<const double> xs);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 0.0;  // two-tailed
  double d = 0.0;  // Cohen's d for paired designs, t / sqrt(n)
};

TTestResult paired_t(const PairedSample& sample);
double cohen_d_from_t(double t, double n);

/// Two-tailed p of a Student t statistic.
double student_t_two_tailed_p(double t, double df);

struct WilcoxonResult {
  double w = 0.0;         // min(R+, R-)
  double r_plus = 0.0;
  double r_minus = 0.0;
  std::size_t n_nonzero = 0;
  double p = 0.0;         // two-tailed
  bool exact = false;
  double z = 0.0;         // normal approximation only
  double r = 0.0;         // matched-pairs rank-biserial (R+ - R-) / (R+ + R-)
};

/// Zero differences are dropped and ties share average ranks. Exact p up to
/// kWilcoxonExactMax nonzero differences, normal approximation with tie and
/// continuity correction above.
inline constexpr std::size_t kWilcoxonExactMax = 25;
WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample);
WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences);

/// Average ranks of |d| over nonzero differences (ties share ranks), in the
/// input order of the nonzero entries.
std::vector<double> signed_rank_magnitudes(std::span<const double> differences);

/// Two-tailed exact p of the signed-rank statistic R+ given the rank
/// magnitudes: min(1, 2 * min(P(R+ <= obs), P(R+ >= obs))) under the null of
/// equally likely sign patterns.
double wilcoxon_exact_p(std::span<const double> ranks, double r_plus);

enum class TestKind { PairedT, Wilcoxon };
std::string_view to_string(TestKind k) noexcept;

struct TestReport {
  std::string measure;
  std::string label_a;
  std::string label_b;
  std::size_t n = 0;
  double mean_a = 0.0, sd_a = 0.0, mean_b = 0.0, sd_b = 0.0;
  NormalityResult normality;
  TestKind chosen = TestKind::PairedT;
  double statistic = 0.0;
  std::optional<double> df;  // t only
  double p_value = 1.0;
  double effect_size = 0.0;  // d or r
  std::string effect_name;   // "d" or "r"
  std::optional<WilcoxonResult> wilcoxon;
  double alpha = kAlpha;

  bool significant() const noexcept { return p_value < alpha; }
};

TestReport select_test(const PairedSample& sample, std::string measure = {});

// ---------------------------------------------------------------------------
// Questionnaires

enum class Questionnaire { SUS, SSQ, RawTLX, Borg, IPQ, UEQS, Enjoyment };
std::string_view to_string(Questionnaire q) noexcept;
/// Accepts sus, ssq, tlx, borg, ipq, ueqs, enjoyment (case-insensitive).
Questionnaire parse_questionnaire(std::string_view text);

struct ScoringOptions {
  double tlx_min = 1.0;  // Raw-TLX item range; instrument deployments differ
  double tlx_max = 7.0;
};

/// Named sub-scores, e.g. SSQ -> nausea, oculomotor, disorientation, total.
using Scores = std::map<std::string, double>;

/// `responses` holds one value per item, 1-based item i at index i-1. Raw
/// TLX may carry several ratings per subscale; pass the per-subscale mean.
Scores score_questionnaire(Questionnaire kind, std::span<const double> responses,
                           const ScoringOptions& options = {});

struct ResponseRow {
  std::string participant;
  Condition condition = Condition::Scooter;
  Questionnaire kind = Questionnaire::SUS;
  int item_index = 1;  // 1-based
  double value = 0.0;
};

/// CSV with header `participant,condition,kind,item_index,value`.
std::vector<ResponseRow> parse_responses_csv(std::string_view text);
std::vector<ResponseRow> load_responses_csv(const std::filesystem::path& path);

/// participant -> condition -> "<kind>.<score>" -> value. Repeated rows for
/// the same item are averaged.
using ScoreTable = std::map<std::string, std::map<Condition, Scores>>;
ScoreTable score_responses(std::span<const ResponseRow> rows, const ScoringOptions& options = {});

// ---------------------------------------------------------------------------
// Trial summaries

struct Descriptives {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n - 1)
};

Descriptives describe(std::span<const double> xs);

struct TrialSummary {
  std::map<Condition, Descriptives> per_condition;  // over per-participant sums
  PairedSample completion;                          // a = scooter, b = joystick
  std::vector<std::string> participants;            // order of the pairs
  std::vector<std::string> excluded;                // missing a condition
  std::size_t participant_condition_sums = 0;
};

/// Sums completion time per participant and condition (aborted trials are
/// ignored) and pairs participants that have both conditions.
TrialSummary summarize_trials(std::span<const TrialLog> logs);

/// Reported aggregates: {"measure": ..., "conditions": {"scooter": {"n","mean","sd"}, ...}}.
std::string descriptives_to_json(const std::string& measure,
                                 const std::map<Condition, Descriptives>& stats);
std::map<Condition, Descriptives> descriptives_from_json(std::string_view document,
                                                         std::string* measure = nullptr);

struct AnalysisReport {
  TrialSummary trials;
  std::vector<TestReport> tests;
  std::vector<std::string> warnings;
};

AnalysisReport analyze(std::span<const TrialLog> logs, std::span<const ResponseRow> responses = {},
                       const ScoringOptions& options = {});

std::string report_to_json(const AnalysisReport& report);
std::string report_to_table(const AnalysisReport& report);

}  // namespace loco::analysis
