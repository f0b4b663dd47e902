#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "snaptriage/analysis.hpp"
#include "snaptriage/dataset.hpp"
#include "snaptriage/taxonomy.hpp"

namespace snaptriage {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kReportVersion = 1;

enum class EvaluationMode { Default, Ifa, Ifgt };

std::string_view to_string(EvaluationMode mode);
/// Accepts default, ifa and ifgt. Throws InvalidConfig.
EvaluationMode parse_evaluation_mode(std::string_view name);

/// Per-case scoring record. Sets are compared by canonical name; unknown
/// predictions never match ground truth.
struct CaseMatch {
  std::string case_id;
  CategorySet predicted;
  CategorySet ground_truth;
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  bool hit = false;
  bool has_unknown = false;
  /// Predicted set size before any ignore adjustment.
  int label_count = 0;
  double computed_pixel_diff = 0.0;
  std::optional<double> predicted_pixel_diff;
  std::optional<double> pixel_diff_error;
  std::optional<double> semantic_difference;
  std::optional<Category> ignored_category;
  std::optional<bool> complied;
};

/// Set arithmetic only; the remaining fields keep their defaults.
CaseMatch match_case(const CategorySet& predicted, const CategorySet& ground_truth);

/// Scores an analyzed case against its ground truth. `analysis` must carry a
/// result. Fills `complied` when an ignored category is given.
CaseMatch match_analysis(const SnapshotCase& snapshot, const CaseAnalysis& analysis,
                         const std::optional<Category>& ignored = std::nullopt);

struct MetricsSummary {
  std::size_t analyzed_count = 0;
  std::size_t failed_count = 0;
  /// Cases counted in the hit rate denominator. Differs from analyzed_count
  /// only for adjusted metrics, where an emptied ground truth is skipped.
  std::size_t scored_count = 0;
  std::size_t hit_count = 0;
  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  double hit_rate_pct = 0.0;
  double recall_pct = 0.0;
  double precision_pct = 0.0;
  double f1_pct = 0.0;
  double avg_labels_mean = 0.0;
  double avg_labels_std = 0.0;
  std::size_t unknown_count = 0;
  double unknown_rate_pct = 0.0;
  double pixel_gt_mean = 0.0;
  double pixel_gt_std = 0.0;
  double pixel_pred_mean = 0.0;
  double pixel_pred_std = 0.0;
  double pixel_error_mean = 0.0;
  double pixel_error_std = 0.0;
  double semantic_mean = 0.0;
  double semantic_std = 0.0;
  std::optional<double> ignore_compliance_pct;

  bool operator==(const MetricsSummary&) const = default;
};

/// Micro-averaged metrics over analyzed cases. Pixel and semantic aggregates
/// skip cases where the model gave no score. Throws NoAnalyzedCases.
MetricsSummary aggregate(std::span<const CaseMatch> matches, std::size_t failed_count = 0);

/// Percentage of cases whose prediction avoided the ignored category.
/// Throws MissingIgnoreDesignation (or NoAnalyzedCases for an empty input).
double ignore_compliance(std::span<const CaseMatch> matches);

/// Drops each case's ignored category from both sets and re-aggregates.
/// Label counts and unknown rate still describe the unadjusted predictions.
/// Throws MissingIgnoreDesignation or NoAnalyzedCases.
MetricsSummary adjusted_metrics(std::span<const CaseMatch> matches, std::size_t failed_count = 0);

nlohmann::json summary_to_json(const MetricsSummary& summary);

struct EvaluationOptions {
  EvaluationMode mode = EvaluationMode::Default;
  PromptConfig prompt = default_prompt_config();
  AnalysisOptions analysis;
  /// Worker threads issuing backend calls.
  int concurrency = 2;
  /// IFGT: use the first ground truth label when a case has no explicit
  /// ignore designation instead of failing.
  bool ifgt_fallback_to_first_label = false;
  /// ISO-8601 timestamp for the report; empty means the current UTC time.
  std::string timestamp;
  std::string tool_version = std::string(kToolVersion);
  std::string backend_name;
};

struct CaseOutcome {
  SnapshotCase snapshot;
  /// The scored analysis (the second pass in IFA mode).
  CaseAnalysis analysis;
  std::optional<CaseAnalysis> first_pass;
  std::optional<CaseMatch> match;
};

struct EvaluationReport {
  EvaluationMode mode = EvaluationMode::Default;
  std::string dataset_name;
  std::string model_name;
  std::string prompt_version;
  std::string backend_name;
  std::string timestamp;
  std::string tool_version;
  /// Ordered by case id.
  std::vector<CaseOutcome> cases;
  MetricsSummary summary;
  /// Set for the ignore modes.
  std::optional<MetricsSummary> adjusted;
  DatasetStats dataset_stats;
  std::optional<std::string> dataset_stats_error;
};

/// Runs every case through the backend according to `options.mode`.
/// Per-case failures are recorded in the report; when nothing could be
/// scored the summary has analyzed_count 0. Throws IfgtDesignationMissing
/// before any backend call when an IFGT case has no ignore designation.
EvaluationReport evaluate_dataset(const DatasetManifest& manifest, Backend& backend,
                                  const EvaluationOptions& options = {});

enum class ReportFormat { Json, Markdown, Junit };

/// Throws InvalidConfig for anything but json, markdown (md) or junit.
ReportFormat parse_report_format(std::string_view name);

struct JunitOptions {
  /// Predicted categories that do not fail a test case.
  CategorySet allowed;
};

nlohmann::json report_to_json(const EvaluationReport& report);
std::string render_report(const EvaluationReport& report, ReportFormat format, const JunitOptions& junit = {});

}  // namespace snaptriage
