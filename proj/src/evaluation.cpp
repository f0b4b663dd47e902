#include "snaptriage/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <exception>
#include <mutex>
#include <thread>

namespace snaptriage {

std::string_view to_string(EvaluationMode mode) {
  switch (mode) {
    case EvaluationMode::Default: return "default";
    case EvaluationMode::Ifa: return "ifa";
    case EvaluationMode::Ifgt: return "ifgt";
  }
  return "default";
}

EvaluationMode parse_evaluation_mode(std::string_view name) {
  if (name == "default") return EvaluationMode::Default;
  if (name == "ifa") return EvaluationMode::Ifa;
  if (name == "ifgt") return EvaluationMode::Ifgt;
  throw Error(ErrorKind::InvalidConfig, "unknown evaluation mode '" + std::string(name) + "'");
}

CaseMatch match_case(const CategorySet& predicted, const CategorySet& ground_truth) {
  CaseMatch m;
  m.predicted = predicted;
  m.ground_truth = ground_truth;
  for (const Category& c : predicted) {
    // Ground truth is closed-taxonomy, so an unknown prediction never matches.
    if (!c.is_unknown() && ground_truth.contains(c)) ++m.true_positives;
    else ++m.false_positives;
  }
  for (const Category& c : ground_truth) {
    if (!predicted.contains(c)) ++m.false_negatives;
  }
  m.hit = m.true_positives >= 1;
  m.has_unknown = predicted.has_unknown();
  m.label_count = static_cast<int>(predicted.size());
  return m;
}

CaseMatch match_analysis(const SnapshotCase& snapshot, const CaseAnalysis& analysis,
                         const std::optional<Category>& ignored) {
  if (!analysis.result) {
    throw Error(ErrorKind::NoAnalyzedCases, "case '" + snapshot.id + "' has no analysis result");
  }
  const AnalysisResult& r = *analysis.result;
  CaseMatch m = match_case(r.categories, snapshot.ground_truth);
  m.case_id = snapshot.id;
  m.computed_pixel_diff = analysis.computed_pixel_diff;
  m.predicted_pixel_diff = r.pixel_difference;
  m.pixel_diff_error = analysis.pixel_diff_error;
  m.semantic_difference = r.semantic_difference;
  if (ignored) {
    m.ignored_category = ignored;
    m.complied = !r.categories.contains(*ignored);
  }
  return m;
}

namespace {

double pct(double num, double den) { return den > 0 ? 100.0 * num / den : 0.0; }

MetricsSummary summarize(std::span<const CaseMatch> matches, std::size_t failed_count) {
  if (matches.empty()) throw Error(ErrorKind::NoAnalyzedCases, "no analyzed cases to aggregate");
  MetricsSummary s;
  s.analyzed_count = matches.size();
  s.failed_count = failed_count;
  std::vector<double> labels, gt_scores, pred_scores, errors, semantic;
  for (const CaseMatch& m : matches) {
    if (!m.ground_truth.empty()) {
      ++s.scored_count;
      if (m.hit) ++s.hit_count;
    }
    s.true_positives += m.true_positives;
    s.false_positives += m.false_positives;
    s.false_negatives += m.false_negatives;
    if (m.has_unknown) ++s.unknown_count;
    labels.push_back(m.label_count);
    gt_scores.push_back(m.computed_pixel_diff);
    if (m.predicted_pixel_diff) pred_scores.push_back(*m.predicted_pixel_diff);
    if (m.pixel_diff_error) errors.push_back(*m.pixel_diff_error);
    if (m.semantic_difference) semantic.push_back(*m.semantic_difference);
  }
  const double tp = static_cast<double>(s.true_positives);
  s.hit_rate_pct = pct(static_cast<double>(s.hit_count), static_cast<double>(s.scored_count));
  s.recall_pct = pct(tp, tp + static_cast<double>(s.false_negatives));
  s.precision_pct = pct(tp, tp + static_cast<double>(s.false_positives));
  const double pr = s.precision_pct + s.recall_pct;
  s.f1_pct = pr > 0 ? 2.0 * s.precision_pct * s.recall_pct / pr : 0.0;
  s.unknown_rate_pct = pct(static_cast<double>(s.unknown_count), static_cast<double>(s.analyzed_count));

  auto set = [](const std::vector<double>& v, double& mean, double& sd) {
    const MeanStd ms = mean_and_population_std(v);
    mean = ms.mean;
    sd = ms.std;
  };
  set(labels, s.avg_labels_mean, s.avg_labels_std);
  set(gt_scores, s.pixel_gt_mean, s.pixel_gt_std);
  set(pred_scores, s.pixel_pred_mean, s.pixel_pred_std);
  set(errors, s.pixel_error_mean, s.pixel_error_std);
  set(semantic, s.semantic_mean, s.semantic_std);
  return s;
}

void require_designations(std::span<const CaseMatch> matches) {
  if (matches.empty()) throw Error(ErrorKind::NoAnalyzedCases, "no analyzed cases");
  for (const CaseMatch& m : matches) {
    if (!m.ignored_category) {
      throw Error(ErrorKind::MissingIgnoreDesignation, "case '" + m.case_id + "' has no ignored category");
    }
  }
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

MetricsSummary aggregate(std::span<const CaseMatch> matches, std::size_t failed_count) {
  return summarize(matches, failed_count);
}

double ignore_compliance(std::span<const CaseMatch> matches) {
  require_designations(matches);
  std::size_t complied = 0;
  for (const CaseMatch& m : matches) {
    if (!m.predicted.contains(*m.ignored_category)) ++complied;
  }
  return pct(static_cast<double>(complied), static_cast<double>(matches.size()));
}

MetricsSummary adjusted_metrics(std::span<const CaseMatch> matches, std::size_t failed_count) {
  require_designations(matches);
  std::vector<CaseMatch> adjusted;
  adjusted.reserve(matches.size());
  for (const CaseMatch& m : matches) {
    CategorySet predicted = m.predicted, truth = m.ground_truth;
    predicted.erase(*m.ignored_category);
    truth.erase(*m.ignored_category);
    CaseMatch a = match_case(predicted, truth);
    a.case_id = m.case_id;
    a.label_count = m.label_count;
    a.has_unknown = m.has_unknown;
    a.computed_pixel_diff = m.computed_pixel_diff;
    a.predicted_pixel_diff = m.predicted_pixel_diff;
    a.pixel_diff_error = m.pixel_diff_error;
    a.semantic_difference = m.semantic_difference;
    a.ignored_category = m.ignored_category;
    a.complied = m.complied;
    adjusted.push_back(std::move(a));
  }
  return summarize(adjusted, failed_count);
}

nlohmann::json summary_to_json(const MetricsSummary& s) {
  return {
      {"analyzed_count", s.analyzed_count},
      {"failed_count", s.failed_count},
      {"scored_count", s.scored_count},
      {"hit_count", s.hit_count},
      {"true_positives", s.true_positives},
      {"false_positives", s.false_positives},
      {"false_negatives", s.false_negatives},
      {"hit_rate_pct", s.hit_rate_pct},
      {"recall_pct", s.recall_pct},
      {"precision_pct", s.precision_pct},
      {"f1_pct", s.f1_pct},
      {"avg_labels_mean", s.avg_labels_mean},
      {"avg_labels_std", s.avg_labels_std},
      {"unknown_count", s.unknown_count},
      {"unknown_rate_pct", s.unknown_rate_pct},
      {"pixel_gt_mean", s.pixel_gt_mean},
      {"pixel_gt_std", s.pixel_gt_std},
      {"pixel_pred_mean", s.pixel_pred_mean},
      {"pixel_pred_std", s.pixel_pred_std},
      {"pixel_error_mean", s.pixel_error_mean},
      {"pixel_error_std", s.pixel_error_std},
      {"semantic_mean", s.semantic_mean},
      {"semantic_std", s.semantic_std},
      {"ignore_compliance_pct",
       s.ignore_compliance_pct ? nlohmann::json(*s.ignore_compliance_pct) : nlohmann::json(nullptr)},
  };
}

EvaluationReport evaluate_dataset(const DatasetManifest& manifest, Backend& backend,
                                  const EvaluationOptions& options) {
  const auto& cases = manifest.cases;
  std::vector<std::optional<Category>> designations(cases.size());
  if (options.mode == EvaluationMode::Ifgt) {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (cases[i].ignore_designation) {
        designations[i] = cases[i].ignore_designation;
      } else if (options.ifgt_fallback_to_first_label && !cases[i].ground_truth.empty()) {
        designations[i] = cases[i].ground_truth.front();
      } else {
        throw Error(ErrorKind::IfgtDesignationMissing,
                    "case '" + cases[i].id + "' has no ignore designation");
      }
    }
  }
  render_core_prompt(options.prompt);  // surfaces InvalidConfig before any backend call

  std::vector<CaseOutcome> outcomes(cases.size());
  auto run_one = [&](std::size_t i) {
    const SnapshotCase& c = cases[i];
    CaseOutcome& o = outcomes[i];
    o.snapshot = c;
    std::optional<Category> ignored = designations[i];
    if (options.mode == EvaluationMode::Default) {
      o.analysis = analyze_case(c, options.prompt, backend, options.analysis);
    } else if (options.mode == EvaluationMode::Ifgt) {
      o.analysis = analyze_case(c, options.prompt, backend, options.analysis, ignored->canonical_name());
    } else {
      CaseAnalysis first = analyze_case(c, options.prompt, backend, options.analysis);
      if (first.analyzed() && !first.result->categories.empty()) {
        ignored = first.result->categories.front();
        o.analysis = analyze_case(c, options.prompt, backend, options.analysis, ignored->canonical_name());
      } else {
        o.analysis.case_id = c.id;
        o.analysis.computed_pixel_diff = first.computed_pixel_diff;
        o.analysis.failure = first.failure.value_or(FailureRecord{
            ErrorKind::MissingIgnoreDesignation,
            "case '" + c.id + "': first pass predicted no category, nothing to ignore"});
      }
      o.first_pass = std::move(first);
    }
    if (o.analysis.analyzed()) o.match = match_analysis(c, o.analysis, ignored);
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr worker_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      try {
        run_one(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!worker_error) worker_error = std::current_exception();
      }
    }
  };
  const std::size_t n_workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.concurrency, 1)), 1,
                              std::max<std::size_t>(cases.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (worker_error) std::rethrow_exception(worker_error);

  std::sort(outcomes.begin(), outcomes.end(),
            [](const CaseOutcome& a, const CaseOutcome& b) { return a.snapshot.id < b.snapshot.id; });

  EvaluationReport report;
  report.mode = options.mode;
  report.dataset_name = manifest.name;
  report.model_name = options.analysis.model_name;
  report.prompt_version = options.prompt.version;
  report.backend_name = options.backend_name.empty() ? std::string(to_string(backend.kind())) : options.backend_name;
  report.timestamp = options.timestamp.empty() ? utc_now() : options.timestamp;
  report.tool_version = options.tool_version;

  std::vector<CaseMatch> matches;
  for (const CaseOutcome& o : outcomes) {
    if (o.match) matches.push_back(*o.match);
  }
  const std::size_t failed = outcomes.size() - matches.size();
  if (matches.empty()) {
    report.summary.failed_count = failed;
  } else {
    report.summary = aggregate(matches, failed);
    if (options.mode != EvaluationMode::Default) {
      const double compliance = ignore_compliance(matches);
      report.adjusted = adjusted_metrics(matches, failed);
      report.summary.ignore_compliance_pct = compliance;
      report.adjusted->ignore_compliance_pct = compliance;
    }
  }
  report.cases = std::move(outcomes);

  try {
    report.dataset_stats = compute_stats(manifest);
  } catch (const Error& e) {
    report.dataset_stats.case_count = manifest.cases.size();
    report.dataset_stats_error = e.detail();
  }
  return report;
}

}  // namespace snaptriage
