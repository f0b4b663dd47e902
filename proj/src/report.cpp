#include <cstdio>
#include <sstream>

#include "snaptriage/evaluation.hpp"

namespace snaptriage {

using nlohmann::json;

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "junit") return ReportFormat::Junit;
  throw Error(ErrorKind::InvalidConfig, "unknown report format '" + std::string(name) + "'");
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json case_to_json(const CaseOutcome& o) {
  json j = {
      {"case_id", o.snapshot.id},
      {"ground_truth", o.snapshot.ground_truth.canonical_names()},
      {"status", o.match ? "analyzed" : "failed"},
      {"analysis", case_analysis_to_json(o.analysis)},
      {"first_pass", o.first_pass ? case_analysis_to_json(*o.first_pass) : json(nullptr)},
      {"match", nullptr},
  };
  if (o.match) {
    const CaseMatch& m = *o.match;
    j["match"] = {
        {"predicted", m.predicted.canonical_names()},
        {"true_positives", m.true_positives},
        {"false_positives", m.false_positives},
        {"false_negatives", m.false_negatives},
        {"hit", m.hit},
        {"has_unknown", m.has_unknown},
        {"label_count", m.label_count},
        {"computed_pixel_diff", m.computed_pixel_diff},
        {"predicted_pixel_diff", optional_number(m.predicted_pixel_diff)},
        {"pixel_diff_error", optional_number(m.pixel_diff_error)},
        {"semantic_difference", optional_number(m.semantic_difference)},
        {"ignored_category", m.ignored_category ? json(m.ignored_category->canonical_name()) : json(nullptr)},
        {"complied", m.complied ? json(*m.complied) : json(nullptr)},
    };
  }
  return j;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pm(double mean, double sd, int digits) { return fixed(mean, digits) + " ± " + fixed(sd, digits); }

std::string md_cell(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out.push_back(c);
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> metric_rows(const MetricsSummary& s) {
  return {
      {"Hit Rate (%)", fixed(s.hit_rate_pct, 2)},
      {"Recall (%)", fixed(s.recall_pct, 2)},
      {"Precision (%)", fixed(s.precision_pct, 2)},
      {"F1-Score (%)", fixed(s.f1_pct, 2)},
      {"Avg. # label/test", pm(s.avg_labels_mean, s.avg_labels_std, 2)},
      {"Unknown Rate (%)", fixed(s.unknown_rate_pct, 2)},
      {"IC Rate (%)", s.ignore_compliance_pct ? fixed(*s.ignore_compliance_pct, 2) : "n/a"},
      {"Predicted", pm(s.pixel_pred_mean, s.pixel_pred_std, 3)},
      {"Error", pm(s.pixel_error_mean, s.pixel_error_std, 3)},
      {"Semantic Diff.", pm(s.semantic_mean, s.semantic_std, 3)},
      {"Analyzed cases", std::to_string(s.analyzed_count)},
      {"Failed cases", std::to_string(s.failed_count)},
  };
}

std::string render_markdown(const EvaluationReport& r) {
  std::ostringstream out;
  out << "# Snapshot triage report: " << md_cell(r.dataset_name) << "\n\n";
  out << "- Mode: " << to_string(r.mode) << "\n";
  out << "- Model: " << md_cell(r.model_name) << "\n";
  out << "- Backend: " << r.backend_name << "\n";
  out << "- Prompt: " << md_cell(r.prompt_version) << "\n";
  out << "- Timestamp: " << r.timestamp << "\n";
  out << "- Tool version: " << r.tool_version << "\n";
  out << "- Ground truth pixel difference: "
      << pm(r.dataset_stats.pixel_diff_mean, r.dataset_stats.pixel_diff_std, 3) << "\n\n";

  const auto raw = metric_rows(r.summary);
  if (r.adjusted) {
    const auto adj = metric_rows(*r.adjusted);
    out << "| Metric | Raw | Adjusted |\n|---|---|---|\n";
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out << "| " << raw[i].first << " | " << raw[i].second << " | " << adj[i].second << " |\n";
    }
  } else {
    out << "| Metric | Value |\n|---|---|\n";
    for (const auto& [name, value] : raw) out << "| " << name << " | " << value << " |\n";
  }

  out << "\n## Cases\n\n| Case | Ground truth | Predicted | Hit | Pixel diff | Status |\n|---|---|---|---|---|---|\n";
  for (const CaseOutcome& o : r.cases) {
    out << "| " << md_cell(o.snapshot.id) << " | " << join(o.snapshot.ground_truth.canonical_names(), ", ") << " | ";
    if (o.match) {
      out << join(o.match->predicted.canonical_names(), ", ") << " | " << (o.match->hit ? "yes" : "no") << " | "
          << fixed(o.match->computed_pixel_diff, 6) << " | analyzed |\n";
    } else {
      const std::string why = o.analysis.failure ? std::string(to_string(o.analysis.failure->kind)) : "failed";
      out << " |  | " << fixed(o.analysis.computed_pixel_diff, 6) << " | " << why << " |\n";
    }
  }
  return out.str();
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string render_junit(const EvaluationReport& r, const JunitOptions& opts) {
  struct Entry {
    std::string name, body;
    bool failure = false, error = false;
  };
  std::vector<Entry> entries;
  std::size_t failures = 0, errors = 0;
  for (const CaseOutcome& o : r.cases) {
    Entry e{o.snapshot.id, {}};
    if (!o.match) {
      e.error = true;
      const std::string kind = o.analysis.failure ? std::string(to_string(o.analysis.failure->kind)) : "Unanalyzed";
      const std::string msg = o.analysis.failure ? o.analysis.failure->message : "case was not analyzed";
      e.body = "<error type=\"" + xml_escape(kind) + "\" message=\"" + xml_escape(msg) + "\"/>";
      ++errors;
    } else {
      std::vector<std::string> blocked;
      for (const Category& c : o.match->predicted) {
        if (!opts.allowed.contains(c)) blocked.push_back(c.canonical_name());
      }
      if (!blocked.empty()) {
        e.failure = true;
        const std::string explanation = o.analysis.result ? o.analysis.result->explanation : "";
        e.body = "<failure type=\"RegressionCategory\" message=\"" + xml_escape(join(blocked, ", ")) + "\">" +
                 xml_escape(explanation) + "</failure>";
        ++failures;
      }
    }
    entries.push_back(std::move(e));
  }
  const std::string suite = xml_escape(r.dataset_name.empty() ? "snaptriage" : r.dataset_name);
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<testsuites name=\"snaptriage\" tests=\"" << entries.size() << "\" failures=\"" << failures
      << "\" errors=\"" << errors << "\">\n";
  out << "  <testsuite name=\"" << suite << "\" tests=\"" << entries.size() << "\" failures=\"" << failures
      << "\" errors=\"" << errors << "\" timestamp=\"" << xml_escape(r.timestamp) << "\">\n";
  for (const Entry& e : entries) {
    out << "    <testcase classname=\"snaptriage." << suite << "\" name=\"" << xml_escape(e.name) << "\"";
    if (e.body.empty()) {
      out << "/>\n";
    } else {
      out << ">\n      " << e.body << "\n    </testcase>\n";
    }
  }
  out << "  </testsuite>\n</testsuites>\n";
  return out.str();
}

}  // namespace

json report_to_json(const EvaluationReport& r) {
  json cases = json::array();
  for (const CaseOutcome& o : r.cases) cases.push_back(case_to_json(o));
  return {
      {"report_version", kReportVersion},
      {"tool_version", r.tool_version},
      {"timestamp", r.timestamp},
      {"mode", std::string(to_string(r.mode))},
      {"dataset", r.dataset_name},
      {"model_name", r.model_name},
      {"prompt_version", r.prompt_version},
      {"backend", r.backend_name},
      {"summary", summary_to_json(r.summary)},
      {"adjusted_summary", r.adjusted ? summary_to_json(*r.adjusted) : json(nullptr)},
      {"dataset_stats", stats_to_json(r.dataset_stats)},
      {"dataset_stats_error", r.dataset_stats_error ? json(*r.dataset_stats_error) : json(nullptr)},
      {"cases", std::move(cases)},
  };
}

std::string render_report(const EvaluationReport& report, ReportFormat format, const JunitOptions& junit) {
  switch (format) {
    case ReportFormat::Json: return report_to_json(report).dump(2) + "\n";
    case ReportFormat::Markdown: return render_markdown(report);
    case ReportFormat::Junit: return render_junit(report, junit);
  }
  return {};
}

}  // namespace snaptriage
