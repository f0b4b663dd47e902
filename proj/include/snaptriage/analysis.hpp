#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "snaptriage/backend.hpp"
#include "snaptriage/dataset.hpp"
#include "snaptriage/prompting.hpp"
#include "snaptriage/taxonomy.hpp"

namespace snaptriage {

/// Validated model output. Scores are clamped to [0, 1]; a missing score is
/// recorded as absent with a warning.
struct AnalysisResult {
  CategorySet categories;
  std::optional<double> pixel_difference;
  std::optional<double> semantic_difference;
  std::vector<std::string> affected_elements;
  std::string explanation;
  std::vector<std::string> parse_warnings;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& what)
      : Error(ErrorKind::SchemaError, field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// First balanced top-level JSON object in `raw`, looking inside Markdown
/// code fences first. Brace matching ignores braces inside string literals.
/// Throws NoJsonFound.
std::string extract_json(std::string_view raw);

/// Throws NoJsonFound, SchemaError or InvalidCategory.
AnalysisResult parse_analysis(std::string_view raw);

nlohmann::json analysis_to_json(const AnalysisResult& result);

struct FailureRecord {
  ErrorKind kind;
  std::string message;
};

/// Outcome of analyzing one case. Exactly one of `result` and `failure` is
/// set once analyze_case returns.
struct CaseAnalysis {
  std::string case_id;
  std::optional<AnalysisResult> result;
  std::optional<FailureRecord> failure;
  /// Pixel difference score of the case images, independent of the model.
  double computed_pixel_diff = 0.0;
  /// |result.pixel_difference - computed_pixel_diff| when the model gave one.
  std::optional<double> pixel_diff_error;
  int attempts = 0;
  std::string prompt_hash;
  std::optional<std::string> ignore_reason;
  std::string raw_text;

  bool analyzed() const noexcept { return result.has_value(); }
};

struct AnalysisOptions {
  std::string model_name = std::string(kDefaultModel);
  double temperature = kDefaultTemperature;
  /// Total backend calls allowed when the response does not parse.
  int max_attempts = 3;
};

/// Renders the prompt (ignore-extended when `ignore_reason` is set), calls
/// the backend and parses the reply, re-asking with the same prompt on parse
/// failures. Never throws: failures end up in CaseAnalysis::failure.
CaseAnalysis analyze_case(const SnapshotCase& snapshot, const PromptConfig& config, Backend& backend,
                          const AnalysisOptions& options = {},
                          const std::optional<std::string>& ignore_reason = std::nullopt);
CaseAnalysis analyze_case(const SnapshotCase& snapshot, const PromptConfig& config,
                          const BackendConfig& backend, const AnalysisOptions& options = {},
                          const std::optional<std::string>& ignore_reason = std::nullopt);

nlohmann::json case_analysis_to_json(const CaseAnalysis& analysis);

}  // namespace snaptriage
