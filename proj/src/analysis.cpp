#include "snaptriage/analysis.hpp"

#include <algorithm>

#include "snaptriage/imaging.hpp"

namespace snaptriage {

using nlohmann::json;

namespace {

/// Index one past the '}' closing the object opened at `start`, or npos.
std::size_t balanced_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

std::optional<std::string_view> first_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
    const std::size_t end = balanced_end(text, start);
    if (end != std::string_view::npos) return text.substr(start, end - start);
  }
  return std::nullopt;
}

std::vector<std::string_view> fenced_blocks(std::string_view raw) {
  std::vector<std::string_view> blocks;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t open = raw.find("```", pos);
    if (open == std::string_view::npos) break;
    std::size_t body = raw.find('\n', open + 3);
    if (body == std::string_view::npos) break;
    ++body;
    const std::size_t close = raw.find("```", body);
    if (close == std::string_view::npos) break;
    blocks.push_back(raw.substr(body, close - body));
    pos = close + 3;
  }
  return blocks;
}

std::optional<double> read_score(const json& doc, const char* field, std::vector<std::string>& warnings) {
  auto it = doc.find(field);
  if (it == doc.end() || it->is_null()) {
    warnings.push_back(std::string(field) + " missing");
    return std::nullopt;
  }
  if (!it->is_number()) throw SchemaError(field, "expected a number");
  const double value = it->get<double>();
  if (value < 0.0 || value > 1.0) {
    const double clamped = std::clamp(value, 0.0, 1.0);
    warnings.push_back(std::string(field) + " " + json(value).dump() + " clamped to " + json(clamped).dump());
    return clamped;
  }
  return value;
}

}  // namespace

std::string extract_json(std::string_view raw) {
  for (std::string_view block : fenced_blocks(raw)) {
    if (auto obj = first_object(block)) return std::string(*obj);
  }
  if (auto obj = first_object(raw)) return std::string(*obj);
  throw Error(ErrorKind::NoJsonFound, "no balanced JSON object in model output");
}

AnalysisResult parse_analysis(std::string_view raw) {
  const std::string text = extract_json(raw);
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw SchemaError("$", "extracted object is not valid JSON");

  AnalysisResult result;
  auto cats = doc.find("categories");
  if (cats == doc.end()) throw SchemaError("categories", "missing required field");
  if (!cats->is_array()) throw SchemaError("categories", "expected an array of strings");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < cats->size(); ++i) {
    if (!(*cats)[i].is_string()) throw SchemaError("categories[" + std::to_string(i) + "]", "expected a string");
    names.push_back((*cats)[i].get<std::string>());
  }
  result.categories = parse_category_set(names);

  auto expl = doc.find("explanation");
  if (expl == doc.end()) throw SchemaError("explanation", "missing required field");
  if (!expl->is_string() || expl->get<std::string>().empty()) {
    throw SchemaError("explanation", "expected a non-empty string");
  }
  result.explanation = expl->get<std::string>();

  result.pixel_difference = read_score(doc, "pixel_difference", result.parse_warnings);
  result.semantic_difference = read_score(doc, "semantic_difference", result.parse_warnings);

  auto elems = doc.find("affected_elements");
  if (elems == doc.end() || elems->is_null()) {
    result.parse_warnings.emplace_back("affected_elements missing");
  } else if (!elems->is_array()) {
    throw SchemaError("affected_elements", "expected an array of strings");
  } else {
    for (std::size_t i = 0; i < elems->size(); ++i) {
      const json& e = (*elems)[i];
      if (!e.is_string()) throw SchemaError("affected_elements[" + std::to_string(i) + "]", "expected a string");
      if (e.get<std::string>().empty()) {
        result.parse_warnings.push_back("affected_elements[" + std::to_string(i) + "] empty, dropped");
        continue;
      }
      result.affected_elements.push_back(e.get<std::string>());
    }
  }

  if (result.categories.empty() && result.pixel_difference.value_or(0.0) > 0.0) {
    result.parse_warnings.emplace_back("no categories although a non-zero pixel difference was reported");
  }
  return result;
}

json analysis_to_json(const AnalysisResult& result) {
  return {
      {"categories", result.categories.canonical_names()},
      {"pixel_difference", result.pixel_difference ? json(*result.pixel_difference) : json(nullptr)},
      {"semantic_difference", result.semantic_difference ? json(*result.semantic_difference) : json(nullptr)},
      {"affected_elements", result.affected_elements},
      {"explanation", result.explanation},
      {"parse_warnings", result.parse_warnings},
  };
}

CaseAnalysis analyze_case(const SnapshotCase& snapshot, const PromptConfig& config, Backend& backend,
                          const AnalysisOptions& options, const std::optional<std::string>& ignore_reason) {
  CaseAnalysis out;
  out.case_id = snapshot.id;
  out.ignore_reason = ignore_reason;
  const std::string prefix = "case '" + snapshot.id + "': ";
  auto fail = [&](const Error& e) {
    const bool named = e.detail().rfind(prefix, 0) == 0;
    out.failure = FailureRecord{e.kind(), named ? e.detail() : prefix + e.detail()};
    return out;
  };

  AnalysisRequest request;
  try {
    out.computed_pixel_diff =
        pixel_diff_score(load_image(snapshot.reference_path), load_image(snapshot.failure_path));
    const std::string core = render_core_prompt(config);
    std::string prompt = ignore_reason ? render_ignore_prompt(core, *ignore_reason) : core;
    out.prompt_hash = prompt_hash(prompt);
    request = build_request(snapshot, std::move(prompt), options.model_name, options.temperature);
  } catch (const Error& e) {
    return fail(e);
  }

  std::optional<Error> last;
  for (int attempt = 1; attempt <= std::max(options.max_attempts, 1); ++attempt) {
    out.attempts = attempt;
    try {
      out.raw_text = backend.analyze(request).text;
    } catch (const Error& e) {
      // The backend already applied its own transport retries.
      return fail(e);
    }
    try {
      out.result = parse_analysis(out.raw_text);
    } catch (const Error& e) {
      last.emplace(e);
      continue;
    }
    if (out.result->pixel_difference) {
      out.pixel_diff_error = std::abs(*out.result->pixel_difference - out.computed_pixel_diff);
    }
    return out;
  }
  return fail(*last);
}

CaseAnalysis analyze_case(const SnapshotCase& snapshot, const PromptConfig& config, const BackendConfig& backend,
                          const AnalysisOptions& options, const std::optional<std::string>& ignore_reason) {
  std::unique_ptr<Backend> impl;
  try {
    impl = make_backend(backend);
  } catch (const Error& e) {
    CaseAnalysis out;
    out.case_id = snapshot.id;
    out.ignore_reason = ignore_reason;
    out.failure = FailureRecord{e.kind(), "case '" + snapshot.id + "': " + e.detail()};
    return out;
  }
  return analyze_case(snapshot, config, *impl, options, ignore_reason);
}

json case_analysis_to_json(const CaseAnalysis& a) {
  json j = {
      {"case_id", a.case_id},
      {"status", a.analyzed() ? "analyzed" : "failed"},
      {"attempts", a.attempts},
      {"computed_pixel_diff", a.computed_pixel_diff},
      {"pixel_diff_error", a.pixel_diff_error ? json(*a.pixel_diff_error) : json(nullptr)},
      {"prompt_hash", a.prompt_hash},
      {"ignore_reason", a.ignore_reason ? json(*a.ignore_reason) : json(nullptr)},
      {"result", a.result ? analysis_to_json(*a.result) : json(nullptr)},
  };
  if (a.failure) {
    j["error"] = {{"kind", std::string(to_string(a.failure->kind))}, {"message", a.failure->message}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

}  // namespace snaptriage
