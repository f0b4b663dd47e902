#include "snaptriage/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "snaptriage/imaging.hpp"

namespace snaptriage {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ManifestParseError, field + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_error(where + "." + key, "missing required field");
  return *it;
}

std::string require_string(const json& value, const std::string& field) {
  if (!value.is_string()) parse_error(field, "expected a string");
  return value.get<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& rel) {
  fs::path p(rel);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::string relative_to(const fs::path& path, const fs::path& base) {
  if (base.empty()) return path.generic_string();
  fs::path rel = path.lexically_relative(base);
  return rel.empty() ? path.generic_string() : rel.generic_string();
}

SnapshotCase parse_case(const json& entry, std::size_t index, const fs::path& base_dir,
                        const ManifestOptions& options) {
  const std::string where = "cases[" + std::to_string(index) + "]";
  if (!entry.is_object()) parse_error(where, "expected an object");

  SnapshotCase c;
  c.id = require_string(require(entry, "id", where), where + ".id");
  if (c.id.empty()) parse_error(where + ".id", "must be non-empty");
  c.reference_path =
      resolve(base_dir, require_string(require(entry, "reference", where), where + ".reference"));
  c.failure_path =
      resolve(base_dir, require_string(require(entry, "failure", where), where + ".failure"));
  if (auto it = entry.find("diff"); it != entry.end() && !it->is_null()) {
    c.diff_path = resolve(base_dir, require_string(*it, where + ".diff"));
  }

  const json& gt = require(entry, "ground_truth", where);
  if (!gt.is_array()) parse_error(where + ".ground_truth", "expected an array of strings");
  if (gt.empty()) {
    throw Error(ErrorKind::InvalidGroundTruth, where + ".ground_truth: must be non-empty");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::string field = where + ".ground_truth[" + std::to_string(i) + "]";
    Category category = [&] {
      try {
        return parse_category(require_string(gt[i], field));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::ManifestParseError) throw;
        throw Error(ErrorKind::InvalidGroundTruth, field + ": " + e.detail());
      }
    }();
    if (category.is_unknown()) {
      throw Error(ErrorKind::InvalidGroundTruth,
                  field + ": ground truth must come from the closed taxonomy, got " +
                      category.canonical_name());
    }
    c.ground_truth.insert(std::move(category));
  }

  if (auto it = entry.find("ignore"); it != entry.end() && !it->is_null()) {
    const std::string field = where + ".ignore";
    Category ignore = [&] {
      try {
        return parse_category(require_string(*it, field));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::ManifestParseError) throw;
        throw Error(ErrorKind::InvalidGroundTruth, field + ": " + e.detail());
      }
    }();
    if (!c.ground_truth.contains(ignore)) {
      throw Error(ErrorKind::InvalidGroundTruth,
                  field + ": " + ignore.canonical_name() + " is not part of ground_truth");
    }
    c.ignore_designation = std::move(ignore);
  }

  if (auto it = entry.find("metadata"); it != entry.end() && !it->is_null()) {
    if (!it->is_object()) parse_error(where + ".metadata", "expected an object of strings");
    for (const auto& [key, value] : it->items()) {
      c.metadata[key] = require_string(value, where + ".metadata." + key);
    }
  }

  if (options.check_images) {
    std::vector<std::pair<std::string, fs::path>> paths = {{"reference", c.reference_path},
                                                           {"failure", c.failure_path}};
    if (c.diff_path) paths.emplace_back("diff", *c.diff_path);
    for (const auto& [field, path] : paths) {
      std::error_code ec;
      if (!fs::is_regular_file(path, ec)) {
        throw Error(ErrorKind::BrokenImagePath,
                    where + "." + field + ": " + path.string() + " does not exist");
      }
    }
  }
  return c;
}

}  // namespace

DatasetManifest parse_manifest(const json& doc, const fs::path& base_dir,
                               const ManifestOptions& options) {
  if (!doc.is_object()) parse_error("$", "manifest must be a JSON object");
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  manifest.name = require_string(require(doc, "name", "$"), "$.name");

  const json& version = require(doc, "version", "$");
  if (!version.is_number_integer()) parse_error("$.version", "expected an integer");
  manifest.version = version.get<int>();
  if (manifest.version != kManifestVersion) {
    parse_error("$.version", "unsupported version " + std::to_string(manifest.version));
  }

  const json& cases = require(doc, "cases", "$");
  if (!cases.is_array()) parse_error("$.cases", "expected an array");
  if (cases.empty()) parse_error("$.cases", "manifest must contain at least one case");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    SnapshotCase c = parse_case(cases[i], i, base_dir, options);
    if (!seen.insert(c.id).second) {
      throw Error(ErrorKind::DuplicateCaseId,
                  "cases[" + std::to_string(i) + "].id: duplicate case id '" + c.id + "'");
    }
    manifest.cases.push_back(std::move(c));
  }
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path, const ManifestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    parse_error("$", std::string("malformed JSON: ") + e.what());
  }
  return parse_manifest(doc, path.parent_path(), options);
}

json manifest_to_json(const DatasetManifest& manifest) {
  json cases = json::array();
  for (const auto& c : manifest.cases) {
    json entry = {
        {"id", c.id},
        {"reference", relative_to(c.reference_path, manifest.base_dir)},
        {"failure", relative_to(c.failure_path, manifest.base_dir)},
        {"ground_truth", c.ground_truth.canonical_names()},
    };
    if (c.diff_path) entry["diff"] = relative_to(*c.diff_path, manifest.base_dir);
    if (c.ignore_designation) entry["ignore"] = c.ignore_designation->canonical_name();
    if (!c.metadata.empty()) entry["metadata"] = c.metadata;
    cases.push_back(std::move(entry));
  }
  return {{"name", manifest.name}, {"version", manifest.version}, {"cases", std::move(cases)}};
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << manifest_to_json(manifest).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

MeanStd mean_and_population_std(const std::vector<double>& values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

DatasetStats compute_stats(const DatasetManifest& manifest) {
  DatasetStats stats;
  stats.case_count = manifest.cases.size();
  std::vector<double> scores;
  scores.reserve(manifest.cases.size());
  for (const auto& c : manifest.cases) {
    double score = 0.0;
    try {
      score = pixel_diff_score(load_image(c.reference_path), load_image(c.failure_path));
    } catch (const Error& e) {
      throw Error(e.kind(), "case '" + c.id + "': " + e.detail());
    }
    scores.push_back(score);
    stats.per_case_pixel_diff.emplace_back(c.id, score);
    for (const auto& label : c.ground_truth) {
      ++stats.category_histogram[label.canonical_name()];
      ++stats.total_ground_truth_labels;
    }
  }
  const MeanStd ms = mean_and_population_std(scores);
  stats.pixel_diff_mean = ms.mean;
  stats.pixel_diff_std = ms.std;
  return stats;
}

json stats_to_json(const DatasetStats& stats) {
  return {
      {"case_count", stats.case_count},
      {"category_histogram", stats.category_histogram},
      {"pixel_diff_mean", stats.pixel_diff_mean},
      {"pixel_diff_std", stats.pixel_diff_std},
      {"total_ground_truth_labels", stats.total_ground_truth_labels},
  };
}

}  // namespace snaptriage
