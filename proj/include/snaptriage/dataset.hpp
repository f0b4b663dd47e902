#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snaptriage/taxonomy.hpp"

namespace snaptriage {

/// One labeled snapshot failure: a reference/failure image pair, an
/// optional pre-rendered diff, and its ground truth.
struct SnapshotCase {
  std::string id;
  std::filesystem::path reference_path;
  std::filesystem::path failure_path;
  std::optional<std::filesystem::path> diff_path;
  CategorySet ground_truth;
  std::optional<Category> ignore_designation;
  std::map<std::string, std::string> metadata;
};

inline constexpr int kManifestVersion = 1;

struct DatasetManifest {
  std::string name;
  int version = kManifestVersion;
  std::vector<SnapshotCase> cases;
  /// Directory the manifest was loaded from; image paths in `cases` are
  /// already resolved against it.
  std::filesystem::path base_dir;
};

struct ManifestOptions {
  /// Verify every referenced image exists (BrokenImagePath otherwise).
  bool check_images = false;
};

/// Parses and validates a manifest.json. Errors name the offending field
/// path, e.g. `cases[2].ground_truth[0]`.
DatasetManifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});
DatasetManifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                               const ManifestOptions& options = {});

/// Serializes with image paths relative to `base_dir`.
nlohmann::json manifest_to_json(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct DatasetStats {
  std::size_t case_count = 0;
  /// Keyed by canonical category name.
  std::map<std::string, std::size_t> category_histogram;
  double pixel_diff_mean = 0.0;
  /// Population standard deviation.
  double pixel_diff_std = 0.0;
  std::size_t total_ground_truth_labels = 0;
  /// Per-case pixel difference score, in manifest order.
  std::vector<std::pair<std::string, double>> per_case_pixel_diff;
};

/// Loads every image pair and aggregates the pixel difference scores and
/// label histogram. Imaging errors are rethrown prefixed with the case id.
DatasetStats compute_stats(const DatasetManifest& manifest);

nlohmann::json stats_to_json(const DatasetStats& stats);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population standard deviation; zeros for an empty input.
MeanStd mean_and_population_std(const std::vector<double>& values);

}  // namespace snaptriage
