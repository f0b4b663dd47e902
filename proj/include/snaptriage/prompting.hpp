#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "snaptriage/dataset.hpp"

namespace snaptriage {

inline constexpr double kDefaultTemperature = 0.1;
inline constexpr std::string_view kDefaultPromptVersion = "prompt_v1";

/// Everything the core prompt is rendered from. The template carries two
/// placeholders, `{taxonomy}` and `{output_schema}`.
struct PromptConfig {
  std::string version = std::string(kDefaultPromptVersion);
  std::string template_text;
  /// (canonical name, description) in listing order.
  std::vector<std::pair<std::string, std::string>> taxonomy_listing;
  std::string unknown_instruction;
  std::string output_schema_text;
  std::optional<std::string> extra_instructions;
};

/// The shipped prompt_v1 template with the full taxonomy and JSON contract.
PromptConfig default_prompt_config();

/// Replaces the template with a file's contents. Throws FileNotFound.
PromptConfig prompt_config_from_file(const std::filesystem::path& path);

/// Throws InvalidConfig unless every known category is listed exactly once
/// and the unknown escape hatch is described.
void validate_prompt_config(const PromptConfig& config);

std::string render_core_prompt(const PromptConfig& config);

/// Appends the ignore instruction to a core prompt. Rendering from an
/// already-extended prompt nests the instruction. Throws EmptyIgnoreReason.
std::string render_ignore_prompt(std::string_view core_prompt, std::string_view ignore_reason);

/// Stable fixture key for a prompt: first 16 hex digits of its SHA-256.
std::string prompt_hash(std::string_view prompt_text);

struct AnalysisRequest {
  std::string case_id;
  std::string prompt_text;
  /// PNG bytes in fixed order: reference, failure, diff.
  std::array<std::vector<std::uint8_t>, 3> images;
  std::string model_name;
  double temperature = kDefaultTemperature;
  int max_retries = 2;
  std::chrono::milliseconds timeout{120'000};
};

/// Loads the case images and encodes them as 8-bit RGB PNG. Without a diff
/// path an absolute diff is rendered. Propagates imaging errors.
AnalysisRequest build_request(const SnapshotCase& snapshot, std::string prompt_text,
                              std::string model_name, double temperature = kDefaultTemperature);

}  // namespace snaptriage
