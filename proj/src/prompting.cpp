#include "snaptriage/prompting.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "prompt_resources.hpp"
#include "snaptriage/imaging.hpp"

namespace snaptriage {

namespace {

constexpr std::string_view kIgnoreLine = "IGNORE the following aspect of the differences: ";
constexpr std::string_view kIgnoreTail =
    "This difference is acceptable; focus on other differences that might exist.";

constexpr std::string_view kOutputSchema = R"({
  "categories": ["<CATEGORY>", "..."],
  "pixel_difference": <number between 0 and 1>,
  "semantic_difference": <number between 0 and 1>,
  "affected_elements": ["<ui element>", "..."],
  "explanation": "<concise explanation>"
})";

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.pop_back();
  }
  return s;
}

}  // namespace

PromptConfig default_prompt_config() {
  PromptConfig config;
  config.template_text = resources::kPromptV1;
  for (CategoryKind kind : kKnownKinds) {
    config.taxonomy_listing.emplace_back(std::string(known_name(kind)), std::string(description(kind)));
  }
  config.unknown_instruction = "UNKNOWN_<T>: " + std::string(description(CategoryKind::Unknown));
  config.output_schema_text = std::string(kOutputSchema);
  return config;
}

PromptConfig prompt_config_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  PromptConfig config = default_prompt_config();
  config.template_text = buf.str();
  config.version = "file:" + path.filename().string();
  return config;
}

void validate_prompt_config(const PromptConfig& config) {
  for (CategoryKind kind : kKnownKinds) {
    const auto n = std::count_if(config.taxonomy_listing.begin(), config.taxonomy_listing.end(),
                                 [&](const auto& entry) { return entry.first == known_name(kind); });
    if (n != 1) {
      throw Error(ErrorKind::InvalidConfig,
                  std::string(known_name(kind)) + " must appear exactly once in the taxonomy listing");
    }
  }
  if (config.unknown_instruction.find("UNKNOWN_<T>") == std::string::npos) {
    throw Error(ErrorKind::InvalidConfig, "taxonomy listing lacks the UNKNOWN_<T> instruction");
  }
}

std::string render_core_prompt(const PromptConfig& config) {
  validate_prompt_config(config);
  std::string taxonomy;
  for (const auto& [name, desc] : config.taxonomy_listing) {
    taxonomy += "- " + name + ": " + desc + "\n";
  }
  taxonomy += "- " + config.unknown_instruction;

  std::string text = rtrim(config.template_text);
  replace_all(text, "{taxonomy}", taxonomy);
  replace_all(text, "{output_schema}", config.output_schema_text);
  if (config.extra_instructions && !config.extra_instructions->empty()) {
    text += "\n" + *config.extra_instructions;
  }
  return text;
}

std::string render_ignore_prompt(std::string_view core_prompt, std::string_view ignore_reason) {
  if (ignore_reason.empty()) throw Error(ErrorKind::EmptyIgnoreReason, "ignore reason must be non-empty");
  std::string out;
  out.reserve(core_prompt.size() + ignore_reason.size() + kIgnoreLine.size() + kIgnoreTail.size() + 4);
  out.append(core_prompt).append("\n\n").append(kIgnoreLine).append(ignore_reason).append("\n").append(kIgnoreTail);
  return out;
}

std::string prompt_hash(std::string_view prompt_text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(prompt_text.data(), prompt_text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::IoError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < 8 && i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

AnalysisRequest build_request(const SnapshotCase& snapshot, std::string prompt_text, std::string model_name,
                              double temperature) {
  const RasterImage reference = load_image(snapshot.reference_path);
  const RasterImage failure = load_image(snapshot.failure_path);
  validate_pair(reference, failure);
  RasterImage diff = snapshot.diff_path ? load_image(*snapshot.diff_path)
                                        : render_diff_image(reference, failure, DiffMode::Absolute);
  validate_pair(reference, diff);

  AnalysisRequest request;
  request.case_id = snapshot.id;
  request.prompt_text = std::move(prompt_text);
  request.images = {encode_png(reference), encode_png(failure), encode_png(diff)};
  request.model_name = std::move(model_name);
  request.temperature = temperature;
  return request;
}

}  // namespace snaptriage
