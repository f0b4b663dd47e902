#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "snaptriage/imaging.hpp"
#include "snaptriage/prompting.hpp"

namespace snaptriage {

enum class BackendKind { Live, Replay, Heuristic };

std::string_view to_string(BackendKind kind);
/// Throws InvalidConfig for anything but live, replay or heuristic.
BackendKind parse_backend_kind(std::string_view name);

inline constexpr std::string_view kDefaultEndpoint = "http://localhost:11434/api/chat";
inline constexpr std::string_view kDefaultModel = "gemma3:4b";

struct BackendConfig {
  BackendKind kind = BackendKind::Live;
  std::string endpoint_url = std::string(kDefaultEndpoint);
  std::string model_name = std::string(kDefaultModel);
  std::chrono::milliseconds timeout{120'000};
  /// Extra attempts after a transport failure or a 5xx response.
  int max_retries = 2;
  /// Cap on concurrent HTTP requests issued by one live backend.
  int max_in_flight = 2;
  std::optional<std::string> bearer_token;
  std::filesystem::path fixture_dir;
};

/// Throws InvalidConfig when required fields for the kind are missing.
void validate_backend_config(const BackendConfig& config);

struct RawResponse {
  std::string text;
  std::chrono::milliseconds latency{0};
  BackendKind backend_kind = BackendKind::Live;
};

/// Turns an analysis request into raw model text. Implementations are safe
/// to call concurrently. Every error message names the request's case id.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual RawResponse analyze(const AnalysisRequest& request) = 0;
  virtual BackendKind kind() const = 0;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// One-shot convenience wrapper around make_backend(config)->analyze().
RawResponse analyze(const BackendConfig& config, const AnalysisRequest& request);

/// Builds the Ollama-compatible chat body (streaming disabled).
std::string build_chat_body(const AnalysisRequest& request);
/// Extracts message content from an Ollama (`message.content`) or
/// OpenAI-style (`choices[0].message.content`) chat response.
std::optional<std::string> extract_chat_content(std::string_view body);

std::string base64_encode(std::span<const std::uint8_t> data);

/// Location of the fixture for (case id, prompt hash) under `fixture_dir`.
std::filesystem::path fixture_path(const std::filesystem::path& fixture_dir, std::string_view case_id,
                                   std::string_view prompt_hash);

/// Stores `response.text` verbatim. Returns true when an existing fixture
/// was overwritten (a warning is also logged). Throws IoError.
bool record_fixture(const std::filesystem::path& fixture_dir, std::string_view case_id,
                    std::string_view prompt_hash, const RawResponse& response);

/// Wraps `inner` and stores every successful response as a fixture keyed by
/// the request's case id and prompt hash. `inner` must outlive the wrapper.
std::unique_ptr<Backend> make_recording_backend(Backend& inner, std::filesystem::path fixture_dir);

/// Deterministic image-only classifier for generator-produced cases. Returns
/// a JSON document in the analysis schema whose pixel_difference is the
/// exact pixel difference score. Throws DimensionMismatch.
std::string heuristic_classify(const RasterImage& reference, const RasterImage& failure);

}  // namespace snaptriage
