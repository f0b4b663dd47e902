#include "snaptriage/backend.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <regex>
#include <semaphore>

#include <nlohmann/json.hpp>

namespace snaptriage {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Live: return "live";
    case BackendKind::Replay: return "replay";
    case BackendKind::Heuristic: return "heuristic";
  }
  return "live";
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "live") return BackendKind::Live;
  if (name == "replay") return BackendKind::Replay;
  if (name == "heuristic") return BackendKind::Heuristic;
  throw Error(ErrorKind::InvalidConfig, "unknown backend '" + std::string(name) + "'");
}

void validate_backend_config(const BackendConfig& config) {
  switch (config.kind) {
    case BackendKind::Live:
      if (config.endpoint_url.empty()) throw Error(ErrorKind::InvalidConfig, "live backend needs an endpoint URL");
      if (config.model_name.empty()) throw Error(ErrorKind::InvalidConfig, "live backend needs a model name");
      if (config.max_retries < 0) throw Error(ErrorKind::InvalidConfig, "max_retries must be >= 0");
      if (config.max_in_flight < 1) throw Error(ErrorKind::InvalidConfig, "max_in_flight must be >= 1");
      break;
    case BackendKind::Replay:
      if (config.fixture_dir.empty()) throw Error(ErrorKind::InvalidConfig, "replay backend needs a fixture directory");
      break;
    case BackendKind::Heuristic:
      break;
  }
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string build_chat_body(const AnalysisRequest& request) {
  json images = json::array();
  for (const auto& png : request.images) images.push_back(base64_encode(png));
  json body = {
      {"model", request.model_name},
      {"stream", false},
      {"options", {{"temperature", request.temperature}}},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt_text}, {"images", images}}})},
  };
  return body.dump();
}

std::optional<std::string> extract_chat_content(std::string_view body) {
  const json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  const json* message = nullptr;
  if (auto it = doc.find("message"); it != doc.end() && it->is_object()) {
    message = &*it;
  } else if (auto ch = doc.find("choices"); ch != doc.end() && ch->is_array() && !ch->empty()) {
    if (auto m = (*ch)[0].find("message"); m != (*ch)[0].end() && m->is_object()) message = &*m;
  }
  if (message == nullptr) return std::nullopt;
  auto content = message->find("content");
  if (content == message->end() || !content->is_string()) return std::nullopt;
  return content->get<std::string>();
}

namespace {

std::string for_case(std::string_view case_id, const std::string& what) {
  return "case '" + std::string(case_id) + "': " + what;
}

std::chrono::milliseconds since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
}

std::string sanitize_component(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw Error(ErrorKind::InvalidConfig, "malformed endpoint URL '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

class LiveBackend final : public Backend {
 public:
  explicit LiveBackend(BackendConfig config)
      : config_(std::move(config)),
        endpoint_(parse_endpoint(config_.endpoint_url)),
        in_flight_(std::min(config_.max_in_flight, 64)) {}

  BackendKind kind() const override { return BackendKind::Live; }

  RawResponse analyze(const AnalysisRequest& request) override {
    const std::string body = build_chat_body(request);
    httplib::Headers headers;
    if (config_.bearer_token) headers.emplace("Authorization", "Bearer " + *config_.bearer_token);

    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<64>& s;
      ~Release() { s.release(); }
    } release{in_flight_};

    const auto start = Clock::now();
    std::optional<Error> last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      httplib::Client client(endpoint_.origin);
      client.set_connection_timeout(config_.timeout);
      client.set_read_timeout(config_.timeout);
      client.set_write_timeout(config_.timeout);

      const auto attempt_start = Clock::now();
      auto res = client.Post(endpoint_.path, headers, body, "application/json");
      if (!res) {
        const auto err = res.error();
        const bool timed_out = err == httplib::Error::ConnectionTimeout || since(attempt_start) >= config_.timeout;
        last_error.emplace(timed_out ? ErrorKind::Timeout : ErrorKind::TransportError,
                           for_case(request.case_id, httplib::to_string(err) + " (" + endpoint_.origin + ")"));
        continue;
      }
      if (res->status >= 200 && res->status < 300) {
        auto content = extract_chat_content(res->body);
        if (!content || content->empty()) {
          throw Error(ErrorKind::TransportError,
                      for_case(request.case_id, "chat response carries no message content"));
        }
        return {std::move(*content), since(start), BackendKind::Live};
      }
      Error status_error(ErrorKind::HttpStatusError,
                         for_case(request.case_id, "HTTP " + std::to_string(res->status) + ": " +
                                                       res->body.substr(0, 200)));
      if (res->status < 500) throw status_error;
      last_error.emplace(std::move(status_error));
    }
    throw *last_error;
  }

 private:
  BackendConfig config_;
  Endpoint endpoint_;
  std::counting_semaphore<64> in_flight_;
};

class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(fs::path dir) : dir_(std::move(dir)) {}

  BackendKind kind() const override { return BackendKind::Replay; }

  RawResponse analyze(const AnalysisRequest& request) override {
    const std::string hash = prompt_hash(request.prompt_text);
    const fs::path path = fixture_path(dir_, request.case_id, hash);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(ErrorKind::FixtureMissing,
                  for_case(request.case_id, "no fixture for prompt " + hash + " at " + path.string()));
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return {std::move(text), std::chrono::milliseconds{0}, BackendKind::Replay};
  }

 private:
  fs::path dir_;
};

class HeuristicBackend final : public Backend {
 public:
  BackendKind kind() const override { return BackendKind::Heuristic; }

  RawResponse analyze(const AnalysisRequest& request) override {
    const auto start = Clock::now();
    try {
      std::string text = heuristic_classify(decode_png(request.images[0]), decode_png(request.images[1]));
      return {std::move(text), since(start), BackendKind::Heuristic};
    } catch (const Error& e) {
      throw Error(e.kind(), for_case(request.case_id, e.detail()));
    }
  }
};

class RecordingBackend final : public Backend {
 public:
  RecordingBackend(Backend& inner, fs::path dir) : inner_(inner), dir_(std::move(dir)) {}

  BackendKind kind() const override { return inner_.kind(); }

  RawResponse analyze(const AnalysisRequest& request) override {
    RawResponse response = inner_.analyze(request);
    std::lock_guard lock(mutex_);
    record_fixture(dir_, request.case_id, prompt_hash(request.prompt_text), response);
    return response;
  }

 private:
  Backend& inner_;
  fs::path dir_;
  std::mutex mutex_;
};

}  // namespace

std::unique_ptr<Backend> make_recording_backend(Backend& inner, fs::path fixture_dir) {
  return std::make_unique<RecordingBackend>(inner, std::move(fixture_dir));
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  validate_backend_config(config);
  switch (config.kind) {
    case BackendKind::Live: return std::make_unique<LiveBackend>(config);
    case BackendKind::Replay: return std::make_unique<ReplayBackend>(config.fixture_dir);
    case BackendKind::Heuristic: return std::make_unique<HeuristicBackend>();
  }
  throw Error(ErrorKind::InvalidConfig, "unknown backend kind");
}

RawResponse analyze(const BackendConfig& config, const AnalysisRequest& request) {
  return make_backend(config)->analyze(request);
}

fs::path fixture_path(const fs::path& fixture_dir, std::string_view case_id, std::string_view prompt_hash) {
  return fixture_dir / sanitize_component(case_id) / (sanitize_component(prompt_hash) + ".txt");
}

bool record_fixture(const fs::path& fixture_dir, std::string_view case_id, std::string_view prompt_hash,
                    const RawResponse& response) {
  const fs::path path = fixture_path(fixture_dir, case_id, prompt_hash);
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  const bool existed = fs::exists(path, ec);
  if (existed) {
    std::cerr << "warning: overwriting fixture " << path.string() << '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(response.text.data(), static_cast<std::streamsize>(response.text.size()));
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
  return existed;
}

}  // namespace snaptriage
