#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "snaptriage/imaging.hpp"
#include "snaptriage/taxonomy.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("snaptriage-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline int uniform(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline snaptriage::RasterImage random_image(std::mt19937_64& rng, int w, int h) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& b : px) b = static_cast<std::uint8_t>(rng() & 0xff);
  return snaptriage::RasterImage(w, h, std::move(px));
}

/// Independent reference for the normalized pixel difference: three nested
/// loops over rows, columns and channels.
inline double naive_pixel_diff(const snaptriage::RasterImage& a, const snaptriage::RasterImage& b) {
  double sum = 0.0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const snaptriage::Rgb p = a.at(x, y), q = b.at(x, y);
      const int ca[3] = {p.r, p.g, p.b}, cb[3] = {q.r, q.g, q.b};
      for (int c = 0; c < 3; ++c) sum += std::abs(ca[c] - cb[c]) / 255.0;
    }
  }
  return sum / (static_cast<double>(a.width()) * a.height() * 3);
}

inline void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline snaptriage::CategorySet cats(std::initializer_list<const char*> names) {
  snaptriage::CategorySet s;
  for (const char* n : names) s.insert(snaptriage::parse_category(n));
  return s;
}

/// Writes reference.png and failure.png for `id` under `dir`/cases and
/// returns the manifest entry.
inline nlohmann::json write_case(const fs::path& dir, const std::string& id, const snaptriage::RasterImage& ref,
                                 const snaptriage::RasterImage& fail, std::vector<std::string> gt) {
  const fs::path base = dir / "cases" / id;
  fs::create_directories(base);
  snaptriage::write_png(base / "reference.png", ref);
  snaptriage::write_png(base / "failure.png", fail);
  return {{"id", id},
          {"reference", "cases/" + id + "/reference.png"},
          {"failure", "cases/" + id + "/failure.png"},
          {"ground_truth", gt}};
}

}  // namespace testsupport
