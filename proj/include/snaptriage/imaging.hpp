#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "snaptriage/error.hpp"

namespace snaptriage {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Axis-aligned pixel rectangle, half-open on the right and bottom edges.
struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  int right() const noexcept { return x + width; }
  int bottom() const noexcept { return y + height; }
  long long area() const noexcept { return static_cast<long long>(width) * height; }
  bool contains(int px, int py) const noexcept {
    return px >= x && px < right() && py >= y && py < bottom();
  }
  bool intersects(const Rect& o) const noexcept {
    return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// 8-bit RGB raster, row-major, three bytes per pixel.
class RasterImage {
 public:
  /// Throws DecodeError for non-positive dimensions.
  RasterImage(int width, int height, Rgb fill = {});
  /// Takes ownership of packed RGB bytes; size must equal width*height*3.
  RasterImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Rect bounds() const noexcept { return {0, 0, width_, height_}; }

  Rgb at(int x, int y) const noexcept {
    const std::uint8_t* p = pixels_.data() + offset(x, y);
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    std::uint8_t* p = pixels_.data() + offset(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  void fill(const Rect& rect, Rgb c);

  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

class DimensionMismatchError : public Error {
 public:
  DimensionMismatchError(int ref_w, int ref_h, int fail_w, int fail_h);

  int reference_width, reference_height;
  int failure_width, failure_height;
};

/// Decodes a PNG file to RGB. Alpha is composited over opaque white and
/// grayscale is expanded. Throws FileNotFound or DecodeError.
RasterImage load_image(const std::filesystem::path& path);
RasterImage decode_png(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> encode_png(const RasterImage& image);
/// Throws IoError.
void write_png(const std::filesystem::path& path, const RasterImage& image);

/// Throws DimensionMismatchError unless both images have identical dimensions.
void validate_pair(const RasterImage& reference, const RasterImage& failure);

/// Normalized mean absolute difference over every channel value:
/// sum |R - F| / (255 * width * height * 3). Result lies in [0, 1].
double pixel_diff_score(const RasterImage& reference, const RasterImage& failure);

enum class DiffMode { Absolute, Highlight };

inline constexpr int kDefaultHighlightThreshold = 16;

/// Absolute: per-channel |R - F|. Highlight: pixels whose largest channel
/// difference exceeds `threshold` are pure red, all others are the
/// reference in grayscale at half luminance.
RasterImage render_diff_image(const RasterImage& reference, const RasterImage& failure,
                              DiffMode mode, int threshold = kDefaultHighlightThreshold);

}  // namespace snaptriage
