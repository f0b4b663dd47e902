#include "snaptriage/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <memory>

namespace snaptriage {

RasterImage::RasterImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::DecodeError, "image dimensions must be positive");
  }
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  this->fill(bounds(), fill);
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::DecodeError, "image dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw Error(ErrorKind::DecodeError, "pixel buffer size does not match dimensions");
  }
}

void RasterImage::fill(const Rect& rect, Rgb c) {
  const int x0 = std::max(rect.x, 0), x1 = std::min(rect.right(), width_);
  const int y0 = std::max(rect.y, 0), y1 = std::min(rect.bottom(), height_);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) set(x, y, c);
  }
}

DimensionMismatchError::DimensionMismatchError(int ref_w, int ref_h, int fail_w, int fail_h)
    : Error(ErrorKind::DimensionMismatch,
            "reference is " + std::to_string(ref_w) + "x" + std::to_string(ref_h) +
                " but failure is " + std::to_string(fail_w) + "x" + std::to_string(fail_h)),
      reference_width(ref_w),
      reference_height(ref_h),
      failure_width(fail_w),
      failure_height(fail_h) {}

namespace {

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

}  // namespace

RasterImage decode_png(std::span<const std::uint8_t> data) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&image};
  if (data.empty() || !png_image_begin_read_from_memory(&image, data.data(), data.size())) {
    throw Error(ErrorKind::DecodeError,
                data.empty() ? std::string("empty input") : std::string(image.message));
  }
  image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    throw Error(ErrorKind::DecodeError, image.message);
  }

  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0, n = static_cast<std::size_t>(width) * height; i < n; ++i) {
    const unsigned alpha = rgba[i * 4 + 3];
    for (int c = 0; c < 3; ++c) {
      const unsigned v = rgba[i * 4 + c];
      // Straight alpha over white, rounded to nearest.
      rgb[i * 3 + c] = static_cast<std::uint8_t>((v * alpha + 255u * (255u - alpha) + 127u) / 255u);
    }
  }
  return RasterImage(width, height, std::move(rgb));
}

RasterImage load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorKind::FileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  try {
    return decode_png(data);
  } catch (const Error& e) {
    throw Error(ErrorKind::DecodeError, path.string() + ": " + e.detail());
  }
}

std::vector<std::uint8_t> encode_png(const RasterImage& raster) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width());
  image.height = static_cast<png_uint_32>(raster.height());
  image.format = PNG_FORMAT_RGB;
  PngImageGuard guard{&image};

  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, raster.bytes().data(), 0, nullptr)) {
    throw Error(ErrorKind::IoError, std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.bytes().data(), 0,
                                 nullptr)) {
    throw Error(ErrorKind::IoError, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
  const auto data = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

void validate_pair(const RasterImage& reference, const RasterImage& failure) {
  if (reference.width() != failure.width() || reference.height() != failure.height()) {
    throw DimensionMismatchError(reference.width(), reference.height(), failure.width(),
                                 failure.height());
  }
}

double pixel_diff_score(const RasterImage& reference, const RasterImage& failure) {
  validate_pair(reference, failure);
  const auto a = reference.bytes();
  const auto b = failure.bytes();
  // Exact integer accumulation; a 2^64 sum is far beyond any real image.
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    total += static_cast<std::uint64_t>(std::abs(int{a[i]} - int{b[i]}));
  }
  return static_cast<double>(total) / (255.0 * static_cast<double>(a.size()));
}

RasterImage render_diff_image(const RasterImage& reference, const RasterImage& failure,
                              DiffMode mode, int threshold) {
  validate_pair(reference, failure);
  RasterImage out(reference.width(), reference.height());
  for (int y = 0; y < reference.height(); ++y) {
    for (int x = 0; x < reference.width(); ++x) {
      const Rgb r = reference.at(x, y);
      const Rgb f = failure.at(x, y);
      const int dr = std::abs(int{r.r} - int{f.r});
      const int dg = std::abs(int{r.g} - int{f.g});
      const int db = std::abs(int{r.b} - int{f.b});
      if (mode == DiffMode::Absolute) {
        out.set(x, y, {static_cast<std::uint8_t>(dr), static_cast<std::uint8_t>(dg),
                       static_cast<std::uint8_t>(db)});
      } else if (std::max({dr, dg, db}) > threshold) {
        out.set(x, y, {255, 0, 0});
      } else {
        const int luma = 299 * r.r + 587 * r.g + 114 * r.b;  // x1000
        const auto half = static_cast<std::uint8_t>((luma + 1000) / 2000);
        out.set(x, y, {half, half, half});
      }
    }
  }
  return out;
}

}  // namespace snaptriage
