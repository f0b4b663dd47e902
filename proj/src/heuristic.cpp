// Image-only change classifier. It recognizes the footprints of the
// synthetic mutation operators and is not meant as a general-purpose model.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snaptriage/backend.hpp"
#include "snaptriage/synth.hpp"

namespace snaptriage {

namespace {

constexpr int kMergeGap = 4;
constexpr int kMaxShift = 10;

struct ChangeMap {
  int width = 0, height = 0;
  std::vector<std::uint8_t> changed;
  std::vector<std::pair<int, int>> pixels;

  bool at(int x, int y) const { return changed[static_cast<std::size_t>(y) * width + x] != 0; }
};

ChangeMap change_map(const RasterImage& a, const RasterImage& b) {
  ChangeMap m{a.width(), a.height(), std::vector<std::uint8_t>(static_cast<std::size_t>(a.width()) * a.height()), {}};
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (a.at(x, y) != b.at(x, y)) {
        m.changed[static_cast<std::size_t>(y) * m.width + x] = 1;
        m.pixels.emplace_back(x, y);
      }
    }
  }
  return m;
}

Rect expand(const Rect& r, int by) { return {r.x - by, r.y - by, r.width + 2 * by, r.height + 2 * by}; }

Rect hull(const Rect& a, const Rect& b) {
  const int x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
  return {x0, y0, std::max(a.right(), b.right()) - x0, std::max(a.bottom(), b.bottom()) - y0};
}

/// Bounding boxes of 8-connected changed components, merged while any two
/// lie within kMergeGap pixels of each other. Sorted top-to-bottom.
std::vector<Rect> change_regions(const ChangeMap& m) {
  std::vector<std::uint8_t> seen(m.changed.size(), 0);
  std::vector<Rect> boxes;
  for (const auto& [sx, sy] : m.pixels) {
    if (seen[static_cast<std::size_t>(sy) * m.width + sx]) continue;
    int x0 = sx, x1 = sx, y0 = sy, y1 = sy;
    std::queue<std::pair<int, int>> q;
    q.emplace(sx, sy);
    seen[static_cast<std::size_t>(sy) * m.width + sx] = 1;
    while (!q.empty()) {
      auto [x, y] = q.front();
      q.pop();
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
          auto& s = seen[static_cast<std::size_t>(ny) * m.width + nx];
          if (s || !m.at(nx, ny)) continue;
          s = 1;
          q.emplace(nx, ny);
        }
      }
    }
    boxes.push_back({x0, y0, x1 - x0 + 1, y1 - y0 + 1});
  }
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t i = 0; i < boxes.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        if (expand(boxes[i], kMergeGap).intersects(boxes[j])) {
          boxes[i] = hull(boxes[i], boxes[j]);
          boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
          break;
        }
      }
    }
  }
  std::sort(boxes.begin(), boxes.end(), [](const Rect& a, const Rect& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return boxes;
}

std::optional<Rgb> uniform_color(const RasterImage& img, const Rect& r) {
  const Rgb first = img.at(r.x, r.y);
  for (int y = r.y; y < r.bottom(); ++y) {
    for (int x = r.x; x < r.right(); ++x) {
      if (img.at(x, y) != first) return std::nullopt;
    }
  }
  return first;
}

bool is_swap(const RasterImage& ref, const RasterImage& fail, const std::vector<Rect>& regions) {
  if (regions.size() != 2) return false;
  const Rect a = regions[0], b = regions[1];
  if (a.width != b.width || a.height != b.height) return false;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (fail.at(a.x + x, a.y + y) != ref.at(b.x + x, b.y + y)) return false;
      if (fail.at(b.x + x, b.y + y) != ref.at(a.x + x, a.y + y)) return false;
    }
  }
  return true;
}

/// Some small shift t explains every changed pixel p as either the
/// reference content from p - t or the background that was left behind.
bool is_translation(const RasterImage& ref, const RasterImage& fail, const ChangeMap& m, Rgb background) {
  for (int dy = -kMaxShift; dy <= kMaxShift; ++dy) {
    for (int dx = -kMaxShift; dx <= kMaxShift; ++dx) {
      if (dx == 0 && dy == 0) continue;
      std::size_t carried = 0;
      bool ok = true;
      for (const auto& [x, y] : m.pixels) {
        const Rgb f = fail.at(x, y);
        const int sx = x - dx, sy = y - dy;
        const bool in = sx >= 0 && sy >= 0 && sx < ref.width() && sy < ref.height();
        if (in && ref.at(sx, sy) == f && f != background) {
          ++carried;
        } else if (f != background) {
          ok = false;
          break;
        }
      }
      if (ok && carried * 4 >= m.pixels.size()) return true;
    }
  }
  return false;
}

/// `mid` lies strictly between `from` and `to` on the same blend factor.
bool is_partial_blend(Rgb from, Rgb to, Rgb mid) {
  const std::array<int, 3> f{from.r, from.g, from.b}, t{to.r, to.g, to.b}, m{mid.r, mid.g, mid.b};
  double lo = 1.0, hi = 0.0;
  int informative = 0;
  for (int c = 0; c < 3; ++c) {
    const int span = t[c] - f[c];
    if (std::abs(span) < 16) {
      if (std::abs(m[c] - f[c]) > std::abs(span) + 1) return false;
      continue;
    }
    const double alpha = static_cast<double>(m[c] - f[c]) / span;
    lo = std::min(lo, alpha), hi = std::max(hi, alpha);
    ++informative;
  }
  return informative > 0 && lo > 0.05 && hi < 0.95 && hi - lo <= 0.08;
}

bool is_animation_frame(const RasterImage& ref, const RasterImage& fail, const std::vector<Rect>& regions) {
  if (regions.size() != 2) return false;
  if (regions[0].width != regions[1].width || regions[0].height != regions[1].height) return false;
  for (int rest = 0; rest < 2; ++rest) {
    const Rect& r = regions[static_cast<std::size_t>(rest)];
    const Rect& f = regions[static_cast<std::size_t>(1 - rest)];
    auto element = uniform_color(ref, r), vacated = uniform_color(fail, r);
    auto under = uniform_color(ref, f), ghost = uniform_color(fail, f);
    if (!element || !vacated || !under || !ghost) continue;
    if (*vacated != *under) continue;
    if (is_partial_blend(*under, *element, *ghost)) return true;
  }
  return false;
}

bool is_text_edit(const RasterImage& ref, const RasterImage& fail, const ChangeMap& m,
                  const std::vector<Rect>& regions) {
  std::set<std::array<std::uint8_t, 3>> colors;
  for (const auto& [x, y] : m.pixels) {
    for (const Rgb c : {ref.at(x, y), fail.at(x, y)}) {
      colors.insert({c.r, c.g, c.b});
      if (colors.size() > 2) return false;
    }
  }
  if (colors.size() != 2) return false;
  // Glyph edits flip ink and paper in both directions inside one band.
  return std::any_of(regions.begin(), regions.end(), [&](const Rect& r) {
    std::set<std::array<std::uint8_t, 3>> before, after;
    for (const auto& [x, y] : m.pixels) {
      if (!r.contains(x, y)) continue;
      const Rgb a = ref.at(x, y), b = fail.at(x, y);
      before.insert({a.r, a.g, a.b});
      after.insert({b.r, b.g, b.b});
    }
    return before.size() == 2 && after.size() == 2;
  });
}

bool is_recolor(const RasterImage& ref, const RasterImage& fail, const ChangeMap& m,
                const std::vector<Rect>& regions) {
  for (const Rect& r : regions) {
    std::optional<std::array<int, 3>> delta;
    for (int y = r.y; y < r.bottom(); ++y) {
      for (int x = r.x; x < r.right(); ++x) {
        if (!m.at(x, y)) return false;
        const Rgb a = ref.at(x, y), b = fail.at(x, y);
        const std::array<int, 3> d{b.r - a.r, b.g - a.g, b.b - a.b};
        if (!delta) delta = d;
        else if (*delta != d) return false;
      }
    }
  }
  return true;
}

std::string describe(const Rect& r) {
  return "region " + std::to_string(r.width) + "x" + std::to_string(r.height) + " at (" +
         std::to_string(r.x) + "," + std::to_string(r.y) + ")";
}

}  // namespace

std::string heuristic_classify(const RasterImage& reference, const RasterImage& failure) {
  const double score = pixel_diff_score(reference, failure);
  const ChangeMap m = change_map(reference, failure);
  nlohmann::json out;
  out["pixel_difference"] = score;

  if (m.pixels.empty()) {
    out["categories"] = nlohmann::json::array();
    out["semantic_difference"] = 0.0;
    out["affected_elements"] = nlohmann::json::array();
    out["explanation"] = "No visible difference between the reference and failure snapshots.";
    return out.dump();
  }

  const std::vector<Rect> regions = change_regions(m);
  const Rgb background = dominant_color(reference);

  CategoryKind kind = CategoryKind::ContentChange;
  std::string explanation;
  // A small translation leaves two equal strips that also read as a swap,
  // so it is tested first.
  if (is_translation(reference, failure, m, background)) {
    kind = CategoryKind::PaddingChange;
    explanation = "A component moved by a few pixels, changing its spacing.";
  } else if (is_swap(reference, failure, regions)) {
    kind = CategoryKind::LayoutChange;
    explanation = "Two equally sized components exchanged positions.";
  } else if (is_animation_frame(reference, failure, regions)) {
    kind = CategoryKind::AnimationPhase;
    explanation = "A component appears partially faded in and away from its resting position, as if captured mid-animation.";
  } else if (is_text_edit(reference, failure, m, regions)) {
    kind = CategoryKind::TextChange;
    explanation = "The glyphs of a text line changed while its colors stayed the same.";
  } else if (is_recolor(reference, failure, m, regions)) {
    kind = CategoryKind::ColorChange;
    explanation = "A region kept its geometry but every pixel shifted by the same color offset.";
  } else {
    explanation = "The content of a region was replaced.";
  }

  nlohmann::json elements = nlohmann::json::array();
  for (const Rect& r : regions) elements.push_back(describe(r));
  out["categories"] = nlohmann::json::array({std::string(known_name(kind))});
  out["semantic_difference"] =
      static_cast<double>(m.pixels.size()) / (static_cast<double>(reference.width()) * reference.height());
  out["affected_elements"] = std::move(elements);
  out["explanation"] = explanation;
  return out.dump();
}

}  // namespace snaptriage
