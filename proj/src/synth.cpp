#include "snaptriage/synth.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>

namespace snaptriage {

namespace fs = std::filesystem;

// ---- font -----------------------------------------------------------------

namespace {

struct GlyphEntry {
  char ch;
  std::array<std::uint8_t, kGlyphHeight> rows;
};

constexpr GlyphEntry kFont[] = {
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
};

const GlyphEntry* find_glyph(char c) {
  const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const auto& g : kFont) {
    if (g.ch == upper) return &g;
  }
  return nullptr;
}

}  // namespace

bool has_glyph(char c) { return find_glyph(c) != nullptr; }

std::uint8_t glyph_row(char c, int row) {
  const GlyphEntry* g = find_glyph(c);
  if (g == nullptr || row < 0 || row >= kGlyphHeight) return 0;
  return g->rows[static_cast<std::size_t>(row)];
}

Rect text_extent(std::string_view text, int scale, int x, int y) {
  const int n = static_cast<int>(text.size());
  return {x, y, n == 0 ? 0 : (n * kGlyphAdvance - 1) * scale, kGlyphHeight * scale};
}

void draw_text(RasterImage& image, int x, int y, std::string_view text, Rgb ink, int scale) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const int gx = x + static_cast<int>(i) * kGlyphAdvance * scale;
    for (int row = 0; row < kGlyphHeight; ++row) {
      const std::uint8_t bits = glyph_row(text[i], row);
      for (int col = 0; col < kGlyphWidth; ++col) {
        if ((bits >> (kGlyphWidth - 1 - col)) & 1u) {
          image.fill({gx + col * scale, y + row * scale, scale, scale}, ink);
        }
      }
    }
  }
}

long long glyph_cell_difference(std::string_view a, std::string_view b) {
  long long cells = 0;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const char ca = i < a.size() ? a[i] : ' ';
    const char cb = i < b.size() ? b[i] : ' ';
    for (int row = 0; row < kGlyphHeight; ++row) {
      cells += std::popcount(static_cast<unsigned>(glyph_row(ca, row) ^ glyph_row(cb, row)));
    }
  }
  return cells;
}

// ---- mutation operators ---------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint8_t clamp_channel(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidMutation, what); }

bool inside(const Rect& r, const Rect& bounds) {
  return r.width > 0 && r.height > 0 && r.x >= bounds.x && r.y >= bounds.y &&
         r.right() <= bounds.right() && r.bottom() <= bounds.bottom();
}

std::string rect_string(const Rect& r) {
  return std::to_string(r.x) + "," + std::to_string(r.y) + "," + std::to_string(r.width) + "," +
         std::to_string(r.height);
}

RasterImage crop(const RasterImage& image, const Rect& r) {
  RasterImage out(r.width, r.height);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) out.set(x, y, image.at(r.x + x, r.y + y));
  }
  return out;
}

void paste(RasterImage& image, const RasterImage& patch, int x0, int y0) {
  for (int y = 0; y < patch.height(); ++y) {
    for (int x = 0; x < patch.width(); ++x) image.set(x0 + x, y0 + y, patch.at(x, y));
  }
}

struct OperatorApplier {
  const RasterImage& scene;
  const Rect& region;
  std::uint64_t seed;

  RasterImage operator()(const ColorShift& m) const {
    if (m.dr == 0 && m.dg == 0 && m.db == 0) invalid("color delta must be non-zero");
    RasterImage out = scene;
    for (int y = region.y; y < region.bottom(); ++y) {
      for (int x = region.x; x < region.right(); ++x) {
        const Rgb c = scene.at(x, y);
        out.set(x, y, {clamp_channel(c.r + m.dr), clamp_channel(c.g + m.dg), clamp_channel(c.b + m.db)});
      }
    }
    return out;
  }

  RasterImage operator()(const Translation& m) const {
    if (m.dx == 0 && m.dy == 0) invalid("padding shift must be non-zero");
    const Rect moved{region.x + m.dx, region.y + m.dy, region.width, region.height};
    if (!inside(moved, scene.bounds())) invalid("shifted region " + rect_string(moved) + " leaves the scene");
    RasterImage out = scene;
    const RasterImage content = crop(scene, region);
    out.fill(region, m.fill.value_or(dominant_color(scene)));
    paste(out, content, moved.x, moved.y);
    return out;
  }

  RasterImage operator()(const TextReplacement& m) const {
    if (m.text.empty()) invalid("replacement text must be non-empty");
    if (m.scale < 1) invalid("text scale must be positive");
    for (char c : m.text) {
      if (!has_glyph(c)) invalid(std::string("no glyph for character '") + c + "'");
    }
    const Rect box = text_extent(m.text, m.scale, region.x, region.y);
    if (box.width > region.width || box.height > region.height) invalid("text does not fit the region");
    RasterImage out = scene;
    out.fill(region, m.paper);
    draw_text(out, region.x, region.y, m.text, m.ink, m.scale);
    return out;
  }

  RasterImage operator()(const PatternFill& m) const {
    if (m.cell < 1) invalid("pattern cell size must be positive");
    RasterImage out = scene;
    for (int y = 0; y < region.height; ++y) {
      for (int x = 0; x < region.width; ++x) {
        out.set(region.x + x, region.y + y, pattern_color(m, x, y, seed));
      }
    }
    return out;
  }

  RasterImage operator()(const RegionSwap& m) const {
    if (m.other.width != region.width || m.other.height != region.height) {
      invalid("swapped regions must have equal size");
    }
    if (!inside(m.other, scene.bounds())) invalid("swap target lies outside the scene");
    if (m.other.intersects(region)) invalid("swapped regions must not overlap");
    RasterImage out = scene;
    paste(out, crop(scene, region), m.other.x, m.other.y);
    paste(out, crop(scene, m.other), region.x, region.y);
    return out;
  }

  RasterImage operator()(const AnimationFrame& m) const {
    if (!(m.progress > 0.0 && m.progress < 1.0)) invalid("animation progress must lie in (0, 1)");
    const int x = m.start_x + static_cast<int>(std::lround(m.progress * (region.x - m.start_x)));
    const int y = m.start_y + static_cast<int>(std::lround(m.progress * (region.y - m.start_y)));
    const Rect frame{x, y, region.width, region.height};
    if (!inside(frame, scene.bounds()) ||
        !inside({m.start_x, m.start_y, region.width, region.height}, scene.bounds())) {
      invalid("animation path leaves the scene");
    }
    if (frame == region) invalid("animation frame coincides with the resting position");
    RasterImage out = scene;
    const RasterImage element = crop(scene, region);
    out.fill(region, m.fill.value_or(dominant_color(scene)));
    const RasterImage under = out;
    for (int py = 0; py < frame.height; ++py) {
      for (int px = 0; px < frame.width; ++px) {
        out.set(frame.x + px, frame.y + py,
                blend(under.at(frame.x + px, frame.y + py), element.at(px, py), m.progress));
      }
    }
    return out;
  }
};

bool magnitude_matches(CategoryKind kind, const MutationMagnitude& m) {
  switch (kind) {
    case CategoryKind::ColorChange: return std::holds_alternative<ColorShift>(m);
    case CategoryKind::PaddingChange: return std::holds_alternative<Translation>(m);
    case CategoryKind::TextChange: return std::holds_alternative<TextReplacement>(m);
    case CategoryKind::ContentChange: return std::holds_alternative<PatternFill>(m);
    case CategoryKind::LayoutChange: return std::holds_alternative<RegionSwap>(m);
    case CategoryKind::AnimationPhase: return std::holds_alternative<AnimationFrame>(m);
    default: return false;
  }
}

}  // namespace

bool is_synthesizable(const Category& category) {
  switch (category.kind()) {
    case CategoryKind::ColorChange:
    case CategoryKind::PaddingChange:
    case CategoryKind::ContentChange:
    case CategoryKind::LayoutChange:
    case CategoryKind::TextChange:
    case CategoryKind::AnimationPhase:
      return true;
    default:
      return false;
  }
}

RasterImage apply_mutation(const RasterImage& scene, const MutationSpec& spec) {
  if (!is_synthesizable(spec.category)) {
    throw Error(ErrorKind::UnsupportedCategory,
                spec.category.canonical_name() + " has no mutation operator");
  }
  if (!magnitude_matches(spec.category.kind(), spec.magnitude)) {
    invalid("magnitude does not match category " + spec.category.canonical_name());
  }
  Rect region = scene.bounds();
  if (spec.region) {
    region = *spec.region;
  } else if (spec.category.kind() != CategoryKind::ColorChange) {
    invalid(spec.category.canonical_name() + " requires a region");
  }
  if (!inside(region, scene.bounds())) {
    invalid("region " + rect_string(region) + " lies outside the scene");
  }
  return std::visit(OperatorApplier{scene, region, spec.seed}, spec.magnitude);
}

Rgb dominant_color(const RasterImage& image) {
  std::map<std::uint32_t, std::size_t> counts;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Rgb c = image.at(x, y);
      ++counts[(std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | c.b];
    }
  }
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  const std::uint32_t v = best->first;
  return {static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v)};
}

std::uint8_t blend_channel(std::uint8_t under, std::uint8_t over, double opacity) {
  return clamp_channel(int{under} + static_cast<int>(std::lround(opacity * (int{over} - int{under}))));
}

Rgb blend(Rgb under, Rgb over, double opacity) {
  return {blend_channel(under.r, over.r, opacity), blend_channel(under.g, over.g, opacity),
          blend_channel(under.b, over.b, opacity)};
}

Rgb pattern_color(const PatternFill& fill, int x, int y, std::uint64_t seed) {
  const int c = std::max(fill.cell, 1);
  bool primary = false;
  switch (fill.pattern) {
    case FillPattern::Checker: primary = ((x / c) + (y / c)) % 2 == 0; break;
    case FillPattern::HorizontalStripes: primary = (y / c) % 2 == 0; break;
    case FillPattern::VerticalStripes: primary = (x / c) % 2 == 0; break;
    case FillPattern::Diagonal: primary = ((x + y) / c) % 2 == 0; break;
    case FillPattern::Dots: primary = (x / c) % 2 == 0 && (y / c) % 2 == 0; break;
    case FillPattern::Noise:
      primary = (splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(y / c) << 32) |
                                              static_cast<std::uint32_t>(x / c))) & 1u) != 0;
      break;
  }
  return primary ? fill.primary : fill.secondary;
}

// ---- scene generation -----------------------------------------------------

namespace {

/// Portable mapping from the standard engine; std distributions are
/// implementation-defined and would break cross-platform byte identity.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  int uniform(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool coin() { return (engine_() & 1u) != 0; }
  std::uint64_t next() { return engine_(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(uniform(0, static_cast<int>(i) - 1))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

int channel_distance(Rgb a, Rgb b) {
  return std::abs(int{a.r} - int{b.r}) + std::abs(int{a.g} - int{b.g}) + std::abs(int{a.b} - int{b.b});
}

// Every scene color stays inside this band so a color delta of at most
// kMaxDelta per channel never clamps.
constexpr int kMaxDelta = 40;
constexpr int kMinPaletteDistance = 60;

struct TextLine {
  Rect box;
  std::string text;
  Rgb ink;
  Rgb paper;
  int scale = 2;
};

struct Card {
  Rect rect;
  Rgb color;
  Rect icon;
  PatternFill icon_fill;
  TextLine label;
};

struct Scene {
  Rgb background;
  Rgb ink;
  Rect header{0, 0, kSceneWidth, 28};
  Rgb header_color;
  TextLine title;
  std::array<Card, 3> cards;
  std::array<Rect, 3> panels;
  std::array<Rgb, 3> panel_colors;
  Rect toast{kSceneWidth - 12 - 36, 280, 36, 14};
  int toast_start_x = 12;
  Rgb toast_color;
  std::vector<Rgb> palette;

  RasterImage render() const {
    RasterImage img(kSceneWidth, kSceneHeight, background);
    img.fill(header, header_color);
    draw_text(img, title.box.x, title.box.y, title.text, title.ink, title.scale);
    for (const auto& card : cards) {
      img.fill(card.rect, card.color);
      for (int y = 0; y < card.icon.height; ++y) {
        for (int x = 0; x < card.icon.width; ++x) {
          img.set(card.icon.x + x, card.icon.y + y, pattern_color(card.icon_fill, x, y, 0));
        }
      }
      draw_text(img, card.label.box.x, card.label.box.y, card.label.text, card.label.ink,
                card.label.scale);
    }
    for (std::size_t i = 0; i < panels.size(); ++i) img.fill(panels[i], panel_colors[i]);
    img.fill(toast, toast_color);
    return img;
  }
};

Rgb sample_distinct(Rng& rng, std::vector<Rgb>& palette, int lo, int hi) {
  for (;;) {
    const Rgb c{static_cast<std::uint8_t>(rng.uniform(lo, hi)), static_cast<std::uint8_t>(rng.uniform(lo, hi)),
                static_cast<std::uint8_t>(rng.uniform(lo, hi))};
    if (std::all_of(palette.begin(), palette.end(),
                    [&](Rgb p) { return channel_distance(p, c) >= kMinPaletteDistance; })) {
      palette.push_back(c);
      return c;
    }
  }
}

bool far_from_palette(const std::vector<Rgb>& palette, Rgb c, int min_distance = 12) {
  return std::all_of(palette.begin(), palette.end(),
                     [&](Rgb p) { return channel_distance(p, c) >= min_distance; });
}

std::string random_word(Rng& rng, int length) {
  std::string w;
  for (int i = 0; i < length; ++i) w.push_back(static_cast<char>('A' + rng.uniform(0, 25)));
  return w;
}

constexpr std::array<FillPattern, 5> kScenePatterns = {
    FillPattern::Checker, FillPattern::HorizontalStripes, FillPattern::VerticalStripes,
    FillPattern::Diagonal, FillPattern::Dots};

Scene build_scene(Rng& rng) {
  Scene s;
  s.background = sample_distinct(rng, s.palette, 96, 140);
  s.ink = sample_distinct(rng, s.palette, 44, 64);
  s.header_color = sample_distinct(rng, s.palette, 150, 210);
  {
    const std::string text = random_word(rng, rng.uniform(6, 9));
    s.title = {text_extent(text, 2, 10, 7), text, s.ink, s.header_color, 2};
  }
  for (int k = 0; k < 3; ++k) {
    Card& card = s.cards[static_cast<std::size_t>(k)];
    const int y = 40 + 60 * k;
    card.rect = {12, y, 176, 48};
    card.color = sample_distinct(rng, s.palette, 150, 210);
    card.icon = {22, y + 14, 20, 20};
    card.icon_fill.pattern = kScenePatterns[static_cast<std::size_t>(rng.uniform(0, 4))];
    card.icon_fill.primary = sample_distinct(rng, s.palette, 48, 210);
    card.icon_fill.secondary = sample_distinct(rng, s.palette, 48, 210);
    card.icon_fill.cell = rng.uniform(2, 4);
    const std::string text = random_word(rng, rng.uniform(5, 10));
    card.label = {text_extent(text, 2, 52, y + 17), text, s.ink, card.color, 2};
  }
  for (int k = 0; k < 3; ++k) {
    s.panels[static_cast<std::size_t>(k)] = {12 + 64 * k, 224, 48, 28};
    s.panel_colors[static_cast<std::size_t>(k)] = sample_distinct(rng, s.palette, 48, 210);
  }
  s.toast_color = sample_distinct(rng, s.palette, 48, 210);
  return s;
}

enum Slot { kHeader, kCard0, kCard1, kCard2, kPanel0, kPanel1, kPanel2, kToast };

struct PlannedMutation {
  MutationSpec spec;
  long long expected_abs_sum = 0;  // closed-form sum of |R - F| over channels
  std::vector<Rect> footprint;
  std::string description;
};

int pick_free(Rng& rng, std::set<int>& used, std::initializer_list<int> candidates) {
  std::vector<int> free;
  for (int c : candidates) {
    if (!used.count(c)) free.push_back(c);
  }
  if (free.empty()) throw Error(ErrorKind::InvalidMutation, "no free scene element for mutation");
  const int slot = free[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(free.size()) - 1))];
  used.insert(slot);
  return slot;
}

std::string signed_str(int v) { return (v >= 0 ? "+" : "") + std::to_string(v); }

PlannedMutation plan_color(Rng& rng, const Scene& s, std::set<int>& used) {
  const int slot = pick_free(rng, used, {kHeader, kCard0, kCard1, kCard2});
  Rect target = s.header;
  std::vector<Rgb> members = {s.header_color, s.ink};
  if (slot != kHeader) {
    const Card& card = s.cards[static_cast<std::size_t>(slot - kCard0)];
    target = card.rect;
    members = {card.color, s.ink, card.icon_fill.primary, card.icon_fill.secondary};
  }
  ColorShift d;
  for (;;) {
    d = {rng.uniform(-kMaxDelta, kMaxDelta), rng.uniform(-kMaxDelta, kMaxDelta),
         rng.uniform(-kMaxDelta, kMaxDelta)};
    if (std::abs(d.dr) + std::abs(d.dg) + std::abs(d.db) < 30) continue;
    const bool distinct = std::all_of(members.begin(), members.end(), [&](Rgb c) {
      return far_from_palette(s.palette, Rgb{static_cast<std::uint8_t>(c.r + d.dr),
                                             static_cast<std::uint8_t>(c.g + d.dg),
                                             static_cast<std::uint8_t>(c.b + d.db)});
    });
    if (distinct) break;
  }
  PlannedMutation p{MutationSpec{Category(CategoryKind::ColorChange), d, target, rng.next()}, 0, {target}, {}};
  p.expected_abs_sum = target.area() * (std::abs(d.dr) + std::abs(d.dg) + std::abs(d.db));
  p.description = "COLOR_CHANGE " + std::string(slot == kHeader ? "header" : "card" + std::to_string(slot - kCard0)) +
                  " delta=(" + signed_str(d.dr) + "," + signed_str(d.dg) + "," + signed_str(d.db) + ")";
  return p;
}

PlannedMutation plan_text(Rng& rng, const Scene& s, std::set<int>& used) {
  const int slot = pick_free(rng, used, {kHeader, kCard0, kCard1, kCard2});
  const TextLine& line = slot == kHeader ? s.title : s.cards[static_cast<std::size_t>(slot - kCard0)].label;
  // Every position changes, and never to a neighbour's letter, so the edit
  // cannot masquerade as a whole-glyph translation.
  std::string text = line.text;
  for (std::size_t i = 0; i < text.size(); ++i) {
    for (;;) {
      const char c = static_cast<char>('A' + rng.uniform(0, 25));
      if (c == line.text[i]) continue;
      if (i > 0 && c == line.text[i - 1]) continue;
      if (i + 1 < text.size() && c == line.text[i + 1]) continue;
      text[i] = c;
      break;
    }
  }
  TextReplacement m{text, line.ink, line.paper, line.scale};
  PlannedMutation p{MutationSpec{Category(CategoryKind::TextChange), m, line.box, rng.next()}, 0, {line.box}, {}};
  p.expected_abs_sum = glyph_cell_difference(line.text, text) * line.scale * line.scale *
                       channel_distance(line.ink, line.paper);
  p.description = "TEXT_CHANGE '" + line.text + "' -> '" + text + "'";
  return p;
}

PlannedMutation plan_content(Rng& rng, const Scene& s, std::set<int>& used) {
  const int slot = pick_free(rng, used, {kCard0, kCard1, kCard2});
  const Card& card = s.cards[static_cast<std::size_t>(slot - kCard0)];
  std::vector<Rgb> palette = s.palette;
  PatternFill fill;
  long long sum = 0;
  for (;;) {
    do {
      fill.pattern = kScenePatterns[static_cast<std::size_t>(rng.uniform(0, 4))];
    } while (fill.pattern == card.icon_fill.pattern);
    std::vector<Rgb> trial = palette;
    fill.primary = sample_distinct(rng, trial, 48, 210);
    fill.secondary = sample_distinct(rng, trial, 48, 210);
    fill.cell = rng.uniform(2, 4);
    // Closed form: evaluate both pattern functions over the icon cells.
    sum = 0;
    std::set<std::array<int, 3>> deltas;
    for (int y = 0; y < card.icon.height; ++y) {
      for (int x = 0; x < card.icon.width; ++x) {
        const Rgb before = pattern_color(card.icon_fill, x, y, 0);
        const Rgb after = pattern_color(fill, x, y, 0);
        sum += channel_distance(before, after);
        deltas.insert({after.r - before.r, after.g - before.g, after.b - before.b});
      }
    }
    if (deltas.size() > 1) break;
  }
  PlannedMutation p{MutationSpec{Category(CategoryKind::ContentChange), fill, card.icon, rng.next()}, sum,
                    {card.icon}, {}};
  p.description = "CONTENT_CHANGE icon of card" + std::to_string(slot - kCard0);
  return p;
}

PlannedMutation plan_padding(Rng& rng, const Scene& s, std::set<int>& used) {
  const int slot = pick_free(rng, used, {kPanel0, kPanel1, kPanel2});
  const auto idx = static_cast<std::size_t>(slot - kPanel0);
  const Rect panel = s.panels[idx];
  const int shift = rng.uniform(2, 8) * (rng.coin() ? 1 : -1);
  const bool horizontal = rng.coin();
  Translation t{horizontal ? shift : 0, horizontal ? 0 : shift, s.background};
  const Rect moved{panel.x + t.dx, panel.y + t.dy, panel.width, panel.height};
  const Rect hull{std::min(panel.x, moved.x), std::min(panel.y, moved.y),
                  panel.width + std::abs(t.dx), panel.height + std::abs(t.dy)};
  PlannedMutation p{MutationSpec{Category(CategoryKind::PaddingChange), t, panel, rng.next()}, 0, {hull}, {}};
  // Two strips of |shift| pixels change: one vacated, one newly covered.
  p.expected_abs_sum = 2LL * std::abs(shift) * (horizontal ? panel.height : panel.width) *
                       channel_distance(s.panel_colors[idx], s.background);
  p.description = "PADDING_CHANGE panel" + std::to_string(idx) + (horizontal ? " dx=" : " dy=") + signed_str(shift);
  return p;
}

PlannedMutation plan_layout(Rng& rng, const Scene& s, std::set<int>& used) {
  const int a = pick_free(rng, used, {kPanel0, kPanel1, kPanel2});
  const int b = pick_free(rng, used, {kPanel0, kPanel1, kPanel2});
  const auto ia = static_cast<std::size_t>(std::min(a, b) - kPanel0);
  const auto ib = static_cast<std::size_t>(std::max(a, b) - kPanel0);
  const Rect ra = s.panels[ia], rb = s.panels[ib];
  PlannedMutation p{MutationSpec{Category(CategoryKind::LayoutChange), RegionSwap{rb}, ra, rng.next()}, 0,
                    {ra, rb}, {}};
  p.expected_abs_sum = 2LL * ra.area() * channel_distance(s.panel_colors[ia], s.panel_colors[ib]);
  p.description = "LAYOUT_CHANGE swap panel" + std::to_string(ia) + " <-> panel" + std::to_string(ib);
  return p;
}

PlannedMutation plan_animation(Rng& rng, const Scene& s, std::set<int>& used) {
  pick_free(rng, used, {kToast});
  double progress = 0.0;
  Rgb mid;
  for (;;) {
    progress = rng.uniform(25, 60) / 100.0;
    mid = blend(s.background, s.toast_color, progress);
    if (far_from_palette(s.palette, mid)) break;
  }
  AnimationFrame f{progress, s.toast_start_x, s.toast.y, s.background};
  const int x = f.start_x + static_cast<int>(std::lround(progress * (s.toast.x - f.start_x)));
  const Rect frame{x, s.toast.y, s.toast.width, s.toast.height};
  PlannedMutation p{MutationSpec{Category(CategoryKind::AnimationPhase), f, s.toast, rng.next()}, 0,
                    {s.toast, frame}, {}};
  // Resting place and mid-flight frame never overlap in this layout.
  p.expected_abs_sum = s.toast.area() * (channel_distance(s.toast_color, s.background) +
                                         channel_distance(mid, s.background));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", progress);
  p.description = std::string("ANIMATION_PHASE toast progress=") + buf;
  return p;
}

PlannedMutation plan(CategoryKind kind, Rng& rng, const Scene& s, std::set<int>& used) {
  switch (kind) {
    case CategoryKind::ColorChange: return plan_color(rng, s, used);
    case CategoryKind::TextChange: return plan_text(rng, s, used);
    case CategoryKind::ContentChange: return plan_content(rng, s, used);
    case CategoryKind::PaddingChange: return plan_padding(rng, s, used);
    case CategoryKind::LayoutChange: return plan_layout(rng, s, used);
    case CategoryKind::AnimationPhase: return plan_animation(rng, s, used);
    default: throw Error(ErrorKind::UnsupportedCategory, std::string(known_name(kind)));
  }
}

std::string case_id(int index, int count) {
  const int width = std::max(3, static_cast<int>(std::to_string(count).size()));
  std::string digits = std::to_string(index);
  return "case_" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

DatasetManifest generate_synthetic_dataset(const GeneratorOptions& options) {
  if (options.count < 1) throw Error(ErrorKind::InvalidConfig, "count must be at least 1");
  if (options.categories.empty()) throw Error(ErrorKind::InvalidConfig, "no categories given");
  if (!(options.multi_label_fraction >= 0.0 && options.multi_label_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "multi-label fraction must lie in [0, 1]");
  }
  std::vector<CategoryKind> kinds;
  for (const auto& c : options.categories) {
    if (!is_synthesizable(c)) {
      throw Error(ErrorKind::UnsupportedCategory, c.canonical_name() + " cannot be synthesized");
    }
    if (std::find(kinds.begin(), kinds.end(), c.kind()) == kinds.end()) kinds.push_back(c.kind());
  }

  Rng rng(options.seed);
  const int dual_count =
      kinds.size() < 2 ? 0 : static_cast<int>(std::lround(options.count * options.multi_label_fraction));
  std::vector<int> order(static_cast<std::size_t>(options.count));
  for (int i = 0; i < options.count; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  std::vector<bool> dual(static_cast<std::size_t>(options.count), false);
  for (int i = 0; i < dual_count; ++i) dual[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  ensure_dir(options.out_dir);
  DatasetManifest manifest;
  manifest.name = options.name;
  manifest.base_dir = options.out_dir;

  for (int i = 0; i < options.count; ++i) {
    const std::string id = case_id(i + 1, options.count);
    const Scene scene = build_scene(rng);
    std::vector<CategoryKind> labels = {kinds[static_cast<std::size_t>(i) % kinds.size()]};
    if (dual[static_cast<std::size_t>(i)]) {
      std::vector<CategoryKind> others;
      for (CategoryKind k : kinds) {
        if (k != labels.front()) others.push_back(k);
      }
      labels.push_back(others[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(others.size()) - 1))]);
    }

    std::set<int> used;
    std::vector<PlannedMutation> mutations;
    for (CategoryKind k : labels) mutations.push_back(plan(k, rng, scene, used));

    const RasterImage reference = scene.render();
    RasterImage failure = reference;
    long long expected_sum = 0;
    std::string descriptions, footprint;
    for (const auto& m : mutations) {
      failure = apply_mutation(failure, m.spec);
      expected_sum += m.expected_abs_sum;
      descriptions += (descriptions.empty() ? "" : "; ") + m.description;
      for (const auto& r : m.footprint) footprint += (footprint.empty() ? "" : ";") + rect_string(r);
    }

    const fs::path case_dir = options.out_dir / "cases" / id;
    ensure_dir(case_dir);
    write_png(case_dir / "reference.png", reference);
    write_png(case_dir / "failure.png", failure);
    write_png(case_dir / "diff.png", render_diff_image(reference, failure, DiffMode::Highlight));

    SnapshotCase c;
    c.id = id;
    c.reference_path = case_dir / "reference.png";
    c.failure_path = case_dir / "failure.png";
    c.diff_path = case_dir / "diff.png";
    for (CategoryKind k : labels) c.ground_truth.insert(Category(k));
    c.ignore_designation = c.ground_truth.front();
    char expected[40];
    std::snprintf(expected, sizeof expected, "%.17g",
                  static_cast<double>(expected_sum) / (255.0 * 3.0 * kSceneWidth * kSceneHeight));
    c.metadata = {{"description", descriptions},
                  {"expected_pixel_diff", expected},
                  {"footprint", footprint},
                  {"generator_seed", std::to_string(options.seed)}};
    manifest.cases.push_back(std::move(c));
  }
  write_manifest(manifest, options.out_dir / "manifest.json");
  return manifest;
}

}  // namespace snaptriage
