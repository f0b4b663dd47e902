#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "snaptriage/dataset.hpp"
#include "snaptriage/imaging.hpp"
#include "snaptriage/taxonomy.hpp"

namespace snaptriage {

// ---- 5x7 block font -------------------------------------------------------

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
/// Horizontal advance in font pixels (glyph plus one column of spacing).
inline constexpr int kGlyphAdvance = 6;

/// Supports A-Z, 0-9 and space; lowercase is folded to uppercase.
bool has_glyph(char c);
/// Row bitmask for one glyph row, bit 4 is the leftmost column.
std::uint8_t glyph_row(char c, int row);
/// Size of the box a string occupies at `scale`.
Rect text_extent(std::string_view text, int scale, int x = 0, int y = 0);
/// Paints only the ink pixels of `text` with its top-left corner at (x, y).
void draw_text(RasterImage& image, int x, int y, std::string_view text, Rgb ink, int scale);
/// Number of font cells (before scaling) whose ink state differs between two
/// equal-length strings.
long long glyph_cell_difference(std::string_view a, std::string_view b);

// ---- mutation operators ---------------------------------------------------

/// COLOR_CHANGE: per-channel delta added to every pixel of the region.
struct ColorShift {
  int dr = 0, dg = 0, db = 0;
};

/// PADDING_CHANGE: the region's content moves by (dx, dy); the vacated area
/// is painted with `fill` (the scene's dominant color when absent).
struct Translation {
  int dx = 0, dy = 0;
  std::optional<Rgb> fill;
};

/// TEXT_CHANGE: the region is repainted with `paper` and `text` drawn at its
/// top-left corner.
struct TextReplacement {
  std::string text;
  Rgb ink;
  Rgb paper;
  int scale = 2;
};

enum class FillPattern { Checker, HorizontalStripes, VerticalStripes, Diagonal, Dots, Noise };

/// CONTENT_CHANGE: the region is refilled with a two-color pattern. Noise
/// draws from the mutation seed.
struct PatternFill {
  FillPattern pattern = FillPattern::Checker;
  Rgb primary;
  Rgb secondary;
  int cell = 3;
};

/// LAYOUT_CHANGE: the region and `other` (same size, disjoint) trade places.
struct RegionSwap {
  Rect other;
};

/// ANIMATION_PHASE: the element occupying the region is caught mid-flight,
/// at `progress` of the way from (start_x, start_y) to its resting place,
/// drawn at opacity `progress`. Its resting place shows `fill`.
struct AnimationFrame {
  double progress = 0.5;
  int start_x = 0, start_y = 0;
  std::optional<Rgb> fill;
};

using MutationMagnitude =
    std::variant<ColorShift, Translation, TextReplacement, PatternFill, RegionSwap, AnimationFrame>;

struct MutationSpec {
  Category category;
  MutationMagnitude magnitude;
  std::optional<Rect> region;
  std::uint64_t seed = 0;
};

/// Returns a mutated copy of `scene`. Throws UnsupportedCategory for
/// categories without an operator and InvalidMutation for out-of-bounds
/// regions, zero magnitudes, or a magnitude that does not match the category.
RasterImage apply_mutation(const RasterImage& scene, const MutationSpec& spec);

/// Most frequent color; ties broken by the smallest packed RGB value.
Rgb dominant_color(const RasterImage& image);
std::uint8_t blend_channel(std::uint8_t under, std::uint8_t over, double opacity);
Rgb blend(Rgb under, Rgb over, double opacity);
/// Color of pattern cell (x, y) relative to the pattern origin.
Rgb pattern_color(const PatternFill& fill, int x, int y, std::uint64_t seed);

// ---- dataset generator ----------------------------------------------------

struct GeneratorOptions {
  std::filesystem::path out_dir;
  int count = 17;
  std::vector<Category> categories;
  std::uint64_t seed = 0;
  double multi_label_fraction = 0.0;
  std::string name = "synthetic";
};

inline constexpr int kSceneWidth = 200;
inline constexpr int kSceneHeight = 320;

/// Writes cases/<id>/{reference,failure,diff}.png plus manifest.json under
/// out_dir and returns the manifest. Identical options give byte-identical
/// output. Each case's metadata carries the closed-form pixel difference expectation
/// (`expected_pixel_diff`) and the mutated footprint rectangles.
DatasetManifest generate_synthetic_dataset(const GeneratorOptions& options);

bool is_synthesizable(const Category& category);

}  // namespace snaptriage
