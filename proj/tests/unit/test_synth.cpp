#include <doctest.h>

#include <random>
#include <sstream>

#include "snaptriage/synth.hpp"
#include "test_support.hpp"

using namespace snaptriage;
using testsupport::TempDir;

namespace {

long long channel_sum(Rgb a, Rgb b) { return std::abs(a.r - b.r) + std::abs(a.g - b.g) + std::abs(a.b - b.b); }

double as_score(long long abs_sum, const RasterImage& img) {
  return static_cast<double>(abs_sum) / 255.0 / (static_cast<double>(img.width()) * img.height() * 3);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::IoError;
}

std::vector<Rect> parse_footprint(const std::string& s) {
  std::vector<Rect> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ';');) {
    Rect r;
    char c;
    std::stringstream ps(part);
    ps >> r.x >> c >> r.y >> c >> r.width >> c >> r.height;
    out.push_back(r);
  }
  return out;
}

std::vector<Category> six() {
  return {Category(CategoryKind::ColorChange),  Category(CategoryKind::PaddingChange),
          Category(CategoryKind::ContentChange), Category(CategoryKind::LayoutChange),
          Category(CategoryKind::TextChange),   Category(CategoryKind::AnimationPhase)};
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("color shift on a uniform scene matches the closed form") {
  const int W = 64, H = 48;
  const RasterImage scene(W, H, Rgb{100, 100, 100});
  const RasterImage out = apply_mutation(
      scene, {Category(CategoryKind::ColorChange), ColorShift{50, 0, 0}, Rect{10, 10, 10, 10}, 0});
  CHECK(pixel_diff_score(scene, out) == doctest::Approx((100.0 * 50 / 255) / (W * H * 3)).epsilon(1e-14));
  CHECK(out.at(10, 10) == Rgb{150, 100, 100});
  CHECK(out.at(20, 20) == Rgb{100, 100, 100});
}

TEST_CASE("translation moves a block and leaves the background behind") {
  const Rgb bg{30, 40, 50}, block{200, 10, 90};
  RasterImage scene(60, 40, bg);
  const Rect r{10, 10, 12, 8};
  scene.fill(r, block);
  for (int shift : {-5, 3, 8}) {
    const RasterImage out =
        apply_mutation(scene, {Category(CategoryKind::PaddingChange), Translation{shift, 0, std::nullopt}, r, 0});
    // Two vertical strips of |shift| columns each flip between block and background.
    const long long expected = 2LL * std::abs(shift) * r.height * channel_sum(block, bg);
    CHECK(pixel_diff_score(scene, out) == doctest::Approx(as_score(expected, scene)).epsilon(1e-14));
    CHECK(out.at(r.x + shift + 0, r.y) == block);
  }
}

TEST_CASE("region swap and its degenerate case") {
  const Rgb bg{0, 0, 0}, a{120, 30, 30}, b{30, 120, 60};
  RasterImage scene(50, 20, bg);
  scene.fill({2, 2, 10, 10}, a);
  scene.fill({30, 2, 10, 10}, b);
  const RasterImage out =
      apply_mutation(scene, {Category(CategoryKind::LayoutChange), RegionSwap{{30, 2, 10, 10}}, Rect{2, 2, 10, 10}, 0});
  CHECK(pixel_diff_score(scene, out) == doctest::Approx(as_score(2LL * 100 * channel_sum(a, b), scene)).epsilon(1e-14));

  RasterImage twins(50, 20, bg);
  twins.fill({2, 2, 10, 10}, a);
  twins.fill({30, 2, 10, 10}, a);
  const RasterImage same =
      apply_mutation(twins, {Category(CategoryKind::LayoutChange), RegionSwap{{30, 2, 10, 10}}, Rect{2, 2, 10, 10}, 0});
  CHECK(pixel_diff_score(twins, same) == 0.0);
}

TEST_CASE("text replacement changes exactly the differing glyph cells") {
  const Rgb paper{220, 220, 220}, ink{20, 30, 40};
  RasterImage scene(80, 30, paper);
  const int scale = 2;
  draw_text(scene, 4, 4, "HELLO", ink, scale);
  const Rect region = text_extent("HELLO", scale, 4, 4);
  const RasterImage out = apply_mutation(
      scene, {Category(CategoryKind::TextChange), TextReplacement{"WORLD", ink, paper, scale}, region, 0});
  long long changed = 0;
  for (int y = 0; y < scene.height(); ++y)
    for (int x = 0; x < scene.width(); ++x) changed += scene.at(x, y) != out.at(x, y);
  CHECK(changed == glyph_cell_difference("HELLO", "WORLD") * scale * scale);
  CHECK(pixel_diff_score(scene, out) == doctest::Approx(as_score(changed * channel_sum(ink, paper), scene)).epsilon(1e-14));
}

TEST_CASE("font helpers") {
  CHECK(has_glyph('A'));
  CHECK(has_glyph('z'));
  CHECK(has_glyph('7'));
  CHECK(has_glyph(' '));
  CHECK_FALSE(has_glyph('!'));
  CHECK(text_extent("AB", 3).width == (2 * kGlyphAdvance - 1) * 3);
  CHECK(text_extent("AB", 3).height == kGlyphHeight * 3);
  CHECK(glyph_cell_difference("ABC", "ABC") == 0);
  CHECK(glyph_cell_difference("A", "B") > 0);
  // Independent count of differing cells from the row bitmasks.
  long long cells = 0;
  for (int row = 0; row < kGlyphHeight; ++row) {
    const int diff = glyph_row('E', row) ^ glyph_row('F', row);
    for (int bit = 0; bit < kGlyphWidth; ++bit) cells += (diff >> bit) & 1;
  }
  CHECK(glyph_cell_difference("E", "F") == cells);
}

TEST_CASE("animation frame ghost matches the closed form") {
  const Rgb bg{240, 240, 240}, element{40, 80, 160};
  RasterImage scene(120, 40, bg);
  const Rect rest{80, 10, 20, 12};
  scene.fill(rest, element);
  const double t = 0.5;
  const RasterImage out = apply_mutation(
      scene, {Category(CategoryKind::AnimationPhase), AnimationFrame{t, 0, 10, std::nullopt}, rest, 0});
  const Rgb ghost = blend(bg, element, t);
  CHECK(ghost == Rgb{140, 160, 200});
  CHECK(out.at(40, 10) == ghost);
  CHECK(out.at(rest.x, rest.y) == bg);
  const long long expected = rest.area() * (channel_sum(element, bg) + channel_sum(ghost, bg));
  CHECK(pixel_diff_score(scene, out) == doctest::Approx(as_score(expected, scene)).epsilon(1e-14));
}

TEST_CASE("pattern fill uses both colors") {
  const RasterImage scene(30, 30, Rgb{0, 0, 0});
  const PatternFill fill{FillPattern::Checker, Rgb{255, 0, 0}, Rgb{0, 0, 255}, 2};
  const RasterImage out = apply_mutation(scene, {Category(CategoryKind::ContentChange), fill, Rect{0, 0, 8, 8}, 0});
  CHECK(out.at(0, 0) != out.at(2, 0));
  CHECK(out.at(0, 0) == out.at(1, 1));
  CHECK(out.at(10, 10) == Rgb{0, 0, 0});
}

TEST_CASE("invalid mutations") {
  const RasterImage scene(40, 40, Rgb{1, 1, 1});
  CHECK(kind_of([&] {
          apply_mutation(scene, {Category(CategoryKind::PaddingChange), Translation{0, 0, std::nullopt}, Rect{5, 5, 5, 5}, 0});
        }) == ErrorKind::InvalidMutation);
  CHECK(kind_of([&] {
          apply_mutation(scene, {Category(CategoryKind::ColorChange), ColorShift{0, 0, 0}, std::nullopt, 0});
        }) == ErrorKind::InvalidMutation);
  CHECK(kind_of([&] {
          apply_mutation(scene, {Category(CategoryKind::ColorChange), ColorShift{5, 0, 0}, Rect{30, 30, 20, 20}, 0});
        }) == ErrorKind::InvalidMutation);
  CHECK(kind_of([&] {
          apply_mutation(scene, {Category(CategoryKind::TextChange), ColorShift{5, 0, 0}, Rect{0, 0, 5, 5}, 0});
        }) == ErrorKind::InvalidMutation);
  CHECK(kind_of([&] {
          apply_mutation(scene, {Category(CategoryKind::AnimationChange), ColorShift{5, 0, 0}, Rect{0, 0, 5, 5}, 0});
        }) == ErrorKind::UnsupportedCategory);
  CHECK(kind_of([&] {
          apply_mutation(scene, {Category(CategoryKind::LayoutChange), RegionSwap{{2, 2, 5, 5}}, Rect{0, 0, 5, 5}, 0});
        }) == ErrorKind::InvalidMutation);
}

TEST_CASE("generator is deterministic and byte-identical across runs") {
  TempDir a, b;
  GeneratorOptions opts{a.path(), 17, six(), 7, 0.12, "synthetic"};
  const DatasetManifest ma = generate_synthetic_dataset(opts);
  opts.out_dir = b.path();
  generate_synthetic_dataset(opts);
  CHECK(ma.cases.size() == 17);
  CHECK(testsupport::read_file(a / "manifest.json") == testsupport::read_file(b / "manifest.json"));
  for (const auto& c : ma.cases) {
    for (const char* f : {"reference.png", "failure.png", "diff.png"}) {
      const auto rel = std::filesystem::path("cases") / c.id / f;
      CHECK(testsupport::read_file(a.path() / rel) == testsupport::read_file(b.path() / rel));
    }
  }
  std::size_t dual = 0;
  for (const auto& c : ma.cases) dual += c.ground_truth.size() == 2;
  CHECK(dual == 2);  // round(17 * 0.12)
}

TEST_CASE("generated cases carry exact expectations and stay inside their footprints") {
  TempDir dir;
  const DatasetManifest m = generate_synthetic_dataset({dir.path(), 24, six(), 11, 0.25, "synthetic"});
  const DatasetManifest loaded = load_manifest(dir / "manifest.json", ManifestOptions{true});
  CHECK(loaded.cases.size() == m.cases.size());
  for (const auto& c : loaded.cases) {
    CAPTURE(c.id);
    REQUIRE(c.ignore_designation.has_value());
    CHECK(*c.ignore_designation == c.ground_truth.front());
    const RasterImage ref = load_image(c.reference_path), fail = load_image(c.failure_path);
    CHECK(ref.width() == kSceneWidth);
    CHECK(ref.height() == kSceneHeight);
    const double expected = std::stod(c.metadata.at("expected_pixel_diff"));
    CHECK(std::abs(testsupport::naive_pixel_diff(ref, fail) - expected) <= 1e-12);
    CHECK(expected > 0.0);
    const std::vector<Rect> footprint = parse_footprint(c.metadata.at("footprint"));
    for (int y = 0; y < ref.height(); ++y) {
      for (int x = 0; x < ref.width(); ++x) {
        if (ref.at(x, y) == fail.at(x, y)) continue;
        const bool inside = std::any_of(footprint.begin(), footprint.end(), [&](const Rect& r) { return r.contains(x, y); });
        if (!inside) {
          FAIL_CHECK("changed pixel outside footprint at " << x << "," << y);
          goto next_case;
        }
      }
    }
  next_case:;
  }
}

TEST_CASE("single COLOR_CHANGE case changes only its recolored region") {
  TempDir dir;
  const DatasetManifest m =
      generate_synthetic_dataset({dir.path(), 1, {Category(CategoryKind::ColorChange)}, 1, 0.0, "one"});
  REQUIRE(m.cases.size() == 1);
  const auto& c = m.cases[0];
  CHECK(c.ground_truth == testsupport::cats({"COLOR_CHANGE"}));
  const std::vector<Rect> fp = parse_footprint(c.metadata.at("footprint"));
  REQUIRE(fp.size() == 1);
  const RasterImage ref = load_image(c.reference_path), fail = load_image(c.failure_path);
  long long changed = 0;
  for (int y = 0; y < ref.height(); ++y)
    for (int x = 0; x < ref.width(); ++x) {
      const bool diff = ref.at(x, y) != fail.at(x, y);
      changed += diff;
      if (diff) CHECK(fp[0].contains(x, y));
    }
  CHECK(changed == fp[0].area());
}

TEST_CASE("generator rejects unsupported categories") {
  TempDir dir;
  CHECK(kind_of([&] {
          generate_synthetic_dataset({dir.path(), 1, {Category(CategoryKind::AnimationChange)}, 1, 0.0, "x"});
        }) == ErrorKind::UnsupportedCategory);
}

TEST_CASE("property: different seeds give different scenes, same seed same scene") {
  TempDir a, b, c;
  generate_synthetic_dataset({a.path(), 3, six(), 100, 0.0, "s"});
  generate_synthetic_dataset({b.path(), 3, six(), 100, 0.0, "s"});
  generate_synthetic_dataset({c.path(), 3, six(), 101, 0.0, "s"});
  const auto ref = std::filesystem::path("cases/case_001/reference.png");
  CHECK(testsupport::read_file(a.path() / ref) == testsupport::read_file(b.path() / ref));
  CHECK(testsupport::read_file(a.path() / ref) != testsupport::read_file(c.path() / ref));
}

}
