#include <doctest.h>

#include <cmath>
#include <fstream>

#include "khattat/error.hpp"
#include "khattat/font.hpp"
#include "khattat/optimizer.hpp"
#include "khattat/raster.hpp"
#include "khattat/svg.hpp"
#include "test_support.hpp"

using namespace khattat;
using namespace khattat::testing;

namespace {

double max_pixel_diff(const RasterImage& a, const RasterImage& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.pixels[k] - b.pixels[k]));
    return m;
}

double area_of(std::string_view d) {
    const WordLayout w = parse_svg("<svg><path d=\"" + std::string(d) + "\"/></svg>");
    return w.glyphs.at(0).area();
}

}  // namespace

TEST_CASE("export, import and render reproduce the word") {
    auto rng = make_rng(11);
    WordLayout w = prepare_region(load_glyph_outlines(KHATTAT_TEST_FONT, "BIRD"), {0, 4});
    // Perturb so the round trip is not just of font coordinates.
    auto pts = gather_points(w, {0, 4});
    for (Vec2& p : pts) p += random_point(rng, -3.0, 3.0);
    scatter_points(w, {0, 4}, pts);

    const WordLayout back = parse_svg(to_svg(w));
    REQUIRE(back.glyphs.size() == 4);
    CHECK(gather_points(back, {0, 4}) == pts);
    CHECK(back.advances == w.advances);
    for (std::size_t g = 0; g < 4; ++g) {
        CHECK(back.glyphs[g].codepoint == w.glyphs[g].codepoint);
        CHECK(back.glyphs[g].letter_index == w.glyphs[g].letter_index);
        CHECK(back.glyphs[g].contours.size() == w.glyphs[g].contours.size());
    }
    CHECK(max_pixel_diff(render(back, 128), render(w, 128)) <= 1e-6);
}

TEST_CASE("document layout") {
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "Ob");
    const std::string svg = to_svg(w);
    CHECK(svg.find("viewBox=\"0 0 600 600\"") != std::string::npos);
    CHECK(svg.find("<rect width=\"600\" height=\"600\" fill=\"white\"/>") != std::string::npos);
    std::size_t paths = 0, subpaths = 0;
    for (auto p = svg.find("<path"); p != std::string::npos; p = svg.find("<path", p + 1)) ++paths;
    for (auto p = svg.find(" Z"); p != std::string::npos; p = svg.find(" Z", p + 1)) ++subpaths;
    CHECK(paths == 2);
    CHECK(subpaths == w.glyphs[0].contours.size() + w.glyphs[1].contours.size());
    CHECK(svg.find("fill-rule=\"evenodd\"") != std::string::npos);
    CHECK(svg.find("fill=\"black\"") != std::string::npos);
    CHECK(svg.find(" L") == std::string::npos);
}

TEST_CASE("holes survive the round trip") {
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "O");
    REQUIRE(w.glyphs[0].contours.size() == 2);
    const RasterImage img = render(parse_svg(to_svg(w)), 120);
    const Vec2 c = w.glyphs[0].control_box().center() * (120.0 / kCanvasSize);
    CHECK(img.at(int(c.x), int(c.y)) == 0.0);
    CHECK(parse_svg(to_svg(w)).glyphs[0].area() == doctest::Approx(w.glyphs[0].area()).epsilon(1e-12));
}

TEST_CASE("non-ink glyphs and right-to-left words") {
    WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "A B");
    w.script = Script::right_to_left;
    const WordLayout back = parse_svg(to_svg(w));
    CHECK(back.script == Script::right_to_left);
    CHECK_FALSE(back.glyphs[1].morphable);
    CHECK(back.glyphs[1].contours.empty());
}

TEST_CASE("path commands") {
    CHECK(area_of("M0 0 L100 0 L100 50 L0 50 Z") == doctest::Approx(5000));
    CHECK(area_of("m10 10 h50 v50 h-50 z") == doctest::Approx(2500));
    CHECK(area_of("M10,10 H60 V60 H10") == doctest::Approx(2500));
    CHECK(area_of("M0 0 10 0 10 10 0 10 Z") == doctest::Approx(100));
    CHECK(area_of("M0 0 l10 0 0 10 -10 0z") == doctest::Approx(100));
    // Parabolic segment: 2/3 of the bounding rectangle under the apex.
    CHECK(area_of("M0 0 Q50 100 100 0 Z") == doctest::Approx(100.0 * 50.0 * 2.0 / 3.0));
    CHECK(area_of("M0 0 q50 100 100 0 Z") == doctest::Approx(100.0 * 50.0 * 2.0 / 3.0));
    CHECK(area_of("M0 0 C0 -55.228 100 -55.228 100 0 C100 55.228 0 55.228 0 0Z") > 0.0);
    CHECK(area_of("M0 0 L1e1 0 L1e1 +1e1 L0 1e1 Z") == doctest::Approx(100));
    // Two subpaths, the second inside the first: even-odd hole.
    const WordLayout ring = parse_svg("<svg><path d='M0 0 H100 V100 H0 Z M25 25 H75 V75 H25 Z'/></svg>");
    CHECK(ring.glyphs[0].contours.size() == 2);
    const RasterImage img = render(ring, 120);
    CHECK(img.at(10, 10) == 0.0);
    CHECK(img.at(2, 2) == 1.0);
}

TEST_CASE("svg errors") {
    CHECK_THROWS_AS(to_svg(WordLayout{}), GeometryError);
    CHECK_THROWS_AS(parse_svg("<svg></svg>"), GeometryError);
    CHECK_THROWS_AS(parse_svg("<html/>"), GeometryError);
    CHECK_THROWS_AS(area_of("M0 0 A5 5 0 0 1 10 10 Z"), GeometryError);
    CHECK_THROWS_AS(area_of("10 10 L 5 5"), GeometryError);
    CHECK_THROWS_AS(area_of("M0 0 L10"), GeometryError);
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "I");
    CHECK_THROWS_AS(export_svg(w, "/nonexistent-dir/out.svg"), GeometryError);
    CHECK_THROWS_AS(import_svg("/nonexistent-dir/in.svg"), GeometryError);
}

TEST_CASE("file round trip") {
    const auto dir = scratch_dir("svg");
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "gh");
    export_svg(w, dir / "w.svg");
    CHECK(max_pixel_diff(render(import_svg(dir / "w.svg"), 96), render(w, 96)) <= 1e-6);
}
