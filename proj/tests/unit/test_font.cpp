#include "doctest.h"

#include <algorithm>

#include "khattat/error.hpp"
#include "khattat/font.hpp"

using namespace khattat;

namespace {

double outline_area(const FontOutline& o) {
    double a = 0.0;
    for (const auto& segs : o.contours) a += Contour::from_segments(segs).signed_area();
    return std::abs(a);
}

void check_closed_and_inside(const WordLayout& w) {
    for (const auto& g : w.glyphs) {
        for (const auto& c : g.contours) {
            REQUIRE(c.points.size() % 3 == 0);
            for (std::size_t k = 0; k < c.segment_count(); ++k) {
                CHECK(c.segment(k).p3 == c.segment((k + 1) % c.segment_count()).p0);
                CHECK(c.segment(k).finite());
            }
            for (const Vec2& p : c.points) {
                CHECK(p.x >= 0.0);
                CHECK(p.x <= kCanvasSize);
                CHECK(p.y >= 0.0);
                CHECK(p.y <= kCanvasSize);
            }
        }
    }
}

}  // namespace

TEST_CASE("single-contour letter") {
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "I");
    REQUIRE(w.size() == 1);
    CHECK(w.glyphs[0].contours.size() == 1);
    CHECK(w.glyphs[0].area() > 0.0);
    CHECK(w.glyphs[0].morphable);
    check_closed_and_inside(w);
}

TEST_CASE("BIRD contour structure matches an independent font dump") {
    // Contour counts from fontTools: B=3, I=1, R=2, D=2.
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "BIRD");
    REQUIRE(w.size() == 4);
    CHECK(w.glyphs[0].contours.size() == 3);
    CHECK(w.glyphs[1].contours.size() == 1);
    CHECK(w.glyphs[2].contours.size() == 2);
    CHECK(w.glyphs[3].contours.size() == 2);
    for (int i = 0; i < 4; ++i) CHECK(w.glyphs[std::size_t(i)].letter_index == i);
    check_closed_and_inside(w);

    // Word spans at most 90% of the canvas width.
    Box ink;
    for (const auto& g : w.glyphs) ink.expand(g.control_box());
    CHECK(ink.width() <= 0.9 * kCanvasSize + 1e-9);
    CHECK(w.advances[0] < w.advances[1]);
}

TEST_CASE("outline areas match an independent font dump (exact degree elevation)") {
    // Even-odd areas in font units from fontTools' AreaPen.
    const FontFace face = FontFace::load(KHATTAT_TEST_FONT);
    CHECK(face.units_per_em() == 2048);
    CHECK(outline_area(face.outline(face.glyph_index(U'I'))) == doctest::Approx(301586.0).epsilon(1e-12));
    CHECK(outline_area(face.outline(face.glyph_index(U'B'))) == doctest::Approx(853955.5833333331).epsilon(1e-12));
    CHECK(outline_area(face.outline(face.glyph_index(U'O'))) == doctest::Approx(785709.5833333333).epsilon(1e-12));
    // Composite glyph (e + acute).
    const FontOutline e_acute = face.outline(face.glyph_index(U'é'));
    CHECK(e_acute.contours.size() == 3);
    CHECK(outline_area(e_acute) == doctest::Approx(635586.75).epsilon(1e-12));
    CHECK(face.advance_width(face.glyph_index(U'B')) == 1405);
}

TEST_CASE("error paths") {
    CHECK_THROWS_AS(load_glyph_outlines(KHATTAT_TEST_FONT, ""), FontError);
    CHECK_THROWS_AS(load_glyph_outlines("/nonexistent/font.ttf", "A"), FontError);
    try {
        (void)load_glyph_outlines(KHATTAT_TEST_FONT, "A中");
        FAIL("expected MissingGlyphError");
    } catch (const MissingGlyphError& e) {
        CHECK(e.codepoint() == U'中');
        CHECK(std::string(e.what()).find("U+4E2D") != std::string::npos);
    }
    CHECK_THROWS_AS(FontFace::from_bytes({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}), FontError);
}

TEST_CASE("space is flagged non-morphable") {
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "A B");
    REQUIRE(w.size() == 3);
    CHECK(w.glyphs[0].morphable);
    CHECK_FALSE(w.glyphs[1].morphable);
    CHECK(w.glyphs[1].contours.empty());
}

TEST_CASE("right-to-left words keep logical order") {
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "بيت");
    REQUIRE(w.size() == 3);
    CHECK(w.script == Script::right_to_left);
    CHECK(w.glyphs[0].codepoint == U'ب');
    // First logical letter sits at the right.
    CHECK(w.glyphs[0].control_box().center().x > w.glyphs[2].control_box().center().x);
    check_closed_and_inside(w);
}

TEST_CASE("preshaped glyph ids") {
    // Glyph ids 37 and 44 are 'B' and 'I' in DejaVuSans.
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "37, 44", ShapingMode::preshaped_ids);
    REQUIRE(w.size() == 2);
    CHECK(w.glyphs[0].contours.size() == 3);
    CHECK(w.glyphs[1].contours.size() == 1);
    CHECK_THROWS_AS(load_glyph_outlines(KHATTAT_TEST_FONT, "37 x", ShapingMode::preshaped_ids), FontError);
    CHECK_THROWS_AS(load_glyph_outlines(KHATTAT_TEST_FONT, "999999", ShapingMode::preshaped_ids), FontError);
}
