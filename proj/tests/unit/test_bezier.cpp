#include "doctest.h"

#include "khattat/bezier.hpp"
#include "khattat/error.hpp"
#include "test_support.hpp"

using namespace khattat;
using namespace khattat::testing;

TEST_CASE("de Casteljau split at 0.5 of a straight cubic") {
    const BezierSegment s{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    const auto [l, r] = s.split(0.5);
    // Hand-computed midpoints of the control polygon.
    CHECK(l.p0 == Vec2{0, 0});
    CHECK(l.p1 == Vec2{0.5, 0});
    CHECK(l.p2 == Vec2{1, 0});
    CHECK(l.p3 == Vec2{1.5, 0});
    CHECK(r.p0 == Vec2{1.5, 0});
    CHECK(r.p1 == Vec2{2, 0});
    CHECK(r.p2 == Vec2{2.5, 0});
    CHECK(r.p3 == Vec2{3, 0});
}

TEST_CASE("split halves trace the same locus") {
    auto rng = make_rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const BezierSegment s{random_point(rng, 0, 100), random_point(rng, 0, 100), random_point(rng, 0, 100),
                              random_point(rng, 0, 100)};
        const double cut = uniform(rng, 0.1, 0.9);
        const auto [l, r] = s.split(cut);
        for (int k = 0; k <= 10; ++k) {
            const double u = k / 10.0;
            CHECK(norm(l.eval(u) - s.eval(u * cut)) < 1e-11);
            CHECK(norm(r.eval(u) - s.eval(cut + u * (1 - cut))) < 1e-11);
        }
    }
}

TEST_CASE("contour closure and point bookkeeping") {
    const Contour c = square_contour({0, 0}, {10, 10});
    CHECK(c.segment_count() == 4);
    for (std::size_t k = 0; k < c.segment_count(); ++k) {
        CHECK(c.segment(k).p3 == c.segment((k + 1) % 4).p0);
    }
    CHECK(c.signed_area() == doctest::Approx(100.0));
    CHECK(square_contour({0, 0}, {10, 10}, false).signed_area() == doctest::Approx(-100.0));

    const BezierSegment open[2] = {{{0, 0}, {1, 0}, {2, 0}, {3, 0}}, {{3, 0}, {2, 1}, {1, 1}, {0.5, 0}}};
    CHECK_THROWS_AS(Contour::from_segments(open), GeometryError);
}

TEST_CASE("subdivide_to_budget") {
    auto rng = make_rng(11);
    GlyphPath g;
    g.contours.push_back(random_star_contour(rng, {300, 300}, 50, 120, 10));
    REQUIRE(g.point_count() == 30);

    SUBCASE("already at budget is a no-op") {
        const GlyphPath same = subdivide_to_budget(g, 30);
        CHECK(same.contours[0].points == g.contours[0].points);
    }
    SUBCASE("splits the longest segment first") {
        std::size_t longest = 0;
        double best = -1;
        for (std::size_t k = 0; k < 10; ++k) {
            const double len = g.contours[0].segment(k).chord_length(16);
            if (len > best) {
                best = len;
                longest = k;
            }
        }
        const GlyphPath once = subdivide_to_budget(g, 31);
        CHECK(once.point_count() == 33);
        const auto [l, r] = g.contours[0].segment(longest).split(0.5);
        CHECK(once.contours[0].segment(longest).p3 == l.p3);
        CHECK(once.contours[0].segment(longest + 1).p1 == r.p1);
    }
    SUBCASE("doubling the budget keeps area and every original anchor") {
        const GlyphPath twice = subdivide_to_budget(g, 60);
        CHECK(twice.point_count() >= 60);
        CHECK(twice.point_count() < 63);
        CHECK(twice.area() == doctest::Approx(g.area()).epsilon(1e-12));
        for (std::size_t k = 0; k < 10; ++k) {
            const Vec2 anchor = g.contours[0].points[3 * k];
            bool found = false;
            for (const Vec2& p : twice.contours[0].points) found = found || p == anchor;
            CHECK(found);
        }
    }
}

TEST_CASE("ties split the lowest contour and segment") {
    GlyphPath g;
    g.contours.push_back(square_contour({0, 0}, {10, 10}));
    g.contours.push_back(square_contour({20, 0}, {30, 10}));
    const GlyphPath out = subdivide_to_budget(g, 25);
    CHECK(out.contours[0].points.size() == 15);
    CHECK(out.contours[1].points.size() == 12);
    CHECK(out.contours[0].points[3] == Vec2{5, 0});
}

TEST_CASE("default point budget") {
    GlyphPath g;
    g.contours.push_back(square_contour({0, 0}, {100, 100}));
    // 15 * 1 + 400 / 20 = 35
    CHECK(default_point_budget(g) == 35);
    g.contours.push_back(square_contour({0, 0}, {2000, 2000}));
    // capped at 120
    CHECK(default_point_budget(g) == 120);
}

TEST_CASE("gather and scatter are inverse") {
    auto rng = make_rng(3);
    WordLayout w;
    for (int i = 0; i < 3; ++i) {
        GlyphPath g;
        g.contours.push_back(random_star_contour(rng, {100.0 + 150 * i, 300}, 20, 50, 5));
        w.glyphs.push_back(g);
    }
    auto pts = gather_points(w, {1, 3});
    CHECK(pts.size() == 30);
    for (auto& p : pts) p += Vec2{1, 2};
    WordLayout moved = w;
    scatter_points(moved, {1, 3}, pts);
    CHECK(moved.glyphs[0].contours[0].points == w.glyphs[0].contours[0].points);
    CHECK(moved.glyphs[1].contours[0].points[0] == w.glyphs[1].contours[0].points[0] + Vec2{1, 2});
    const auto edges = contour_edges(w, {1, 3});
    CHECK(edges.size() == 30);
    CHECK(edges[14] == std::pair<std::size_t, std::size_t>{14, 0});
    CHECK(edges[15] == std::pair<std::size_t, std::size_t>{15, 16});
}
