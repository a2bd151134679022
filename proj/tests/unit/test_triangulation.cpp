#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "khattat/error.hpp"
#include "khattat/font.hpp"
#include "khattat/triangulation.hpp"
#include "test_support.hpp"

using namespace khattat;
using namespace khattat::testing;

namespace {

/// Brute-force empty-circumcircle check against every input point.
bool empty_circumcircles(const TriangulationAngles& tri, const std::vector<Vec2>& pts) {
    for (const Triangle& t : tri.triangles) {
        const Vec2 a = pts[t[0]], b = pts[t[1]], c = pts[t[2]];
        const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        const Vec2 center{(norm2(a) * (b.y - c.y) + norm2(b) * (c.y - a.y) + norm2(c) * (a.y - b.y)) / d,
                          (norm2(a) * (c.x - b.x) + norm2(b) * (a.x - c.x) + norm2(c) * (b.x - a.x)) / d};
        const double r = norm(a - center);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            if (k == t[0] || k == t[1] || k == t[2]) continue;
            if (norm(pts[k] - center) < r * (1.0 - 1e-9)) return false;
        }
    }
    return true;
}

void check_angle_sums(const TriangulationAngles& tri) {
    for (const auto& angles : tri.reference) {
        CHECK(std::abs(angles[0] + angles[1] + angles[2] - M_PI) < 1e-9);
        for (double a : angles) {
            CHECK(a > 0.0);
            CHECK(a < M_PI);
        }
    }
}

}  // namespace

TEST_CASE("equilateral triangle") {
    const std::vector<Vec2> pts = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
    const auto tri = triangulate(pts);
    REQUIRE(tri.triangles.size() == 1);
    for (double a : tri.reference[0]) CHECK(a == doctest::Approx(M_PI / 3).epsilon(1e-12));
    for (std::size_t j = 0; j < 3; ++j) CHECK(tri.angles_at(j).size() == 1);
}

TEST_CASE("unit square gives two right isosceles triangles") {
    const std::vector<Vec2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const auto tri = triangulate(pts);
    REQUIRE(tri.triangles.size() == 2);
    std::vector<double> all;
    for (const auto& a : tri.reference) all.insert(all.end(), a.begin(), a.end());
    std::sort(all.begin(), all.end());
    // Either diagonal yields {pi/4 x4, pi/2 x2}.
    const double expected[6] = {M_PI / 4, M_PI / 4, M_PI / 4, M_PI / 4, M_PI / 2, M_PI / 2};
    for (int i = 0; i < 6; ++i) CHECK(all[std::size_t(i)] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("degenerate inputs") {
    const std::vector<Vec2> line = {{0, 0}, {1, 1}, {2, 2}};
    CHECK_THROWS_AS(triangulate(line), GeometryError);
    const std::vector<Vec2> two = {{0, 0}, {1, 1}};
    CHECK_THROWS_AS(triangulate(two), GeometryError);

    const std::vector<Vec2> dup = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {1, 1}};
    const auto tri = triangulate(dup);
    CHECK_FALSE(tri.warnings.empty());
    check_angle_sums(tri);
}

TEST_CASE("crossing constraints are rejected") {
    const std::vector<Vec2> pts = {{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 3}, {1, -1}};
    const std::vector<Edge> edges = {{0, 2}, {1, 3}};
    CHECK_THROWS_AS(triangulate(pts, edges), GeometryError);
}

TEST_CASE("unconstrained random point sets are Delaunay") {
    auto rng = make_rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vec2> pts;
        const int n = 5 + trial * 7;
        for (int i = 0; i < n; ++i) pts.push_back(random_point(rng, 0, 600));
        const auto tri = triangulate(pts);
        CHECK(empty_circumcircles(tri, pts));
        check_angle_sums(tri);
        // Euler: a triangulation of n points with h hull points has 2n - 2 - h triangles.
        CHECK(tri.triangles.size() >= std::size_t(n - 2));
        CHECK(tri.triangles.size() <= std::size_t(2 * n - 5));
    }
}

TEST_CASE("contour edges are always present") {
    auto rng = make_rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        WordLayout w;
        GlyphPath g;
        g.contours.push_back(random_star_contour(rng, {300, 300}, 120, 200, 6 + trial % 5));
        g.contours.push_back(random_star_contour(rng, {300, 300}, 30, 60, 4));
        w.glyphs.push_back(g);
        const auto pts = gather_points(w, {0, 1});
        const auto edges = contour_edges(w, {0, 1});
        const auto tri = triangulate(pts, edges);
        for (const Edge& e : edges) CHECK(tri.has_edge(e.first, e.second));
        check_angle_sums(tri);
    }
}

TEST_CASE("real glyph outlines triangulate with every contour edge") {
    WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "BIRD");
    for (auto& g : w.glyphs) g = subdivide_to_budget(g, default_point_budget(g));
    for (std::size_t first = 0; first < 4; ++first) {
        const GlyphRange range{first, std::min<std::size_t>(first + 2, 4)};
        const auto pts = gather_points(w, range);
        const auto edges = contour_edges(w, range);
        const auto tri = triangulate(pts, edges);
        std::size_t missing = 0;
        for (const Edge& e : edges) missing += tri.has_edge(e.first, e.second) ? 0 : 1;
        CHECK(missing == 0);
        check_angle_sums(tri);
    }
}
