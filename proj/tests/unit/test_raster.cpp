#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "khattat/augment.hpp"
#include "khattat/error.hpp"
#include "khattat/font.hpp"
#include "khattat/image_io.hpp"
#include "khattat/raster.hpp"
#include "test_support.hpp"

using namespace khattat;
using namespace khattat::testing;

namespace {

/// Independent oracle: flatten each cubic finely and count even-odd ray
/// crossings for a 4x4 grid of subsamples per pixel.
RasterImage supersampled_oracle(const WordLayout& word, int size, int sub = 4, int steps = 256) {
    const double scale = double(size) / kCanvasSize;
    std::vector<std::vector<std::pair<Vec2, Vec2>>> edges;
    for (const GlyphPath& g : word.glyphs) {
        auto& list = edges.emplace_back();
        for (const Contour& c : g.contours) {
            for (std::size_t k = 0; k < c.segment_count(); ++k) {
                const BezierSegment s = c.segment(k);
                Vec2 prev = s.p0 * scale;
                for (int i = 1; i <= steps; ++i) {
                    const Vec2 p = s.eval(double(i) / steps) * scale;
                    list.emplace_back(prev, p);
                    prev = p;
                }
            }
        }
    }
    RasterImage out(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double sum = 0.0;
            for (int sy = 0; sy < sub; ++sy) {
                for (int sx = 0; sx < sub; ++sx) {
                    const Vec2 q{x + (sx + 0.5) / sub, y + (sy + 0.5) / sub};
                    bool any = false;
                    for (const auto& list : edges) {
                        bool in = false;
                        for (const auto& [a, b] : list) {
                            if ((a.y > q.y) != (b.y > q.y)) {
                                const double xi = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
                                if (xi > q.x) in = !in;
                            }
                        }
                        any = any || in;
                    }
                    sum += any ? 1.0 : 0.0;
                }
            }
            out.at(x, y) = sum / (sub * sub);
        }
    }
    return out;
}

double total(const RasterImage& img) {
    double s = 0.0;
    for (double v : img.pixels) s += v;
    return s;
}

Contour polygon_contour(const std::vector<Vec2>& corners) {
    Contour c;
    for (std::size_t k = 0; k < corners.size(); ++k) {
        const Vec2 a = corners[k], b = corners[(k + 1) % corners.size()];
        c.points.push_back(a);
        c.points.push_back(lerp(a, b, 1.0 / 3.0));
        c.points.push_back(lerp(a, b, 2.0 / 3.0));
    }
    return c;
}

RasterImage random_weights(std::mt19937_64& rng, int size) {
    RasterImage w(size, size);
    for (double& v : w.pixels) v = uniform(rng, -1.0, 1.0);
    return w;
}

double weighted_sum(const WordLayout& word, int size, const RasterImage& w) {
    const RasterImage img = render(word, size);
    double s = 0.0;
    for (std::size_t k = 0; k < img.size(); ++k) s += img.pixels[k] * w.pixels[k];
    return s;
}

}  // namespace

TEST_CASE("square coverage is 1 inside and 0 outside") {
    const WordLayout w = single_glyph_word({square_contour({150, 150}, {450, 450})});
    const RasterImage img = render(w, 60);
    CHECK(img.at(30, 30) == 1.0);
    CHECK(img.at(2, 2) == 0.0);
    CHECK(img.at(58, 30) == 0.0);
    // Pixels straddling a straight edge split their coverage symmetrically.
    CHECK(img.at(15, 30) == doctest::Approx(0.84375).epsilon(1e-12));
    CHECK(img.at(14, 30) + img.at(15, 30) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(total(img) == doctest::Approx(900.0).epsilon(2e-3));
}

TEST_CASE("orientation does not matter for even-odd fill") {
    const auto a = render(single_glyph_word({square_contour({100, 120}, {430, 470}, true)}), 64);
    const auto b = render(single_glyph_word({square_contour({100, 120}, {430, 470}, false)}), 64);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a.pixels[k] - b.pixels[k]));
    CHECK(worst <= 1e-12);
}

TEST_CASE("nested squares leave an even-odd hole") {
    for (bool same_direction : {true, false}) {
        const WordLayout w = single_glyph_word(
            {square_contour({100, 100}, {500, 500}), square_contour({200, 200}, {400, 400}, same_direction)});
        const RasterImage img = render(w, 60);
        CHECK(img.at(30, 30) == 0.0);
        CHECK(img.at(15, 30) == 1.0);
        CHECK(total(img) == doctest::Approx(1600.0 - 400.0).epsilon(2e-3));
    }
}

TEST_CASE("coverage matches a supersampled oracle within 2%") {
    SUBCASE("letter O") {
        const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "O");
        const RasterImage img = render(w, 64);
        const RasterImage ref = supersampled_oracle(w, 64);
        CHECK(std::abs(total(img) - total(ref)) / total(ref) < 0.02);
        CHECK(img.at(32, 32) == 0.0);  // counter
    }
    SUBCASE("pentagram") {
        std::vector<Vec2> star;
        for (int k = 0; k < 5; ++k) {
            const double a = -M_PI / 2 + k * 4.0 * M_PI / 5.0;
            star.push_back(Vec2{300, 310} + Vec2{std::cos(a), std::sin(a)} * 250.0);
        }
        const WordLayout w = single_glyph_word({polygon_contour(star)});
        const RasterImage img = render(w, 64);
        const RasterImage ref = supersampled_oracle(w, 64);
        CHECK(std::abs(total(img) - total(ref)) / total(ref) < 0.02);
        CHECK(img.at(32, 33) == 0.0);  // even-odd centre is empty
    }
    SUBCASE("bow-tie") {
        const WordLayout w = single_glyph_word({polygon_contour({{100, 100}, {500, 500}, {500, 100}, {100, 500}})});
        const RasterImage img = render(w, 64);
        const RasterImage ref = supersampled_oracle(w, 64);
        CHECK(std::abs(total(img) - total(ref)) / total(ref) < 0.02);
    }
    SUBCASE("random curved stars") {
        auto rng = make_rng(11);
        for (int i = 0; i < 5; ++i) {
            const WordLayout w = single_glyph_word({random_star_contour(rng, {300, 300}, 120, 260, 7)});
            const RasterImage img = render(w, 64);
            const RasterImage ref = supersampled_oracle(w, 64);
            CHECK(std::abs(total(img) - total(ref)) / total(ref) < 0.02);
        }
    }
}

TEST_CASE("coverage stays in [0, 1] and overlapping glyphs composite with over") {
    WordLayout w = single_glyph_word({square_contour({100, 100}, {400, 400})});
    GlyphPath second;
    second.contours = {square_contour({250, 250}, {550, 550})};
    w.glyphs.push_back(second);
    w.advances.push_back(0.0);
    const RasterImage img = render(w, 60);
    for (double v : img.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(img.at(32, 32) == 1.0);
    CHECK(total(img) == doctest::Approx(900.0 + 900.0 - 225.0).epsilon(2e-3));
}

TEST_CASE("subdivision leaves the render unchanged") {
    auto rng = make_rng(5);
    for (int i = 0; i < 5; ++i) {
        WordLayout w = single_glyph_word({random_star_contour(rng, {300, 300}, 100, 250, 6)});
        const RasterImage before = render(w, 96);
        w.glyphs[0] = subdivide_to_budget(w.glyphs[0], w.glyphs[0].point_count() + 30);
        const RasterImage after = render(w, 96);
        double worst = 0.0;
        for (std::size_t k = 0; k < before.size(); ++k) worst = std::max(worst, std::abs(before.pixels[k] - after.pixels[k]));
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("integer pixel translation shifts the image") {
    auto rng = make_rng(8);
    const Contour c = random_star_contour(rng, {280, 280}, 80, 160, 5);
    Contour shifted = c;
    for (Vec2& p : shifted.points) p += Vec2{50.0, 30.0};  // 5 and 3 pixels at size 60
    const RasterImage a = render(single_glyph_word({c}), 60);
    const RasterImage b = render(single_glyph_word({shifted}), 60);
    double worst = 0.0;
    for (int y = 0; y < 50; ++y) {
        for (int x = 0; x < 50; ++x) worst = std::max(worst, std::abs(a.at(x, y) - b.at(x + 5, y + 3)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("rendering is deterministic") {
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "BIRD");
    CHECK(render(w, 128).pixels == render(w, 128).pixels);
}

TEST_CASE("zero upstream gives a zero gradient") {
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "ab");
    const auto g = render_gradient(w, 64, RasterImage(64, 64));
    CHECK(g.size() == w.glyphs[0].point_count() + w.glyphs[1].point_count());
    for (Vec2 v : g) CHECK((v.x == 0.0 && v.y == 0.0));
}

TEST_CASE("render gradient matches finite differences on random squares") {
    auto rng = make_rng(21);
    const int size = 64;
    for (int trial = 0; trial < 6; ++trial) {
        const Vec2 lo = random_point(rng, 80, 200);
        const Vec2 hi = lo + random_point(rng, 150, 300);
        Contour c = square_contour(lo, hi);
        for (Vec2& p : c.points) p += random_point(rng, -15, 15);
        WordLayout w = single_glyph_word({c});
        const RasterImage weights = random_weights(rng, size);
        const auto analytic = render_gradient(w, size, weights);
        const auto numeric = central_difference(
            [&](const std::vector<Vec2>& pts) {
                WordLayout tmp = w;
                tmp.glyphs[0].contours[0].points = pts;
                return weighted_sum(tmp, size, weights);
            },
            w.glyphs[0].contours[0].points, 1e-3);
        double max_g = 0.0;
        for (Vec2 g : numeric) max_g = std::max({max_g, std::abs(g.x), std::abs(g.y)});
        for (std::size_t i = 0; i < numeric.size(); ++i) {
            CHECK(rel_err(analytic[i].x, numeric[i].x, 0.05 * max_g) <= 5e-2);
            CHECK(rel_err(analytic[i].y, numeric[i].y, 0.05 * max_g) <= 5e-2);
        }
    }
}

TEST_CASE("directional derivative matches for multi-glyph words") {
    auto rng = make_rng(3);
    WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "ob");
    const int size = 96;
    const RasterImage weights = random_weights(rng, size);
    const auto grad = render_gradient(w, size, weights);
    std::vector<Vec2> dir(grad.size());
    for (Vec2& d : dir) d = random_point(rng, -1, 1);
    double analytic = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) analytic += dot(grad[i], dir[i]);
    const auto base = gather_points(w, {0, w.glyphs.size()});
    auto shifted = [&](double h) {
        std::vector<Vec2> pts = base;
        for (std::size_t i = 0; i < pts.size(); ++i) pts[i] += dir[i] * h;
        WordLayout tmp = w;
        scatter_points(tmp, {0, tmp.glyphs.size()}, pts);
        return weighted_sum(tmp, size, weights);
    };
    const double h = 1e-3;
    const double numeric = (shifted(h) - shifted(-h)) / (2 * h);
    CHECK(rel_err(analytic, numeric, 1e-9) <= 1e-2);
}

TEST_CASE("gradient is local to the band around the curve") {
    const WordLayout w = single_glyph_word({square_contour({150, 150}, {450, 450})});
    RasterImage upstream(60, 60);
    upstream.at(30, 30) = 1.0;  // deep inside
    upstream.at(2, 2) = 1.0;    // far outside
    for (Vec2 v : render_gradient(w, 60, upstream)) CHECK((v.x == 0.0 && v.y == 0.0));
}

TEST_CASE("png round trip") {
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "g");
    const RasterImage img = render(w, 80);
    const auto path = std::filesystem::temp_directory_path() / "khattat_raster_roundtrip.png";
    write_png(path, img);
    const RasterImage back = read_png(path);
    REQUIRE(back.same_shape(img));
    for (std::size_t k = 0; k < img.size(); ++k) CHECK(std::abs(back.pixels[k] - img.pixels[k]) <= 0.5 / 255 + 1e-12);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_png(path), ImageError);
}

TEST_CASE("augmentation is a linear map whose transpose is exact") {
    auto rng = make_rng(17);
    const int size = 24;
    AugmentationSpec spec;
    spec.seed = 99;
    const Augmentation aug(size, size, spec);
    CHECK_FALSE(aug.identity());
    const RasterImage x = random_weights(rng, size);
    const RasterImage y = random_weights(rng, size);
    const RasterImage ax = aug.apply(x);
    const RasterImage aty = aug.transpose(y);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        lhs += ax.pixels[k] * y.pixels[k];
        rhs += x.pixels[k] * aty.pixels[k];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("augmentation identity and determinism") {
    auto rng = make_rng(2);
    const RasterImage x = random_weights(rng, 32);
    AugmentationSpec none;
    none.perspective_jitter = 0.0;
    none.crop_fraction = 1.0;
    CHECK(augment(x, none).pixels == x.pixels);

    AugmentationSpec spec;
    spec.seed = 4;
    CHECK(augment(x, spec).pixels == augment(x, spec).pixels);
    spec.seed = 5;
    CHECK(augment(x, spec).pixels != augment(x, AugmentationSpec{4}).pixels);

    AugmentationSpec bad;
    bad.crop_fraction = 0.5;
    CHECK_THROWS_AS(bad.validate(), ImageError);
    bad = {};
    bad.perspective_jitter = 0.2;
    CHECK_THROWS_AS(bad.validate(), ImageError);
}

TEST_CASE("crop only keeps the ink inside the crop box") {
    // A uniform image stays uniform away from the border under pure crop.
    RasterImage x(40, 40, 1.0);
    AugmentationSpec spec;
    spec.seed = 12;
    spec.perspective_jitter = 0.0;
    const RasterImage y = augment(x, spec);
    for (int py = 2; py < 38; ++py) {
        for (int px = 2; px < 38; ++px) CHECK(y.at(px, py) == doctest::Approx(1.0).epsilon(1e-12));
    }
}
