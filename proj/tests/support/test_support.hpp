#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "khattat/bezier.hpp"

namespace khattat::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec2 random_point(std::mt19937_64& rng, double lo, double hi) {
    return {uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

/// Relative error with an absolute floor, used by the gradient checks.
inline double rel_err(double a, double b, double floor) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Polygon-ish closed contour: a star-shaped loop of cubic segments around
/// `center` with radii in [r_lo, r_hi].
inline Contour random_star_contour(std::mt19937_64& rng, Vec2 center, double r_lo, double r_hi, int segments) {
    std::vector<Vec2> anchors;
    for (int k = 0; k < segments; ++k) {
        const double a = 2.0 * M_PI * (k + uniform(rng, -0.2, 0.2)) / segments;
        const double r = uniform(rng, r_lo, r_hi);
        anchors.push_back(center + Vec2{std::cos(a), std::sin(a)} * r);
    }
    Contour c;
    for (int k = 0; k < segments; ++k) {
        const Vec2 a = anchors[std::size_t(k)];
        const Vec2 b = anchors[std::size_t((k + 1) % segments)];
        const Vec2 jitter1 = random_point(rng, -0.08, 0.08) * norm(b - a);
        const Vec2 jitter2 = random_point(rng, -0.08, 0.08) * norm(b - a);
        c.points.push_back(a);
        c.points.push_back(lerp(a, b, 1.0 / 3.0) + jitter1);
        c.points.push_back(lerp(a, b, 2.0 / 3.0) + jitter2);
    }
    return c;
}

/// Axis-aligned square contour built from straight cubic segments.
inline Contour square_contour(Vec2 lo, Vec2 hi, bool clockwise = true) {
    std::vector<Vec2> corners = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
    if (!clockwise) corners = {lo, {lo.x, hi.y}, hi, {hi.x, lo.y}};
    Contour c;
    for (std::size_t k = 0; k < 4; ++k) {
        const Vec2 a = corners[k], b = corners[(k + 1) % 4];
        c.points.push_back(a);
        c.points.push_back(lerp(a, b, 1.0 / 3.0));
        c.points.push_back(lerp(a, b, 2.0 / 3.0));
    }
    return c;
}

inline WordLayout single_glyph_word(std::vector<Contour> contours) {
    WordLayout w;
    GlyphPath g;
    g.contours = std::move(contours);
    w.glyphs.push_back(std::move(g));
    w.advances.push_back(0.0);
    return w;
}

/// Central finite difference of a scalar function of a point array.
inline std::vector<Vec2> central_difference(const std::function<double(const std::vector<Vec2>&)>& f,
                                            std::vector<Vec2> points, double h) {
    std::vector<Vec2> grad(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (int axis = 0; axis < 2; ++axis) {
            double& coord = axis == 0 ? points[i].x : points[i].y;
            const double saved = coord;
            coord = saved + h;
            const double fp = f(points);
            coord = saved - h;
            const double fm = f(points);
            coord = saved;
            (axis == 0 ? grad[i].x : grad[i].y) = (fp - fm) / (2.0 * h);
        }
    }
    return grad;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("khattat_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Largest step-to-step rise of the `window`-sample moving average of `v`.
inline double worst_moving_average_rise(const std::vector<double>& v, std::size_t window) {
    double worst = 0.0, prev = 0.0;
    for (std::size_t i = window - 1; i < v.size(); ++i) {
        double a = 0.0;
        for (std::size_t k = i + 1 - window; k <= i; ++k) a += v[k];
        a /= double(window);
        if (i >= window) worst = std::max(worst, a - prev);
        prev = a;
    }
    return worst;
}

}  // namespace khattat::testing
