#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "khattat/bezier.hpp"

namespace khattat {

/// Grayscale coverage buffer, row-major, 1 = ink.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    RasterImage() = default;
    RasterImage(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * std::size_t(width) + std::size_t(x)]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * std::size_t(width) + std::size_t(x)]; }
    std::size_t size() const { return pixels.size(); }
    bool same_shape(const RasterImage& o) const { return width == o.width && height == o.height; }
};

/// Anti-aliasing band: coverage ramps over a signed distance of +-1 pixel.
inline constexpr double kSmoothingHalfWidth = 1.0;

/// Everything needed to push pixel gradients back onto control points.
class RenderTape {
public:
    struct BandSample {
        std::size_t pixel;    // row-major pixel index
        std::size_t segment;  // index into the glyph's segment table
        double t;             // closest-point parameter
        Vec2 direction;       // d(signed distance)/d(curve point), pixel units
        double slope;         // d(coverage)/d(signed distance)
    };
    struct GlyphTape {
        std::size_t first_point = 0;  // offset into the word's gathered points
        // Control-point indices (relative to first_point) of each segment.
        std::vector<std::array<std::size_t, 4>> segments;
        int x0 = 0, y0 = 0, w = 0, h = 0;  // pixel box the coverage lives in
        std::vector<double> coverage;       // w*h
        std::vector<BandSample> band;
        double coverage_at(int x, int y) const;
    };

    int size = 0;
    double scale = 1.0;  // pixels per canvas unit
    std::size_t point_count = 0;
    std::vector<GlyphTape> glyphs;
};

/// Soft even-odd rasterisation of the word at size x size pixels; each
/// glyph is filled with the even-odd rule and glyphs are composited with
/// "over". Deterministic.
RasterImage render(const WordLayout& word, int size);

/// render() that also records the tape needed by backpropagate().
RasterImage render(const WordLayout& word, int size, RenderTape& tape);

/// Vector-Jacobian product of render(): sum over pixels of
/// upstream[p] * d pixel[p] / d point, for every control point of the word
/// in gather_points(word, all glyphs) order, canvas units.
std::vector<Vec2> backpropagate(const RenderTape& tape, const RasterImage& upstream);

std::vector<Vec2> render_gradient(const WordLayout& word, int size, const RasterImage& upstream);

}  // namespace khattat
