#include "khattat/augment.hpp"

#include <cmath>
#include <random>

#include "khattat/error.hpp"

namespace khattat {
namespace {

using Mat3 = std::array<double, 9>;

/// Homography taking src[i] to dst[i] for four correspondences.
Mat3 homography(const std::array<Vec2, 4>& src, const std::array<Vec2, 4>& dst) {
    double a[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        const Vec2 s = src[std::size_t(i)], d = dst[std::size_t(i)];
        double* r0 = a[2 * i];
        double* r1 = a[2 * i + 1];
        r0[0] = s.x; r0[1] = s.y; r0[2] = 1; r0[6] = -d.x * s.x; r0[7] = -d.x * s.y; r0[8] = d.x;
        r1[3] = s.x; r1[4] = s.y; r1[5] = 1; r1[6] = -d.y * s.x; r1[7] = -d.y * s.y; r1[8] = d.y;
    }
    for (int c = 0; c < 8; ++c) {
        int pivot = c;
        for (int r = c + 1; r < 8; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
        }
        if (std::abs(a[pivot][c]) < 1e-12) throw ImageError("degenerate perspective transform");
        for (int k = 0; k < 9; ++k) std::swap(a[c][k], a[pivot][k]);
        for (int r = 0; r < 8; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < 9; ++k) a[r][k] -= f * a[c][k];
        }
    }
    Mat3 h{};
    for (int i = 0; i < 8; ++i) h[std::size_t(i)] = a[i][8] / a[i][i];
    h[8] = 1.0;
    return h;
}

Vec2 apply_h(const Mat3& h, Vec2 p) {
    const double w = h[6] * p.x + h[7] * p.y + h[8];
    return {(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

}  // namespace

void AugmentationSpec::validate() const {
    if (!(perspective_jitter >= 0.0 && perspective_jitter <= 0.1)) {
        throw ImageError("perspective_jitter must be in [0, 0.1]");
    }
    if (!(crop_fraction >= 0.7 && crop_fraction <= 1.0)) throw ImageError("crop_fraction must be in [0.7, 1]");
}

Augmentation::Augmentation(int width, int height, const AugmentationSpec& spec) : width_(width), height_(height) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double w = width, h = height;

    const bool warp = spec.perspective_jitter > 0.0;
    Mat3 to_source{1, 0, 0, 0, 1, 0, 0, 0, 1};
    if (warp) {
        const std::array<Vec2, 4> corners = {Vec2{0, 0}, Vec2{w, 0}, Vec2{w, h}, Vec2{0, h}};
        std::array<Vec2, 4> moved = corners;
        for (Vec2& c : moved) {
            c.x += (2.0 * unit(rng) - 1.0) * spec.perspective_jitter * w;
            c.y += (2.0 * unit(rng) - 1.0) * spec.perspective_jitter * h;
        }
        to_source = homography(moved, corners);
    }
    const double f = spec.crop_fraction + (1.0 - spec.crop_fraction) * unit(rng);
    const double ox = (1.0 - f) * w * unit(rng);
    const double oy = (1.0 - f) * h * unit(rng);
    identity_ = !warp && f == 1.0;
    if (identity_) return;

    taps_.resize(std::size_t(width) * std::size_t(height));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            Vec2 p{ox + f * (x + 0.5), oy + f * (y + 0.5)};
            if (warp) p = apply_h(to_source, p);
            const double u = p.x - 0.5, v = p.y - 0.5;
            const double fx0 = std::floor(u), fy0 = std::floor(v);
            const double ax = u - fx0, ay = v - fy0;
            const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
            Tap tap{};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            const double ws[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
            for (int k = 0; k < 4; ++k) {
                const bool inside = xs[k] >= 0 && xs[k] < width && ys[k] >= 0 && ys[k] < height;
                tap.index[std::size_t(k)] = inside ? ys[k] * width + xs[k] : -1;
                tap.weight[std::size_t(k)] = inside ? ws[k] : 0.0;
            }
            taps_[std::size_t(y) * std::size_t(width) + std::size_t(x)] = tap;
        }
    }
}

RasterImage Augmentation::apply(const RasterImage& source) const {
    if (source.width != width_ || source.height != height_) throw ImageError("augmentation size mismatch");
    if (identity_) return source;
    RasterImage out(width_, height_);
    for (std::size_t k = 0; k < taps_.size(); ++k) {
        double v = 0.0;
        for (int i = 0; i < 4; ++i) {
            const auto idx = taps_[k].index[std::size_t(i)];
            if (idx >= 0) v += taps_[k].weight[std::size_t(i)] * source.pixels[std::size_t(idx)];
        }
        out.pixels[k] = v;
    }
    return out;
}

RasterImage Augmentation::transpose(const RasterImage& upstream) const {
    if (upstream.width != width_ || upstream.height != height_) throw ImageError("augmentation size mismatch");
    if (identity_) return upstream;
    RasterImage out(width_, height_);
    for (std::size_t k = 0; k < taps_.size(); ++k) {
        const double g = upstream.pixels[k];
        if (g == 0.0) continue;
        for (int i = 0; i < 4; ++i) {
            const auto idx = taps_[k].index[std::size_t(i)];
            if (idx >= 0) out.pixels[std::size_t(idx)] += taps_[k].weight[std::size_t(i)] * g;
        }
    }
    return out;
}

RasterImage augment(const RasterImage& image, const AugmentationSpec& spec) {
    return Augmentation(image.width, image.height, spec).apply(image);
}

}  // namespace khattat
