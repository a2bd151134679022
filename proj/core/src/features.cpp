#include "khattat/features.hpp"

#include <cmath>

#include "khattat/error.hpp"

namespace khattat {
namespace {

/// Separable Gaussian blur with zero padding. The operator is symmetric, so
/// it is its own adjoint.
RasterImage blur(const RasterImage& in, double sigma) {
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(std::size_t(2 * r + 1));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += k[std::size_t(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& v : k) v /= sum;

    const int w = in.width, h = in.height;
    RasterImage tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = std::max(-r, -x); i <= std::min(r, w - 1 - x); ++i) acc += k[std::size_t(i + r)] * in.at(x + i, y);
            tmp.at(x, y) = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = std::max(-r, -y); i <= std::min(r, h - 1 - y); ++i) acc += k[std::size_t(i + r)] * tmp.at(x, y + i);
            out.at(x, y) = acc;
        }
    }
    return out;
}

/// Constant sub-pixel shift: out(x, y) = bilinear in(x + dx, y + dy), zero outside.
struct Shift {
    int ix, iy;
    double wts[4];

    Shift(double dx, double dy) {
        const double fx0 = std::floor(dx), fy0 = std::floor(dy);
        ix = static_cast<int>(fx0);
        iy = static_cast<int>(fy0);
        const double ax = dx - fx0, ay = dy - fy0;
        wts[0] = (1 - ax) * (1 - ay);
        wts[1] = ax * (1 - ay);
        wts[2] = (1 - ax) * ay;
        wts[3] = ax * ay;
    }

    /// out += sign * shift(in)
    void apply(const RasterImage& in, RasterImage& out, double sign) const {
        for (int k = 0; k < 4; ++k) {
            const double wk = sign * wts[k];
            if (wk == 0.0) continue;
            const int ox = ix + (k & 1), oy = iy + (k >> 1);
            for (int y = std::max(0, -oy); y < std::min(in.height, in.height - oy); ++y) {
                for (int x = std::max(0, -ox); x < std::min(in.width, in.width - ox); ++x) {
                    out.at(x, y) += wk * in.at(x + ox, y + oy);
                }
            }
        }
    }

    /// out += sign * shift^T(g)
    void adjoint(const RasterImage& g, RasterImage& out, double sign) const {
        for (int k = 0; k < 4; ++k) {
            const double wk = sign * wts[k];
            if (wk == 0.0) continue;
            const int ox = ix + (k & 1), oy = iy + (k >> 1);
            for (int y = std::max(0, -oy); y < std::min(g.height, g.height - oy); ++y) {
                for (int x = std::max(0, -ox); x < std::min(g.width, g.width - ox); ++x) {
                    out.at(x + ox, y + oy) += wk * g.at(x, y);
                }
            }
        }
    }
};

struct Filter {
    std::size_t scale;
    Shift plus, minus;
};

std::vector<Filter> make_filters(const FilterBankExtractor::Params& p) {
    std::vector<Filter> filters;
    for (std::size_t s = 0; s < p.sigmas.size(); ++s) {
        for (int o = 0; o < p.orientations; ++o) {
            const double theta = M_PI * o / p.orientations;
            const double dx = p.sigmas[s] * std::cos(theta), dy = p.sigmas[s] * std::sin(theta);
            filters.push_back({s, Shift(dx, dy), Shift(-dx, -dy)});
        }
    }
    return filters;
}

int pooled(int n, int pool) { return (n + pool - 1) / pool; }

}  // namespace

FilterBankExtractor::FilterBankExtractor(Params params) : params_(params) {
    if (params_.orientations < 1 || params_.pool < 1 || !(params_.gain > 0.0)) {
        throw ImageError("invalid filter bank parameters");
    }
    for (double s : params_.sigmas) {
        if (!(s > 0.0)) throw ImageError("filter bank sigma must be positive");
    }
}

std::size_t FilterBankExtractor::feature_dim(int width, int height) const {
    return filter_count() * std::size_t(pooled(width, params_.pool)) * std::size_t(pooled(height, params_.pool));
}

std::vector<double> FilterBankExtractor::extract(const RasterImage& image) const {
    if (image.width < 1 || image.height < 1) throw ImageError("feature extraction needs a non-empty image");
    const int pw = pooled(image.width, params_.pool), ph = pooled(image.height, params_.pool);
    const std::size_t cells = std::size_t(pw) * std::size_t(ph);
    std::vector<double> out(feature_dim(image.width, image.height), 0.0);

    std::vector<RasterImage> blurred;
    for (double s : params_.sigmas) blurred.push_back(blur(image, s));
    const auto filters = make_filters(params_);
    for (std::size_t f = 0; f < filters.size(); ++f) {
        RasterImage r(image.width, image.height);
        filters[f].plus.apply(blurred[filters[f].scale], r, 1.0);
        filters[f].minus.apply(blurred[filters[f].scale], r, -1.0);
        double* cell = out.data() + f * cells;
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                cell[std::size_t(y / params_.pool) * std::size_t(pw) + std::size_t(x / params_.pool)] +=
                    std::tanh(params_.gain * r.at(x, y));
            }
        }
        for (int cy = 0; cy < ph; ++cy) {
            const int nh = std::min(params_.pool, image.height - cy * params_.pool);
            for (int cx = 0; cx < pw; ++cx) {
                const int nw = std::min(params_.pool, image.width - cx * params_.pool);
                cell[std::size_t(cy) * std::size_t(pw) + std::size_t(cx)] /= double(nw * nh);
            }
        }
    }
    return out;
}

FeatureLoss FilterBankExtractor::compare(std::span<const double> reference, const RasterImage& current) const {
    const std::size_t dim = feature_dim(current.width, current.height);
    if (reference.size() != dim) {
        throw ImageError("reference features have dimension " + std::to_string(reference.size()) + ", expected " +
                         std::to_string(dim));
    }
    const int pw = pooled(current.width, params_.pool);
    const std::size_t cells = dim / filter_count();

    std::vector<RasterImage> blurred;
    for (double s : params_.sigmas) blurred.push_back(blur(current, s));
    const auto filters = make_filters(params_);

    // Forward pass keeps the per-pixel activations for the backward pass.
    std::vector<RasterImage> act;
    std::vector<double> feats(dim, 0.0);
    for (std::size_t f = 0; f < filters.size(); ++f) {
        RasterImage r(current.width, current.height);
        filters[f].plus.apply(blurred[filters[f].scale], r, 1.0);
        filters[f].minus.apply(blurred[filters[f].scale], r, -1.0);
        for (double& v : r.pixels) v = std::tanh(params_.gain * v);
        double* cell = feats.data() + f * cells;
        for (int y = 0; y < current.height; ++y) {
            for (int x = 0; x < current.width; ++x) {
                cell[std::size_t(y / params_.pool) * std::size_t(pw) + std::size_t(x / params_.pool)] += r.at(x, y);
            }
        }
        act.push_back(std::move(r));
    }
    auto cell_count = [&](int cx, int cy) {
        const int nw = std::min(params_.pool, current.width - cx * params_.pool);
        const int nh = std::min(params_.pool, current.height - cy * params_.pool);
        return double(nw * nh);
    };

    FeatureLoss out;
    std::vector<double> dfeat(dim);
    for (std::size_t f = 0; f < filters.size(); ++f) {
        for (std::size_t c = 0; c < cells; ++c) {
            const int cx = int(c % std::size_t(pw)), cy = int(c / std::size_t(pw));
            const std::size_t i = f * cells + c;
            const double diff = feats[i] / cell_count(cx, cy) - reference[i];
            out.value += diff * diff;
            dfeat[i] = 2.0 * diff / double(dim) / cell_count(cx, cy);
        }
    }
    out.value /= double(dim);

    std::vector<RasterImage> dblur(params_.sigmas.size(), RasterImage(current.width, current.height));
    for (std::size_t f = 0; f < filters.size(); ++f) {
        RasterImage dr(current.width, current.height);
        const RasterImage& a = act[f];
        for (int y = 0; y < current.height; ++y) {
            for (int x = 0; x < current.width; ++x) {
                const double up = dfeat[f * cells + std::size_t(y / params_.pool) * std::size_t(pw) +
                                        std::size_t(x / params_.pool)];
                const double t = a.at(x, y);
                dr.at(x, y) = up * params_.gain * (1.0 - t * t);
            }
        }
        filters[f].plus.adjoint(dr, dblur[filters[f].scale], 1.0);
        filters[f].minus.adjoint(dr, dblur[filters[f].scale], -1.0);
    }
    out.gradient = RasterImage(current.width, current.height);
    for (std::size_t s = 0; s < dblur.size(); ++s) {
        const RasterImage g = blur(dblur[s], params_.sigmas[s]);
        for (std::size_t k = 0; k < g.size(); ++k) out.gradient.pixels[k] += g.pixels[k];
    }
    return out;
}

}  // namespace khattat
