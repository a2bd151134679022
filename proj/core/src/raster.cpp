#include "khattat/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "khattat/error.hpp"

namespace khattat {
namespace {

struct MonotonePiece {
    std::size_t segment;
    double t0, t1;
    double y0, y1;
};

/// Parameters in (0, 1) where y'(t) vanishes, sorted.
std::vector<double> y_extrema(const BezierSegment& s) {
    const double a = s.p1.y - s.p0.y, b = s.p2.y - s.p1.y, c = s.p3.y - s.p2.y;
    const double qa = a - 2.0 * b + c, qb = 2.0 * (b - a), qc = a;
    std::vector<double> roots;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
    if (std::abs(qa) <= 1e-12 * scale) {
        if (std::abs(qb) > 1e-12 * scale) roots.push_back(-qc / qb);
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (qb + std::copysign(sq, qb));
            roots.push_back(q / qa);
            if (q != 0.0) roots.push_back(qc / q);
        }
    }
    std::vector<double> inside;
    for (double r : roots) {
        if (r > 1e-12 && r < 1.0 - 1e-12) inside.push_back(r);
    }
    std::sort(inside.begin(), inside.end());
    inside.erase(std::unique(inside.begin(), inside.end()), inside.end());
    return inside;
}

/// Solve y(t) = target on a y-monotone parameter interval.
double solve_monotone(const BezierSegment& s, const MonotonePiece& p, double target) {
    double lo = p.t0, hi = p.t1;
    const bool increasing = p.y1 > p.y0;
    double t = lo + (hi - lo) * (target - p.y0) / (p.y1 - p.y0);
    for (int it = 0; it < 100; ++it) {
        const double y = s.eval(t).y - target;
        if ((y < 0.0) == increasing) lo = t;
        else hi = t;
        const double dy = s.derivative(t).y;
        double next = dy != 0.0 ? t - y / dy : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-15 || hi - lo <= 1e-15) {
            t = next;
            break;
        }
        t = next;
    }
    return t;
}

struct Closest {
    double t;
    double dist2;
};

/// Closest point on the cubic to q. Dense sampling picks the basin, then a
/// bracketed Newton iteration on (B - q).B' = 0 polishes it.
Closest closest_point(const BezierSegment& s, Vec2 q, int samples) {
    int best_i = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
        const double d = norm2(s.eval(static_cast<double>(i) / samples) - q);
        if (d < best_d) {
            best_d = d;
            best_i = i;
        }
    }
    auto g = [&](double t) { return dot(s.eval(t) - q, s.derivative(t)); };
    double lo = std::max(0, best_i - 1) / static_cast<double>(samples);
    double hi = std::min(samples, best_i + 1) / static_cast<double>(samples);
    double glo = g(lo), ghi = g(hi);

    Closest result{static_cast<double>(best_i) / samples, best_d};
    auto consider = [&](double t) {
        const double d = norm2(s.eval(t) - q);
        if (d < result.dist2 || (d == result.dist2 && t < result.t)) result = {t, d};
    };
    if (glo >= 0.0 && lo == 0.0) consider(0.0);
    if (ghi <= 0.0 && hi == 1.0) consider(1.0);
    if (glo < 0.0 && ghi > 0.0) {
        double t = result.t;
        if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
        for (int it = 0; it < 60; ++it) {
            const Vec2 r = s.eval(t) - q;
            const Vec2 d1 = s.derivative(t);
            const double gt = dot(r, d1);
            if (gt < 0.0) lo = t;
            else hi = t;
            const double gp = dot(d1, d1) + dot(r, s.second_derivative(t));
            double next = gp > 0.0 ? t - gt / gp : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            const bool done = std::abs(next - t) <= 1e-15 || hi - lo <= 1e-15;
            t = next;
            if (done) break;
        }
        // Equal distances resolve to the smaller parameter for determinism.
        const double d = norm2(s.eval(t) - q);
        if (d <= result.dist2) result = {t, d};
    }
    return result;
}

double smooth_step(double z) {
    if (z <= -1.0) return 0.0;
    if (z >= 1.0) return 1.0;
    const double u = 0.5 * (z + 1.0);
    return u * u * (3.0 - 2.0 * u);
}

double smooth_step_slope(double z) {
    if (z <= -1.0 || z >= 1.0) return 0.0;
    const double u = 0.5 * (z + 1.0);
    return 3.0 * u * (1.0 - u);
}

RenderTape::GlyphTape rasterize_glyph(const GlyphPath& glyph, std::size_t first_point, int size, double scale) {
    RenderTape::GlyphTape tape;
    tape.first_point = first_point;

    std::vector<BezierSegment> segs;
    std::size_t base = 0;
    Box box;
    for (const Contour& c : glyph.contours) {
        const std::size_t n = c.points.size();
        for (std::size_t k = 0; k < c.segment_count(); ++k) {
            BezierSegment s = c.segment(k);
            s.p0 *= scale;
            s.p1 *= scale;
            s.p2 *= scale;
            s.p3 *= scale;
            if (!s.finite()) throw GeometryError("non-finite control point in glyph");
            for (Vec2 p : {s.p0, s.p1, s.p2, s.p3}) box.expand(p);
            segs.push_back(s);
            tape.segments.push_back({base + 3 * k, base + 3 * k + 1, base + 3 * k + 2, base + (3 * k + 3) % n});
        }
        base += n;
    }
    if (segs.empty()) return tape;

    const double band = kSmoothingHalfWidth;
    const int x0 = std::max(0, static_cast<int>(std::floor(box.lo.x - band - 1.0)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.lo.y - band - 1.0)));
    const int x1 = std::min(size, static_cast<int>(std::ceil(box.hi.x + band + 1.0)));
    const int y1 = std::min(size, static_cast<int>(std::ceil(box.hi.y + band + 1.0)));
    if (x1 <= x0 || y1 <= y0) return tape;
    tape.x0 = x0;
    tape.y0 = y0;
    tape.w = x1 - x0;
    tape.h = y1 - y0;
    const std::size_t area = std::size_t(tape.w) * std::size_t(tape.h);

    // Even-odd parity from horizontal ray crossings of y-monotone pieces.
    // A piece counts rows with min(y) <= row < max(y).
    std::vector<MonotonePiece> pieces;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        std::vector<double> cuts{0.0};
        for (double r : y_extrema(segs[i])) cuts.push_back(r);
        cuts.push_back(1.0);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double ya = segs[i].eval(cuts[k]).y, yb = segs[i].eval(cuts[k + 1]).y;
            if (ya == yb) continue;
            pieces.push_back({i, cuts[k], cuts[k + 1], ya, yb});
        }
    }
    std::vector<std::vector<double>> crossings(std::size_t(tape.h));
    for (const MonotonePiece& p : pieces) {
        const double ymin = std::min(p.y0, p.y1), ymax = std::max(p.y0, p.y1);
        const int r0 = std::max(y0, static_cast<int>(std::ceil(ymin - 0.5)));
        const int r1 = std::min(y1 - 1, static_cast<int>(std::ceil(ymax - 0.5)) - 1);
        for (int row = r0; row <= r1; ++row) {
            const double yc = row + 0.5;
            if (!(yc >= ymin && yc < ymax)) continue;
            const double t = solve_monotone(segs[p.segment], p, yc);
            crossings[std::size_t(row - y0)].push_back(segs[p.segment].eval(t).x);
        }
    }
    std::vector<unsigned char> inside(area, 0);
    for (int row = 0; row < tape.h; ++row) {
        auto& xs = crossings[std::size_t(row)];
        std::sort(xs.begin(), xs.end());
        std::size_t passed = 0;
        for (int col = 0; col < tape.w; ++col) {
            const double xc = x0 + col + 0.5;
            while (passed < xs.size() && xs[passed] <= xc) ++passed;
            inside[std::size_t(row) * std::size_t(tape.w) + std::size_t(col)] = ((xs.size() - passed) & 1U) ? 1 : 0;
        }
    }

    // Unsigned distance to the nearest curve, recorded only inside the band.
    struct Near {
        double d2;
        std::size_t segment;
        double t;
        bool hit;
    };
    std::vector<Near> nearest(area, Near{band * band, 0, 0.0, false});
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const BezierSegment& s = segs[i];
        Box sb;
        for (Vec2 p : {s.p0, s.p1, s.p2, s.p3}) sb.expand(p);
        const int cx0 = std::max(x0, static_cast<int>(std::floor(sb.lo.x - band - 0.5)));
        const int cy0 = std::max(y0, static_cast<int>(std::floor(sb.lo.y - band - 0.5)));
        const int cx1 = std::min(x1 - 1, static_cast<int>(std::ceil(sb.hi.x + band - 0.5)));
        const int cy1 = std::min(y1 - 1, static_cast<int>(std::ceil(sb.hi.y + band - 0.5)));
        const double hull_len = norm(s.p1 - s.p0) + norm(s.p2 - s.p1) + norm(s.p3 - s.p2);
        const int samples = std::clamp(static_cast<int>(std::ceil(hull_len)), 8, 256);
        for (int py = cy0; py <= cy1; ++py) {
            for (int px = cx0; px <= cx1; ++px) {
                const Vec2 q{px + 0.5, py + 0.5};
                const double dx = std::max({sb.lo.x - q.x, 0.0, q.x - sb.hi.x});
                const double dy = std::max({sb.lo.y - q.y, 0.0, q.y - sb.hi.y});
                Near& n = nearest[std::size_t(py - y0) * std::size_t(tape.w) + std::size_t(px - x0)];
                if (dx * dx + dy * dy >= n.d2) continue;
                const Closest c = closest_point(s, q, samples);
                if (c.dist2 < n.d2) n = {c.dist2, i, c.t, true};
            }
        }
    }

    tape.coverage.assign(area, 0.0);
    for (std::size_t k = 0; k < area; ++k) {
        const bool in = inside[k] != 0;
        const Near& n = nearest[k];
        if (!n.hit) {
            tape.coverage[k] = in ? 1.0 : 0.0;
            continue;
        }
        const double d = std::sqrt(n.d2);
        const double sign = in ? 1.0 : -1.0;
        const double z = sign * d / band;
        tape.coverage[k] = smooth_step(z);
        const double slope = smooth_step_slope(z) / band;
        if (slope == 0.0 || d == 0.0) continue;
        const int row = static_cast<int>(k / std::size_t(tape.w));
        const int col = static_cast<int>(k % std::size_t(tape.w));
        const Vec2 q{x0 + col + 0.5, y0 + row + 0.5};
        const Vec2 dir = (segs[n.segment].eval(n.t) - q) * (sign / d);
        const std::size_t pixel = std::size_t(y0 + row) * std::size_t(size) + std::size_t(x0 + col);
        tape.band.push_back({pixel, n.segment, n.t, dir, slope});
    }
    return tape;
}

}  // namespace

double RenderTape::GlyphTape::coverage_at(int x, int y) const {
    if (x < x0 || y < y0 || x >= x0 + w || y >= y0 + h) return 0.0;
    return coverage[std::size_t(y - y0) * std::size_t(w) + std::size_t(x - x0)];
}

RasterImage render(const WordLayout& word, int size, RenderTape& tape) {
    if (size < 1) throw ImageError("render size must be positive");
    tape = RenderTape{};
    tape.size = size;
    tape.scale = static_cast<double>(size) / kCanvasSize;
    std::size_t offset = 0;
    for (const GlyphPath& g : word.glyphs) {
        tape.glyphs.push_back(rasterize_glyph(g, offset, size, tape.scale));
        offset += g.point_count();
    }
    tape.point_count = offset;

    // Composite with "over": transparency multiplies.
    RasterImage clear(size, size, 1.0);
    for (const auto& gt : tape.glyphs) {
        for (int y = 0; y < gt.h; ++y) {
            for (int x = 0; x < gt.w; ++x) {
                clear.at(gt.x0 + x, gt.y0 + y) *= 1.0 - gt.coverage[std::size_t(y) * std::size_t(gt.w) + std::size_t(x)];
            }
        }
    }
    RasterImage out(size, size);
    for (std::size_t k = 0; k < out.size(); ++k) out.pixels[k] = 1.0 - clear.pixels[k];
    return out;
}

RasterImage render(const WordLayout& word, int size) {
    RenderTape tape;
    return render(word, size, tape);
}

std::vector<Vec2> backpropagate(const RenderTape& tape, const RasterImage& upstream) {
    if (upstream.width != tape.size || upstream.height != tape.size) {
        throw ImageError("upstream gradient has the wrong dimensions");
    }
    std::vector<Vec2> grad(tape.point_count);
    for (std::size_t g = 0; g < tape.glyphs.size(); ++g) {
        const auto& gt = tape.glyphs[g];
        for (const auto& b : gt.band) {
            const double u = upstream.pixels[b.pixel];
            if (u == 0.0) continue;
            const int px = static_cast<int>(b.pixel % std::size_t(tape.size));
            const int py = static_cast<int>(b.pixel / std::size_t(tape.size));
            double others = 1.0;
            for (std::size_t h = 0; h < tape.glyphs.size(); ++h) {
                if (h != g) others *= 1.0 - tape.glyphs[h].coverage_at(px, py);
            }
            const double w = u * others * b.slope * tape.scale;
            const auto basis = BezierSegment::basis(b.t);
            const auto& idx = gt.segments[b.segment];
            for (int k = 0; k < 4; ++k) grad[gt.first_point + idx[std::size_t(k)]] += b.direction * (w * basis[std::size_t(k)]);
        }
    }
    return grad;
}

std::vector<Vec2> render_gradient(const WordLayout& word, int size, const RasterImage& upstream) {
    RenderTape tape;
    (void)render(word, size, tape);
    return backpropagate(tape, upstream);
}

}  // namespace khattat
