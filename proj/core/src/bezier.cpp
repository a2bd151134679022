#include "khattat/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "khattat/error.hpp"

namespace khattat {

Vec2 BezierSegment::eval(double t) const {
    const auto b = basis(t);
    return p0 * b[0] + p1 * b[1] + p2 * b[2] + p3 * b[3];
}

Vec2 BezierSegment::derivative(double t) const {
    const double s = 1.0 - t;
    return 3.0 * (s * s * (p1 - p0) + 2.0 * s * t * (p2 - p1) + t * t * (p3 - p2));
}

Vec2 BezierSegment::second_derivative(double t) const {
    return 6.0 * ((1.0 - t) * (p2 - 2.0 * p1 + p0) + t * (p3 - 2.0 * p2 + p1));
}

std::array<double, 4> BezierSegment::basis(double t) {
    const double s = 1.0 - t;
    return {s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t};
}

std::pair<BezierSegment, BezierSegment> BezierSegment::split(double t) const {
    const Vec2 a = lerp(p0, p1, t);
    const Vec2 b = lerp(p1, p2, t);
    const Vec2 c = lerp(p2, p3, t);
    const Vec2 ab = lerp(a, b, t);
    const Vec2 bc = lerp(b, c, t);
    const Vec2 mid = lerp(ab, bc, t);
    return {BezierSegment{p0, a, ab, mid}, BezierSegment{mid, bc, c, p3}};
}

double BezierSegment::chord_length(int steps) const {
    double length = 0.0;
    Vec2 prev = p0;
    for (int i = 1; i <= steps; ++i) {
        const Vec2 cur = eval(static_cast<double>(i) / steps);
        length += norm(cur - prev);
        prev = cur;
    }
    return length;
}

bool BezierSegment::finite() const {
    for (const Vec2& p : {p0, p1, p2, p3}) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    }
    return true;
}

BezierSegment Contour::segment(std::size_t k) const {
    const std::size_t n = points.size();
    const std::size_t i = 3 * k;
    return {points[i], points[i + 1], points[i + 2], points[(i + 3) % n]};
}

Contour Contour::from_segments(std::span<const BezierSegment> segments) {
    Contour c;
    c.points.reserve(segments.size() * 3);
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& s = segments[k];
        const auto& next = segments[(k + 1) % segments.size()];
        if (norm(s.p3 - next.p0) > 1e-9) {
            throw GeometryError("contour is not closed at segment " + std::to_string(k));
        }
        c.points.push_back(s.p0);
        c.points.push_back(s.p1);
        c.points.push_back(s.p2);
    }
    return c;
}

double Contour::signed_area() const {
    // x y' - y x' is a quintic along a cubic, so 3-point Gauss-Legendre is exact.
    static constexpr double kNodes[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
    static constexpr double kWeights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    double twice = 0.0;
    for (std::size_t k = 0; k < segment_count(); ++k) {
        const BezierSegment s = segment(k);
        for (int q = 0; q < 3; ++q) {
            const Vec2 p = s.eval(kNodes[q]);
            const Vec2 d = s.derivative(kNodes[q]);
            twice += kWeights[q] * cross(p, d);
        }
    }
    return 0.5 * twice;
}

double Contour::perimeter() const {
    double total = 0.0;
    for (std::size_t k = 0; k < segment_count(); ++k) total += segment(k).chord_length();
    return total;
}

void Box::expand(Vec2 p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
}

void Box::expand(const Box& b) {
    if (b.empty()) return;
    expand(b.lo);
    expand(b.hi);
}

std::size_t GlyphPath::point_count() const {
    std::size_t n = 0;
    for (const auto& c : contours) n += c.points.size();
    return n;
}

std::size_t GlyphPath::segment_count() const {
    std::size_t n = 0;
    for (const auto& c : contours) n += c.segment_count();
    return n;
}

double GlyphPath::area() const {
    double a = 0.0;
    for (const auto& c : contours) a += c.signed_area();
    return std::abs(a);
}

Box GlyphPath::control_box() const {
    Box b;
    for (const auto& c : contours) {
        for (const Vec2& p : c.points) b.expand(p);
    }
    return b;
}

double GlyphPath::perimeter() const {
    double total = 0.0;
    for (const auto& c : contours) total += c.perimeter();
    return total;
}

std::vector<Vec2> gather_points(const WordLayout& word, GlyphRange range) {
    std::vector<Vec2> out;
    for (std::size_t g = range.first; g < range.last; ++g) {
        for (const auto& c : word.glyphs.at(g).contours) {
            out.insert(out.end(), c.points.begin(), c.points.end());
        }
    }
    return out;
}

void scatter_points(WordLayout& word, GlyphRange range, std::span<const Vec2> points) {
    std::size_t i = 0;
    for (std::size_t g = range.first; g < range.last; ++g) {
        for (auto& c : word.glyphs.at(g).contours) {
            for (Vec2& p : c.points) {
                if (i >= points.size()) throw std::invalid_argument("scatter_points: too few points");
                p = points[i++];
            }
        }
    }
    if (i != points.size()) throw std::invalid_argument("scatter_points: too many points");
}

std::vector<std::pair<std::size_t, std::size_t>> contour_edges(const WordLayout& word,
                                                               GlyphRange range) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t base = 0;
    for (std::size_t g = range.first; g < range.last; ++g) {
        for (const auto& c : word.glyphs.at(g).contours) {
            const std::size_t n = c.points.size();
            for (std::size_t i = 0; i < n; ++i) edges.emplace_back(base + i, base + (i + 1) % n);
            base += n;
        }
    }
    return edges;
}

GlyphPath subdivide_to_budget(const GlyphPath& glyph, std::size_t target_points) {
    GlyphPath out = glyph;
    if (out.contours.empty()) return out;

    // Segment lengths cached per contour; only the split segment changes.
    std::vector<std::vector<double>> lengths(out.contours.size());
    for (std::size_t c = 0; c < out.contours.size(); ++c) {
        const auto& contour = out.contours[c];
        for (std::size_t k = 0; k < contour.segment_count(); ++k) {
            lengths[c].push_back(contour.segment(k).chord_length());
        }
    }

    while (out.point_count() < target_points) {
        std::size_t best_c = 0, best_k = 0;
        double best_len = -1.0;
        for (std::size_t c = 0; c < lengths.size(); ++c) {
            for (std::size_t k = 0; k < lengths[c].size(); ++k) {
                if (lengths[c][k] > best_len) {
                    best_len = lengths[c][k];
                    best_c = c;
                    best_k = k;
                }
            }
        }
        auto& contour = out.contours[best_c];
        const auto [left, right] = contour.segment(best_k).split(0.5);
        const std::size_t i = 3 * best_k;
        contour.points[i + 1] = left.p1;
        contour.points[i + 2] = left.p2;
        const Vec2 inserted[3] = {left.p3, right.p1, right.p2};
        contour.points.insert(contour.points.begin() + static_cast<std::ptrdiff_t>(i + 3),
                              std::begin(inserted), std::end(inserted));
        auto& lens = lengths[best_c];
        lens[best_k] = left.chord_length();
        lens.insert(lens.begin() + static_cast<std::ptrdiff_t>(best_k + 1), right.chord_length());
    }
    return out;
}

std::size_t default_point_budget(const GlyphPath& glyph) {
    const std::size_t existing = glyph.point_count();
    const double wanted = 15.0 * static_cast<double>(glyph.contours.size()) + glyph.perimeter() / 20.0;
    const auto capped = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(wanted)), 120);
    return std::max(existing, capped);
}

}  // namespace khattat
