#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "khattat/vec2.hpp"

namespace khattat {

/// Side length of the square abstract canvas glyphs are laid out on.
inline constexpr double kCanvasSize = 600.0;

/// Cubic Bézier segment in canvas units.
struct BezierSegment {
    Vec2 p0, p1, p2, p3;

    Vec2 eval(double t) const;
    Vec2 derivative(double t) const;
    Vec2 second_derivative(double t) const;

    /// Bernstein basis weights of the four control points at `t`.
    static std::array<double, 4> basis(double t);

    /// de Casteljau split at `t` into two segments tracing the same locus.
    std::pair<BezierSegment, BezierSegment> split(double t) const;

    /// Chord length of the curve sampled at `steps` uniform parameter steps.
    double chord_length(int steps = 16) const;

    bool finite() const;
};

/// A closed contour of cubic segments. Control points are stored once:
/// segment k uses points[3k], points[3k+1], points[3k+2] and points[3k+3]
/// (wrapping), so consecutive segments always share their endpoint.
struct Contour {
    std::vector<Vec2> points;

    std::size_t segment_count() const { return points.size() / 3; }
    BezierSegment segment(std::size_t k) const;

    /// Build from explicit segments; each segment's p3 must equal the next p0.
    static Contour from_segments(std::span<const BezierSegment> segments);

    /// Signed area enclosed (y-down canvas: clockwise on screen is positive).
    double signed_area() const;
    double perimeter() const;
};

struct Box {
    Vec2 lo{1e300, 1e300};
    Vec2 hi{-1e300, -1e300};

    void expand(Vec2 p);
    void expand(const Box& b);
    bool empty() const { return lo.x > hi.x || lo.y > hi.y; }
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    Vec2 center() const { return (lo + hi) * 0.5; }
};

struct GlyphPath {
    std::vector<Contour> contours;
    int letter_index = 0;
    char32_t codepoint = 0;
    unsigned glyph_id = 0;
    /// False for glyphs without ink (spaces); such letters are never morphed.
    bool morphable = true;

    std::size_t point_count() const;
    std::size_t segment_count() const;
    /// Even-odd area of the glyph, i.e. the absolute value of the summed
    /// signed contour areas for well-formed outlines.
    double area() const;
    /// Bounding box of all control points (contains the curve).
    Box control_box() const;
    double perimeter() const;
};

enum class Script { left_to_right, right_to_left };

struct WordLayout {
    /// Glyphs in logical letter order, already placed in canvas coordinates.
    std::vector<GlyphPath> glyphs;
    /// Horizontal pen offset of each glyph, canvas units.
    std::vector<double> advances;
    Script script = Script::left_to_right;

    std::size_t size() const { return glyphs.size(); }
};

/// Half-open range [first, last) of glyph indices.
struct GlyphRange {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t size() const { return last - first; }
};

/// Concatenate the control points of glyphs in `range` (glyph, contour,
/// point order).
std::vector<Vec2> gather_points(const WordLayout& word, GlyphRange range);

/// Inverse of gather_points.
void scatter_points(WordLayout& word, GlyphRange range, std::span<const Vec2> points);

/// Control-polygon edges of every contour in `range`, as index pairs into
/// the gather_points array.
std::vector<std::pair<std::size_t, std::size_t>> contour_edges(const WordLayout& word,
                                                               GlyphRange range);

/// Split the longest segment (chord-sampled, ties to the lowest contour and
/// then segment index) at t = 0.5 until the glyph has at least
/// `target_points` control points.
GlyphPath subdivide_to_budget(const GlyphPath& glyph, std::size_t target_points);

/// Default control-point budget: max(existing, 15 * contours + perimeter / 20),
/// capped at 120 (but never below the existing count).
std::size_t default_point_budget(const GlyphPath& glyph);

}  // namespace khattat
