#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "khattat/vec2.hpp"

namespace khattat {

using Edge = std::pair<std::size_t, std::size_t>;
using Triangle = std::array<std::size_t, 3>;

/// Constrained Delaunay triangulation of a point set together with the
/// corner angles measured at construction time. Triangles are stored with
/// positive orientation (cross(b - a, c - a) > 0).
struct TriangulationAngles {
    std::size_t point_count = 0;
    std::vector<Triangle> triangles;
    /// reference[t][c] is the interior angle of triangles[t] at corner c.
    std::vector<std::array<double, 3>> reference;
    /// Constrained edges, normalised so first < second, sorted.
    std::vector<Edge> constrained_edges;
    std::vector<std::string> warnings;

    /// Reference angles incident to point j (the per-point angle list).
    std::vector<double> angles_at(std::size_t j) const;
    bool has_edge(std::size_t a, std::size_t b) const;
};

/// Jitter applied to near-duplicate points before triangulating.
inline constexpr double kDuplicateJitter = 1e-6;

/// Build a constrained Delaunay triangulation over the convex hull of
/// `points`, forcing every edge in `constrained_edges`. Reference angles are
/// recorded from `points` as given. Throws GeometryError when the points are
/// collinear or constraints cross.
TriangulationAngles triangulate(std::span<const Vec2> points, std::span<const Edge> constrained_edges = {});

/// Interior angle at `a` of triangle (a, b, c), signed so that positively
/// oriented triangles have positive angles.
double corner_angle(Vec2 a, Vec2 b, Vec2 c);

}  // namespace khattat
