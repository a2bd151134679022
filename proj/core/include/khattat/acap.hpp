#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "khattat/triangulation.hpp"

namespace khattat {

struct AcapResult {
    double loss = 0.0;
    std::vector<Vec2> gradient;
    /// Corners whose angle came within 1e-7 of 0 or pi, or whose edges collapsed.
    std::size_t degenerate_corners = 0;
};

/// As-conformal-as-possible loss: mean over points of the summed squared
/// change of their incident (unsigned) triangle angles, on the fixed
/// reference connectivity. Returns the exact gradient with respect to
/// `current`; corners with a vanishing angle contribute but are counted in
/// `degenerate_corners`.
AcapResult acap_loss(const TriangulationAngles& reference, std::span<const Vec2> current);

}  // namespace khattat
