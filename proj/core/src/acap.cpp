#include "khattat/acap.hpp"

#include <cmath>

#include "khattat/error.hpp"

namespace khattat {

AcapResult acap_loss(const TriangulationAngles& reference, std::span<const Vec2> current) {
    if (current.size() != reference.point_count) {
        throw GeometryError("acap_loss: expected " + std::to_string(reference.point_count) + " points, got " +
                            std::to_string(current.size()));
    }
    AcapResult out;
    out.gradient.assign(current.size(), Vec2{});
    const double inv_k = 1.0 / static_cast<double>(reference.point_count);

    for (std::size_t t = 0; t < reference.triangles.size(); ++t) {
        const Triangle& tri = reference.triangles[t];
        for (int c = 0; c < 3; ++c) {
            const std::size_t ia = tri[std::size_t(c)];
            const std::size_t ib = tri[std::size_t((c + 1) % 3)];
            const std::size_t ic = tri[std::size_t((c + 2) % 3)];
            const Vec2 u = current[ib] - current[ia];
            const Vec2 v = current[ic] - current[ia];
            const double cr = cross(u, v);
            const double dt = dot(u, v);
            const double q = norm2(u) * norm2(v);
            if (q < 1e-24) {
                ++out.degenerate_corners;
                continue;
            }
            // Unsigned angle, the acos of the normalised dot product.
            const double angle = std::atan2(std::abs(cr), dt);
            if (angle < 1e-7 || angle > M_PI - 1e-7) ++out.degenerate_corners;
            const double diff = angle - reference.reference[t][std::size_t(c)];
            out.loss += diff * diff * inv_k;

            const double scale = (cr < 0.0 ? -2.0 : 2.0) * diff * inv_k / q;
            const Vec2 grad_u = Vec2{dt * v.y - cr * v.x, -dt * v.x - cr * v.y} * scale;
            const Vec2 grad_v = Vec2{-dt * u.y - cr * u.x, dt * u.x - cr * u.y} * scale;
            out.gradient[ib] += grad_u;
            out.gradient[ic] += grad_v;
            out.gradient[ia] -= grad_u + grad_v;
        }
    }
    return out;
}

}  // namespace khattat
