#include "khattat/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "khattat/error.hpp"

namespace khattat {
namespace {

Edge normalized(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

/// Positive when d lies inside the circumcircle of the positively oriented
/// triangle (a, b, c).
double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

bool properly_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

class Mesh {
public:
    struct Tri {
        std::array<int, 3> v;
        std::array<int, 3> nb;  // neighbour across the edge opposite v[i]
    };

    Mesh(std::vector<Vec2> points, double eps_area) : p_(std::move(points)), eps_(eps_area) {}

    void build(std::size_t real_count) {
        Box box;
        for (std::size_t i = 0; i < real_count; ++i) {
            box.lo = {std::min(box.lo.x, p_[i].x), std::min(box.lo.y, p_[i].y)};
            box.hi = {std::max(box.hi.x, p_[i].x), std::max(box.hi.y, p_[i].y)};
        }
        const Vec2 c = (box.lo + box.hi) * 0.5;
        const double r = std::max(box.hi.x - box.lo.x, box.hi.y - box.lo.y) * 20.0 + 1.0;
        const int s0 = static_cast<int>(p_.size());
        p_.push_back(c + Vec2{-r * std::sqrt(3.0), -r});
        p_.push_back(c + Vec2{r * std::sqrt(3.0), -r});
        p_.push_back(c + Vec2{0.0, 2.0 * r});
        tris_.push_back({{s0, s0 + 1, s0 + 2}, {-1, -1, -1}});
        alive_.push_back(true);
        for (std::size_t i = 0; i < real_count; ++i) insert(static_cast<int>(i));
    }

    void insert_constraint(int a, int b) {
        if (find_edge(a, b).first >= 0) {
            constrained_.insert(normalized(std::size_t(a), std::size_t(b)));
            return;
        }
        std::deque<std::pair<int, int>> queue;
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            if (!alive_[t]) continue;
            for (int i = 0; i < 3; ++i) {
                const int y = tris_[t].v[std::size_t((i + 1) % 3)], z = tris_[t].v[std::size_t((i + 2) % 3)];
                const int u = tris_[t].nb[std::size_t(i)];
                if (u >= 0 && static_cast<std::size_t>(u) < t) continue;
                if (y == a || y == b || z == a || z == b) continue;
                if (properly_intersect(p_[std::size_t(a)], p_[std::size_t(b)], p_[std::size_t(y)], p_[std::size_t(z)])) {
                    if (is_constrained(y, z)) throw GeometryError("constrained edges cross");
                    queue.emplace_back(y, z);
                }
            }
        }
        std::size_t guard = 0;
        const std::size_t limit = 64 * (queue.size() + 1) * (queue.size() + 1) + 1024;
        while (!queue.empty()) {
            if (++guard > limit) throw GeometryError("failed to recover constrained edge");
            const auto [y, z] = queue.front();
            queue.pop_front();
            const auto [t, i] = find_edge(y, z);
            if (t < 0) continue;
            const Tri& tri = tris_[std::size_t(t)];
            const int x = tri.v[std::size_t(i)];
            const int u = tri.nb[std::size_t(i)];
            const int w = opposite(u, t);
            if (orient(p_[std::size_t(x)], p_[std::size_t(y)], p_[std::size_t(w)]) > eps_ &&
                orient(p_[std::size_t(x)], p_[std::size_t(w)], p_[std::size_t(z)]) > eps_) {
                flip(t, i);
                if (x != a && x != b && w != a && w != b &&
                    properly_intersect(p_[std::size_t(a)], p_[std::size_t(b)], p_[std::size_t(x)], p_[std::size_t(w)])) {
                    queue.emplace_back(x, w);
                }
            } else {
                queue.emplace_back(y, z);
            }
        }
        constrained_.insert(normalized(std::size_t(a), std::size_t(b)));
        restore_delaunay();
    }

    void restore_delaunay() {
        for (int pass = 0; pass < 10000; ++pass) {
            bool flipped = false;
            for (std::size_t t = 0; t < tris_.size(); ++t) {
                if (!alive_[t]) continue;
                for (int i = 0; i < 3; ++i) {
                    if (needs_flip(static_cast<int>(t), i)) {
                        flip(static_cast<int>(t), i);
                        flipped = true;
                    }
                }
            }
            if (!flipped) return;
        }
        throw GeometryError("Delaunay restoration did not converge");
    }

    bool is_constrained(int a, int b) const {
        return constrained_.count(normalized(std::size_t(a), std::size_t(b))) != 0;
    }

    const std::vector<Tri>& tris() const { return tris_; }
    const std::vector<bool>& alive() const { return alive_; }

private:
    int opposite(int u, int t) const {
        const Tri& tu = tris_[std::size_t(u)];
        for (int j = 0; j < 3; ++j) {
            if (tu.nb[std::size_t(j)] == t) return tu.v[std::size_t(j)];
        }
        throw GeometryError("inconsistent triangle adjacency");
    }

    int slot_of(int u, int t) const {
        const Tri& tu = tris_[std::size_t(u)];
        for (int j = 0; j < 3; ++j) {
            if (tu.nb[std::size_t(j)] == t) return j;
        }
        throw GeometryError("inconsistent triangle adjacency");
    }

    void relink(int u, int from, int to) {
        if (u < 0) return;
        for (int& n : tris_[std::size_t(u)].nb) {
            if (n == from) {
                n = to;
                return;
            }
        }
    }

    std::pair<int, int> find_edge(int y, int z) const {
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            if (!alive_[t]) continue;
            for (int i = 0; i < 3; ++i) {
                const int a = tris_[t].v[std::size_t((i + 1) % 3)], b = tris_[t].v[std::size_t((i + 2) % 3)];
                if ((a == y && b == z) || (a == z && b == y)) return {static_cast<int>(t), i};
            }
        }
        return {-1, -1};
    }

    bool needs_flip(int t, int i) const {
        const Tri& tri = tris_[std::size_t(t)];
        const int u = tri.nb[std::size_t(i)];
        if (u < 0) return false;
        const int y = tri.v[std::size_t((i + 1) % 3)], z = tri.v[std::size_t((i + 2) % 3)];
        if (is_constrained(y, z)) return false;
        const int x = tri.v[std::size_t(i)];
        const int w = opposite(u, t);
        // Flipping must keep both triangles positively oriented.
        if (orient(p_[std::size_t(x)], p_[std::size_t(y)], p_[std::size_t(w)]) <= eps_ ||
            orient(p_[std::size_t(x)], p_[std::size_t(w)], p_[std::size_t(z)]) <= eps_) {
            return false;
        }
        const double scale = std::max({norm2(p_[std::size_t(x)] - p_[std::size_t(w)]),
                                       norm2(p_[std::size_t(y)] - p_[std::size_t(z)]), 1e-300});
        return incircle(p_[std::size_t(tri.v[0])], p_[std::size_t(tri.v[1])], p_[std::size_t(tri.v[2])],
                        p_[std::size_t(w)]) > 1e-12 * scale * scale;
    }

    void flip(int t, int i) {
        Tri& tt = tris_[std::size_t(t)];
        const int x = tt.v[std::size_t(i)];
        const int y = tt.v[std::size_t((i + 1) % 3)];
        const int z = tt.v[std::size_t((i + 2) % 3)];
        const int n_zx = tt.nb[std::size_t((i + 1) % 3)];
        const int n_xy = tt.nb[std::size_t((i + 2) % 3)];
        const int u = tt.nb[std::size_t(i)];
        const int j = slot_of(u, t);
        Tri& tu = tris_[std::size_t(u)];
        const int w = tu.v[std::size_t(j)];
        const int m_yw = tu.nb[std::size_t((j + 1) % 3)];
        const int m_wz = tu.nb[std::size_t((j + 2) % 3)];

        tris_[std::size_t(t)] = {{x, y, w}, {m_yw, u, n_xy}};
        tris_[std::size_t(u)] = {{x, w, z}, {m_wz, n_zx, t}};
        relink(m_yw, u, t);
        relink(n_zx, t, u);
    }

    int add_tri(Tri tri) {
        tris_.push_back(tri);
        alive_.push_back(true);
        return static_cast<int>(tris_.size() - 1);
    }

    void legalize(std::vector<std::pair<int, int>> stack) {
        while (!stack.empty()) {
            const auto [t, i] = stack.back();
            stack.pop_back();
            if (!needs_flip(t, i)) continue;
            const int u = tris_[std::size_t(t)].nb[std::size_t(i)];
            flip(t, i);
            // After the flip the new outer edges sit opposite x in both triangles.
            stack.emplace_back(t, 0);
            stack.emplace_back(u, 0);
        }
    }

    void insert(int p) {
        const Vec2 q = p_[std::size_t(p)];
        int best = -1;
        double best_min = -1e300;
        int best_slot = -1;
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            if (!alive_[t]) continue;
            const Tri& tri = tris_[t];
            double m = 1e300;
            int slot = -1;
            for (int i = 0; i < 3; ++i) {
                const double o = orient(p_[std::size_t(tri.v[std::size_t((i + 1) % 3)])],
                                        p_[std::size_t(tri.v[std::size_t((i + 2) % 3)])], q);
                if (o < m) {
                    m = o;
                    slot = i;
                }
            }
            if (m > best_min) {
                best_min = m;
                best = static_cast<int>(t);
                best_slot = slot;
            }
        }
        if (best < 0 || best_min < -eps_) throw GeometryError("point location failed");

        if (best_min <= eps_ && tris_[std::size_t(best)].nb[std::size_t(best_slot)] >= 0) {
            split_edge(best, best_slot, p);
        } else {
            split_triangle(best, p);
        }
    }

    void split_triangle(int t, int p) {
        const Tri old = tris_[std::size_t(t)];
        const int a = old.v[0], b = old.v[1], c = old.v[2];
        const int na = old.nb[0], nb = old.nb[1], nc = old.nb[2];
        const int t0 = t;
        const int t1 = add_tri({{b, c, p}, {-1, -1, -1}});
        const int t2 = add_tri({{c, a, p}, {-1, -1, -1}});
        tris_[std::size_t(t0)] = {{a, b, p}, {t1, t2, nc}};
        tris_[std::size_t(t1)].nb = {t2, t0, na};
        tris_[std::size_t(t2)].nb = {t0, t1, nb};
        relink(na, t, t1);
        relink(nb, t, t2);
        legalize({{t0, 2}, {t1, 2}, {t2, 2}});
    }

    void split_edge(int t, int i, int p) {
        const Tri tt = tris_[std::size_t(t)];
        const int x = tt.v[std::size_t(i)];
        const int y = tt.v[std::size_t((i + 1) % 3)];
        const int z = tt.v[std::size_t((i + 2) % 3)];
        const int n_zx = tt.nb[std::size_t((i + 1) % 3)];
        const int n_xy = tt.nb[std::size_t((i + 2) % 3)];
        const int u = tt.nb[std::size_t(i)];
        const int j = slot_of(u, t);
        const Tri tu = tris_[std::size_t(u)];
        const int w = tu.v[std::size_t(j)];
        const int m_yw = tu.nb[std::size_t((j + 1) % 3)];
        const int m_wz = tu.nb[std::size_t((j + 2) % 3)];

        const int A = t, B = add_tri({}), C = u, D = add_tri({});
        tris_[std::size_t(A)] = {{x, y, p}, {D, B, n_xy}};
        tris_[std::size_t(B)] = {{x, p, z}, {C, n_zx, A}};
        tris_[std::size_t(C)] = {{w, z, p}, {B, D, m_wz}};
        tris_[std::size_t(D)] = {{w, p, y}, {A, m_yw, C}};
        relink(n_zx, t, B);
        relink(m_yw, u, D);
        legalize({{A, 2}, {B, 1}, {C, 2}, {D, 1}});
    }

    struct Box {
        Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    };

    std::vector<Vec2> p_;
    std::vector<Tri> tris_;
    std::vector<bool> alive_;
    std::set<Edge> constrained_;
    double eps_;
};

}  // namespace

double corner_angle(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 u = b - a, v = c - a;
    return std::atan2(cross(u, v), dot(u, v));
}

std::vector<double> TriangulationAngles::angles_at(std::size_t j) const {
    std::vector<double> out;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        for (int c = 0; c < 3; ++c) {
            if (triangles[t][std::size_t(c)] == j) out.push_back(reference[t][std::size_t(c)]);
        }
    }
    return out;
}

bool TriangulationAngles::has_edge(std::size_t a, std::size_t b) const {
    for (const Triangle& t : triangles) {
        for (int c = 0; c < 3; ++c) {
            const std::size_t p = t[std::size_t(c)], q = t[std::size_t((c + 1) % 3)];
            if ((p == a && q == b) || (p == b && q == a)) return true;
        }
    }
    return false;
}

TriangulationAngles triangulate(std::span<const Vec2> points, std::span<const Edge> constrained_edges) {
    const std::size_t n = points.size();
    if (n < 3) throw GeometryError("triangulation needs at least 3 points");
    for (const Vec2& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw GeometryError("non-finite point");
    }

    double span = 0.0;
    for (const Vec2& p : points) span = std::max(span, norm(p - points[0]));
    std::size_t far = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (norm(points[i] - points[0]) == span) {
            far = i;
            break;
        }
    }
    if (span <= 0.0) throw GeometryError("all points coincide");
    double offset = 0.0;
    const Vec2 axis = (points[far] - points[0]) / span;
    for (const Vec2& p : points) offset = std::max(offset, std::abs(cross(axis, p - points[0])));
    if (offset <= 1e-9 * span) throw GeometryError("all points are collinear");

    TriangulationAngles out;
    out.point_count = n;

    // Near-duplicate points get a deterministic nudge so the mesh stays valid.
    std::vector<Vec2> work(points.begin(), points.end());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return work[a].x < work[b].x || (work[a].x == work[b].x && (work[a].y < work[b].y || (work[a].y == work[b].y && a < b)));
    });
    for (std::size_t k = 0; k < n; ++k) {
        int bumps = 0;
        for (std::size_t m = k + 1; m < n && work[order[m]].x - work[order[k]].x <= 1e-9; ++m) {
            if (norm(work[order[m]] - work[order[k]]) <= 1e-9) {
                ++bumps;
                work[order[m]] += Vec2{kDuplicateJitter * bumps, kDuplicateJitter * 0.5 * bumps};
                std::ostringstream os;
                os << "points " << order[k] << " and " << order[m] << " coincide; jittered by "
                   << kDuplicateJitter * bumps;
                out.warnings.push_back(os.str());
            }
        }
    }

    Mesh mesh(work, 1e-14 * span * span);
    mesh.build(n);

    std::set<Edge> requested;
    for (const Edge& e : constrained_edges) {
        if (e.first >= n || e.second >= n) throw GeometryError("constrained edge index out of range");
        if (e.first == e.second) continue;
        requested.insert(normalized(e.first, e.second));
    }
    for (const Edge& e : requested) {
        // A vertex sitting on the constraint splits it into pieces.
        const Vec2 a = work[e.first], b = work[e.second];
        const double len2 = norm2(b - a);
        std::vector<std::pair<double, std::size_t>> on_segment;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == e.first || k == e.second) continue;
            const double t = dot(work[k] - a, b - a) / len2;
            if (t <= 0.0 || t >= 1.0) continue;
            if (std::abs(cross(b - a, work[k] - a)) <= 1e-12 * len2) on_segment.emplace_back(t, k);
        }
        std::sort(on_segment.begin(), on_segment.end());
        std::size_t prev = e.first;
        for (const auto& [t, k] : on_segment) {
            mesh.insert_constraint(static_cast<int>(prev), static_cast<int>(k));
            prev = k;
        }
        mesh.insert_constraint(static_cast<int>(prev), static_cast<int>(e.second));
        if (!on_segment.empty()) {
            out.warnings.push_back("constraint " + std::to_string(e.first) + "-" + std::to_string(e.second) +
                                   " passes through other points and was split");
        }
    }
    mesh.restore_delaunay();

    const auto& tris = mesh.tris();
    const auto& alive = mesh.alive();
    for (std::size_t t = 0; t < tris.size(); ++t) {
        if (!alive[t]) continue;
        const auto& v = tris[t].v;
        if (v[0] >= static_cast<int>(n) || v[1] >= static_cast<int>(n) || v[2] >= static_cast<int>(n)) continue;
        const Triangle tri{std::size_t(v[0]), std::size_t(v[1]), std::size_t(v[2])};
        const Vec2 a = points[tri[0]], b = points[tri[1]], c = points[tri[2]];
        if (cross(b - a, c - a) <= 1e-12 * span * span) {
            out.warnings.push_back("degenerate triangle dropped from angle set");
            continue;
        }
        out.triangles.push_back(tri);
        out.reference.push_back({corner_angle(a, b, c), corner_angle(b, c, a), corner_angle(c, a, b)});
    }
    for (const Edge& e : requested) out.constrained_edges.push_back(e);
    if (out.triangles.empty()) throw GeometryError("triangulation produced no triangles");
    return out;
}

}  // namespace khattat
