#pragma once

// Shared helpers for the test suites. The oracles here are intentionally
// independent of the library implementations they check.

#include "emesh/geometry.hpp"
#include "emesh/rng.hpp"
#include "emesh/vec3.hpp"

#include <algorithm>
#include <cmath>

namespace emesh::test {

inline bool approx(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

inline bool approx(const Vec3& a, const Vec3& b, double tol = 1e-9) {
    return approx(a.x, b.x, tol) && approx(a.y, b.y, tol) && approx(a.z, b.z, tol);
}

inline Vec3 random_point(Rng& rng, double lo = -1.0, double hi = 1.0) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

// Random non-degenerate triangle; rejects slivers so the grid oracle stays
// well conditioned.
inline Triangle random_triangle(Rng& rng) {
    for (;;) {
        const Vec3 a = random_point(rng);
        const Vec3 b = random_point(rng);
        const Vec3 c = random_point(rng);
        if (norm(cross(b - a, c - a)) > 1e-3) {
            return Triangle::from_vertices(a, b, c);
        }
    }
}

// Brute-force closest-point oracle: scan a barycentric grid of the given step
// and return the smallest distance from p to any grid point of the triangle.
inline double grid_min_distance(const Vec3& p, const Triangle& t, double step = 1e-3) {
    const Vec3 e0 = t.b - t.a;
    const Vec3 e1 = t.c - t.a;
    double best2 = norm2(p - t.a);
    const int n = static_cast<int>(std::llround(1.0 / step));
    for (int i = 0; i <= n; ++i) {
        const double u = static_cast<double>(i) * step;
        Vec3 x = t.a + e0 * u;
        const Vec3 dv = e1 * step;
        const int mj = n - i;
        for (int j = 0; j <= mj; ++j) {
            best2 = std::min(best2, norm2(p - x));
            x += dv;
        }
    }
    return std::sqrt(best2);
}

// Independent central-projection oracle: intersect the parametric segment
// g + s (p - g), s in (0, 1], against each edge segment of the triangle and
// keep the smallest s that lands on an edge.
inline Vec3 segment_boundary_intersection(const Vec3& p, const Triangle& t) {
    const Vec3 dir = p - t.g;
    const Vec3 edges[3][2] = {{t.a, t.b}, {t.b, t.c}, {t.c, t.a}};
    double best_s = 2.0;
    Vec3 best = p;
    for (const auto& e : edges) {
        // Solve g + s*dir = e0 + r*(e1-e0) in the least-squares sense on the
        // two dominant axes of the 2x2 system.
        const Vec3 ed = e[1] - e[0];
        // Cramer on the pair of coordinate equations with the largest
        // determinant magnitude.
        double best_det = 0.0;
        double s = -1.0, r = -1.0;
        const double dirc[3] = {dir.x, dir.y, dir.z};
        const double edc[3] = {ed.x, ed.y, ed.z};
        const double rhs[3] = {e[0].x - t.g.x, e[0].y - t.g.y, e[0].z - t.g.z};
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                const double det = dirc[i] * (-edc[j]) - (-edc[i]) * dirc[j];
                if (std::abs(det) > std::abs(best_det)) {
                    best_det = det;
                    s = (rhs[i] * (-edc[j]) - (-edc[i]) * rhs[j]) / det;
                    r = (dirc[i] * rhs[j] - rhs[i] * dirc[j]) / det;
                }
            }
        }
        if (best_det != 0.0 && s > 1e-12 && r >= -1e-9 && r <= 1.0 + 1e-9 && s < best_s) {
            best_s = s;
            best = t.g + dir * s;
        }
    }
    return best;
}

}  // namespace emesh::test
