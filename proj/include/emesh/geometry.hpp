#pragma once

#include "emesh/vec3.hpp"

namespace emesh {

// Triangles are degenerate when |(b-a) x (c-a)| falls below this.
inline constexpr double kDegenerateTol = 1e-12;
// Barycentric containment tolerance: points within this of an edge count as
// inside, so projections cannot oscillate at the boundary.
inline constexpr double kContainTol = 1e-9;
// Maximum off-plane distance central_project accepts for its input.
inline constexpr double kPlaneTol = 1e-6;
// Inputs this close to the plane count as exactly in-plane: an interior point
// is then returned verbatim (the projections' first case) instead of being
// rebuilt from barycentric coordinates, which would dirty its last bits.
inline constexpr double kInPlaneTol = 1e-12;

// One mesh facet with its derived barycenter and unit normal. The normal is
// zero when the triangle is degenerate.
struct Triangle {
    Vec3 a, b, c;
    Vec3 g;              // (a+b+c)/3
    Vec3 n;              // unit normal, or zero if degenerate
    bool degenerate = false;

    static Triangle from_vertices(const Vec3& a, const Vec3& b, const Vec3& c);
};

struct BarycentricCoord {
    double u = 0.0, v = 0.0, w = 0.0;  // weights for vertices a, b, c

    double min_coord() const { return u < v ? (u < w ? u : w) : (v < w ? v : w); }
    bool inside(double tol) const { return u >= -tol && v >= -tol && w >= -tol; }
};

// Barycentric coordinates of the in-plane projection of p onto t's plane.
BarycentricCoord to_barycentric(const Vec3& p, const Triangle& t);

// u*a + v*b + w*c
Vec3 from_barycentric(const BarycentricCoord& bc, const Triangle& t);

// Remove the normal component of grad: grad - ((grad.n)/(n.n)) n. The result
// is tangent to t's plane.
Vec3 tangent_project(const Vec3& grad, const Triangle& t);

// Shrink t by eps in [0, 1] about its barycenter: v' = g + eps*(v - g).
Triangle scale_triangle(const Triangle& t, double eps);

// For an in-plane p_hat: p_hat itself if inside, else the intersection of the
// segment [g, p_hat] with the triangle boundary. Degenerate triangles map
// everything to the barycenter.
Vec3 central_project(const Vec3& p_hat, const Triangle& t);

// Euclidean closest point of the closed triangle to p_hat (p_hat may be
// anywhere in space). Degenerate triangles map everything to the barycenter.
Vec3 perpendicular_project(const Vec3& p_hat, const Triangle& t);

// True iff the in-plane foot of p has all barycentric coordinates >= -tol and
// p is within tol of the plane. For a degenerate triangle: |p - g| <= tol.
bool contains(const Triangle& t, const Vec3& p, double tol);

}  // namespace emesh
