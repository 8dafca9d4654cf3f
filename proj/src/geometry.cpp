#include "emesh/geometry.hpp"

#include "emesh/errors.hpp"

#include <algorithm>
#include <cmath>

namespace emesh {

Triangle Triangle::from_vertices(const Vec3& a, const Vec3& b, const Vec3& c) {
    Triangle t;
    t.a = a;
    t.b = b;
    t.c = c;
    t.g = (a + b + c) / 3.0;
    const Vec3 cr = cross(b - a, c - a);
    const double len = norm(cr);
    t.degenerate = len < kDegenerateTol;
    t.n = t.degenerate ? Vec3{} : cr / len;
    return t;
}

BarycentricCoord to_barycentric(const Vec3& p, const Triangle& t) {
    if (t.degenerate) {
        throw DegenerateTriangle("to_barycentric: degenerate triangle");
    }
    // Solve the 2x2 Gram system for the in-plane foot of p; the normal
    // component of p drops out because only dot products with e0, e1 appear.
    const Vec3 e0 = t.b - t.a;
    const Vec3 e1 = t.c - t.a;
    const Vec3 d = p - t.a;
    const double d00 = dot(e0, e0);
    const double d01 = dot(e0, e1);
    const double d11 = dot(e1, e1);
    const double d20 = dot(d, e0);
    const double d21 = dot(d, e1);
    const double denom = d00 * d11 - d01 * d01;  // = |e0 x e1|^2 > 0 here
    const double v = (d11 * d20 - d01 * d21) / denom;
    const double w = (d00 * d21 - d01 * d20) / denom;
    return {1.0 - v - w, v, w};
}

Vec3 from_barycentric(const BarycentricCoord& bc, const Triangle& t) {
    return t.a * bc.u + t.b * bc.v + t.c * bc.w;
}

Vec3 tangent_project(const Vec3& grad, const Triangle& t) {
    if (t.degenerate) {
        throw DegenerateTriangle("tangent_project: degenerate triangle");
    }
    return grad - t.n * (dot(grad, t.n) / dot(t.n, t.n));
}

Triangle scale_triangle(const Triangle& t, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw InvalidEpsilon("scale_triangle: eps must be in [0, 1]");
    }
    return Triangle::from_vertices(t.g + (t.a - t.g) * eps,
                                   t.g + (t.b - t.g) * eps,
                                   t.g + (t.c - t.g) * eps);
}

Vec3 central_project(const Vec3& p_hat, const Triangle& t) {
    if (t.degenerate) {
        return t.g;
    }
    if (std::abs(dot(p_hat - t.a, t.n)) > kPlaneTol) {
        throw OffPlanePoint("central_project: input is off the triangle plane");
    }
    const BarycentricCoord bc = to_barycentric(p_hat, t);
    if (bc.inside(kContainTol)) {
        return p_hat;
    }
    // Walk from g (barycentric (1/3,1/3,1/3)) toward p_hat. Coordinates vary
    // affinely along the segment; the boundary is hit where the first one
    // reaches zero. Only coordinates heading negative can do so, and the
    // smallest crossing parameter is the exit point. A tie means the segment
    // leaves through a vertex.
    const double start[3] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    const double end[3] = {bc.u, bc.v, bc.w};
    double s_exit = 1.0;
    for (int i = 0; i < 3; ++i) {
        if (end[i] < 0.0) {
            s_exit = std::min(s_exit, start[i] / (start[i] - end[i]));
        }
    }
    return t.g + (p_hat - t.g) * s_exit;
}

Vec3 perpendicular_project(const Vec3& p_hat, const Triangle& t) {
    if (t.degenerate) {
        return t.g;
    }
    if (std::abs(dot(p_hat - t.a, t.n)) <= kInPlaneTol &&
        to_barycentric(p_hat, t).inside(kContainTol)) {
        return p_hat;
    }
    // Voronoi-region case analysis (interior / three edges / three vertices).
    const Vec3 ab = t.b - t.a;
    const Vec3 ac = t.c - t.a;
    const Vec3 ap = p_hat - t.a;
    const double d1 = dot(ab, ap);
    const double d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        return t.a;  // vertex region A
    }

    const Vec3 bp = p_hat - t.b;
    const double d3 = dot(ab, bp);
    const double d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) {
        return t.b;  // vertex region B
    }

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return t.a + ab * v;  // edge region AB
    }

    const Vec3 cp = p_hat - t.c;
    const double d5 = dot(ab, cp);
    const double d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) {
        return t.c;  // vertex region C
    }

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return t.a + ac * w;  // edge region AC
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return t.b + (t.c - t.b) * w;  // edge region BC
    }

    // interior: in-plane foot
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return t.a + ab * v + ac * w;
}

bool contains(const Triangle& t, const Vec3& p, double tol) {
    if (t.degenerate) {
        return norm(p - t.g) <= tol;
    }
    if (std::abs(dot(p - t.a, t.n)) > tol) {
        return false;
    }
    return to_barycentric(p, t).inside(tol);
}

}  // namespace emesh
