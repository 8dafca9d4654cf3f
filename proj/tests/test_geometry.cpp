#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emesh/errors.hpp"
#include "emesh/geometry.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace emesh;
using namespace emesh::test;

namespace {

const Triangle kUnitRight = Triangle::from_vertices({0, 0, 0}, {1, 0, 0}, {0, 1, 0});

}  // namespace

TEST_CASE("triangle derived fields") {
    Rng rng(derive_key(7, {0}));
    for (int i = 0; i < 50; ++i) {
        const Triangle t = random_triangle(rng);
        CHECK(approx(t.g, (t.a + t.b + t.c) / 3.0, 1e-15));
        CHECK(approx(norm(t.n), 1.0, 1e-12));
        CHECK(approx(dot(t.n, t.b - t.a), 0.0, 1e-9));
        CHECK(approx(dot(t.n, t.c - t.a), 0.0, 1e-9));
        CHECK_FALSE(t.degenerate);
    }
    const Triangle d = Triangle::from_vertices({0, 0, 0}, {1, 0, 0}, {2, 0, 0});
    CHECK(d.degenerate);
}

TEST_CASE("degeneracy threshold is on the cross product norm") {
    // |cross| = s^2 for a right triangle with legs s.
    const double s_below = 1e-7;   // cross norm 1e-14 < 1e-12
    const double s_above = 1e-5;   // cross norm 1e-10 > 1e-12
    CHECK(Triangle::from_vertices({0, 0, 0}, {s_below, 0, 0}, {0, s_below, 0}).degenerate);
    CHECK_FALSE(Triangle::from_vertices({0, 0, 0}, {s_above, 0, 0}, {0, s_above, 0}).degenerate);
}

TEST_CASE("to_barycentric: vertex, barycenter, hand-solved case") {
    const auto at_a = to_barycentric(kUnitRight.a, kUnitRight);
    CHECK(approx(at_a.u, 1.0));
    CHECK(approx(at_a.v, 0.0));
    CHECK(approx(at_a.w, 0.0));

    const auto at_g = to_barycentric(kUnitRight.g, kUnitRight);
    CHECK(approx(at_g.u, 1.0 / 3.0));
    CHECK(approx(at_g.v, 1.0 / 3.0));
    CHECK(approx(at_g.w, 1.0 / 3.0));

    // For vertices (0,0),(1,0),(0,1): p = u*a + v*b + w*c gives (v, w) = (x, y),
    // so the 2x2 system for p=(0.25,0.25) solves to v = w = 0.25, u = 0.5.
    const auto bc = to_barycentric({0.25, 0.25, 0}, kUnitRight);
    CHECK(approx(bc.u, 0.5));
    CHECK(approx(bc.v, 0.25));
    CHECK(approx(bc.w, 0.25));

    CHECK_THROWS_AS(to_barycentric({0, 0, 0}, Triangle::from_vertices({0, 0, 0}, {1, 0, 0}, {2, 0, 0})),
                    DegenerateTriangle);
}

TEST_CASE("to_barycentric reconstructs the in-plane foot") {
    Rng rng(derive_key(11, {1}));
    for (int i = 0; i < 200; ++i) {
        const Triangle t = random_triangle(rng);
        const Vec3 p = random_point(rng, -2.0, 2.0);
        const auto bc = to_barycentric(p, t);
        CHECK(approx(bc.u + bc.v + bc.w, 1.0, 1e-9));
        const Vec3 rec = from_barycentric(bc, t);
        // rec is the in-plane projection of p: it differs from p only along n.
        const Vec3 in_plane = p - t.n * dot(p - t.a, t.n);
        CHECK(approx(rec, in_plane, 1e-9));
    }
}

TEST_CASE("tangent_project removes exactly the normal component") {
    const Triangle t = kUnitRight;  // n = (0,0,1)
    CHECK(approx(tangent_project({0, 0, 5}, t), {0, 0, 0}));
    CHECK(approx(tangent_project({1, 2, 0}, t), {1, 2, 0}));
    CHECK(approx(tangent_project({1, 2, 3}, t), {1, 2, 0}));
    CHECK_THROWS_AS(tangent_project({1, 1, 1}, Triangle::from_vertices({0, 0, 0}, {1, 0, 0}, {2, 0, 0})),
                    DegenerateTriangle);
}

TEST_CASE("tangent_project: tangency and contraction on random inputs") {
    Rng rng(derive_key(11, {2}));
    for (int i = 0; i < 500; ++i) {
        const Triangle t = random_triangle(rng);
        const Vec3 grad = random_point(rng, -3.0, 3.0);
        const Vec3 tg = tangent_project(grad, t);
        CHECK(std::abs(dot(tg, t.n)) <= 1e-9);
        CHECK(norm(tg) <= norm(grad) + 1e-12);
    }
}

TEST_CASE("scale_triangle: identity, collapse, hand case") {
    const Triangle same = scale_triangle(kUnitRight, 1.0);
    CHECK(approx(same.a, kUnitRight.a, 1e-15));
    CHECK(approx(same.b, kUnitRight.b, 1e-15));
    CHECK(approx(same.c, kUnitRight.c, 1e-15));

    const Triangle collapsed = scale_triangle(kUnitRight, 0.0);
    CHECK(collapsed.degenerate);
    CHECK(approx(collapsed.a, kUnitRight.g, 1e-15));
    CHECK(approx(collapsed.b, kUnitRight.g, 1e-15));
    CHECK(approx(collapsed.c, kUnitRight.g, 1e-15));

    // v' = g + 0.5 (v - g) with g = (1/3, 1/3, 0), computed by hand.
    const Triangle half = scale_triangle(kUnitRight, 0.5);
    CHECK(approx(half.a, {1.0 / 6.0, 1.0 / 6.0, 0}));
    CHECK(approx(half.b, {2.0 / 3.0, 1.0 / 6.0, 0}));
    CHECK(approx(half.c, {1.0 / 6.0, 2.0 / 3.0, 0}));
    CHECK(approx(half.g, kUnitRight.g, 1e-15));

    CHECK_THROWS_AS(scale_triangle(kUnitRight, -0.1), InvalidEpsilon);
    CHECK_THROWS_AS(scale_triangle(kUnitRight, 1.1), InvalidEpsilon);
}

TEST_CASE("scale_triangle scales area by eps^2 and preserves the barycenter") {
    Rng rng(derive_key(11, {3}));
    for (int i = 0; i < 100; ++i) {
        const Triangle t = random_triangle(rng);
        const double eps = rng.uniform(0.05, 1.0);
        const Triangle s = scale_triangle(t, eps);
        CHECK(approx(s.g, t.g, 1e-12));
        const double area_t = 0.5 * norm(cross(t.b - t.a, t.c - t.a));
        const double area_s = 0.5 * norm(cross(s.b - s.a, s.c - s.a));
        CHECK(approx(area_s, eps * eps * area_t, 1e-9));
    }
}

TEST_CASE("scale_triangle nesting: smaller eps stays inside larger eps") {
    Rng rng(derive_key(11, {4}));
    for (int i = 0; i < 200; ++i) {
        const Triangle t = random_triangle(rng);
        double e1 = rng.uniform(0.0, 1.0);
        double e2 = rng.uniform(0.0, 1.0);
        if (e1 > e2) std::swap(e1, e2);
        const Triangle inner = scale_triangle(t, e1);
        const Triangle outer = scale_triangle(t, e2);
        if (outer.degenerate) continue;  // e2 == 0 only when both collapse
        // By convexity checking the vertices suffices.
        CHECK(contains(outer, inner.a, kContainTol));
        CHECK(contains(outer, inner.b, kContainTol));
        CHECK(contains(outer, inner.c, kContainTol));
    }
}

TEST_CASE("central_project: interior passthrough and hand case") {
    const Vec3 inside{0.3, 0.3, 0};
    CHECK(approx(central_project(inside, kUnitRight), inside, 1e-15));
    CHECK(approx(central_project(kUnitRight.g, kUnitRight), kUnitRight.g, 1e-15));

    // Ray from g = (1/3,1/3,0) toward (1,1,0) exits through x + y = 1 at the
    // symmetric point (0.5, 0.5, 0); cross-checked with the edge-intersection
    // oracle below.
    const Vec3 out{1, 1, 0};
    const Vec3 proj = central_project(out, kUnitRight);
    CHECK(approx(proj, {0.5, 0.5, 0}));
    CHECK(approx(proj, segment_boundary_intersection(out, kUnitRight), 1e-9));

    CHECK_THROWS_AS(central_project({0.3, 0.3, 1.0}, kUnitRight), OffPlanePoint);
    CHECK(approx(central_project({5, 7, 9}, scale_triangle(kUnitRight, 0.0)), kUnitRight.g, 1e-15));
}

TEST_CASE("central_project: collinearity, boundary landing, oracle agreement") {
    Rng rng(derive_key(11, {5}));
    int outside_cases = 0;
    for (int i = 0; i < 1000; ++i) {
        const Triangle t = random_triangle(rng);
        // In-plane point, often outside.
        const double u = rng.uniform(-2.0, 2.0);
        const double v = rng.uniform(-2.0, 2.0);
        const Vec3 p = t.a + (t.b - t.a) * u + (t.c - t.a) * v;
        const Vec3 out = central_project(p, t);
        CHECK(contains(t, out, kContainTol));
        if (!to_barycentric(p, t).inside(kContainTol)) {
            ++outside_cases;
            // Output on segment [g, p]: distance from the line through g, p is ~0.
            const Vec3 dir = p - t.g;
            const double resid = norm(cross(out - t.g, dir)) / norm(dir);
            CHECK(resid <= 1e-9);
            const double s = dot(out - t.g, dir) / dot(dir, dir);
            CHECK(s >= -1e-12);
            CHECK(s <= 1.0 + 1e-12);
            // On the boundary: min barycentric coordinate ~ 0.
            CHECK(std::abs(to_barycentric(out, t).min_coord()) <= kContainTol);
            CHECK(approx(out, segment_boundary_intersection(p, t), 1e-7));
        }
    }
    CHECK(outside_cases > 300);
}

TEST_CASE("central_project idempotent on in-plane inputs") {
    Rng rng(derive_key(11, {6}));
    for (int i = 0; i < 300; ++i) {
        const Triangle t = random_triangle(rng);
        const double u = rng.uniform(-2.0, 2.0);
        const double v = rng.uniform(-2.0, 2.0);
        const Vec3 p = t.a + (t.b - t.a) * u + (t.c - t.a) * v;
        const Vec3 once = central_project(p, t);
        CHECK(approx(central_project(once, t), once, 1e-9));
    }
}

TEST_CASE("perpendicular_project: interior, edge, vertex hand cases") {
    const Vec3 inside{0.3, 0.3, 0};
    CHECK(approx(perpendicular_project(inside, kUnitRight), inside, 1e-15));

    // (2,2,1): closest point lies on the hypotenuse at (0.5, 0.5, 0); value
    // verified against the barycentric grid oracle.
    const Vec3 q{2, 2, 1};
    const Vec3 proj = perpendicular_project(q, kUnitRight);
    CHECK(approx(proj, {0.5, 0.5, 0}));
    CHECK(norm(proj - q) <= grid_min_distance(q, kUnitRight) + 2e-3);

    // (-1,-1,0): vertex region of a.
    const Vec3 r{-1, -1, 0};
    CHECK(approx(perpendicular_project(r, kUnitRight), {0, 0, 0}));
    CHECK(norm(Vec3{0, 0, 0} - r) <= grid_min_distance(r, kUnitRight) + 2e-3);

    CHECK(approx(perpendicular_project({5, 7, 9}, scale_triangle(kUnitRight, 0.0)), kUnitRight.g, 1e-15));
}

TEST_CASE("perpendicular_project: closest-point optimality vs grid oracle") {
    Rng rng(derive_key(11, {7}));
    for (int i = 0; i < 1000; ++i) {
        const Triangle t = random_triangle(rng);
        const Vec3 p = random_point(rng, -2.0, 2.0);
        const Vec3 out = perpendicular_project(p, t);
        CHECK(contains(t, out, kContainTol));
        CHECK(norm(out - p) <= grid_min_distance(p, t, 1e-2) + 2e-2);
    }
    // The full 1e-3 grid is the acceptance-suite version; spot-check it here.
    Rng rng2(derive_key(11, {8}));
    for (int i = 0; i < 20; ++i) {
        const Triangle t = random_triangle(rng2);
        const Vec3 p = random_point(rng2, -2.0, 2.0);
        CHECK(norm(perpendicular_project(p, t) - p) <= grid_min_distance(p, t, 1e-3) + 2e-3);
    }
}

TEST_CASE("perpendicular_project idempotent") {
    Rng rng(derive_key(11, {9}));
    for (int i = 0; i < 300; ++i) {
        const Triangle t = random_triangle(rng);
        const Vec3 p = random_point(rng, -2.0, 2.0);
        const Vec3 once = perpendicular_project(p, t);
        CHECK(approx(perpendicular_project(once, t), once, 1e-9));
    }
}

TEST_CASE("contains: barycenter, beyond-vertex, hand case") {
    CHECK(contains(kUnitRight, kUnitRight.g, kContainTol));
    const Vec3 beyond = kUnitRight.a + (kUnitRight.a - kUnitRight.g) * 2.0;
    CHECK_FALSE(contains(kUnitRight, beyond, kContainTol));
    // (0.3,0.3,0) has barycentric (0.4, 0.3, 0.3).
    CHECK(contains(kUnitRight, {0.3, 0.3, 0}, 1e-9));
    // Off-plane points fail the plane tolerance.
    CHECK_FALSE(contains(kUnitRight, {0.3, 0.3, 0.1}, 1e-9));
}
