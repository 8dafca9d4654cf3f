#pragma once

#include "emesh/geometry.hpp"
#include "emesh/vec3.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace emesh {

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;  // indices into vertices

    Triangle face_triangle(int face_index) const;
};

// Ordered point list with one assigned source face per point. The attack
// relies on this correspondence: point i may only move inside face
// face_assignment[i].
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<int> face_assignment;
    std::string source_mesh_id;

    std::size_t size() const { return points.size(); }
};

struct LabeledSample {
    PointCloud cloud;
    Mesh mesh;
    int label = 0;
};

// ASCII OBJ subset: `v x y z`, `f i j k ...` (1-based, fan-split beyond
// triangles), `#` comments, blank lines. Standard attribute/grouping
// keywords (vn, vt, g, o, s, usemtl, mtllib) are skipped.
Mesh parse_obj(std::istream& in);
Mesh parse_obj(const std::string& text);

// Coordinates printed with 17 significant digits so parse_obj(write_obj(m))
// reproduces m bit-exactly.
void write_obj(const Mesh& mesh, std::ostream& out);
std::string write_obj(const Mesh& mesh);

Mesh load_obj_file(const std::string& path);
void save_obj_file(const Mesh& mesh, const std::string& path);

// One point per non-degenerate face, at its barycenter. Degenerate faces are
// skipped; their count is reported through degenerate_skipped when non-null.
PointCloud sample_barycenters(const Mesh& mesh, int* degenerate_skipped = nullptr);

// Translate by -centroid(points) and scale by 1/max|p - centroid|, applied
// jointly to cloud and mesh so points stay on their assigned faces.
LabeledSample normalize_unit_sphere(LabeledSample sample);

}  // namespace emesh
