#include "emesh/mesh.hpp"

#include "emesh/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace emesh {

Triangle Mesh::face_triangle(int face_index) const {
    if (face_index < 0 || static_cast<std::size_t>(face_index) >= faces.size()) {
        throw IndexError("face index " + std::to_string(face_index) + " out of range");
    }
    const auto& f = faces[face_index];
    return Triangle::from_vertices(vertices[f[0]], vertices[f[1]], vertices[f[2]]);
}

namespace {

bool parse_double(const std::string& tok, double& out) {
    std::size_t pos = 0;
    try {
        out = std::stod(tok, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == tok.size();
}

// Face tokens may carry `/vt/vn` suffixes; only the vertex index is used.
bool parse_face_index(const std::string& tok, long& out) {
    const std::string head = tok.substr(0, tok.find('/'));
    std::size_t pos = 0;
    try {
        out = std::stol(head, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == head.size();
}

const char* kSkippedKeywords[] = {"vn", "vt", "vp", "g", "o", "s", "usemtl", "mtllib", "l", "p"};

}  // namespace

Mesh parse_obj(std::istream& in) {
    Mesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream ls(line);
        std::string keyword;
        if (!(ls >> keyword) || keyword[0] == '#') {
            continue;
        }
        if (keyword == "v") {
            Vec3 p;
            std::string sx, sy, sz;
            if (!(ls >> sx >> sy >> sz) || !parse_double(sx, p.x) || !parse_double(sy, p.y) ||
                !parse_double(sz, p.z)) {
                throw ParseError(line_no, "malformed vertex: " + line);
            }
            std::string extra;
            if (ls >> extra) {
                throw ParseError(line_no, "trailing tokens on vertex line: " + line);
            }
            if (!is_finite(p)) {
                throw ParseError(line_no, "non-finite vertex coordinate: " + line);
            }
            mesh.vertices.push_back(p);
        } else if (keyword == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                long raw = 0;
                if (!parse_face_index(tok, raw)) {
                    throw ParseError(line_no, "malformed face index '" + tok + "'");
                }
                if (raw < 0) {
                    // Relative (negative) indices count back from the current
                    // vertex list.
                    raw = static_cast<long>(mesh.vertices.size()) + raw + 1;
                }
                if (raw < 1 || raw > static_cast<long>(mesh.vertices.size())) {
                    throw IndexError("line " + std::to_string(line_no) + ": face index " +
                                     tok + " out of range");
                }
                idx.push_back(static_cast<int>(raw - 1));
            }
            if (idx.size() < 3) {
                throw ParseError(line_no, "face needs at least 3 indices");
            }
            // Fan split: (0, i, i+1)
            for (std::size_t i = 1; i + 1 < idx.size(); ++i) {
                mesh.faces.push_back({idx[0], idx[i], idx[i + 1]});
            }
        } else {
            bool known = false;
            for (const char* kw : kSkippedKeywords) {
                if (keyword == kw) {
                    known = true;
                    break;
                }
            }
            if (!known) {
                throw ParseError(line_no, "unrecognized keyword '" + keyword + "'");
            }
        }
    }
    return mesh;
}

Mesh parse_obj(const std::string& text) {
    std::istringstream in(text);
    return parse_obj(in);
}

void write_obj(const Mesh& mesh, std::ostream& out) {
    char buf[128];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const auto& f : mesh.faces) {
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
}

std::string write_obj(const Mesh& mesh) {
    std::ostringstream out;
    write_obj(mesh, out);
    return out.str();
}

Mesh load_obj_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return parse_obj(in);
}

void save_obj_file(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    write_obj(mesh, out);
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

PointCloud sample_barycenters(const Mesh& mesh, int* degenerate_skipped) {
    PointCloud cloud;
    int skipped = 0;
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        const Triangle t = mesh.face_triangle(static_cast<int>(i));
        if (t.degenerate) {
            ++skipped;
            continue;
        }
        cloud.points.push_back(t.g);
        cloud.face_assignment.push_back(static_cast<int>(i));
    }
    if (degenerate_skipped != nullptr) {
        *degenerate_skipped = skipped;
    }
    if (cloud.points.empty()) {
        throw EmptyMesh("mesh has no non-degenerate faces to sample");
    }
    return cloud;
}

LabeledSample normalize_unit_sphere(LabeledSample sample) {
    if (sample.cloud.points.empty()) {
        throw EmptyCloud("normalize_unit_sphere: empty cloud");
    }
    Vec3 centroid{};
    for (const Vec3& p : sample.cloud.points) {
        centroid += p;
    }
    centroid = centroid / static_cast<double>(sample.cloud.points.size());
    double radius = 0.0;
    for (const Vec3& p : sample.cloud.points) {
        radius = std::max(radius, norm(p - centroid));
    }
    if (radius < 1e-12) {
        throw DegenerateCloud("normalize_unit_sphere: all points coincident");
    }
    const double inv = 1.0 / radius;
    for (Vec3& p : sample.cloud.points) {
        p = (p - centroid) * inv;
    }
    for (Vec3& v : sample.mesh.vertices) {
        v = (v - centroid) * inv;
    }
    return sample;
}

}  // namespace emesh
