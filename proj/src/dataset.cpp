#include "emesh/dataset.hpp"

#include "emesh/errors.hpp"
#include "emesh/rng.hpp"

#include <cmath>
#include <string>

namespace emesh {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Patch extent on the sphere: avoids the poles so no face degenerates.
constexpr double kThetaLo = 0.30 * kPi;
constexpr double kThetaHi = 0.70 * kPi;
constexpr double kPhiLo = -0.45 * kPi;
constexpr double kPhiHi = 0.45 * kPi;

// Class identity is a fine corrugation of the radius: a plane wave in the
// patch parameters with class-specific direction and frequency, a couple of
// triangle widths long. The classifier has to read local surface pattern
// rather than gross extent, and moving a point about one triangle width
// along the surface visibly shifts the pattern it sits on. Subjects add a
// smooth low-frequency field and slightly different axis scales.
constexpr double kClassAmplitude = 0.03;
constexpr double kSubjectAmplitude = 0.008;
constexpr double kAxisJitter = 0.01;
constexpr int kSubjectTerms = 3;

struct SubjectField {
    double ax, ay, az;
    double amp[kSubjectTerms];
    double fu[kSubjectTerms], fv[kSubjectTerms];
    double pu[kSubjectTerms], pv[kSubjectTerms];
};

SubjectField subject_field(int subject_id, std::uint64_t seed) {
    Rng rng(derive_key(seed, {0x5B7Eu, static_cast<std::uint64_t>(subject_id)}));
    SubjectField f;
    f.ax = 1.0 + rng.uniform(-kAxisJitter, kAxisJitter);
    f.ay = 1.0 + rng.uniform(-kAxisJitter, kAxisJitter);
    f.az = 1.0 + rng.uniform(-kAxisJitter, kAxisJitter);
    for (int i = 0; i < kSubjectTerms; ++i) {
        f.amp[i] = kSubjectAmplitude * rng.uniform(-1.0, 1.0);
        f.fu[i] = static_cast<double>(rng.uniform_int(1, 3));
        f.fv[i] = static_cast<double>(rng.uniform_int(1, 3));
        f.pu[i] = rng.uniform(0.0, 2.0 * kPi);
        f.pv[i] = rng.uniform(0.0, 2.0 * kPi);
    }
    return f;
}

// Plane-wave parameters per class: four distinct directions, then higher
// frequencies and drifting phases for further classes.
void class_wave(int k, double& cu, double& cv, double& freq, double& phase) {
    static const double dirs[4][2] = {{1.0, 0.0}, {0.0, 1.0}, {0.7071, 0.7071}, {0.7071, -0.7071}};
    cu = dirs[k % 4][0];
    cv = dirs[k % 4][1];
    freq = 8.0 + 2.0 * static_cast<double>(k / 4);
    phase = 0.61 * static_cast<double>(k);
}

}  // namespace

Mesh generate_mesh(int class_index, int subject_id, int faces_per_mesh, std::uint64_t seed) {
    if (faces_per_mesh < 100) {
        throw ConfigError("generate_mesh: faces_per_mesh must be >= 100");
    }
    // 2*R*C triangles from an R x C cell grid; pick the smallest square grid
    // reaching the requested count.
    const int cells = static_cast<int>(std::ceil(std::sqrt(faces_per_mesh / 2.0)));
    const int rows = cells, cols = cells;

    const SubjectField f = subject_field(subject_id, seed);
    double cu = 0.0, cv = 0.0, cfreq = 0.0, cphase = 0.0;
    class_wave(class_index, cu, cv, cfreq, cphase);

    Mesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(rows + 1) * (cols + 1));
    for (int r = 0; r <= rows; ++r) {
        const double u = static_cast<double>(r) / rows;
        const double theta = kThetaLo + u * (kThetaHi - kThetaLo);
        for (int c = 0; c <= cols; ++c) {
            const double v = static_cast<double>(c) / cols;
            const double phi = kPhiLo + v * (kPhiHi - kPhiLo);

            double radius = 1.0;
            radius += kClassAmplitude *
                      std::sin(2.0 * kPi * cfreq * (u * cu + v * cv) + cphase);
            for (int i = 0; i < kSubjectTerms; ++i) {
                radius += f.amp[i] * std::sin(2.0 * kPi * f.fu[i] * u + f.pu[i]) *
                          std::cos(2.0 * kPi * f.fv[i] * v + f.pv[i]);
            }

            const Vec3 dir{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                           std::cos(theta)};
            mesh.vertices.push_back({radius * f.ax * dir.x, radius * f.ay * dir.y,
                                     radius * f.az * dir.z});
        }
    }
    const auto vid = [cols](int r, int c) { return r * (cols + 1) + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            mesh.faces.push_back({vid(r, c), vid(r + 1, c), vid(r + 1, c + 1)});
            mesh.faces.push_back({vid(r, c), vid(r + 1, c + 1), vid(r, c + 1)});
        }
    }
    return mesh;
}

LabeledSample make_sample(Mesh mesh, int label, const std::string& mesh_id) {
    LabeledSample sample;
    sample.cloud = sample_barycenters(mesh);
    sample.cloud.source_mesh_id = mesh_id;
    sample.mesh = std::move(mesh);
    sample.label = label;
    return normalize_unit_sphere(std::move(sample));
}

Dataset generate_synthetic_dataset(int classes, int subjects_train, int subjects_test,
                                   int faces_per_mesh, std::uint64_t seed) {
    if (classes < 2 || subjects_train < 1 || subjects_test < 1) {
        throw ConfigError("generate_synthetic_dataset: need >= 2 classes and >= 1 subject per split");
    }
    if (faces_per_mesh < 100) {
        throw ConfigError("generate_synthetic_dataset: faces_per_mesh must be >= 100");
    }
    Dataset ds;
    const auto emit = [&](int subject_id, std::vector<LabeledSample>& out) {
        for (int k = 0; k < classes; ++k) {
            const std::string id =
                "subj" + std::to_string(subject_id) + "_class" + std::to_string(k);
            out.push_back(make_sample(generate_mesh(k, subject_id, faces_per_mesh, seed), k, id));
        }
    };
    for (int s = 0; s < subjects_train; ++s) {
        emit(s, ds.train);
    }
    for (int s = subjects_train; s < subjects_train + subjects_test; ++s) {
        emit(s, ds.test);
    }
    return ds;
}

}  // namespace emesh
