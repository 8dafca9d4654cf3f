#pragma once

#include "emesh/mesh.hpp"

#include <cstdint>
#include <vector>

namespace emesh {

struct Dataset {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
};

// Desk-scale stand-in for a real scan corpus: each sample is a triangulated
// ellipsoid patch. Class identity is a fixed-frequency radial bump pattern;
// each subject adds a low-amplitude random field and slightly different axis
// scales, shared across the subject's classes. Train/test subject ids are
// disjoint. Fully deterministic given the seed; per-sample streams are
// counter-based, so generation order does not matter.
Dataset generate_synthetic_dataset(int classes, int subjects_train, int subjects_test,
                                   int faces_per_mesh, std::uint64_t seed);

// Raw (un-normalized) mesh for one (class, subject) pair; exposed so the CLI
// can write the same meshes it later reloads.
Mesh generate_mesh(int class_index, int subject_id, int faces_per_mesh, std::uint64_t seed);

// mesh -> barycenter cloud -> joint unit-sphere normalization.
LabeledSample make_sample(Mesh mesh, int label, const std::string& mesh_id);

}  // namespace emesh
