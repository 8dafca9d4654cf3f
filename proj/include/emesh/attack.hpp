#pragma once

#include "emesh/classifier.hpp"
#include "emesh/geometry.hpp"
#include "emesh/mesh.hpp"
#include "emesh/metrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace emesh {

enum class AttackMethod {
    pgd_linf,
    pgd_l2,
    mesh_central,
    mesh_perpendicular,
};

AttackMethod parse_method(const std::string& name);  // throws ConfigError
std::string method_name(AttackMethod m);
bool is_mesh_method(AttackMethod m);

struct AttackConfig {
    AttackMethod method = AttackMethod::mesh_perpendicular;
    double eps = 1.0;    // ball radius for PGD; triangle scale in [0,1] for mesh
    double alpha = 0.1;  // step size
    int steps = 250;
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
};

struct AttackResult {
    PointCloud adversarial;
    bool success = false;  // prediction changed away from the ground truth
    std::vector<double> loss_trajectory;  // loss at each step's gradient evaluation
    int final_prediction = -1;
    int clean_prediction = -1;
};

// One gradient-ascent step confined to t_scaled: tangent-project the
// gradient, take the step, then pull the candidate back into the triangle
// with the chosen projection. A degenerate t_scaled (eps = 0) collapses the
// point to the barycenter.
Vec3 attack_step_mesh(const Vec3& p, const Vec3& grad, const Triangle& t_scaled, double alpha,
                      AttackMethod method);

AttackResult run_attack(const ClassifierParams& params, const LabeledSample& sample,
                        const AttackConfig& config);

struct SampleOutcome {
    AttackResult result;
    DistanceReport distances;
    double seconds = 0.0;  // wall clock, excluded from deterministic outputs
};

struct BatchSummary {
    double clean_accuracy = 0.0;
    double attacked_accuracy = 0.0;  // fraction still classified correctly
    double mean_l2 = 0.0;
    double mean_chamfer = 0.0;
    double max_surface_deviation = 0.0;
    double mean_seconds = 0.0;
    std::vector<SampleOutcome> per_sample;  // input order
};

// Samples are attacked independently (optionally in parallel); results are
// merged in input order so the summary is deterministic for a fixed config.
BatchSummary run_batch(const ClassifierParams& params, const std::vector<LabeledSample>& samples,
                       const AttackConfig& config, int jobs = 1);

}  // namespace emesh
