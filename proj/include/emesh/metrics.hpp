#pragma once

#include "emesh/mesh.hpp"

#include <vector>

namespace emesh {

struct DistanceReport {
    double l2 = 0.0;                     // Frobenius norm of the perturbation matrix
    double chamfer = 0.0;                // symmetric sum of squared nearest distances
    double max_surface_deviation = 0.0;  // max distance to the assigned original face
    double per_point_l2_mean = 0.0;
    double per_point_l2_max = 0.0;
};

// sqrt of the sum over points of |adv_i - orig_i|^2. Valid because the attack
// keeps the exact point correspondence.
double l2_correspondence(const PointCloud& orig, const PointCloud& adv);

// sum_{a in p} min_{b in q} |a-b|^2 + sum_{b in q} min_{a in p} |a-b|^2.
// Brute force; clouds here are a few thousand points at most.
double chamfer(const PointCloud& p, const PointCloud& q);

// max over points of the distance to the closest point of the assigned face.
double surface_deviation(const PointCloud& adv, const Mesh& mesh);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

DistanceReport distance_report(const PointCloud& orig, const PointCloud& adv, const Mesh& mesh);

}  // namespace emesh
