#include "emesh/metrics.hpp"

#include "emesh/errors.hpp"
#include "emesh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace emesh {

double l2_correspondence(const PointCloud& orig, const PointCloud& adv) {
    if (orig.size() != adv.size()) {
        throw ShapeError("l2_correspondence: cloud sizes differ");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < orig.size(); ++i) {
        sum += norm2(adv.points[i] - orig.points[i]);
    }
    return std::sqrt(sum);
}

namespace {

double one_sided_chamfer(const PointCloud& from, const PointCloud& to) {
    double sum = 0.0;
    for (const Vec3& a : from.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& b : to.points) {
            best = std::min(best, norm2(a - b));
        }
        sum += best;
    }
    return sum;
}

}  // namespace

double chamfer(const PointCloud& p, const PointCloud& q) {
    if (p.points.empty() || q.points.empty()) {
        throw EmptyCloud("chamfer: empty cloud");
    }
    return one_sided_chamfer(p, q) + one_sided_chamfer(q, p);
}

double surface_deviation(const PointCloud& adv, const Mesh& mesh) {
    double worst = 0.0;
    for (std::size_t i = 0; i < adv.size(); ++i) {
        const int face = adv.face_assignment[i];
        if (face < 0 || static_cast<std::size_t>(face) >= mesh.faces.size()) {
            throw IndexError("surface_deviation: face assignment out of range");
        }
        const Triangle t = mesh.face_triangle(face);
        const Vec3 foot = perpendicular_project(adv.points[i], t);
        worst = std::max(worst, norm(adv.points[i] - foot));
    }
    return worst;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) {
        throw ShapeError("accuracy: prediction/label counts differ");
    }
    if (predictions.empty()) {
        return 0.0;
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        correct += predictions[i] == labels[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

DistanceReport distance_report(const PointCloud& orig, const PointCloud& adv, const Mesh& mesh) {
    if (orig.size() != adv.size()) {
        throw ShapeError("distance_report: cloud sizes differ");
    }
    DistanceReport r;
    r.l2 = l2_correspondence(orig, adv);
    r.chamfer = chamfer(orig, adv);
    r.max_surface_deviation = surface_deviation(adv, mesh);
    double sum = 0.0;
    for (std::size_t i = 0; i < orig.size(); ++i) {
        const double d = norm(adv.points[i] - orig.points[i]);
        sum += d;
        r.per_point_l2_max = std::max(r.per_point_l2_max, d);
    }
    r.per_point_l2_mean = orig.size() == 0 ? 0.0 : sum / static_cast<double>(orig.size());
    return r;
}

}  // namespace emesh
