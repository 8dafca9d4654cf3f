#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emesh/classifier.hpp"
#include "emesh/errors.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

using namespace emesh;
using namespace emesh::test;

namespace {

PointCloud random_cloud(Rng& rng, int n) {
    PointCloud c;
    for (int i = 0; i < n; ++i) {
        c.points.push_back(random_point(rng));
        c.face_assignment.push_back(0);
    }
    return c;
}

ClassifierParams small_params(std::uint64_t seed, int k = 3) {
    return ClassifierParams::init({3, 8, 12}, {12, 6, k}, seed);
}

// Central finite differences of the loss with respect to every input
// coordinate; the oracle the analytic backward pass is checked against.
std::vector<Vec3> fd_input_gradient(const ClassifierParams& params, const PointCloud& cloud,
                                    int label, double h = 1e-5) {
    std::vector<Vec3> grad(cloud.size());
    PointCloud work = cloud;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        double* coords[3] = {&work.points[i].x, &work.points[i].y, &work.points[i].z};
        double out[3];
        for (int c = 0; c < 3; ++c) {
            const double saved = *coords[c];
            *coords[c] = saved + h;
            const double up = loss(forward(params, work), label);
            *coords[c] = saved - h;
            const double down = loss(forward(params, work), label);
            *coords[c] = saved;
            out[c] = (up - down) / (2.0 * h);
        }
        grad[i] = {out[0], out[1], out[2]};
    }
    return grad;
}

double relative_error(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double diff2 = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff2 += norm2(a[i] - b[i]);
        na += norm2(a[i]);
        nb += norm2(b[i]);
    }
    return std::sqrt(diff2) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

}  // namespace

TEST_CASE("forward is exactly permutation invariant") {
    Rng rng(derive_key(41, {0}));
    const ClassifierParams params = small_params(1);
    for (int trial = 0; trial < 20; ++trial) {
        PointCloud cloud = random_cloud(rng, 17);
        const LogitVector base = forward(params, cloud);

        PointCloud shuffled = cloud;
        for (std::size_t i = shuffled.points.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(shuffled.points[i - 1], shuffled.points[j]);
        }
        const LogitVector permuted = forward(params, shuffled);
        for (std::size_t k = 0; k < base.size(); ++k) {
            CHECK(std::abs(base[k] - permuted[k]) <= 1e-9);
        }
    }
}

TEST_CASE("single-point cloud: pooling is the identity on that point") {
    Rng rng(derive_key(41, {1}));
    const ClassifierParams params = small_params(2);
    PointCloud one = random_cloud(rng, 1);
    PointCloud twice = one;
    twice.points.push_back(one.points[0]);
    twice.face_assignment.push_back(0);
    // Duplicating the only point cannot change pooled features.
    const LogitVector a = forward(params, one);
    const LogitVector b = forward(params, twice);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k] == b[k]);
    }
}

TEST_CASE("hand-traced forward with all-ones weights") {
    // encoder 3->2->2, head 2->2->2, weights all 1, biases 0.
    ClassifierParams p;
    const auto ones = [](int in, int out) {
        LinearLayer l;
        l.in = in;
        l.out = out;
        l.w.assign(static_cast<std::size_t>(in) * out, 1.0);
        l.b.assign(out, 0.0);
        return l;
    };
    p.encoder = {ones(3, 2), ones(2, 2)};
    p.head = {ones(2, 2), ones(2, 2)};

    PointCloud cloud;
    cloud.points = {{1, 2, 3}, {0.5, 0, 0}};
    cloud.face_assignment = {0, 0};
    // point 1: h1 = (6,6), h2 = (12,12); point 2: h1 = (.5,.5), h2 = (1,1)
    // pooled = (12,12); h3 = (24,24); logits = (48,48)
    const LogitVector logits = forward(p, cloud);
    REQUIRE(logits.size() == 2);
    CHECK(logits[0] == 48.0);
    CHECK(logits[1] == 48.0);

    CHECK_THROWS_AS(forward(p, PointCloud{}), EmptyCloud);
}

TEST_CASE("loss values") {
    CHECK(approx(loss({0.7, 0.7, 0.7, 0.7}, 2), std::log(4.0), 1e-12));
    CHECK(loss({1000.0, 0.0}, 0) <= 1e-12);
    CHECK(loss({1000.0, 0.0}, 0) >= 0.0);

    // -log(e^2 / (e + e^2 + e^3)), evaluated directly.
    const double direct = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 2.0;
    CHECK(approx(loss({1, 2, 3}, 1), direct, 1e-12));
    CHECK(approx(loss({1, 2, 3}, 1), 1.407606, 1e-6));

    CHECK_THROWS_AS(loss({1, 2, 3}, 3), LabelError);
    CHECK_THROWS_AS(loss({1, 2, 3}, -1), LabelError);
}

TEST_CASE("input gradient: dead points get exactly zero") {
    // All-positive weights: a point negative in every coordinate has all its
    // ReLU features clamped to zero, wins no pooling slot and feeds no active
    // unit.
    ClassifierParams p;
    const auto ones = [](int in, int out) {
        LinearLayer l;
        l.in = in;
        l.out = out;
        l.w.assign(static_cast<std::size_t>(in) * out, 1.0);
        l.b.assign(out, 0.0);
        return l;
    };
    p.encoder = {ones(3, 4), ones(4, 4)};
    LinearLayer out_layer = ones(4, 2);
    for (int i = 0; i < 4; ++i) {
        out_layer.w[4 + i] = 2.0;  // class-1 row; breaks the logit symmetry
    }
    p.head = {ones(4, 4), out_layer};

    PointCloud cloud;
    cloud.points = {{1, 2, 3}, {0.5, 0.2, 0.1}, {-1, -1, -1}};
    cloud.face_assignment = {0, 0, 0};
    const InputGradient g = input_gradient(p, cloud, 0);
    CHECK(g.d_points.back().x == 0.0);
    CHECK(g.d_points.back().y == 0.0);
    CHECK(g.d_points.back().z == 0.0);
    // The pool winner does carry gradient.
    CHECK(norm(g.d_points.front()) > 0.0);
}

TEST_CASE("input gradient matches central finite differences") {
    for (std::uint64_t draw = 0; draw < 10; ++draw) {
        Rng rng(derive_key(41, {3, draw}));
        const ClassifierParams params = small_params(100 + draw);
        const PointCloud cloud = random_cloud(rng, 16);
        const int label = static_cast<int>(draw % 3);
        const InputGradient analytic = input_gradient(params, cloud, label);
        const auto fd = fd_input_gradient(params, cloud, label);
        CHECK(relative_error(analytic.d_points, fd) < 1e-4);
    }
}

TEST_CASE("duplicated pool winner: pair gradients sum to the original") {
    Rng rng(derive_key(41, {4}));
    const ClassifierParams params = small_params(7);
    const PointCloud cloud = random_cloud(rng, 10);
    const int label = 1;

    const InputGradient base = input_gradient(params, cloud, label);
    // Duplicate the point with the strongest gradient; ties in the pool then
    // resolve to the original (lower index).
    std::size_t strongest = 0;
    for (std::size_t i = 1; i < cloud.size(); ++i) {
        if (norm(base.d_points[i]) > norm(base.d_points[strongest])) {
            strongest = i;
        }
    }
    REQUIRE(norm(base.d_points[strongest]) > 1e-8);

    PointCloud dup = cloud;
    dup.points.push_back(cloud.points[strongest]);
    dup.face_assignment.push_back(0);

    // Loss is unchanged by the duplicate.
    CHECK(loss(forward(params, dup), label) == loss(forward(params, cloud), label));

    // Analytic: the lower-index copy keeps the whole gradient.
    const InputGradient dup_grad = input_gradient(params, dup, label);
    CHECK(approx(dup_grad.d_points[strongest], base.d_points[strongest], 1e-12));
    CHECK(approx(dup_grad.d_points.back(), {0, 0, 0}, 0.0));

    // Finite differences see half the slope on each copy; their sum recovers
    // the original gradient.
    const auto fd = fd_input_gradient(params, dup, label);
    const Vec3 fd_sum = fd[strongest] + fd.back();
    CHECK(approx(fd_sum, base.d_points[strongest], 1e-3));
}

TEST_CASE("predict: argmax with lowest-index ties") {
    CHECK(argmax_logit({3, 1, 2}) == 0);
    CHECK(argmax_logit({2, 2}) == 0);
    CHECK(argmax_logit({0, 5, 5}) == 1);

    Rng rng(derive_key(41, {5}));
    const ClassifierParams params = small_params(9);
    for (int i = 0; i < 100; ++i) {
        const PointCloud cloud = random_cloud(rng, 8);
        CHECK(predict(params, cloud) == argmax_logit(forward(params, cloud)));
    }
}

TEST_CASE("train: lr=0 leaves parameters untouched") {
    Rng rng(derive_key(41, {6}));
    std::vector<LabeledSample> data;
    for (int i = 0; i < 6; ++i) {
        LabeledSample s;
        s.cloud = random_cloud(rng, 6);
        s.label = i % 3;
        data.push_back(std::move(s));
    }
    const ClassifierParams initial = small_params(11);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.learning_rate = 0.0;
    cfg.batch_size = 2;
    cfg.seed = 5;
    const TrainResult r = train(data, {}, initial, cfg);
    for (std::size_t l = 0; l < initial.encoder.size(); ++l) {
        CHECK(r.params.encoder[l].w == initial.encoder[l].w);
        CHECK(r.params.encoder[l].b == initial.encoder[l].b);
    }
    for (std::size_t l = 0; l < initial.head.size(); ++l) {
        CHECK(r.params.head[l].w == initial.head[l].w);
        CHECK(r.params.head[l].b == initial.head[l].b);
    }
    CHECK(r.history.size() == 3);
}

TEST_CASE("train: bit-identical across reruns with the same seed") {
    Rng rng(derive_key(41, {7}));
    std::vector<LabeledSample> data;
    for (int i = 0; i < 8; ++i) {
        LabeledSample s;
        s.cloud = random_cloud(rng, 6);
        s.label = i % 3;
        data.push_back(std::move(s));
    }
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 3;
    cfg.seed = 17;
    const TrainResult a = train(data, {}, small_params(11), cfg);
    const TrainResult b = train(data, {}, small_params(11), cfg);
    for (std::size_t l = 0; l < a.params.encoder.size(); ++l) {
        CHECK(a.params.encoder[l].w == b.params.encoder[l].w);
        CHECK(a.params.encoder[l].b == b.params.encoder[l].b);
    }
    for (std::size_t l = 0; l < a.params.head.size(); ++l) {
        CHECK(a.params.head[l].w == b.params.head[l].w);
        CHECK(a.params.head[l].b == b.params.head[l].b);
    }
    // And training actually changes something.
    CHECK(a.params.head.back().w != small_params(11).head.back().w);

    TrainConfig bad = cfg;
    bad.batch_size = 0;
    CHECK_THROWS_AS(train(data, {}, small_params(11), bad), ConfigError);
}

TEST_CASE("checkpoint round-trip is exact") {
    const ClassifierParams params = small_params(23, 4);
    const std::string path =
        (std::filesystem::temp_directory_path() / "emesh_ckpt_test.json").string();
    save_checkpoint(params, path);
    const ClassifierParams loaded = load_checkpoint(path);
    REQUIRE(loaded.encoder.size() == params.encoder.size());
    REQUIRE(loaded.head.size() == params.head.size());
    for (std::size_t l = 0; l < params.encoder.size(); ++l) {
        CHECK(loaded.encoder[l].w == params.encoder[l].w);
        CHECK(loaded.encoder[l].b == params.encoder[l].b);
    }
    for (std::size_t l = 0; l < params.head.size(); ++l) {
        CHECK(loaded.head[l].w == params.head[l].w);
        CHECK(loaded.head[l].b == params.head[l].b);
    }
    CHECK(loaded.num_classes() == 4);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.json"), IoError);
}
