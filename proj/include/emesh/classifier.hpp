#pragma once

#include "emesh/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace emesh {

struct LinearLayer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // row-major [out][in]
    std::vector<double> b;  // [out]
};

// Shared per-point encoder (ReLU after every layer), coordinatewise max-pool
// over points, dense head (ReLU between layers, linear output). Permutation
// invariant by construction; the backward pass is exact, with pool ties
// routed to the lowest point index.
struct ClassifierParams {
    std::vector<LinearLayer> encoder;
    std::vector<LinearLayer> head;

    int num_classes() const { return head.empty() ? 0 : head.back().out; }
    int feature_dim() const { return encoder.empty() ? 0 : encoder.back().out; }
    void check_shapes() const;  // throws ConfigError on inconsistent chaining

    // Xavier-uniform weights with selective (negative) encoder bias cuts.
    // encoder_dims like {3, 64, 128}, head_dims like {128, 64, K}.
    static ClassifierParams init(const std::vector<int>& encoder_dims,
                                 const std::vector<int>& head_dims,
                                 std::uint64_t seed);
};

// Rescales every layer in place so its unit activations have RMS 1 over the
// given clouds (the output layer aims lower so initial logits stay near
// uniform). ReLU stacks are positively homogeneous, so this only changes the
// scale of the initialization, and it is deterministic for fixed inputs.
// Plain SGD needs this: uncalibrated pooled features come out orders of
// magnitude too small for a fixed-step optimizer to train the head in any
// reasonable number of epochs.
void calibrate_activation_scale(ClassifierParams& params,
                                const std::vector<LabeledSample>& data);

using LogitVector = std::vector<double>;

struct InputGradient {
    std::vector<Vec3> d_points;  // dloss/dp_i, same order as the cloud
};

LogitVector forward(const ClassifierParams& params, const PointCloud& cloud);

// Cross-entropy: -log(softmax(logits)[label]).
double loss(const LogitVector& logits, int label);

InputGradient input_gradient(const ClassifierParams& params, const PointCloud& cloud, int label);

// argmax of forward; ties resolve to the lowest class index.
int predict(const ClassifierParams& params, const PointCloud& cloud);
int argmax_logit(const LogitVector& logits);

// Single fused pass used by the attack loop: logits, loss and input gradient.
struct EvalResult {
    LogitVector logits;
    double loss_value = 0.0;
    std::vector<Vec3> input_grad;
};
EvalResult evaluate_with_gradient(const ClassifierParams& params, const PointCloud& cloud,
                                  int label);

struct TrainConfig {
    int epochs = 150;
    double learning_rate = 0.05;
    int batch_size = 8;
    std::uint64_t seed = 1;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;  // running accuracy over the epoch's passes
    double test_accuracy = 0.0;
};

struct TrainResult {
    ClassifierParams params;
    std::vector<EpochStats> history;
};

// Plain mini-batch SGD with a constant step; single-threaded and bit-exactly
// deterministic for a fixed (data, config, seed, initial params).
TrainResult train(const std::vector<LabeledSample>& train_set,
                  const std::vector<LabeledSample>& test_set,
                  ClassifierParams initial,
                  const TrainConfig& config);

// Checkpoint: one JSON document with a format tag, layer shapes and row-major
// weight arrays.
void save_checkpoint(const ClassifierParams& params, const std::string& path);
ClassifierParams load_checkpoint(const std::string& path);

}  // namespace emesh
