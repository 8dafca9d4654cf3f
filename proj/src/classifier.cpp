#include "emesh/classifier.hpp"

#include "emesh/errors.hpp"
#include "emesh/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace emesh {

namespace {

// y = W x + b
void linear(const LinearLayer& l, const double* x, double* y) {
    for (int o = 0; o < l.out; ++o) {
        const double* row = l.w.data() + static_cast<std::size_t>(o) * l.in;
        double acc = l.b[o];
        for (int i = 0; i < l.in; ++i) {
            acc += row[i] * x[i];
        }
        y[o] = acc;
    }
}

void relu_inplace(double* x, int n) {
    for (int i = 0; i < n; ++i) {
        x[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

// dx = W^T dy, masked afterwards by the caller where a ReLU sat.
void linear_backward_input(const LinearLayer& l, const double* dy, double* dx) {
    std::fill(dx, dx + l.in, 0.0);
    for (int o = 0; o < l.out; ++o) {
        const double* row = l.w.data() + static_cast<std::size_t>(o) * l.in;
        const double g = dy[o];
        if (g == 0.0) {
            continue;
        }
        for (int i = 0; i < l.in; ++i) {
            dx[i] += row[i] * g;
        }
    }
}

void accumulate_param_grads(const LinearLayer& l, const double* x, const double* dy,
                            LinearLayer& grad) {
    for (int o = 0; o < l.out; ++o) {
        const double g = dy[o];
        if (g == 0.0) {
            continue;
        }
        grad.b[o] += g;
        double* row = grad.w.data() + static_cast<std::size_t>(o) * l.in;
        for (int i = 0; i < l.in; ++i) {
            row[i] += g * x[i];
        }
    }
}

struct ForwardTrace {
    // enc_act[l] holds the post-ReLU activations of encoder layer l for all
    // points, laid out [point * dim]. enc_act[0] is the raw input.
    std::vector<std::vector<double>> enc_act;
    std::vector<double> pooled;
    std::vector<int> winner;  // pooled feature j came from point winner[j]
    // head_act[0] = pooled copy; interior entries post-ReLU; last = logits.
    std::vector<std::vector<double>> head_act;
};

void run_forward(const ClassifierParams& params, const PointCloud& cloud, ForwardTrace& tr) {
    if (cloud.points.empty()) {
        throw EmptyCloud("forward: empty cloud");
    }
    params.check_shapes();
    const int n = static_cast<int>(cloud.points.size());

    tr.enc_act.assign(params.encoder.size() + 1, {});
    tr.enc_act[0].resize(static_cast<std::size_t>(n) * 3);
    for (int i = 0; i < n; ++i) {
        tr.enc_act[0][i * 3 + 0] = cloud.points[i].x;
        tr.enc_act[0][i * 3 + 1] = cloud.points[i].y;
        tr.enc_act[0][i * 3 + 2] = cloud.points[i].z;
    }
    for (std::size_t l = 0; l < params.encoder.size(); ++l) {
        const LinearLayer& layer = params.encoder[l];
        tr.enc_act[l + 1].resize(static_cast<std::size_t>(n) * layer.out);
        for (int i = 0; i < n; ++i) {
            double* y = tr.enc_act[l + 1].data() + static_cast<std::size_t>(i) * layer.out;
            linear(layer, tr.enc_act[l].data() + static_cast<std::size_t>(i) * layer.in, y);
            relu_inplace(y, layer.out);
        }
    }

    const int fdim = params.feature_dim();
    tr.pooled.assign(fdim, 0.0);
    tr.winner.assign(fdim, 0);
    const std::vector<double>& feats = tr.enc_act.back();
    for (int j = 0; j < fdim; ++j) {
        double best = feats[j];
        int who = 0;
        for (int i = 1; i < n; ++i) {
            const double v = feats[static_cast<std::size_t>(i) * fdim + j];
            if (v > best) {  // strict: ties stay with the lowest index
                best = v;
                who = i;
            }
        }
        tr.pooled[j] = best;
        tr.winner[j] = who;
    }

    tr.head_act.assign(params.head.size() + 1, {});
    tr.head_act[0] = tr.pooled;
    for (std::size_t l = 0; l < params.head.size(); ++l) {
        const LinearLayer& layer = params.head[l];
        tr.head_act[l + 1].resize(layer.out);
        linear(layer, tr.head_act[l].data(), tr.head_act[l + 1].data());
        if (l + 1 < params.head.size()) {
            relu_inplace(tr.head_act[l + 1].data(), layer.out);
        }
    }
}

std::vector<double> softmax(const LogitVector& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double denom = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        p[k] = std::exp(logits[k] - m);
        denom += p[k];
    }
    for (double& v : p) {
        v /= denom;
    }
    return p;
}

struct ParamGrads {
    std::vector<LinearLayer> encoder;
    std::vector<LinearLayer> head;
};

ParamGrads zero_like(const ClassifierParams& params) {
    ParamGrads g;
    auto zero_stack = [](const std::vector<LinearLayer>& src) {
        std::vector<LinearLayer> out;
        out.reserve(src.size());
        for (const LinearLayer& l : src) {
            LinearLayer z;
            z.in = l.in;
            z.out = l.out;
            z.w.assign(l.w.size(), 0.0);
            z.b.assign(l.b.size(), 0.0);
            out.push_back(std::move(z));
        }
        return out;
    };
    g.encoder = zero_stack(params.encoder);
    g.head = zero_stack(params.head);
    return g;
}

// Backward from dlogits. Fills input gradients; accumulates parameter
// gradients when param_grads is non-null.
void run_backward(const ClassifierParams& params, const ForwardTrace& tr,
                  const std::vector<double>& dlogits, std::vector<Vec3>& d_input,
                  ParamGrads* param_grads) {
    const int n = static_cast<int>(tr.enc_act[0].size() / 3);
    const int fdim = params.feature_dim();

    // Head, last layer to first.
    std::vector<double> dy = dlogits;
    for (std::size_t li = params.head.size(); li-- > 0;) {
        const LinearLayer& layer = params.head[li];
        if (li + 1 < params.head.size()) {
            // dy currently refers to the post-ReLU output of layer li.
            const std::vector<double>& act = tr.head_act[li + 1];
            for (int o = 0; o < layer.out; ++o) {
                if (act[o] <= 0.0) {
                    dy[o] = 0.0;
                }
            }
        }
        if (param_grads != nullptr) {
            accumulate_param_grads(layer, tr.head_act[li].data(), dy.data(),
                                   param_grads->head[li]);
        }
        std::vector<double> dx(layer.in, 0.0);
        linear_backward_input(layer, dy.data(), dx.data());
        dy = std::move(dx);
    }

    // dy now holds d(pooled); route each feature to its winning point.
    std::vector<int> touched;
    std::vector<std::vector<double>> d_feat_by_point(n);
    for (int j = 0; j < fdim; ++j) {
        if (dy[j] == 0.0) {
            continue;
        }
        const int who = tr.winner[j];
        if (d_feat_by_point[who].empty()) {
            d_feat_by_point[who].assign(fdim, 0.0);
            touched.push_back(who);
        }
        d_feat_by_point[who][j] += dy[j];
    }
    std::sort(touched.begin(), touched.end());

    d_input.assign(n, Vec3{});
    for (const int i : touched) {
        std::vector<double> dp = std::move(d_feat_by_point[i]);
        for (std::size_t li = params.encoder.size(); li-- > 0;) {
            const LinearLayer& layer = params.encoder[li];
            const double* act = tr.enc_act[li + 1].data() + static_cast<std::size_t>(i) * layer.out;
            for (int o = 0; o < layer.out; ++o) {
                if (act[o] <= 0.0) {
                    dp[o] = 0.0;
                }
            }
            if (param_grads != nullptr) {
                accumulate_param_grads(
                    layer, tr.enc_act[li].data() + static_cast<std::size_t>(i) * layer.in,
                    dp.data(), param_grads->encoder[li]);
            }
            std::vector<double> dx(layer.in, 0.0);
            linear_backward_input(layer, dp.data(), dx.data());
            dp = std::move(dx);
        }
        d_input[i] = {dp[0], dp[1], dp[2]};
    }
}

std::vector<double> loss_gradient_logits(const LogitVector& logits, int label) {
    std::vector<double> d = softmax(logits);
    d[label] -= 1.0;
    return d;
}

}  // namespace

void ClassifierParams::check_shapes() const {
    if (encoder.empty() || head.empty()) {
        throw ConfigError("classifier needs at least one encoder and one head layer");
    }
    int prev = 3;
    for (const LinearLayer& l : encoder) {
        if (l.in != prev || l.out <= 0 ||
            l.w.size() != static_cast<std::size_t>(l.in) * l.out ||
            l.b.size() != static_cast<std::size_t>(l.out)) {
            throw ConfigError("encoder layer shapes do not chain");
        }
        prev = l.out;
    }
    for (const LinearLayer& l : head) {
        if (l.in != prev || l.out <= 0 ||
            l.w.size() != static_cast<std::size_t>(l.in) * l.out ||
            l.b.size() != static_cast<std::size_t>(l.out)) {
            throw ConfigError("head layer shapes do not chain");
        }
        prev = l.out;
    }
}

ClassifierParams ClassifierParams::init(const std::vector<int>& encoder_dims,
                                        const std::vector<int>& head_dims,
                                        std::uint64_t seed) {
    if (encoder_dims.size() < 2 || head_dims.size() < 2 || encoder_dims.front() != 3 ||
        encoder_dims.back() != head_dims.front()) {
        throw ConfigError("invalid classifier dimensions");
    }
    ClassifierParams p;
    auto make_stack = [&](const std::vector<int>& dims, std::uint64_t tag) {
        std::vector<LinearLayer> stack;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            LinearLayer layer;
            layer.in = dims[l];
            layer.out = dims[l + 1];
            layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
            layer.b.resize(layer.out);
            Rng rng(derive_key(seed, {tag, l}));
            const double limit = std::sqrt(6.0 / (layer.in + layer.out));
            for (double& v : layer.w) {
                v = rng.uniform(-limit, limit);
            }
            // Random bias cuts keep the pooled ReLU features from collapsing
            // onto a single shared direction.
            const double blimit = 1.0 / std::sqrt(static_cast<double>(layer.in));
            for (double& v : layer.b) {
                v = rng.uniform(-blimit, blimit);
            }
            stack.push_back(std::move(layer));
        }
        return stack;
    };
    p.encoder = make_stack(encoder_dims, 0xE0C0);
    p.head = make_stack(head_dims, 0x4EAD);
    return p;
}

LogitVector forward(const ClassifierParams& params, const PointCloud& cloud) {
    ForwardTrace tr;
    run_forward(params, cloud, tr);
    return tr.head_act.back();
}

void calibrate_activation_scale(ClassifierParams& params,
                                const std::vector<LabeledSample>& data) {
    params.check_shapes();
    if (data.empty()) {
        throw ConfigError("calibrate_activation_scale: no data");
    }
    const auto rescale = [](LinearLayer& layer, double rms, double target) {
        if (rms < 1e-12) {
            return;  // layer is dead on this data; leave it alone
        }
        const double c = target / rms;
        for (double& v : layer.w) {
            v *= c;
        }
        for (double& v : layer.b) {
            v *= c;
        }
    };
    // Scaling a layer by c > 0 scales its post-ReLU output by c, so each
    // layer can be fixed in turn, recomputing the traces as we go.
    for (std::size_t l = 0; l < params.encoder.size(); ++l) {
        double sum2 = 0.0;
        std::size_t count = 0;
        for (const LabeledSample& s : data) {
            ForwardTrace tr;
            run_forward(params, s.cloud, tr);
            for (const double v : tr.enc_act[l + 1]) {
                sum2 += v * v;
                ++count;
            }
        }
        rescale(params.encoder[l], std::sqrt(sum2 / static_cast<double>(count)), 1.0);
    }
    for (std::size_t l = 0; l < params.head.size(); ++l) {
        double sum2 = 0.0;
        std::size_t count = 0;
        for (const LabeledSample& s : data) {
            ForwardTrace tr;
            run_forward(params, s.cloud, tr);
            for (const double v : tr.head_act[l + 1]) {
                sum2 += v * v;
                ++count;
            }
        }
        const bool is_output = l + 1 == params.head.size();
        rescale(params.head[l], std::sqrt(sum2 / static_cast<double>(count)),
                is_output ? 0.05 : 1.0);
    }
}

double loss(const LogitVector& logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
        throw LabelError("loss: label out of range");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (const double l : logits) {
        denom += std::exp(l - m);
    }
    return m + std::log(denom) - logits[label];
}

InputGradient input_gradient(const ClassifierParams& params, const PointCloud& cloud, int label) {
    ForwardTrace tr;
    run_forward(params, cloud, tr);
    if (label < 0 || label >= params.num_classes()) {
        throw LabelError("input_gradient: label out of range");
    }
    InputGradient g;
    const auto dlogits = loss_gradient_logits(tr.head_act.back(), label);
    run_backward(params, tr, dlogits, g.d_points, nullptr);
    return g;
}

int argmax_logit(const LogitVector& logits) {
    int best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k) {
        if (logits[k] > logits[best]) {
            best = static_cast<int>(k);
        }
    }
    return best;
}

int predict(const ClassifierParams& params, const PointCloud& cloud) {
    return argmax_logit(forward(params, cloud));
}

EvalResult evaluate_with_gradient(const ClassifierParams& params, const PointCloud& cloud,
                                  int label) {
    ForwardTrace tr;
    run_forward(params, cloud, tr);
    if (label < 0 || label >= params.num_classes()) {
        throw LabelError("evaluate_with_gradient: label out of range");
    }
    EvalResult r;
    r.logits = tr.head_act.back();
    r.loss_value = loss(r.logits, label);
    const auto dlogits = loss_gradient_logits(r.logits, label);
    run_backward(params, tr, dlogits, r.input_grad, nullptr);
    return r;
}

TrainResult train(const std::vector<LabeledSample>& train_set,
                  const std::vector<LabeledSample>& test_set,
                  ClassifierParams initial,
                  const TrainConfig& config) {
    if (config.epochs < 0 || config.batch_size < 1 || config.learning_rate < 0.0) {
        throw ConfigError("train: bad config");
    }
    initial.check_shapes();
    if (train_set.empty()) {
        throw ConfigError("train: empty training set");
    }
    const int k = initial.num_classes();
    for (const LabeledSample& s : train_set) {
        if (s.label < 0 || s.label >= k) {
            throw LabelError("train: label out of range");
        }
    }

    TrainResult result;
    result.params = std::move(initial);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(derive_key(config.seed, {0x54FF1E, static_cast<std::uint64_t>(epoch)}));
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        std::size_t epoch_correct = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            ParamGrads grads = zero_like(result.params);
            for (std::size_t oi = start; oi < stop; ++oi) {
                const LabeledSample& s = train_set[order[oi]];
                ForwardTrace tr;
                run_forward(result.params, s.cloud, tr);
                const LogitVector& logits = tr.head_act.back();
                epoch_loss += loss(logits, s.label);
                epoch_correct += argmax_logit(logits) == s.label ? 1 : 0;
                const auto dlogits = loss_gradient_logits(logits, s.label);
                std::vector<Vec3> unused;
                run_backward(result.params, tr, dlogits, unused, &grads);
            }
            const double step = config.learning_rate / static_cast<double>(stop - start);
            auto apply = [step](std::vector<LinearLayer>& layers,
                                const std::vector<LinearLayer>& g) {
                for (std::size_t l = 0; l < layers.size(); ++l) {
                    for (std::size_t i = 0; i < layers[l].w.size(); ++i) {
                        layers[l].w[i] -= step * g[l].w[i];
                    }
                    for (std::size_t i = 0; i < layers[l].b.size(); ++i) {
                        layers[l].b[i] -= step * g[l].b[i];
                    }
                }
            };
            apply(result.params.encoder, grads.encoder);
            apply(result.params.head, grads.head);
        }

        EpochStats st;
        st.epoch = epoch;
        st.train_loss = epoch_loss / static_cast<double>(train_set.size());
        st.train_accuracy = static_cast<double>(epoch_correct) / static_cast<double>(train_set.size());
        std::size_t test_correct = 0;
        for (const LabeledSample& s : test_set) {
            test_correct += predict(result.params, s.cloud) == s.label ? 1 : 0;
        }
        st.test_accuracy = test_set.empty()
                               ? 0.0
                               : static_cast<double>(test_correct) / static_cast<double>(test_set.size());
        result.history.push_back(st);
    }
    return result;
}

namespace {

nlohmann::json layer_to_json(const LinearLayer& l) {
    return {{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}};
}

LinearLayer layer_from_json(const nlohmann::json& j) {
    LinearLayer l;
    l.in = j.at("in").get<int>();
    l.out = j.at("out").get<int>();
    l.w = j.at("w").get<std::vector<double>>();
    l.b = j.at("b").get<std::vector<double>>();
    return l;
}

constexpr const char* kCheckpointFormat = "emesh-checkpoint-v1";

}  // namespace

void save_checkpoint(const ClassifierParams& params, const std::string& path) {
    params.check_shapes();
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["classes"] = params.num_classes();
    j["encoder"] = nlohmann::json::array();
    for (const LinearLayer& l : params.encoder) {
        j["encoder"].push_back(layer_to_json(l));
    }
    j["head"] = nlohmann::json::array();
    for (const LinearLayer& l : params.head) {
        j["head"].push_back(layer_to_json(l));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

ClassifierParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad checkpoint " + path + ": " + e.what());
    }
    if (j.value("format", "") != kCheckpointFormat) {
        throw IoError("unsupported checkpoint format in " + path);
    }
    ClassifierParams p;
    for (const auto& lj : j.at("encoder")) {
        p.encoder.push_back(layer_from_json(lj));
    }
    for (const auto& lj : j.at("head")) {
        p.head.push_back(layer_from_json(lj));
    }
    p.check_shapes();
    return p;
}

}  // namespace emesh
