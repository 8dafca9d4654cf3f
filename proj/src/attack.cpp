#include "emesh/attack.hpp"

#include "emesh/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace emesh {

AttackMethod parse_method(const std::string& name) {
    if (name == "pgd_linf") return AttackMethod::pgd_linf;
    if (name == "pgd_l2") return AttackMethod::pgd_l2;
    if (name == "mesh_central") return AttackMethod::mesh_central;
    if (name == "mesh_perpendicular") return AttackMethod::mesh_perpendicular;
    throw ConfigError("unknown attack method '" + name + "'");
}

std::string method_name(AttackMethod m) {
    switch (m) {
        case AttackMethod::pgd_linf: return "pgd_linf";
        case AttackMethod::pgd_l2: return "pgd_l2";
        case AttackMethod::mesh_central: return "mesh_central";
        case AttackMethod::mesh_perpendicular: return "mesh_perpendicular";
    }
    throw ConfigError("bad attack method value");
}

bool is_mesh_method(AttackMethod m) {
    return m == AttackMethod::mesh_central || m == AttackMethod::mesh_perpendicular;
}

void AttackConfig::validate() const {
    if (steps < 1) {
        throw ConfigError("attack: steps must be >= 1");
    }
    if (alpha < 0.0 || !std::isfinite(alpha)) {
        throw ConfigError("attack: alpha must be >= 0");
    }
    if (is_mesh_method(method)) {
        if (!(eps >= 0.0 && eps <= 1.0)) {
            throw ConfigError("attack: mesh methods need eps in [0, 1]");
        }
    } else if (!(eps >= 0.0) || !std::isfinite(eps)) {
        throw ConfigError("attack: PGD needs eps >= 0");
    }
}

Vec3 attack_step_mesh(const Vec3& p, const Vec3& grad, const Triangle& t_scaled, double alpha,
                      AttackMethod method) {
    if (t_scaled.degenerate) {
        return t_scaled.g;
    }
    const Vec3 step = tangent_project(grad, t_scaled);
    const Vec3 candidate = p + step * alpha;
    return method == AttackMethod::mesh_central ? central_project(candidate, t_scaled)
                                                : perpendicular_project(candidate, t_scaled);
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

constexpr double kZeroGradGuard = 1e-20;

}  // namespace

AttackResult run_attack(const ClassifierParams& params, const LabeledSample& sample,
                        const AttackConfig& config) {
    config.validate();
    const std::size_t n = sample.cloud.size();

    AttackResult res;
    res.clean_prediction = predict(params, sample.cloud);
    res.adversarial = sample.cloud;
    res.loss_trajectory.reserve(config.steps);

    std::vector<Triangle> scaled;
    if (is_mesh_method(config.method)) {
        scaled.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            scaled.push_back(
                scale_triangle(sample.mesh.face_triangle(sample.cloud.face_assignment[i]),
                               config.eps));
        }
    }

    for (int step = 0; step < config.steps; ++step) {
        const EvalResult ev = evaluate_with_gradient(params, res.adversarial, sample.label);
        res.loss_trajectory.push_back(ev.loss_value);

        switch (config.method) {
            case AttackMethod::mesh_central:
            case AttackMethod::mesh_perpendicular:
                for (std::size_t i = 0; i < n; ++i) {
                    res.adversarial.points[i] =
                        attack_step_mesh(res.adversarial.points[i], ev.input_grad[i], scaled[i],
                                         config.alpha, config.method);
                }
                break;
            case AttackMethod::pgd_linf:
                for (std::size_t i = 0; i < n; ++i) {
                    const Vec3& g = ev.input_grad[i];
                    Vec3 p = res.adversarial.points[i];
                    p += Vec3{sign(g.x), sign(g.y), sign(g.z)} * config.alpha;
                    const Vec3& o = sample.cloud.points[i];
                    p.x = std::clamp(p.x, o.x - config.eps, o.x + config.eps);
                    p.y = std::clamp(p.y, o.y - config.eps, o.y + config.eps);
                    p.z = std::clamp(p.z, o.z - config.eps, o.z + config.eps);
                    res.adversarial.points[i] = p;
                }
                break;
            case AttackMethod::pgd_l2:
                for (std::size_t i = 0; i < n; ++i) {
                    const Vec3& g = ev.input_grad[i];
                    const double gn = norm(g);
                    if (gn < kZeroGradGuard) {
                        continue;
                    }
                    Vec3 p = res.adversarial.points[i] + g * (config.alpha / gn);
                    const Vec3& o = sample.cloud.points[i];
                    Vec3 delta = p - o;
                    const double dn = norm(delta);
                    if (dn > config.eps) {
                        delta = delta * (config.eps / dn);
                    }
                    res.adversarial.points[i] = o + delta;
                }
                break;
        }
    }

    res.final_prediction = predict(params, res.adversarial);
    res.success = res.final_prediction != sample.label;
    return res;
}

BatchSummary run_batch(const ClassifierParams& params, const std::vector<LabeledSample>& samples,
                       const AttackConfig& config, int jobs) {
    config.validate();
    if (samples.empty()) {
        throw ConfigError("run_batch: empty sample list");
    }

    BatchSummary summary;
    summary.per_sample.resize(samples.size());

    const auto attack_one = [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        SampleOutcome out;
        out.result = run_attack(params, samples[i], config);
        out.distances =
            distance_report(samples[i].cloud, out.result.adversarial, samples[i].mesh);
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        summary.per_sample[i] = std::move(out);
    };

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(samples.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            attack_one(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= samples.size()) {
                        return;
                    }
                    attack_one(i);
                }
            });
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }

    std::size_t clean_correct = 0;
    std::size_t still_correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SampleOutcome& out = summary.per_sample[i];
        clean_correct += out.result.clean_prediction == samples[i].label ? 1 : 0;
        still_correct += out.result.final_prediction == samples[i].label ? 1 : 0;
        summary.mean_l2 += out.distances.l2;
        summary.mean_chamfer += out.distances.chamfer;
        summary.max_surface_deviation =
            std::max(summary.max_surface_deviation, out.distances.max_surface_deviation);
        summary.mean_seconds += out.seconds;
    }
    const auto count = static_cast<double>(samples.size());
    summary.clean_accuracy = static_cast<double>(clean_correct) / count;
    summary.attacked_accuracy = static_cast<double>(still_correct) / count;
    summary.mean_l2 /= count;
    summary.mean_chamfer /= count;
    summary.mean_seconds /= count;
    return summary;
}

}  // namespace emesh
