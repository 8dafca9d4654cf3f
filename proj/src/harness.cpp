#include "emesh/harness.hpp"

#include "emesh/attack.hpp"
#include "emesh/classifier.hpp"
#include "emesh/errors.hpp"
#include "emesh/metrics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace emesh {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out << text;
        if (!out) {
            throw IoError("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

// The run manifest is written before any results so a crashed run leaves a
// record of what it was attempting. It carries the only non-deterministic
// output fields (timestamps, wall clock); every .csv stays byte-reproducible.
void write_run_manifest(const std::string& path, const std::string& command,
                        const json& config_snapshot, std::uint64_t seed,
                        const std::vector<std::string>& outputs, json extra = json::object()) {
    json j;
    j["command"] = command;
    j["config"] = config_snapshot;
    j["seed"] = seed;
    j["tool_version"] = kToolVersion;
    j["timestamp"] = iso_timestamp();
    j["outputs"] = outputs;
    if (!extra.empty()) {
        j["runtime"] = extra;
    }
    write_text_atomic(path, j.dump(2) + "\n");
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw IoError("bad JSON in " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataOptions {
    std::string out;
    int classes = 4;
    int subjects_train = 10;
    int subjects_test = 2;
    int faces_per_mesh = 1000;
    std::uint64_t seed = 7;
};

int cmd_gen_data(const GenDataOptions& opt) {
    fs::create_directories(fs::path(opt.out) / "meshes");

    json config = {{"classes", opt.classes},
                   {"subjects_train", opt.subjects_train},
                   {"subjects_test", opt.subjects_test},
                   {"faces_per_mesh", opt.faces_per_mesh},
                   {"seed", opt.seed}};
    const std::string manifest_path = (fs::path(opt.out) / "manifest.json").string();
    write_run_manifest((fs::path(opt.out) / "run_manifest.json").string(), "gen-data", config,
                       opt.seed, {manifest_path});

    json samples = json::array();
    const auto emit = [&](int subject_id, const char* split) {
        for (int k = 0; k < opt.classes; ++k) {
            const Mesh mesh = generate_mesh(k, subject_id, opt.faces_per_mesh, opt.seed);
            const std::string rel = std::string("meshes/") + split + "_subj" +
                                    std::to_string(subject_id) + "_class" + std::to_string(k) +
                                    ".obj";
            save_obj_file(mesh, (fs::path(opt.out) / rel).string());
            samples.push_back({{"mesh_path", rel},
                               {"label", k},
                               {"subject_id", subject_id},
                               {"split", split}});
        }
    };
    for (int s = 0; s < opt.subjects_train; ++s) {
        emit(s, "train");
    }
    for (int s = opt.subjects_train; s < opt.subjects_train + opt.subjects_test; ++s) {
        emit(s, "test");
    }

    json manifest;
    manifest["format"] = "emesh-dataset-v1";
    manifest["seed"] = opt.seed;
    manifest["classes"] = opt.classes;
    manifest["subjects_train"] = opt.subjects_train;
    manifest["subjects_test"] = opt.subjects_test;
    manifest["faces_per_mesh"] = opt.faces_per_mesh;
    manifest["samples"] = samples;
    write_text_atomic(manifest_path, manifest.dump(2) + "\n");

    std::cout << "gen-data: wrote " << samples.size() << " meshes under " << opt.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    std::string data;  // dataset manifest path or its directory
    std::string out;
    int epochs = 150;
    double learning_rate = 0.05;
    int batch_size = 8;
    std::uint64_t seed = 1;
    std::vector<int> encoder_dims = {3, 64, 128};
    std::vector<int> head_hidden = {64};
};

std::string resolve_manifest_path(const std::string& data) {
    fs::path p(data);
    if (fs::is_directory(p)) {
        p /= "manifest.json";
    }
    if (!fs::exists(p)) {
        throw IoError("dataset manifest not found: " + p.string());
    }
    return p.string();
}

int cmd_train(const TrainOptions& opt) {
    const std::string manifest_path = resolve_manifest_path(opt.data);
    const DatasetManifest manifest = read_dataset_manifest(manifest_path);
    const auto train_set = load_split(manifest_path, "train");
    const auto test_set = load_split(manifest_path, "test");

    json config = {{"dataset_manifest_path", manifest_path},
                   {"epochs", opt.epochs},
                   {"learning_rate", opt.learning_rate},
                   {"batch_size", opt.batch_size},
                   {"seed", opt.seed}};
    const std::string checkpoint_path = (fs::path(opt.out) / "checkpoint.json").string();
    const std::string accuracy_path = (fs::path(opt.out) / "accuracy.csv").string();
    write_run_manifest((fs::path(opt.out) / "run_manifest.json").string(), "train", config,
                       opt.seed, {checkpoint_path, accuracy_path});

    std::vector<int> head_dims;
    head_dims.push_back(opt.encoder_dims.back());
    head_dims.insert(head_dims.end(), opt.head_hidden.begin(), opt.head_hidden.end());
    head_dims.push_back(manifest.classes);
    ClassifierParams params =
        ClassifierParams::init(opt.encoder_dims, head_dims, opt.seed);
    calibrate_activation_scale(params, train_set);

    TrainConfig tc;
    tc.epochs = opt.epochs;
    tc.learning_rate = opt.learning_rate;
    tc.batch_size = opt.batch_size;
    tc.seed = opt.seed;
    const TrainResult result = train(train_set, test_set, std::move(params), tc);

    save_checkpoint(result.params, checkpoint_path);
    std::ostringstream csv;
    csv << "epoch,train_loss,train_accuracy,test_accuracy\n";
    for (const EpochStats& st : result.history) {
        csv << st.epoch << ',' << fmt(st.train_loss) << ',' << fmt(st.train_accuracy) << ','
            << fmt(st.test_accuracy) << '\n';
    }
    write_text_atomic(accuracy_path, csv.str());

    const double final_test = result.history.empty() ? 0.0 : result.history.back().test_accuracy;
    std::cout << "train: " << opt.epochs << " epochs, final test accuracy "
              << fmt(final_test) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// attack

struct AttackOptions {
    std::string data;
    std::string checkpoint;
    std::string out;
    std::string split = "test";
    AttackConfig config;
    int jobs = 1;
};

// Re-checks the advertised guarantees on every row before it is written; a
// violation means the attack implementation is broken, not the input.
bool check_sample_invariants(const AttackOptions& opt, const LabeledSample& sample,
                             const SampleOutcome& out, std::string& why) {
    const AttackConfig& cfg = opt.config;
    const PointCloud& adv = out.result.adversarial;
    if (is_mesh_method(cfg.method)) {
        if (out.distances.max_surface_deviation > 1e-9) {
            why = "surface deviation " + fmt(out.distances.max_surface_deviation);
            return false;
        }
        for (std::size_t i = 0; i < adv.size(); ++i) {
            const Triangle t =
                scale_triangle(sample.mesh.face_triangle(adv.face_assignment[i]), cfg.eps);
            if (!contains(t, adv.points[i], 1e-9)) {
                why = "point " + std::to_string(i) + " left its eps-scaled triangle";
                return false;
            }
        }
    } else if (cfg.method == AttackMethod::pgd_linf) {
        for (std::size_t i = 0; i < adv.size(); ++i) {
            const Vec3 d = adv.points[i] - sample.cloud.points[i];
            const double m = std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)});
            if (m > cfg.eps + 1e-12) {
                why = "Linf perturbation " + fmt(m) + " exceeds eps";
                return false;
            }
        }
    } else {
        for (std::size_t i = 0; i < adv.size(); ++i) {
            const double m = norm(adv.points[i] - sample.cloud.points[i]);
            if (m > cfg.eps + 1e-12) {
                why = "L2 perturbation " + fmt(m) + " exceeds eps";
                return false;
            }
        }
    }
    return true;
}

const char* kAttackCsvHeader =
    "method,eps,alpha,steps,seed,sample_id,label,clean_pred,attacked_pred,success,"
    "l2,chamfer,surface_deviation,clean_accuracy,attacked_accuracy\n";

int cmd_attack(const AttackOptions& opt) {
    const std::string manifest_path = resolve_manifest_path(opt.data);
    const auto samples = load_split(manifest_path, opt.split);
    const ClassifierParams params = load_checkpoint(opt.checkpoint);

    json config = {{"method", method_name(opt.config.method)},
                   {"eps", opt.config.eps},
                   {"alpha", opt.config.alpha},
                   {"steps", opt.config.steps},
                   {"seed", opt.config.seed},
                   {"checkpoint_path", opt.checkpoint},
                   {"dataset_manifest_path", manifest_path},
                   {"output_path", opt.out},
                   {"split", opt.split},
                   {"jobs", opt.jobs}};
    const std::string results_path = (fs::path(opt.out) / "results.csv").string();
    const std::string run_manifest_path = (fs::path(opt.out) / "run_manifest.json").string();
    write_run_manifest(run_manifest_path, "attack", config, opt.config.seed, {results_path});

    const BatchSummary summary = run_batch(params, samples, opt.config, opt.jobs);

    const std::string prefix = method_name(opt.config.method) + "," + fmt(opt.config.eps) + "," +
                               fmt(opt.config.alpha) + "," + std::to_string(opt.config.steps) +
                               "," + std::to_string(opt.config.seed) + ",";
    std::ostringstream csv;
    csv << kAttackCsvHeader;
    std::vector<double> per_sample_seconds;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SampleOutcome& out = summary.per_sample[i];
        std::string why;
        if (!check_sample_invariants(opt, samples[i], out, why)) {
            std::cerr << "attack: invariant violation on sample " << i << ": " << why << "\n";
            return kExitInvariant;
        }
        csv << prefix << samples[i].cloud.source_mesh_id << ',' << samples[i].label << ','
            << out.result.clean_prediction << ',' << out.result.final_prediction << ','
            << (out.result.success ? 1 : 0) << ',' << fmt(out.distances.l2) << ','
            << fmt(out.distances.chamfer) << ',' << fmt(out.distances.max_surface_deviation)
            << ",,\n";
        per_sample_seconds.push_back(out.seconds);
    }
    csv << prefix << "summary,,,,," << fmt(summary.mean_l2) << ',' << fmt(summary.mean_chamfer)
        << ',' << fmt(summary.max_surface_deviation) << ',' << fmt(summary.clean_accuracy) << ','
        << fmt(summary.attacked_accuracy) << '\n';
    write_text_atomic(results_path, csv.str());

    // Wall clock lives in the run manifest only; the CSVs must be
    // byte-reproducible across runs.
    write_run_manifest(run_manifest_path, "attack", config, opt.config.seed, {results_path},
                       {{"per_sample_seconds", per_sample_seconds},
                        {"mean_seconds", summary.mean_seconds}});

    std::cout << "attack " << method_name(opt.config.method) << ": clean "
              << fmt(summary.clean_accuracy) << " -> attacked " << fmt(summary.attacked_accuracy)
              << " (mean L2 " << fmt(summary.mean_l2) << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
    AttackOptions base;
    std::string variable = "eps";  // or "steps"
    std::vector<double> values;
    std::vector<std::string> methods;  // defaults to the base method
};

const char* kSweepCsvHeader =
    "method,variable,value,eps,alpha,steps,seed,sample_id,label,clean_pred,attacked_pred,"
    "success,l2,chamfer,surface_deviation,final_loss,clean_accuracy,attacked_accuracy\n";

int cmd_sweep(const SweepOptions& opt) {
    if (opt.values.empty()) {
        throw ConfigError("sweep: no values given");
    }
    if (opt.variable != "eps" && opt.variable != "steps") {
        throw ConfigError("sweep: variable must be eps or steps");
    }
    const std::string manifest_path = resolve_manifest_path(opt.base.data);
    const auto samples = load_split(manifest_path, opt.base.split);
    const ClassifierParams params = load_checkpoint(opt.base.checkpoint);

    std::vector<std::string> methods = opt.methods;
    if (methods.empty()) {
        methods.push_back(method_name(opt.base.config.method));
    }

    json config = {{"variable", opt.variable},
                   {"values", opt.values},
                   {"methods", methods},
                   {"alpha", opt.base.config.alpha},
                   {"steps", opt.base.config.steps},
                   {"eps", opt.base.config.eps},
                   {"seed", opt.base.config.seed},
                   {"checkpoint_path", opt.base.checkpoint},
                   {"dataset_manifest_path", manifest_path},
                   {"output_path", opt.base.out}};
    const std::string sweep_path = (fs::path(opt.base.out) / "sweep.csv").string();
    write_run_manifest((fs::path(opt.base.out) / "run_manifest.json").string(), "sweep", config,
                       opt.base.config.seed, {sweep_path});

    std::ostringstream csv;
    csv << kSweepCsvHeader;
    for (const std::string& mname : methods) {
        for (const double value : opt.values) {
            AttackConfig cfg = opt.base.config;
            cfg.method = parse_method(mname);
            if (opt.variable == "eps") {
                cfg.eps = value;
            } else {
                cfg.steps = static_cast<int>(std::llround(value));
            }
            const BatchSummary summary = run_batch(params, samples, cfg, opt.base.jobs);

            const std::string prefix = mname + "," + opt.variable + "," + fmt(value) + "," +
                                       fmt(cfg.eps) + "," + fmt(cfg.alpha) + "," +
                                       std::to_string(cfg.steps) + "," +
                                       std::to_string(cfg.seed) + ",";
            double mean_final_loss = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const SampleOutcome& out = summary.per_sample[i];
                const double final_loss = out.result.loss_trajectory.back();
                mean_final_loss += final_loss;
                csv << prefix << samples[i].cloud.source_mesh_id << ',' << samples[i].label << ','
                    << out.result.clean_prediction << ',' << out.result.final_prediction << ','
                    << (out.result.success ? 1 : 0) << ',' << fmt(out.distances.l2) << ','
                    << fmt(out.distances.chamfer) << ','
                    << fmt(out.distances.max_surface_deviation) << ',' << fmt(final_loss)
                    << ",,\n";
            }
            mean_final_loss /= static_cast<double>(samples.size());
            csv << prefix << "summary,,,,," << fmt(summary.mean_l2) << ','
                << fmt(summary.mean_chamfer) << ',' << fmt(summary.max_surface_deviation) << ','
                << fmt(mean_final_loss) << ',' << fmt(summary.clean_accuracy) << ','
                << fmt(summary.attacked_accuracy) << '\n';
            std::cout << "sweep " << mname << " " << opt.variable << "=" << fmt(value)
                      << ": attacked accuracy " << fmt(summary.attacked_accuracy) << "\n";
        }
    }
    write_text_atomic(sweep_path, csv.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
    std::vector<std::string> inputs;  // attack results.csv paths
    std::string out;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

struct ReportRow {
    std::string source;
    std::string method;
    double eps = 0.0, alpha = 0.0;
    int steps = 0;
    int samples = 0;
    double clean_accuracy = 0.0, attacked_accuracy = 0.0;
    double mean_l2 = 0.0, mean_chamfer = 0.0, max_surface_deviation = 0.0;
    double mean_seconds = -1.0;  // -1: unknown (no run manifest found)
};

ReportRow parse_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != std::string(kAttackCsvHeader).substr(0, line.size()) ||
        line.find("method,") != 0) {
        throw IoError("unrecognized results header in " + path);
    }
    ReportRow row;
    row.source = fs::path(path).filename().string();
    bool have_summary = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 15) {
            throw IoError("malformed results row in " + path);
        }
        if (cells[5] == "summary") {
            row.method = cells[0];
            row.eps = std::stod(cells[1]);
            row.alpha = std::stod(cells[2]);
            row.steps = std::stoi(cells[3]);
            row.mean_l2 = std::stod(cells[10]);
            row.mean_chamfer = std::stod(cells[11]);
            row.max_surface_deviation = std::stod(cells[12]);
            row.clean_accuracy = std::stod(cells[13]);
            row.attacked_accuracy = std::stod(cells[14]);
            have_summary = true;
        } else {
            ++row.samples;
        }
    }
    if (!have_summary) {
        throw IoError("no summary row in " + path);
    }
    const fs::path manifest = fs::path(path).parent_path() / "run_manifest.json";
    if (fs::exists(manifest)) {
        const json j = load_json_file(manifest.string());
        if (j.contains("runtime") && j["runtime"].contains("mean_seconds")) {
            row.mean_seconds = j["runtime"]["mean_seconds"].get<double>();
        }
    }
    return row;
}

int cmd_report(const ReportOptions& opt) {
    if (opt.inputs.empty()) {
        throw ConfigError("report: need at least one results file");
    }
    std::vector<ReportRow> rows;
    for (const std::string& path : opt.inputs) {
        rows.push_back(parse_results_csv(path));
    }

    std::ostringstream csv;
    csv << "source,method,eps,alpha,steps,samples,clean_accuracy,attacked_accuracy,"
           "mean_l2,mean_chamfer,max_surface_deviation\n";
    for (const ReportRow& r : rows) {
        csv << r.source << ',' << r.method << ',' << fmt(r.eps) << ',' << fmt(r.alpha) << ','
            << r.steps << ',' << r.samples << ',' << fmt(r.clean_accuracy) << ','
            << fmt(r.attacked_accuracy) << ',' << fmt(r.mean_l2) << ',' << fmt(r.mean_chamfer)
            << ',' << fmt(r.max_surface_deviation) << '\n';
    }

    std::ostringstream txt;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-20s %8s %8s %6s %9s %9s %10s %12s %12s %10s\n", "method",
                  "eps", "alpha", "steps", "clean", "attacked", "mean_l2", "mean_chamfer",
                  "max_surf_dev", "sec/sample");
    txt << buf;
    for (const ReportRow& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%-20s %8.4g %8.4g %6d %9.4f %9.4f %10.4g %12.4g %12.4g %10s\n",
                      r.method.c_str(), r.eps, r.alpha, r.steps, r.clean_accuracy,
                      r.attacked_accuracy, r.mean_l2, r.mean_chamfer, r.max_surface_deviation,
                      r.mean_seconds < 0.0 ? "n/a" : fmt(r.mean_seconds).substr(0, 8).c_str());
        txt << buf;
    }

    if (!opt.out.empty()) {
        json config = {{"inputs", opt.inputs}};
        const std::string report_csv = (fs::path(opt.out) / "report.csv").string();
        const std::string report_txt = (fs::path(opt.out) / "report.txt").string();
        write_run_manifest((fs::path(opt.out) / "run_manifest.json").string(), "report", config,
                           0, {report_csv, report_txt});
        write_text_atomic(report_csv, csv.str());
        write_text_atomic(report_txt, txt.str());
    }
    std::cout << txt.str();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// option plumbing

// Table I defaults per attack: eps / alpha (steps 250 everywhere).
void apply_method_defaults(AttackConfig& cfg, bool eps_given, bool alpha_given) {
    if (!eps_given) {
        cfg.eps = is_mesh_method(cfg.method) ? 1.0
                  : cfg.method == AttackMethod::pgd_linf ? 0.01
                                                         : 1.25;
    }
    if (!alpha_given) {
        cfg.alpha = is_mesh_method(cfg.method) ? 0.10
                    : cfg.method == AttackMethod::pgd_linf ? 0.0004
                                                           : 0.05;
    }
}

// Flags beat the config file, the config file beats built-in defaults.
template <typename T>
void overlay(const json& cfg, const char* key, T& value) {
    if (cfg.contains(key)) {
        value = cfg.at(key).get<T>();
    }
}

std::vector<double> parse_value_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) {
            out.push_back(std::stod(tok));
        }
    }
    return out;
}

std::vector<std::string> parse_name_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) {
            out.push_back(tok);
        }
    }
    return out;
}

}  // namespace

DatasetManifest read_dataset_manifest(const std::string& path) {
    const json j = load_json_file(path);
    if (j.value("format", "") != "emesh-dataset-v1") {
        throw IoError("unsupported dataset manifest format in " + path);
    }
    DatasetManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.classes = j.at("classes").get<int>();
    m.subjects_train = j.at("subjects_train").get<int>();
    m.subjects_test = j.at("subjects_test").get<int>();
    m.faces_per_mesh = j.at("faces_per_mesh").get<int>();
    for (const auto& s : j.at("samples")) {
        ManifestEntry e;
        e.mesh_path = s.at("mesh_path").get<std::string>();
        e.label = s.at("label").get<int>();
        e.subject_id = s.at("subject_id").get<int>();
        e.split = s.at("split").get<std::string>();
        m.samples.push_back(std::move(e));
    }
    return m;
}

std::vector<LabeledSample> load_split(const std::string& manifest_path, const std::string& split) {
    const DatasetManifest manifest = read_dataset_manifest(manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();
    std::vector<LabeledSample> out;
    for (const ManifestEntry& e : manifest.samples) {
        if (split != "all" && e.split != split) {
            continue;
        }
        Mesh mesh = load_obj_file((base / e.mesh_path).string());
        out.push_back(make_sample(std::move(mesh), e.label,
                                  fs::path(e.mesh_path).stem().string()));
    }
    if (out.empty()) {
        throw IoError("no samples in split '" + split + "' of " + manifest_path);
    }
    return out;
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"surface-constrained adversarial attacks on point clouds"};
    app.require_subcommand(1);

    // gen-data ---------------------------------------------------------
    GenDataOptions gen;
    std::string gen_config_path;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate the synthetic dataset");
    gen_cmd->add_option("--config", gen_config_path, "JSON config file");
    auto* gen_out = gen_cmd->add_option("--out", gen.out, "output directory");
    auto* gen_classes = gen_cmd->add_option("--classes", gen.classes);
    auto* gen_str = gen_cmd->add_option("--subjects-train", gen.subjects_train);
    auto* gen_ste = gen_cmd->add_option("--subjects-test", gen.subjects_test);
    auto* gen_faces = gen_cmd->add_option("--faces", gen.faces_per_mesh);
    auto* gen_seed = gen_cmd->add_option("--seed", gen.seed);

    // train ------------------------------------------------------------
    TrainOptions tr;
    std::string tr_config_path;
    auto* tr_cmd = app.add_subcommand("train", "train the point-cloud classifier");
    tr_cmd->add_option("--config", tr_config_path, "JSON config file");
    auto* tr_data = tr_cmd->add_option("--data", tr.data, "dataset manifest (or its directory)");
    auto* tr_out = tr_cmd->add_option("--out", tr.out, "output directory");
    auto* tr_epochs = tr_cmd->add_option("--epochs", tr.epochs);
    auto* tr_lr = tr_cmd->add_option("--lr", tr.learning_rate);
    auto* tr_batch = tr_cmd->add_option("--batch-size", tr.batch_size);
    auto* tr_seed = tr_cmd->add_option("--seed", tr.seed);

    // attack -----------------------------------------------------------
    AttackOptions at;
    std::string at_config_path, at_method = "mesh_perpendicular";
    auto* at_cmd = app.add_subcommand("attack", "run one attack over a split");
    at_cmd->add_option("--config", at_config_path, "JSON config file");
    auto* at_data = at_cmd->add_option("--data", at.data, "dataset manifest (or its directory)");
    auto* at_ckpt = at_cmd->add_option("--checkpoint", at.checkpoint, "checkpoint JSON");
    auto* at_out = at_cmd->add_option("--out", at.out, "output directory");
    auto* at_method_opt = at_cmd->add_option("--method", at_method,
                                             "pgd_linf|pgd_l2|mesh_central|mesh_perpendicular");
    auto* at_eps = at_cmd->add_option("--eps", at.config.eps);
    auto* at_alpha = at_cmd->add_option("--alpha", at.config.alpha);
    auto* at_steps = at_cmd->add_option("--steps", at.config.steps);
    auto* at_seed = at_cmd->add_option("--seed", at.config.seed);
    auto* at_jobs = at_cmd->add_option("--jobs", at.jobs);
    auto* at_split = at_cmd->add_option("--split", at.split, "train|test|all");

    // sweep --------------------------------------------------------------
    SweepOptions sw;
    std::string sw_config_path, sw_method = "mesh_perpendicular", sw_values, sw_methods;
    auto* sw_cmd = app.add_subcommand("sweep", "sweep eps or steps over methods");
    sw_cmd->add_option("--config", sw_config_path, "JSON config file");
    auto* sw_data = sw_cmd->add_option("--data", sw.base.data);
    auto* sw_ckpt = sw_cmd->add_option("--checkpoint", sw.base.checkpoint);
    auto* sw_out = sw_cmd->add_option("--out", sw.base.out);
    auto* sw_variable = sw_cmd->add_option("--variable", sw.variable, "eps|steps");
    auto* sw_values_opt = sw_cmd->add_option("--values", sw_values, "comma-separated values");
    auto* sw_methods_opt =
        sw_cmd->add_option("--methods", sw_methods, "comma-separated method names");
    auto* sw_method_opt = sw_cmd->add_option("--method", sw_method);
    auto* sw_eps = sw_cmd->add_option("--eps", sw.base.config.eps);
    auto* sw_alpha = sw_cmd->add_option("--alpha", sw.base.config.alpha);
    auto* sw_steps = sw_cmd->add_option("--steps", sw.base.config.steps);
    auto* sw_seed = sw_cmd->add_option("--seed", sw.base.config.seed);
    auto* sw_jobs = sw_cmd->add_option("--jobs", sw.base.jobs);
    auto* sw_split = sw_cmd->add_option("--split", sw.base.split);

    // report -------------------------------------------------------------
    ReportOptions rp;
    auto* rp_cmd = app.add_subcommand("report", "aggregate attack result files");
    rp_cmd->add_option("inputs", rp.inputs, "results.csv paths");
    rp_cmd->add_option("--out", rp.out, "output directory (optional)");

    std::vector<std::string> argv_storage = args;
    std::vector<const char*> argv;
    argv.push_back("emesh");
    for (const std::string& a : argv_storage) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen_cmd->parsed()) {
            if (!gen_config_path.empty()) {
                const json cfg = load_json_file(gen_config_path);
                if (!*gen_out) overlay(cfg, "output_path", gen.out);
                if (!*gen_classes) overlay(cfg, "classes", gen.classes);
                if (!*gen_str) overlay(cfg, "subjects_train", gen.subjects_train);
                if (!*gen_ste) overlay(cfg, "subjects_test", gen.subjects_test);
                if (!*gen_faces) overlay(cfg, "faces_per_mesh", gen.faces_per_mesh);
                if (!*gen_seed) overlay(cfg, "seed", gen.seed);
            }
            if (gen.out.empty()) {
                throw ConfigError("gen-data: --out is required");
            }
            return cmd_gen_data(gen);
        }
        if (tr_cmd->parsed()) {
            if (!tr_config_path.empty()) {
                const json cfg = load_json_file(tr_config_path);
                if (!*tr_data) overlay(cfg, "dataset_manifest_path", tr.data);
                if (!*tr_out) overlay(cfg, "output_path", tr.out);
                if (!*tr_epochs) overlay(cfg, "epochs", tr.epochs);
                if (!*tr_lr) overlay(cfg, "learning_rate", tr.learning_rate);
                if (!*tr_batch) overlay(cfg, "batch_size", tr.batch_size);
                if (!*tr_seed) overlay(cfg, "seed", tr.seed);
            }
            if (tr.data.empty() || tr.out.empty()) {
                throw ConfigError("train: --data and --out are required");
            }
            return cmd_train(tr);
        }
        if (at_cmd->parsed()) {
            bool eps_given = static_cast<bool>(*at_eps);
            bool alpha_given = static_cast<bool>(*at_alpha);
            if (!at_config_path.empty()) {
                const json cfg = load_json_file(at_config_path);
                if (!*at_data) overlay(cfg, "dataset_manifest_path", at.data);
                if (!*at_ckpt) overlay(cfg, "checkpoint_path", at.checkpoint);
                if (!*at_out) overlay(cfg, "output_path", at.out);
                if (!*at_method_opt) overlay(cfg, "method", at_method);
                if (!eps_given && cfg.contains("eps")) {
                    at.config.eps = cfg.at("eps").get<double>();
                    eps_given = true;
                }
                if (!alpha_given && cfg.contains("alpha")) {
                    at.config.alpha = cfg.at("alpha").get<double>();
                    alpha_given = true;
                }
                if (!*at_steps) overlay(cfg, "steps", at.config.steps);
                if (!*at_seed) overlay(cfg, "seed", at.config.seed);
                if (!*at_jobs) overlay(cfg, "jobs", at.jobs);
                if (!*at_split) overlay(cfg, "split", at.split);
            }
            at.config.method = parse_method(at_method);
            apply_method_defaults(at.config, eps_given, alpha_given);
            at.config.validate();
            if (at.data.empty() || at.checkpoint.empty() || at.out.empty()) {
                throw ConfigError("attack: --data, --checkpoint and --out are required");
            }
            return cmd_attack(at);
        }
        if (sw_cmd->parsed()) {
            bool eps_given = static_cast<bool>(*sw_eps);
            bool alpha_given = static_cast<bool>(*sw_alpha);
            if (!sw_config_path.empty()) {
                const json cfg = load_json_file(sw_config_path);
                if (!*sw_data) overlay(cfg, "dataset_manifest_path", sw.base.data);
                if (!*sw_ckpt) overlay(cfg, "checkpoint_path", sw.base.checkpoint);
                if (!*sw_out) overlay(cfg, "output_path", sw.base.out);
                if (!*sw_variable) overlay(cfg, "variable", sw.variable);
                if (!*sw_method_opt) overlay(cfg, "method", sw_method);
                if (!eps_given && cfg.contains("eps")) {
                    sw.base.config.eps = cfg.at("eps").get<double>();
                    eps_given = true;
                }
                if (!alpha_given && cfg.contains("alpha")) {
                    sw.base.config.alpha = cfg.at("alpha").get<double>();
                    alpha_given = true;
                }
                if (!*sw_steps) overlay(cfg, "steps", sw.base.config.steps);
                if (!*sw_seed) overlay(cfg, "seed", sw.base.config.seed);
                if (!*sw_jobs) overlay(cfg, "jobs", sw.base.jobs);
                if (!*sw_split) overlay(cfg, "split", sw.base.split);
                if (!*sw_values_opt && cfg.contains("values")) {
                    sw.values = cfg.at("values").get<std::vector<double>>();
                }
                if (!*sw_methods_opt && cfg.contains("methods")) {
                    sw.methods = cfg.at("methods").get<std::vector<std::string>>();
                }
            }
            if (*sw_values_opt) {
                sw.values = parse_value_list(sw_values);
            }
            if (*sw_methods_opt) {
                sw.methods = parse_name_list(sw_methods);
            }
            sw.base.config.method = parse_method(sw_method);
            apply_method_defaults(sw.base.config, eps_given, alpha_given);
            if (sw.base.data.empty() || sw.base.checkpoint.empty() || sw.base.out.empty()) {
                throw ConfigError("sweep: --data, --checkpoint and --out are required");
            }
            // Per-method defaults and validation happen per combination in
            // cmd_sweep; validate the fixed fields here.
            if (sw.base.config.steps < 1 || sw.base.config.alpha < 0.0) {
                throw ConfigError("sweep: bad fixed config");
            }
            return cmd_sweep(sw);
        }
        if (rp_cmd->parsed()) {
            return cmd_report(rp);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run_cli(args);
}

}  // namespace emesh
