#pragma once

#include "emesh/dataset.hpp"
#include "emesh/mesh.hpp"

#include <string>
#include <vector>

namespace emesh {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;      // usage, config or IO failure
inline constexpr int kExitInvariant = 3;  // a result violated its own invariants

// Entry point behind the `emesh` binary: gen-data | train | attack | sweep |
// report. Returns the process exit code instead of exiting so tests can call
// it in-process.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

// Dataset-on-disk helpers shared between subcommands and tests.
struct ManifestEntry {
    std::string mesh_path;  // relative to the manifest's directory
    int label = 0;
    int subject_id = 0;
    std::string split;  // "train" | "test"
};

struct DatasetManifest {
    std::uint64_t seed = 0;
    int classes = 0;
    int subjects_train = 0;
    int subjects_test = 0;
    int faces_per_mesh = 0;
    std::vector<ManifestEntry> samples;
};

DatasetManifest read_dataset_manifest(const std::string& path);

// Loads and normalizes the samples of one split ("train", "test" or "all"),
// in manifest order.
std::vector<LabeledSample> load_split(const std::string& manifest_path, const std::string& split);

}  // namespace emesh
