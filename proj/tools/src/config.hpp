#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <mrf/baselines.hpp>
#include <mrf/crossval.hpp>
#include <mrf/phantom.hpp>
#include <mrf/preprocess.hpp>
#include <mrf/stcnn.hpp>
#include <mrf/training.hpp>

namespace mrf::cli {

struct PhantomSection {
    Dims shape{64, 64, 2};
    std::size_t count = 6;
    std::uint64_t seed = 100;
    bool phase = true;
    phantom::TissueTable tissues;
};

struct ArtifactSection {
    phantom::ArtifactConfig config;
    std::uint64_t seed = 200;
};

struct DictionarySection {
    double t1_start = 100.0, t1_stop = 3000.0, t1_step = 20.0;
    double t2_start = 10.0, t2_stop = 500.0, t2_step = 5.0;
};

struct PathsSection {
    std::filesystem::path work_dir = "work";
    std::filesystem::path data_dir; // defaults to work_dir/data
};

// One INI file drives a whole experiment. Relative paths resolve against the
// directory holding the file.
struct ExperimentConfig {
    sim::ScheduleConfig schedule;
    std::size_t window = 48;
    PhantomSection phantom;
    ArtifactSection artifacts;
    prep::PreprocessConfig preprocess;
    nn::CnnWidths widths;
    nn::TrainConfig train;
    std::vector<std::size_t> mlp_hidden{300, 300, 300};
    DictionarySection dictionary;
    baselines::StDictConfig stdict;
    eval::TissueThresholds thresholds;
    std::uint64_t eval_seed = 1;
    std::vector<std::string> methods{"cnn", "mlp"};
    PathsSection paths;

    void validate() const;
};

// Throws ConfigError naming the offending key for unknown keys, malformed
// values or failed validation; IoError if the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

} // namespace mrf::cli
