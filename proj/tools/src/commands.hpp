#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <mrf/crossval.hpp>

#include "config.hpp"

namespace mrf::cli {

struct CommandOptions {
    std::filesystem::path config;
    std::optional<std::string> held_out;
    std::optional<std::string> method;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> model;      // reconstruct: cnn/mlp model file
    std::optional<std::filesystem::path> dictionary; // reconstruct/match: MRFD file
    std::optional<std::filesystem::path> maps;       // evaluate: estimated maps
};

// Each command writes progress to `log` and returns the main output path.
std::filesystem::path cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path cmd_train(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path cmd_reconstruct(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path cmd_match(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path cmd_evaluate(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path cmd_crossval(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);

// Reconstruction method usable inside cross-validation; throws UsageError for unknown names.
eval::Method make_method(const std::string& name, const ExperimentConfig& cfg);

// Parses argv, runs the command and maps failures to exit codes:
// 0 success, 1 usage or configuration error, 2 data or I/O error.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace mrf::cli
