#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <mrf/preprocess.hpp>

#include "config.hpp"

namespace mrf::cli {

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct ScanFiles {
    std::string id;
    std::filesystem::path image; // relative to the dataset directory
    std::filesystem::path maps;
    std::filesystem::path mask;
};

// Synthesizes scan i of the configured dataset (phantom, MRF image with artifacts).
prep::Scan synthesize_scan(const ExperimentConfig& cfg, const sim::SequenceSchedule& schedule, std::size_t index);

std::string scan_id(std::size_t index);

// Writes scan triples plus manifest.json (file names and hashes) into dir.
std::vector<ScanFiles> write_dataset(const std::filesystem::path& dir, const std::vector<prep::Scan>& scans);

// Loads every scan listed in dir/manifest.json, verifying hashes, sorted by id.
std::vector<prep::Scan> load_dataset(const std::filesystem::path& dir);

// Splits a dataset into (held-out scan, the rest). Throws UsageError if the id is unknown.
std::pair<prep::Scan, std::vector<prep::Scan>> split_held_out(const std::vector<prep::Scan>& scans,
                                                              const std::string& held_out);

} // namespace mrf::cli
