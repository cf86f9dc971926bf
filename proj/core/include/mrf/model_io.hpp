#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "mrf/regressor.hpp"

namespace mrf::nn {

// MRFM: header "MRFM <T> <M>\n", u32 record count, then per record
// (u32 name length, name bytes, u32 rank, u64 dims, f64 data), then M
// NormStats lines "<name> <lo> <hi>". All binary fields little-endian.
void save_model(const std::filesystem::path& path, const Regressor& model);

// Restores a CNN or MLP. Throws DataError when expected_frames is given and differs from the file's T.
std::unique_ptr<Regressor> load_model(const std::filesystem::path& path,
                                      std::optional<std::size_t> expected_frames = std::nullopt);

} // namespace mrf::nn
