#pragma once

#include <filesystem>

#include "mrf/volume.hpp"

namespace mrf::io {

// MRFV container: text header "MRFV <X> <Y> <Z> <C> <dtype>\n" followed by
// little-endian, row-major, channel-last payload. dtype is f32 or c64.
void write_volume(const std::filesystem::path& path, const Volume<double>& vol);
void write_volume(const std::filesystem::path& path, const MrfImage& image);
void write_mask(const std::filesystem::path& path, const Mask& mask);
void write_maps(const std::filesystem::path& path, const ParametricMaps& maps);

Volume<double> read_real_volume(const std::filesystem::path& path);
MrfImage read_complex_volume(const std::filesystem::path& path);
Mask read_mask(const std::filesystem::path& path);
// Channel names default to PD/T1/T2 for 3-channel volumes, map<i> otherwise.
ParametricMaps read_maps(const std::filesystem::path& path);

} // namespace mrf::io
