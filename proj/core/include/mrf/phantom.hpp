#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "mrf/fingerprint_sim.hpp"
#include "mrf/volume.hpp"

namespace mrf::phantom {

enum Label : std::int32_t { kBackground = 0, kWhiteMatter = 1, kGrayMatter = 2, kCsf = 3 };

struct TissueSpec {
    double pd = 1.0;
    double t1_ms = 1000.0;
    double t2_ms = 100.0;
    double jitter = 0.05; // uniform +/- fraction applied independently to pd, T1 and T2
};

struct TissueTable {
    TissueSpec wm{0.70, 600.0, 80.0, 0.05};
    TissueSpec gm{0.85, 950.0, 100.0, 0.05};
    TissueSpec csf{1.00, 3000.0, 450.0, 0.05};

    const TissueSpec& operator[](std::int32_t label) const;
    void validate() const;
};

struct Phantom {
    ParametricMaps maps; // PD, T1 ms, T2 ms
    LabelVolume labels;
    Mask brain_mask;
};

// Brain-like slice stack: outer ellipse with a CSF rim, cortical GM ribbon,
// WM core and two ventricle-like CSF blobs. Minimum shape 32 x 32 x 1.
Phantom generate_phantom(std::uint64_t seed, Dims shape, const TissueTable& table = {});

// Smooth in-plane phase field in radians, deterministic in seed.
Volume<double> phase_field(Dims shape, std::uint64_t seed);

// Simulates every brain voxel, applies its constant phase (none when phase_seed
// is empty) and the sliding window. Background voxels stay zero.
MrfImage render_mrf_image(const Phantom& phantom, const sim::SequenceSchedule& schedule, std::size_t window,
                          std::optional<std::uint64_t> phase_seed);

struct ArtifactConfig {
    double noise_sigma = 0.0; // complex Gaussian std per component, relative to mean brain |signal|
    std::size_t alias_ghosts = 0;
    double ghost_amplitude = 0.0;                  // in [0, 1)
    std::vector<std::array<int, 2>> ghost_shift_px; // (dx, dy) per ghost

    void validate() const;
};

// Image-domain stand-in for undersampling aliasing: each ghost adds
// amplitude * (circularly shifted image) with a random sign per time frame,
// then i.i.d. complex Gaussian noise is added. An all-zero config is the identity.
MrfImage apply_artifacts(const MrfImage& image, const ArtifactConfig& cfg, std::uint64_t seed);

// Mean |I(v, t)| over voxels with a nonzero fingerprint.
double mean_signal_magnitude(const MrfImage& image);

} // namespace mrf::phantom
