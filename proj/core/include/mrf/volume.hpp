#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrf/error.hpp"

namespace mrf {

using cplx = std::complex<double>;

struct Dims {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t z = 0;

    std::size_t voxels() const { return x * y * z; }
    bool operator==(const Dims&) const = default;
};

struct Voxel {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t z = 0;

    bool operator==(const Voxel&) const = default;
};

// Dense 4-D array (X, Y, Z, C), row-major with the channel index fastest.
template <typename T>
class Volume {
public:
    Volume() = default;
    Volume(Dims dims, std::size_t channels, T fill = T{})
        : dims_(dims), channels_(channels), data_(dims.voxels() * channels, fill) {}

    const Dims& dims() const { return dims_; }
    std::size_t channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t voxel_index(std::size_t x, std::size_t y, std::size_t z) const {
        return (x * dims_.y + y) * dims_.z + z;
    }
    std::size_t voxel_index(const Voxel& v) const { return voxel_index(v.x, v.y, v.z); }

    Voxel voxel_at(std::size_t index) const {
        const std::size_t z = index % dims_.z;
        const std::size_t y = (index / dims_.z) % dims_.y;
        const std::size_t x = index / (dims_.z * dims_.y);
        return {x, y, z};
    }

    T& operator()(std::size_t x, std::size_t y, std::size_t z, std::size_t c = 0) {
        return data_[voxel_index(x, y, z) * channels_ + c];
    }
    const T& operator()(std::size_t x, std::size_t y, std::size_t z, std::size_t c = 0) const {
        return data_[voxel_index(x, y, z) * channels_ + c];
    }

    std::span<T> at(std::size_t voxel) { return {data_.data() + voxel * channels_, channels_}; }
    std::span<const T> at(std::size_t voxel) const {
        return {data_.data() + voxel * channels_, channels_};
    }
    std::span<T> at(const Voxel& v) { return at(voxel_index(v)); }
    std::span<const T> at(const Voxel& v) const { return at(voxel_index(v)); }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const Volume& other) const {
        return dims_ == other.dims_ && channels_ == other.channels_;
    }
    template <typename U>
    bool same_grid(const Volume<U>& other) const {
        return dims_ == other.dims();
    }

    bool operator==(const Volume&) const = default;

private:
    Dims dims_{};
    std::size_t channels_ = 0;
    std::vector<T> data_;
};

// Complex signal evolutions, one T-long fingerprint per voxel.
using MrfImage = Volume<cplx>;
// One byte per voxel, nonzero = inside.
using Mask = Volume<std::uint8_t>;
using LabelVolume = Volume<std::int32_t>;

// Quantitative maps stacked along the channel axis (PD, T1 ms, T2 ms by default).
struct ParametricMaps {
    Volume<double> values;
    std::vector<std::string> names;

    std::size_t count() const { return values.channels(); }
    const Dims& dims() const { return values.dims(); }
};

inline const std::vector<std::string>& default_map_names() {
    static const std::vector<std::string> names{"PD", "T1", "T2"};
    return names;
}

inline ParametricMaps make_maps(Dims dims, std::vector<std::string> names = default_map_names()) {
    ParametricMaps maps;
    maps.values = Volume<double>(dims, names.size(), 0.0);
    maps.names = std::move(names);
    return maps;
}

inline Mask make_mask(Dims dims, bool value) { return Mask(dims, 1, value ? 1 : 0); }

inline std::size_t count_masked(const Mask& mask) {
    std::size_t n = 0;
    for (auto m : mask.data()) n += m != 0;
    return n;
}

// Linear voxel indices of all masked voxels, ascending.
inline std::vector<std::size_t> masked_voxels(const Mask& mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mask.data().size(); ++i)
        if (mask.data()[i]) idx.push_back(i);
    return idx;
}

} // namespace mrf
