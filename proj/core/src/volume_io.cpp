#include "mrf/volume_io.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"

namespace mrf::io {

namespace {

using detail::get;
using detail::put;

struct Header {
    Dims dims;
    std::size_t channels = 0;
    std::string dtype;
};

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

void write_header(std::ostream& os, Dims d, std::size_t c, const char* dtype) {
    os << "MRFV " << d.x << ' ' << d.y << ' ' << d.z << ' ' << c << ' ' << dtype << '\n';
}

Header read_header(std::istream& is, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(is, line)) throw IoError(path.string() + ": missing MRFV header");
    std::istringstream ss(line);
    std::string magic;
    Header h;
    ss >> magic >> h.dims.x >> h.dims.y >> h.dims.z >> h.channels >> h.dtype;
    if (!ss || magic != "MRFV") throw IoError(path.string() + ": malformed MRFV header '" + line + "'");
    if (h.dtype != "f32" && h.dtype != "c64")
        throw IoError(path.string() + ": unsupported dtype '" + h.dtype + "'");
    return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return is;
}

} // namespace

void write_volume(const std::filesystem::path& path, const Volume<double>& vol) {
    auto os = open_out(path);
    write_header(os, vol.dims(), vol.channels(), "f32");
    for (double v : vol.data()) put(os, static_cast<float>(v));
    detail::check_written(os, path.string());
}

void write_volume(const std::filesystem::path& path, const MrfImage& image) {
    auto os = open_out(path);
    write_header(os, image.dims(), image.channels(), "c64");
    for (const cplx& v : image.data()) {
        put(os, static_cast<float>(v.real()));
        put(os, static_cast<float>(v.imag()));
    }
    detail::check_written(os, path.string());
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
    auto os = open_out(path);
    write_header(os, mask.dims(), 1, "f32");
    for (auto m : mask.data()) put(os, m ? 1.0f : 0.0f);
    detail::check_written(os, path.string());
}

void write_maps(const std::filesystem::path& path, const ParametricMaps& maps) {
    write_volume(path, maps.values);
}

Volume<double> read_real_volume(const std::filesystem::path& path) {
    auto is = open_in(path);
    const Header h = read_header(is, path);
    if (h.dtype != "f32") throw IoError(path.string() + ": expected f32 volume, found " + h.dtype);
    Volume<double> vol(h.dims, h.channels);
    for (double& v : vol.data()) v = get<float>(is, path.string());
    return vol;
}

MrfImage read_complex_volume(const std::filesystem::path& path) {
    auto is = open_in(path);
    const Header h = read_header(is, path);
    if (h.dtype != "c64") throw IoError(path.string() + ": expected c64 volume, found " + h.dtype);
    MrfImage image(h.dims, h.channels);
    for (cplx& v : image.data()) {
        const float re = get<float>(is, path.string());
        const float im = get<float>(is, path.string());
        v = {re, im};
    }
    return image;
}

Mask read_mask(const std::filesystem::path& path) {
    const Volume<double> vol = read_real_volume(path);
    if (vol.channels() != 1) throw IoError(path.string() + ": mask volume must have one channel");
    Mask mask(vol.dims(), 1);
    for (std::size_t i = 0; i < vol.size(); ++i) mask.data()[i] = vol.data()[i] != 0.0;
    return mask;
}

ParametricMaps read_maps(const std::filesystem::path& path) {
    ParametricMaps maps;
    maps.values = read_real_volume(path);
    if (maps.values.channels() == default_map_names().size()) {
        maps.names = default_map_names();
    } else {
        for (std::size_t i = 0; i < maps.values.channels(); ++i) maps.names.push_back("map" + std::to_string(i));
    }
    return maps;
}

} // namespace mrf::io
