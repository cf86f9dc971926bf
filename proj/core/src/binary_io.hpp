#pragma once

// Little-endian primitives shared by the MRFV/MRFD/MRFM readers and writers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "mrf/error.hpp"

namespace mrf::io::detail {

template <typename T>
T byteswap_if_needed(T value) {
    if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
        return value;
    } else {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&value, bytes, sizeof(T));
        return value;
    }
}

template <typename T>
void put(std::ostream& os, T value) {
    value = byteswap_if_needed(value);
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& what) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw IoError("truncated file while reading " + what);
    return byteswap_if_needed(value);
}

inline void check_written(const std::ostream& os, const std::string& path) {
    if (!os) throw IoError("failed writing " + path);
}

} // namespace mrf::io::detail
