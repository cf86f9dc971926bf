#include "mrf/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "mrf/parallel.hpp"

namespace mrf::sim {

std::vector<double> make_grid(double start, double stop, double step) {
    if (!(step > 0.0)) throw ConfigError("grid: step must be positive");
    if (stop < start) throw ConfigError("grid: stop below start");
    std::vector<double> grid;
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) grid.push_back(start + static_cast<double>(i) * step);
    return grid;
}

Dictionary build_dictionary(const std::vector<double>& t1_grid_ms, const std::vector<double>& t2_grid_ms,
                            const SequenceSchedule& schedule, std::size_t window) {
    auto check_grid = [](const std::vector<double>& g, const char* name) {
        if (g.empty()) throw ConfigError(std::string(name) + ": empty grid");
        if (!std::is_sorted(g.begin(), g.end())) throw ConfigError(std::string(name) + ": grid not sorted");
        if (g.front() <= 0.0) throw ConfigError(std::string(name) + ": grid values must be positive");
    };
    check_grid(t1_grid_ms, "dictionary.t1_grid");
    check_grid(t2_grid_ms, "dictionary.t2_grid");
    schedule.validate();
    if (window < 1 || window > schedule.size()) throw ConfigError("dictionary: window outside pulse train length");

    Dictionary dict;
    dict.t1_grid_ms = t1_grid_ms;
    dict.t2_grid_ms = t2_grid_ms;
    for (double t1 : t1_grid_ms)
        for (double t2 : t2_grid_ms)
            if (t2 <= t1) dict.entries.push_back({TissueParams(1.0, t1, t2), {}, 1.0});
    if (dict.entries.empty()) throw ConfigError("dictionary: no (T1, T2) grid pair satisfies T2 <= T1");

    parallel_for(dict.entries.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto& e = dict.entries[i];
            e.fingerprint = sliding_window(simulate_fingerprint(e.params, schedule), window);
            e.norm_factor = euclidean_norm(e.fingerprint.samples);
            if (!(e.norm_factor > 0.0))
                throw ConfigError("dictionary: zero fingerprint for T1=" + std::to_string(e.params.t1_ms) +
                                  " T2=" + std::to_string(e.params.t2_ms));
            for (cplx& s : e.fingerprint.samples) s /= e.norm_factor;
        }
    });
    return dict;
}

void write_dictionary(const std::filesystem::path& path, const Dictionary& dict) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    const std::size_t t = dict.length();
    os << "MRFD " << dict.size() << ' ' << t << '\n';
    for (const auto& e : dict.entries) {
        io::detail::put(os, e.params.t1_ms);
        io::detail::put(os, e.params.t2_ms);
        io::detail::put(os, e.norm_factor);
        for (const cplx& s : e.fingerprint.samples) io::detail::put(os, static_cast<float>(s.real()));
        for (const cplx& s : e.fingerprint.samples) io::detail::put(os, static_cast<float>(s.imag()));
    }
    io::detail::check_written(os, path.string());
}

Dictionary read_dictionary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    std::istringstream ss(line);
    std::string magic;
    std::size_t n = 0, t = 0;
    ss >> magic >> n >> t;
    if (!ss || magic != "MRFD") throw IoError(path.string() + ": malformed MRFD header");

    Dictionary dict;
    std::set<double> t1s, t2s;
    dict.entries.reserve(n);
    const std::string what = path.string();
    for (std::size_t i = 0; i < n; ++i) {
        DictionaryEntry e;
        const double t1 = io::detail::get<double>(is, what);
        const double t2 = io::detail::get<double>(is, what);
        e.params = TissueParams(1.0, t1, t2);
        e.norm_factor = io::detail::get<double>(is, what);
        e.fingerprint.samples.resize(t);
        for (std::size_t k = 0; k < t; ++k) e.fingerprint.samples[k].real(io::detail::get<float>(is, what));
        for (std::size_t k = 0; k < t; ++k) e.fingerprint.samples[k].imag(io::detail::get<float>(is, what));
        t1s.insert(t1);
        t2s.insert(t2);
        dict.entries.push_back(std::move(e));
    }
    dict.t1_grid_ms.assign(t1s.begin(), t1s.end());
    dict.t2_grid_ms.assign(t2s.begin(), t2s.end());
    return dict;
}

} // namespace mrf::sim
