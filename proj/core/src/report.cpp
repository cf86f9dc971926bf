#include "mrf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mrf::eval {

namespace {

constexpr const char* kHeader = "tissue,method,map,mae_mean,mae_std,rmse_mean,rmse_std";
constexpr const char* kFailures = "# failures: ";

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    // Avoid "-0.0000" so equal reports print identically.
    if (std::string(buf) == "-0.0000") return "0.0000";
    return buf;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    std::replace(s.begin(), s.end(), ';', ',');
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

} // namespace

void write_report(std::ostream& os, const MetricsReport& report) {
    os << kHeader << '\n';
    for (const ReportRow& r : report.rows) {
        for (const std::string* field : {&r.tissue, &r.method, &r.map})
            if (field->find_first_of(",\n") != std::string::npos)
                throw ArgumentError("report: field '" + *field + "' contains a separator");
        os << r.tissue << ',' << r.method << ',' << r.map << ',' << fixed4(r.mae_mean) << ',' << fixed4(r.mae_std)
           << ',' << fixed4(r.rmse_mean) << ',' << fixed4(r.rmse_std) << '\n';
    }
    if (!report.failures.empty()) {
        os << kFailures;
        for (std::size_t i = 0; i < report.failures.size(); ++i)
            os << (i ? "; " : "") << one_line(report.failures[i]);
        os << '\n';
    }
}

void emit_report(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    write_report(os, report);
    os.flush();
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

MetricsReport read_report(std::istream& is) {
    MetricsReport report;
    std::string line;
    if (!std::getline(is, line) || line != kHeader) throw DataError("report: missing or malformed header");
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.rfind(kFailures, 0) == 0) {
            for (const std::string& f : split(line.substr(std::string(kFailures).size()), ';')) {
                const auto b = f.find_first_not_of(' ');
                if (b != std::string::npos) report.failures.push_back(f.substr(b));
            }
            continue;
        }
        if (line.front() == '#') continue;
        const auto cells = split(line, ',');
        if (cells.size() != 7) throw DataError("report: line " + std::to_string(lineno) + " has " +
                                               std::to_string(cells.size()) + " fields, expected 7");
        ReportRow r{cells[0], cells[1], cells[2]};
        try {
            r.mae_mean = std::stod(cells[3]);
            r.mae_std = std::stod(cells[4]);
            r.rmse_mean = std::stod(cells[5]);
            r.rmse_std = std::stod(cells[6]);
        } catch (const std::exception&) {
            throw DataError("report: line " + std::to_string(lineno) + " has a non-numeric value");
        }
        report.rows.push_back(std::move(r));
    }
    return report;
}

MetricsReport parse_report(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    return read_report(is);
}

void emit_preview(const Volume<double>& values, std::size_t channel, std::size_t z, const Mask& mask,
                  const std::filesystem::path& path, Window window) {
    const Dims& d = values.dims();
    if (channel >= values.channels()) throw ArgumentError("preview: channel out of range");
    if (z >= d.z) throw ArgumentError("preview: slice out of range");
    if (!values.same_grid(mask)) throw ArgumentError("preview: mask shape disagrees with the map");

    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t x = 0; x < d.x; ++x)
        for (std::size_t y = 0; y < d.y; ++y) {
            if (!mask(x, y, z)) continue;
            const double v = values(x, y, z, channel);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (lo > hi) lo = hi = 0.0; // empty mask on this slice
    if (window == Window::Symmetric) {
        const double a = std::max(std::abs(lo), std::abs(hi));
        lo = -a;
        hi = a;
    }

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    char comment[160];
    std::snprintf(comment, sizeof comment, "# window %s %.6g %.6g", window == Window::Symmetric ? "symmetric" : "linear",
                  lo, hi);
    os << "P5\n" << comment << '\n' << d.y << ' ' << d.x << "\n255\n";
    std::vector<unsigned char> row(d.y);
    for (std::size_t x = 0; x < d.x; ++x) {
        for (std::size_t y = 0; y < d.y; ++y) {
            const double v = values(x, y, z, channel);
            double g = hi > lo ? (v - lo) / (hi - lo) * 255.0 : (window == Window::Symmetric ? 127.5 : 255.0);
            if (hi <= lo && window == Window::MaskedRange && v != lo) g = 0.0;
            row[y] = static_cast<unsigned char>(std::lround(std::clamp(g, 0.0, 255.0)));
        }
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

} // namespace mrf::eval
