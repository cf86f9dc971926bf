#pragma once

#include <filesystem>
#include <iosfwd>

#include "mrf/crossval.hpp"

namespace mrf::eval {

// CSV with header tissue,method,map,mae_mean,mae_std,rmse_mean,rmse_std and
// 4-decimal values. Fold failures follow as one "# failures:" comment line.
void write_report(std::ostream& os, const MetricsReport& report);
void emit_report(const MetricsReport& report, const std::filesystem::path& path);
MetricsReport read_report(std::istream& is);
MetricsReport parse_report(const std::filesystem::path& path);

enum class Window { MaskedRange, Symmetric };

// 8-bit binary PGM of one channel at slice z (rows = x, columns = y). The
// window spans the masked min..max, or +-max|value| when symmetric; the
// window bounds are written as a comment line.
void emit_preview(const Volume<double>& values, std::size_t channel, std::size_t z, const Mask& mask,
                  const std::filesystem::path& path, Window window = Window::MaskedRange);

} // namespace mrf::eval
