#include "mrf/model_io.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "mrf/error.hpp"
#include "mrf/mlp.hpp"
#include "mrf/stcnn.hpp"

namespace mrf::nn {

namespace {

constexpr double kKindCnn = 0.0;
constexpr double kKindMlp = 1.0;

} // namespace

void save_model(const std::filesystem::path& path, const Regressor& model) {
    model.norm_stats.validate();
    StateDict dict = model.state();
    dict["meta.kind"] = {{1}, {model.kind() == "mlp" ? kKindMlp : kKindCnn}};

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "MRFM " << model.frames() << ' ' << model.outputs() << '\n';
    io::detail::put(os, static_cast<std::uint32_t>(dict.size()));
    for (const auto& [name, rec] : dict) {
        io::detail::put(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        io::detail::put(os, static_cast<std::uint32_t>(rec.shape.size()));
        for (std::size_t d : rec.shape) io::detail::put(os, static_cast<std::uint64_t>(d));
        for (double v : rec.data) io::detail::put(os, v);
    }
    prep::write_norm_stats(os, model.norm_stats);
    io::detail::check_written(os, path.string());
}

std::unique_ptr<Regressor> load_model(const std::filesystem::path& path, std::optional<std::size_t> expected_frames) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    std::istringstream ss(line);
    std::string magic;
    std::size_t frames = 0, outputs = 0;
    ss >> magic >> frames >> outputs;
    if (!ss || magic != "MRFM") throw IoError(path.string() + ": malformed MRFM header");
    if (expected_frames && *expected_frames != frames)
        throw DataError(path.string() + ": model was trained for T=" + std::to_string(frames) + ", data has T=" +
                        std::to_string(*expected_frames));

    const std::string what = path.string();
    StateDict dict;
    const auto count = io::detail::get<std::uint32_t>(is, what);
    for (std::uint32_t r = 0; r < count; ++r) {
        const auto len = io::detail::get<std::uint32_t>(is, what);
        std::string name(len, '\0');
        is.read(name.data(), len);
        const auto rank = io::detail::get<std::uint32_t>(is, what);
        StateRecord rec;
        for (std::uint32_t k = 0; k < rank; ++k) rec.shape.push_back(io::detail::get<std::uint64_t>(is, what));
        rec.data.resize(ad::shape_numel(rec.shape));
        for (double& v : rec.data) v = io::detail::get<double>(is, what);
        dict[name] = std::move(rec);
    }
    prep::NormStats stats = prep::read_norm_stats(is, outputs);

    std::unique_ptr<Regressor> model;
    if (lookup(dict, "meta.kind").data.at(0) == kKindMlp) {
        model = std::make_unique<FingerprintMlp>(frames, outputs, std::vector<std::size_t>{}, 0);
    } else {
        model = std::make_unique<SpatiotemporalCnn>(frames, outputs, CnnWidths{1, 1, 1, 1}, 0.0, 0);
    }
    model->load_state(dict);
    model->norm_stats = std::move(stats);
    return model;
}

} // namespace mrf::nn
