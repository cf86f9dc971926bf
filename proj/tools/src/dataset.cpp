#include "dataset.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include <json.hpp>
#include <mrf/phantom.hpp>
#include <mrf/volume_io.hpp>

namespace mrf::cli {

namespace {

using json = nlohmann::json;

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream, std::size_t index) {
    return mix(base ^ mix(stream ^ mix(index)));
}

constexpr std::uint64_t kPhantomStream = 1;
constexpr std::uint64_t kPhaseStream = 2;
constexpr std::uint64_t kArtifactStream = 3;

} // namespace

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read '" + path.string() + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("SHA-256 unavailable");
    std::array<char, 1 << 16> buf;
    while (is) {
        is.read(buf.data(), buf.size());
        if (is.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex += byte;
    }
    return hex;
}

std::string scan_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scan%02zu", index);
    return buf;
}

prep::Scan synthesize_scan(const ExperimentConfig& cfg, const sim::SequenceSchedule& schedule, std::size_t index) {
    const auto& p = cfg.phantom;
    phantom::Phantom ph =
        phantom::generate_phantom(stream_seed(p.seed, kPhantomStream, index), p.shape, p.tissues);
    std::optional<std::uint64_t> phase;
    if (p.phase) phase = stream_seed(p.seed, kPhaseStream, index);
    MrfImage clean = phantom::render_mrf_image(ph, schedule, cfg.window, phase);
    prep::Scan scan;
    scan.id = scan_id(index);
    scan.image = phantom::apply_artifacts(clean, cfg.artifacts.config,
                                          stream_seed(cfg.artifacts.seed, kArtifactStream, index));
    scan.maps = std::move(ph.maps);
    scan.mask = std::move(ph.brain_mask);
    return scan;
}

std::vector<ScanFiles> write_dataset(const std::filesystem::path& dir, const std::vector<prep::Scan>& scans) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

    std::vector<ScanFiles> files;
    json manifest;
    manifest["format"] = "mrf-dataset";
    manifest["scans"] = json::array();
    for (const auto& scan : scans) {
        ScanFiles f{scan.id, scan.id + "_image.mrfv", scan.id + "_maps.mrfv", scan.id + "_mask.mrfv"};
        io::write_volume(dir / f.image, scan.image);
        io::write_maps(dir / f.maps, scan.maps);
        io::write_mask(dir / f.mask, scan.mask);
        json entry;
        entry["id"] = scan.id;
        for (const auto& [role, rel] : {std::pair{"image", f.image}, {"maps", f.maps}, {"mask", f.mask}})
            entry[role] = {{"path", rel.string()}, {"sha256", sha256_file(dir / rel)}};
        manifest["scans"].push_back(entry);
        files.push_back(f);
    }
    std::ofstream os(dir / "manifest.json", std::ios::binary);
    if (!os) throw IoError("cannot write '" + (dir / "manifest.json").string() + "'");
    os << manifest.dump(2) << '\n';
    if (!os) throw IoError("failed writing manifest in '" + dir.string() + "'");
    return files;
}

std::vector<prep::Scan> load_dataset(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("no dataset manifest at '" + path.string() + "' (run 'mrf simulate' first)");
    json manifest;
    try {
        is >> manifest;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed manifest: " + e.what());
    }
    std::vector<prep::Scan> scans;
    try {
        for (const auto& entry : manifest.at("scans")) {
            prep::Scan scan;
            scan.id = entry.at("id").get<std::string>();
            for (const char* role : {"image", "maps", "mask"}) {
                const auto file = dir / entry.at(role).at("path").get<std::string>();
                if (sha256_file(file) != entry.at(role).at("sha256").get<std::string>())
                    throw DataError(file.string() + ": content hash does not match the manifest");
            }
            scan.image = io::read_complex_volume(dir / entry.at("image").at("path").get<std::string>());
            scan.maps = io::read_maps(dir / entry.at("maps").at("path").get<std::string>());
            scan.mask = io::read_mask(dir / entry.at("mask").at("path").get<std::string>());
            if (!scan.image.same_grid(scan.maps.values) || !scan.image.same_grid(scan.mask))
                throw DataError("scan '" + scan.id + "': image, maps and mask shapes disagree");
            scans.push_back(std::move(scan));
        }
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed manifest: " + e.what());
    }
    std::sort(scans.begin(), scans.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return scans;
}

std::pair<prep::Scan, std::vector<prep::Scan>> split_held_out(const std::vector<prep::Scan>& scans,
                                                              const std::string& held_out) {
    std::pair<prep::Scan, std::vector<prep::Scan>> out;
    bool found = false;
    for (const auto& s : scans) {
        if (s.id == held_out) {
            out.first = s;
            found = true;
        } else {
            out.second.push_back(s);
        }
    }
    if (!found) throw UsageError("--held-out: no scan with id '" + held_out + "' in the dataset");
    return out;
}

} // namespace mrf::cli
