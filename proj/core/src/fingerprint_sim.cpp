#include "mrf/fingerprint_sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace mrf::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr std::size_t kLobeMinPeriod = 200;
constexpr std::size_t kLobeMaxPeriod = 300;

void check_interval(const Interval& iv, const char* name) {
    if (!(iv.lo <= iv.hi)) throw ConfigError(std::string(name) + ": empty interval");
}

} // namespace

void SequenceSchedule::validate() const {
    const std::size_t n = flip_angles_deg.size();
    if (n == 0) throw ConfigError("schedule: empty pulse train");
    if (repetition_times_ms.size() != n || echo_times_ms.size() != n)
        throw ConfigError("schedule: flip angle, TR and TE lists differ in length");
    for (std::size_t i = 0; i < n; ++i) {
        const double fa = flip_angles_deg[i];
        const double tr = repetition_times_ms[i];
        const double te = echo_times_ms[i];
        if (!(fa >= 0.0 && fa <= 180.0))
            throw ConfigError("schedule: flip angle " + std::to_string(fa) + " outside [0, 180] at pulse " +
                              std::to_string(i));
        if (!(te >= 0.0 && tr > te))
            throw ConfigError("schedule: need TR > TE >= 0 at pulse " + std::to_string(i));
    }
}

SequenceSchedule build_schedule(const ScheduleConfig& cfg) {
    if (cfg.t_raw < 1) throw ConfigError("schedule.t_raw: must be >= 1");
    check_interval(cfg.fa_range_deg, "schedule.fa_range_deg");
    check_interval(cfg.tr_range_ms, "schedule.tr_range_ms");
    if (cfg.fa_range_deg.lo < 0.0 || cfg.fa_range_deg.hi > 180.0)
        throw ConfigError("schedule.fa_range_deg: must lie within [0, 180]");
    if (cfg.tr_range_ms.lo <= 0.0) throw ConfigError("schedule.tr_range_ms: must be positive");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> period_dist(kLobeMinPeriod, kLobeMaxPeriod);
    std::uniform_real_distribution<double> peak_dist(cfg.fa_range_deg.lo, cfg.fa_range_deg.hi);
    std::uniform_real_distribution<double> tr_dist(cfg.tr_range_ms.lo, cfg.tr_range_ms.hi);

    SequenceSchedule s;
    s.inversion_at_start = cfg.inversion_at_start;
    s.flip_angles_deg.reserve(cfg.t_raw);
    while (s.flip_angles_deg.size() < cfg.t_raw) {
        const std::size_t period = period_dist(rng);
        const double peak = cfg.fa_range_deg.lo == cfg.fa_range_deg.hi ? cfg.fa_range_deg.lo : peak_dist(rng);
        for (std::size_t j = 0; j < period && s.flip_angles_deg.size() < cfg.t_raw; ++j) {
            const double shape = std::sin(std::numbers::pi * static_cast<double>(j) / static_cast<double>(period));
            s.flip_angles_deg.push_back(cfg.fa_range_deg.lo + (peak - cfg.fa_range_deg.lo) * shape);
        }
    }
    s.repetition_times_ms.reserve(cfg.t_raw);
    s.echo_times_ms.reserve(cfg.t_raw);
    for (std::size_t i = 0; i < cfg.t_raw; ++i) {
        const double tr = cfg.tr_range_ms.lo == cfg.tr_range_ms.hi ? cfg.tr_range_ms.lo : tr_dist(rng);
        s.repetition_times_ms.push_back(tr);
        s.echo_times_ms.push_back(tr / 2.0);
    }
    return s;
}

TissueParams::TissueParams(double pd_, double t1, double t2) : pd(pd_), t1_ms(t1), t2_ms(t2) {
    if (!(pd >= 0.0) || !std::isfinite(pd)) throw ConfigError("tissue: pd must be finite and >= 0");
    if (!(t1_ms > 0.0) || !(t2_ms > 0.0)) throw ConfigError("tissue: T1 and T2 must be positive");
    if (t2_ms > t1_ms) throw ConfigError("tissue: T2 must not exceed T1");
}

Fingerprint simulate_fingerprint(const TissueParams& params, const SequenceSchedule& schedule) {
    schedule.validate();
    const std::size_t n = schedule.size();
    Fingerprint fp;
    fp.samples.resize(n);

    // Equilibrium magnetization 1; only My and Mz are excited by x-rotations.
    double my = 0.0;
    double mz = schedule.inversion_at_start ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = schedule.flip_angles_deg[i] * kDeg;
        const double ca = std::cos(a);
        const double sa = std::sin(a);
        const double my_rot = my * ca + mz * sa;
        const double mz_rot = -my * sa + mz * ca;

        const double te = schedule.echo_times_ms[i];
        const double tr = schedule.repetition_times_ms[i];
        fp.samples[i] = cplx(params.pd * my_rot * std::exp(-te / params.t2_ms), 0.0);

        const double e1 = std::exp(-tr / params.t1_ms);
        my = my_rot * std::exp(-tr / params.t2_ms);
        mz = 1.0 + (mz_rot - 1.0) * e1;
    }
    return fp;
}

Fingerprint sliding_window(const Fingerprint& fp, std::size_t window) {
    if (window < 1 || window > fp.size())
        throw ArgumentError("sliding_window: window " + std::to_string(window) + " outside [1, " +
                            std::to_string(fp.size()) + "]");
    const std::size_t out_len = fp.size() - window + 1;
    Fingerprint out;
    out.samples.resize(out_len);
    const double w = static_cast<double>(window);
    // Mean taken as offset from the first sample of the window, so constant runs come out exact.
    for (std::size_t i = 0; i < out_len; ++i) {
        const cplx base = fp.samples[i];
        cplx acc{0.0, 0.0};
        for (std::size_t k = 1; k < window; ++k) acc += fp.samples[i + k] - base;
        out.samples[i] = base + acc / w;
    }
    return out;
}

std::vector<double> split_real_imag(std::span<const cplx> samples) {
    const std::size_t n = samples.size();
    std::vector<double> v(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = samples[i].real();
        v[n + i] = samples[i].imag();
    }
    return v;
}

double euclidean_norm(std::span<const cplx> samples) {
    double s = 0.0;
    for (const cplx& c : samples) s += std::norm(c);
    return std::sqrt(s);
}

} // namespace mrf::sim
