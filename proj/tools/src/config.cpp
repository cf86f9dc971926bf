#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mrf::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Reads typed values from one section and remembers which keys were used,
// so leftovers can be reported as unknown.
class Section {
public:
    Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
        if (auto child = root.get_child_optional(name_)) tree_ = *child;
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        const auto raw = take(key);
        if (!raw) return;
        out = parse<T>(key, *raw);
    }

    void read_list(const std::string& key, std::vector<std::size_t>& out) {
        const auto raw = take(key);
        if (!raw) return;
        out.clear();
        for (const auto& item : split_list(*raw, ',')) out.push_back(parse<std::size_t>(key, item));
    }

    void read_list(const std::string& key, std::vector<std::string>& out) {
        const auto raw = take(key);
        if (!raw) return;
        out = split_list(*raw, ',');
    }

    // "dx dy, dx dy, ..."
    void read_shifts(const std::string& key, std::vector<std::array<int, 2>>& out) {
        const auto raw = take(key);
        if (!raw) return;
        out.clear();
        for (const auto& pair : split_list(*raw, ',')) {
            const auto parts = split_list(pair, ' ');
            if (parts.size() != 2) fail(key, "expected 'dx dy' pairs separated by commas");
            out.push_back({parse<int>(key, parts[0]), parse<int>(key, parts[1])});
        }
    }

    void finish() const {
        for (const auto& [key, value] : tree_)
            if (!used_.count(key)) throw ConfigError(name_ + "." + key + ": unknown key");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(name_ + "." + key + ": " + what);
    }

private:
    std::optional<std::string> take(const std::string& key) {
        used_.insert(key);
        const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    template <typename T>
    T parse(const std::string& key, const std::string& raw) const {
        if constexpr (std::is_same_v<T, bool>) {
            if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
            if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
            fail(key, "expected a boolean, got '" + raw + "'");
        } else if constexpr (std::is_same_v<T, std::string>) {
            return raw;
        } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
            return std::filesystem::path(raw);
        } else if constexpr (std::is_floating_point_v<T>) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(raw, &pos);
                if (pos == raw.size()) return static_cast<T>(v);
            } catch (const std::exception&) {
            }
            fail(key, "expected a number, got '" + raw + "'");
        } else {
            T v{};
            const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (res.ec != std::errc() || res.ptr != raw.data() + raw.size())
                fail(key, "expected an integer, got '" + raw + "'");
            return v;
        }
    }

    std::string name_;
    pt::ptree tree_;
    std::set<std::string> used_;
};

void read_tissue(Section& s, const std::string& prefix, phantom::TissueSpec& spec) {
    s.read(prefix + "_pd", spec.pd);
    s.read(prefix + "_t1", spec.t1_ms);
    s.read(prefix + "_t2", spec.t2_ms);
    s.read(prefix + "_jitter", spec.jitter);
}

void read_interval(Section& s, const std::string& prefix, eval::T1Interval& iv) {
    s.read(prefix + "_lo", iv.lo);
    s.read(prefix + "_hi", iv.hi);
}

const std::set<std::string> kSections{"schedule", "phantom",    "artifacts", "preprocess", "model", "train",
                                      "mlp",      "dictionary", "stdict",    "eval",       "paths"};
const std::set<std::string> kMethods{"cnn", "mlp", "dict", "stdict"};

} // namespace

void ExperimentConfig::validate() const {
    sim::build_schedule(schedule); // validates ranges
    if (window < 1 || window > schedule.t_raw) throw ConfigError("schedule.window: must lie in [1, t_raw]");
    if (phantom.shape.x < 32 || phantom.shape.y < 32 || phantom.shape.z < 1)
        throw ConfigError("phantom.nx/ny/nz: minimum shape is 32 x 32 x 1");
    phantom.tissues.validate();
    artifacts.config.validate();
    if (!(preprocess.clip_lo_pct >= 0.0 && preprocess.clip_lo_pct < preprocess.clip_hi_pct &&
          preprocess.clip_hi_pct <= 100.0))
        throw ConfigError("preprocess.clip_lo_pct/clip_hi_pct: need 0 <= lo < hi <= 100");
    if (!(preprocess.epsilon > 0.0)) throw ConfigError("preprocess.epsilon: must be positive");
    if (!widths.reduce1 || !widths.reduce2 || !widths.branch5 || !widths.branch3)
        throw ConfigError("model: channel widths must be positive");
    train.validate();
    for (auto h : mlp_hidden)
        if (h == 0) throw ConfigError("mlp.hidden: layer widths must be positive");
    if (!(dictionary.t1_step > 0.0) || !(dictionary.t2_step > 0.0))
        throw ConfigError("dictionary.t1_step/t2_step: must be positive");
    if (!(dictionary.t1_start > 0.0) || !(dictionary.t2_start > 0.0))
        throw ConfigError("dictionary.t1_start/t2_start: must be positive");
    if (dictionary.t1_stop < dictionary.t1_start || dictionary.t2_stop < dictionary.t2_start)
        throw ConfigError("dictionary: stop must not precede start");
    stdict.validate();
    thresholds.validate();
    if (methods.empty()) throw ConfigError("eval.methods: at least one method is required");
    for (const auto& m : methods)
        if (!kMethods.count(m)) throw ConfigError("eval.methods: unknown method '" + m + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    pt::ptree root;
    try {
        std::istringstream is(text);
        pt::ini_parser::read_ini(is, root);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [name, child] : root) {
        if (!kSections.count(name)) throw ConfigError(name + ": unknown section");
        if (child.empty() && !child.data().empty()) throw ConfigError(name + ": key outside any section");
    }

    ExperimentConfig cfg;
    {
        Section s(root, "schedule");
        s.read("seed", cfg.schedule.seed);
        s.read("t_raw", cfg.schedule.t_raw);
        s.read("fa_min_deg", cfg.schedule.fa_range_deg.lo);
        s.read("fa_max_deg", cfg.schedule.fa_range_deg.hi);
        s.read("tr_min_ms", cfg.schedule.tr_range_ms.lo);
        s.read("tr_max_ms", cfg.schedule.tr_range_ms.hi);
        s.read("inversion", cfg.schedule.inversion_at_start);
        s.read("window", cfg.window);
        s.finish();
    }
    {
        Section s(root, "phantom");
        s.read("nx", cfg.phantom.shape.x);
        s.read("ny", cfg.phantom.shape.y);
        s.read("nz", cfg.phantom.shape.z);
        s.read("count", cfg.phantom.count);
        s.read("seed", cfg.phantom.seed);
        s.read("phase", cfg.phantom.phase);
        read_tissue(s, "wm", cfg.phantom.tissues.wm);
        read_tissue(s, "gm", cfg.phantom.tissues.gm);
        read_tissue(s, "csf", cfg.phantom.tissues.csf);
        s.finish();
    }
    {
        Section s(root, "artifacts");
        auto& a = cfg.artifacts.config;
        s.read("noise_sigma", a.noise_sigma);
        s.read("ghost_amplitude", a.ghost_amplitude);
        s.read_shifts("ghost_shift_px", a.ghost_shift_px);
        a.alias_ghosts = a.ghost_shift_px.size();
        s.read("alias_ghosts", a.alias_ghosts);
        s.read("seed", cfg.artifacts.seed);
        s.finish();
    }
    {
        Section s(root, "preprocess");
        s.read("clip_lo_pct", cfg.preprocess.clip_lo_pct);
        s.read("clip_hi_pct", cfg.preprocess.clip_hi_pct);
        s.read("epsilon", cfg.preprocess.epsilon);
        s.finish();
    }
    {
        Section s(root, "model");
        s.read("reduce1", cfg.widths.reduce1);
        s.read("reduce2", cfg.widths.reduce2);
        s.read("branch5", cfg.widths.branch5);
        s.read("branch3", cfg.widths.branch3);
        s.finish();
    }
    {
        Section s(root, "train");
        s.read("learning_rate", cfg.train.learning_rate);
        s.read("batch_size", cfg.train.batch_size);
        s.read("dropout_rate", cfg.train.dropout_rate);
        s.read("epochs", cfg.train.epochs);
        s.read("steps_per_epoch", cfg.train.steps_per_epoch);
        s.read("max_auto_steps", cfg.train.max_auto_steps);
        s.read("seed", cfg.train.seed);
        s.read("adam_beta1", cfg.train.adam_beta1);
        s.read("adam_beta2", cfg.train.adam_beta2);
        s.read("adam_epsilon", cfg.train.adam_epsilon);
        s.finish();
    }
    {
        Section s(root, "mlp");
        s.read_list("hidden", cfg.mlp_hidden);
        s.finish();
    }
    {
        Section s(root, "dictionary");
        auto& d = cfg.dictionary;
        s.read("t1_start", d.t1_start);
        s.read("t1_stop", d.t1_stop);
        s.read("t1_step", d.t1_step);
        s.read("t2_start", d.t2_start);
        s.read("t2_stop", d.t2_stop);
        s.read("t2_step", d.t2_step);
        s.finish();
    }
    {
        Section s(root, "stdict");
        s.read("window", cfg.stdict.window);
        s.read("patch", cfg.stdict.patch);
        s.read("candidates", cfg.stdict.candidates);
        s.read("alpha", cfg.stdict.alpha);
        s.read("iterations", cfg.stdict.iterations);
        s.finish();
    }
    {
        Section s(root, "eval");
        read_interval(s, "wm", cfg.thresholds.wm);
        read_interval(s, "gm", cfg.thresholds.gm);
        read_interval(s, "csf", cfg.thresholds.csf);
        s.read("seed", cfg.eval_seed);
        s.read_list("methods", cfg.methods);
        s.finish();
    }
    {
        Section s(root, "paths");
        s.read("work_dir", cfg.paths.work_dir);
        s.read("data_dir", cfg.paths.data_dir);
        s.finish();
    }

    if (cfg.paths.work_dir.is_relative()) cfg.paths.work_dir = base_dir / cfg.paths.work_dir;
    if (cfg.paths.data_dir.empty()) cfg.paths.data_dir = cfg.paths.work_dir / "data";
    else if (cfg.paths.data_dir.is_relative()) cfg.paths.data_dir = base_dir / cfg.paths.data_dir;
    cfg.paths.work_dir = cfg.paths.work_dir.lexically_normal();
    cfg.paths.data_dir = cfg.paths.data_dir.lexically_normal();

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read config '" + path.string() + "'");
    std::ostringstream text;
    text << is.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

} // namespace mrf::cli
