#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>

#include <CLI11.hpp>
#include <json.hpp>
#include <mrf/baselines.hpp>
#include <mrf/model_io.hpp>
#include <mrf/report.hpp>
#include <mrf/volume_io.hpp>

#include "dataset.hpp"

namespace mrf::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path output_dir(const ExperimentConfig& cfg, const CommandOptions& opt, const std::string& command) {
    fs::path dir = opt.out ? *opt.out : cfg.paths.work_dir / command;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

const std::string& require(const std::optional<std::string>& value, const char* flag, const char* command) {
    if (!value || value->empty()) throw UsageError(std::string(command) + ": " + flag + " is required");
    return *value;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    os << text;
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

std::size_t preview_slice(const Dims& d) { return d.z / 2; }

void write_previews(const ParametricMaps& maps, const Mask& mask, const fs::path& dir, const std::string& stem,
                    eval::Window window) {
    for (std::size_t c = 0; c < maps.count(); ++c)
        eval::emit_preview(maps.values, c, preview_slice(maps.dims()), mask, dir / (stem + "_" + maps.names[c] + ".pgm"),
                           window);
}

std::shared_ptr<const sim::Dictionary> build_config_dictionary(const ExperimentConfig& cfg) {
    const auto& d = cfg.dictionary;
    return std::make_shared<const sim::Dictionary>(
        sim::build_dictionary(sim::make_grid(d.t1_start, d.t1_stop, d.t1_step),
                              sim::make_grid(d.t2_start, d.t2_stop, d.t2_step), sim::build_schedule(cfg.schedule),
                              cfg.window));
}

nn::TrainConfig fold_train_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    nn::TrainConfig tc = cfg.train;
    tc.seed = eval::fold_seed(cfg.train.seed, static_cast<std::size_t>(seed));
    return tc;
}

} // namespace

eval::Method make_method(const std::string& name, const ExperimentConfig& cfg) {
    if (name == "cnn")
        return {name, [cfg](std::span<const prep::Scan> train, const prep::Scan& test, std::uint64_t seed) {
                    auto trained = nn::train_stcnn(train, cfg.widths, fold_train_config(cfg, seed), cfg.preprocess);
                    return nn::reconstruct_scan(trained.model, test.image, test.mask, cfg.preprocess);
                }};
    if (name == "mlp")
        return {name, [cfg](std::span<const prep::Scan> train, const prep::Scan& test, std::uint64_t seed) {
                    auto trained = baselines::train_mlp_baseline(train, cfg.mlp_hidden, fold_train_config(cfg, seed),
                                                                 cfg.preprocess);
                    return nn::reconstruct_scan(trained.model, test.image, test.mask, cfg.preprocess);
                }};
    if (name == "dict") {
        // Built on first use and shared by all folds.
        auto cache = std::make_shared<std::shared_ptr<const sim::Dictionary>>();
        auto once = std::make_shared<std::once_flag>();
        return {name, [cfg, cache, once](std::span<const prep::Scan>, const prep::Scan& test, std::uint64_t) {
                    std::call_once(*once, [&] { *cache = build_config_dictionary(cfg); });
                    return baselines::reconstruct_dict(test.image, **cache, test.mask);
                }};
    }
    if (name == "stdict")
        return {name, [cfg](std::span<const prep::Scan> train, const prep::Scan& test, std::uint64_t) {
                    return baselines::reconstruct_stdict(test.image, train, cfg.stdict, test.mask);
                }};
    throw UsageError("unknown method '" + name + "' (expected cnn, mlp, dict or stdict)");
}

fs::path cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const fs::path dir = opt.out ? *opt.out : cfg.paths.data_dir;
    const sim::SequenceSchedule schedule = sim::build_schedule(cfg.schedule);
    std::vector<prep::Scan> scans;
    for (std::size_t i = 0; i < cfg.phantom.count; ++i) {
        scans.push_back(synthesize_scan(cfg, schedule, i));
        log << "simulated " << scans.back().id << " (" << count_masked(scans.back().mask) << " brain voxels, T="
            << scans.back().image.channels() << ")\n";
    }
    write_dataset(dir, scans);
    log << "wrote " << scans.size() << " scans to " << dir.string() << '\n';
    return dir / "manifest.json";
}

fs::path cmd_train(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const std::string method = opt.method.value_or("cnn");
    if (method != "cnn" && method != "mlp") throw UsageError("train: --method must be cnn or mlp");
    const auto scans = load_dataset(cfg.paths.data_dir);
    std::vector<prep::Scan> training = scans;
    std::string tag = "all";
    if (opt.held_out) {
        training = split_held_out(scans, *opt.held_out).second;
        tag = *opt.held_out;
    }
    if (training.empty()) throw DataError("train: no training scans");

    const fs::path dir = output_dir(cfg, opt, "train");
    const fs::path model_path = dir / (method + "_" + tag + ".mrfm");
    std::ostringstream loss_csv;
    loss_csv << "epoch,loss\n";
    auto on_epoch = [&](std::size_t epoch, double loss) {
        char line[64];
        std::snprintf(line, sizeof line, "%zu,%.9g\n", epoch + 1, loss);
        loss_csv << line;
        log << "epoch " << epoch + 1 << " loss " << loss << '\n';
    };
    if (method == "cnn") {
        auto trained = nn::train_stcnn(training, cfg.widths, cfg.train, cfg.preprocess, on_epoch);
        nn::save_model(model_path, trained.model);
    } else {
        auto trained = nn::train_mlp(training, cfg.mlp_hidden, cfg.train, cfg.preprocess, on_epoch);
        nn::save_model(model_path, trained.model);
    }
    write_text(dir / (method + "_" + tag + "_loss.csv"), loss_csv.str());

    json manifest;
    manifest["method"] = method;
    manifest["held_out"] = opt.held_out ? json(*opt.held_out) : json(nullptr);
    manifest["training_scans"] = json::array();
    for (const auto& s : training) manifest["training_scans"].push_back(s.id);
    manifest["model"] = {{"path", model_path.filename().string()}, {"sha256", sha256_file(model_path)}};
    write_text(dir / (method + "_" + tag + "_manifest.json"), manifest.dump(2) + "\n");
    log << "wrote " << model_path.string() << '\n';
    return model_path;
}

fs::path cmd_reconstruct(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const std::string& method = require(opt.method, "--method", "reconstruct");
    if (method != "cnn" && method != "mlp" && method != "dict" && method != "stdict")
        throw UsageError("reconstruct: unknown method '" + method + "' (expected cnn, mlp, dict or stdict)");
    const std::string& id = require(opt.held_out, "--held-out", "reconstruct");
    const auto scans = load_dataset(cfg.paths.data_dir);
    const auto [test, rest] = split_held_out(scans, id);

    ParametricMaps maps;
    if (method == "cnn" || method == "mlp") {
        const fs::path model_path = opt.model ? *opt.model : cfg.paths.work_dir / "train" / (method + "_" + id + ".mrfm");
        auto model = nn::load_model(model_path, test.image.channels());
        if (model->kind() != method)
            throw UsageError("reconstruct: model file holds a " + model->kind() + " but --method is " + method);
        maps = nn::reconstruct_scan(*model, test.image, test.mask, cfg.preprocess);
    } else if (method == "dict") {
        const auto dict = opt.dictionary ? std::make_shared<const sim::Dictionary>(sim::read_dictionary(*opt.dictionary))
                                         : build_config_dictionary(cfg);
        maps = baselines::reconstruct_dict(test.image, *dict, test.mask);
    } else {
        baselines::StDictStats stats;
        maps = baselines::reconstruct_stdict(test.image, rest, cfg.stdict, test.mask, &stats);
        log << "stdict: " << stats.candidate_pool << " candidate voxels, " << stats.scored_pairs << " patch scores\n";
    }

    const fs::path dir = output_dir(cfg, opt, "reconstruct");
    const std::string stem = id + "_" + method;
    const fs::path out = dir / (stem + "_maps.mrfv");
    io::write_maps(out, maps);
    write_previews(maps, test.mask, dir, stem, eval::Window::MaskedRange);
    log << "wrote " << out.string() << '\n';
    return out;
}

fs::path cmd_match(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const fs::path dir = output_dir(cfg, opt, "match");
    std::shared_ptr<const sim::Dictionary> dict;
    if (opt.dictionary) {
        dict = std::make_shared<const sim::Dictionary>(sim::read_dictionary(*opt.dictionary));
    } else {
        dict = build_config_dictionary(cfg);
        sim::write_dictionary(dir / "dictionary.mrfd", *dict);
        log << "dictionary: " << dict->size() << " entries, T=" << dict->length() << '\n';
    }
    if (!opt.held_out) return dir / "dictionary.mrfd";

    const auto scans = load_dataset(cfg.paths.data_dir);
    const prep::Scan test = split_held_out(scans, *opt.held_out).first;
    const ParametricMaps maps = baselines::reconstruct_dict(test.image, *dict, test.mask);
    const std::string stem = test.id + "_dict";
    const fs::path out = dir / (stem + "_maps.mrfv");
    io::write_maps(out, maps);
    write_previews(maps, test.mask, dir, stem, eval::Window::MaskedRange);
    log << "wrote " << out.string() << '\n';
    return out;
}

fs::path cmd_evaluate(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const std::string& id = require(opt.held_out, "--held-out", "evaluate");
    if (!opt.maps) throw UsageError("evaluate: --maps is required");
    const auto scans = load_dataset(cfg.paths.data_dir);
    const prep::Scan test = split_held_out(scans, id).first;
    ParametricMaps est = io::read_maps(*opt.maps);
    if (!est.values.same_shape(test.maps.values))
        throw DataError("evaluate: '" + opt.maps->string() + "' does not match the scan's map shape");
    est.names = test.maps.names;

    const std::string method = opt.method.value_or("estimate");
    const LabelVolume labels = eval::segment_tissues(test.maps, test.mask, cfg.thresholds);
    eval::MetricsReport report;
    report.folds = 1;
    for (phantom::Label t : eval::kTissues)
        for (std::size_t c = 0; c < est.count(); ++c) {
            const eval::ErrorPair e = eval::tissue_error(est, test.maps, labels, t, c);
            if (e.count == 0) continue;
            report.rows.push_back({eval::tissue_name(t), method, est.names[c], e.mae, 0.0, e.rmse, 0.0});
        }
    for (std::size_t c = 0; c < est.count(); ++c)
        log << id << ' ' << est.names[c] << " MAE " << eval::segmented_error(est, test.maps, labels, c).mae << '\n';

    const fs::path dir = output_dir(cfg, opt, "evaluate");
    const fs::path out = dir / (id + "_" + method + "_report.csv");
    eval::emit_report(report, out);
    write_previews(eval::error_map(est, test.maps, test.mask), test.mask, dir, id + "_" + method + "_error",
                   eval::Window::Symmetric);
    log << "wrote " << out.string() << '\n';
    return out;
}

fs::path cmd_crossval(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    std::vector<std::string> names = cfg.methods;
    if (opt.method) {
        names.clear();
        std::istringstream is(*opt.method);
        for (std::string m; std::getline(is, m, ',');)
            if (!m.empty()) names.push_back(m);
    }
    std::vector<eval::Method> methods;
    for (const auto& n : names) methods.push_back(make_method(n, cfg));

    const auto scans = load_dataset(cfg.paths.data_dir);
    if (scans.size() < 2) throw DataError("crossval: the dataset needs at least two scans");
    const fs::path dir = output_dir(cfg, opt, "crossval");
    const fs::path previews = dir / "previews";
    fs::create_directories(previews);

    eval::CrossvalConfig cv{cfg.thresholds, cfg.eval_seed};
    auto observer = [&](const eval::FoldResult& fold, const prep::Scan& test, const ParametricMaps& est) {
        log << fold.method << " fold " << fold.held_out << ": T1 MAE " << fold.segmented[1].mae << " ms, T2 MAE "
            << fold.segmented[2].mae << " ms, PD MAE " << fold.segmented[0].mae << '\n';
        write_previews(eval::error_map(est, test.maps, test.mask), test.mask, previews,
                       fold.method + "_" + fold.held_out + "_error", eval::Window::Symmetric);
    };
    const eval::CrossvalResult result = eval::loo_crossval(scans, methods, cv, observer);
    for (const auto& f : result.report.failures) log << "fold failed: " << f << '\n';

    const fs::path out = dir / "report.csv";
    eval::emit_report(result.report, out);
    log << "wrote " << out.string() << '\n';
    return out;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic MRF reconstruction experiments"};
    app.require_subcommand(1);
    CommandOptions opt;
    std::string command;

    struct Spec {
        const char* name;
        const char* help;
    };
    const Spec specs[] = {
        {"simulate", "Generate the phantom dataset and its manifest"},
        {"train", "Train a cnn or mlp regressor on all scans except --held-out"},
        {"reconstruct", "Reconstruct maps of scan --held-out with --method cnn|mlp|dict|stdict"},
        {"match", "Build the matching dictionary and optionally match scan --held-out"},
        {"evaluate", "Score estimated --maps against scan --held-out"},
        {"crossval", "Leave-one-out cross-validation of the configured methods"},
    };
    std::string held_out, method, out_dir, model, dictionary, maps;
    for (const auto& s : specs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", opt.config, "Experiment config (INI)")->required();
        sub->add_option("--held-out", held_out, "Scan id");
        sub->add_option("--method", method, "Method name (crossval: comma-separated list)");
        sub->add_option("--out", out_dir, "Output directory");
        if (std::string(s.name) == "reconstruct") sub->add_option("--model", model, "Trained model file");
        if (std::string(s.name) == "reconstruct" || std::string(s.name) == "match")
            sub->add_option("--dictionary", dictionary, "Dictionary file (MRFD)");
        if (std::string(s.name) == "evaluate") sub->add_option("--maps", maps, "Estimated maps (MRFV)");
        sub->callback([&command, sub] { command = sub->get_name(); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }
    if (!held_out.empty()) opt.held_out = held_out;
    if (!method.empty()) opt.method = method;
    if (!out_dir.empty()) opt.out = out_dir;
    if (!model.empty()) opt.model = model;
    if (!dictionary.empty()) opt.dictionary = dictionary;
    if (!maps.empty()) opt.maps = maps;

    try {
        const ExperimentConfig cfg = load_config(opt.config);
        if (command == "simulate") cmd_simulate(cfg, opt, out);
        else if (command == "train") cmd_train(cfg, opt, out);
        else if (command == "reconstruct") cmd_reconstruct(cfg, opt, out);
        else if (command == "match") cmd_match(cfg, opt, out);
        else if (command == "evaluate") cmd_evaluate(cfg, opt, out);
        else cmd_crossval(cfg, opt, out);
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace mrf::cli
