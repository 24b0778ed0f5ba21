// rsaloc: hybrid RSS/AoA positioning benchmark CLI.
//
// Subcommands:
//   gen-data  synthesize a measurement corpus and write it to disk
//   train     fit the MLP estimator on a generated corpus (raw or
//             preprocessed inputs) and write a checkpoint + training curve
//   sweep     Monte Carlo RMSE noise sweeps comparing WLS, LS and the MLPs
//
// Every command is deterministic given (config file, seed); outputs carry
// the resolved configuration in a .meta.json sidecar.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsaloc/dataset.hpp"
#include "rsaloc/errors.hpp"
#include "rsaloc/evaluation.hpp"
#include "rsaloc/kernels.hpp"
#include "rsaloc/linearization.hpp"
#include "rsaloc/mlp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rsaloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// seed stream tags reserved for CLI-level derivations
constexpr std::uint64_t kStreamTrainPreprocessed = 0x40;
constexpr std::uint64_t kStreamTrainRaw = 0x41;
constexpr std::uint64_t kStreamSweep = 0x50;

struct ExperimentConfig {
    std::uint64_t seed = 0;
    fs::path out_dir = "out";

    SceneConfig scene;
    PathLossConfig path_loss;

    std::size_t sample_count = 100000;
    std::array<double, 3> split_ratios{0.75, 0.15, 0.10};
    std::vector<NoiseConfig> noise_grid;  // empty -> default grid

    TrainConfig train_cfg;  // input_mode and seed are filled per command

    int closed_form_trials = 10000;
    int mlp_trials = 0;  // 0 -> test-split size
    std::vector<double> rss_grid{0, 1, 2, 3, 4, 5, 6};
    std::vector<double> azimuth_grid{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> elevation_grid{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    double baseline_rss_db = 3.0;
    double baseline_azimuth_deg = 5.0;
    double baseline_elevation_deg = 5.0;
};

const json& require_field(const json& j, const char* key, const char* scope) {
    const auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(std::string("config: missing required field '") +
                          scope + key + "'");
    return *it;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    return it->get<T>();
}

ExperimentConfig parse_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());

    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }

    ExperimentConfig cfg;
    try {
        cfg.seed = require_field(j, "seed", "").get<std::uint64_t>();
        cfg.out_dir = get_or<std::string>(j, "out_dir", "out");

        if (j.contains("scene")) {
            const auto& s = j["scene"];
            cfg.scene.box_size = get_or(s, "box_size", cfg.scene.box_size);
            cfg.scene.anchor_count = get_or(s, "anchor_count", cfg.scene.anchor_count);
            const std::string layout =
                get_or<std::string>(s, "anchor_layout", "fixed_seeded");
            if (layout == "fixed_seeded") {
                cfg.scene.anchor_layout = AnchorLayout::FixedSeeded;
            } else if (layout == "user_provided") {
                cfg.scene.anchor_layout = AnchorLayout::UserProvided;
                for (const auto& a : require_field(s, "anchors", "scene."))
                    cfg.scene.user_anchors.push_back({a.at(0).get<double>(),
                                                      a.at(1).get<double>(),
                                                      a.at(2).get<double>()});
            } else {
                throw ConfigError("config: unknown scene.anchor_layout '" + layout + "'");
            }
        }
        if (j.contains("path_loss")) {
            const auto& p = j["path_loss"];
            cfg.path_loss.p0_dbm = get_or(p, "p0_dbm", cfg.path_loss.p0_dbm);
            cfg.path_loss.d0 = get_or(p, "d0_m", cfg.path_loss.d0);
            cfg.path_loss.gamma_true_range = get_or(p, "gamma_true_range",
                                                    cfg.path_loss.gamma_true_range);
            cfg.path_loss.gamma_rx = get_or(p, "gamma_rx", cfg.path_loss.gamma_rx);
        }
        if (j.contains("dataset")) {
            const auto& d = j["dataset"];
            cfg.sample_count = get_or(d, "sample_count", cfg.sample_count);
            cfg.split_ratios = get_or(d, "split_ratios", cfg.split_ratios);
            if (d.contains("noise_grid")) {
                for (const auto& g : d["noise_grid"])
                    cfg.noise_grid.push_back({g.at(0).get<double>(),
                                              deg_to_rad(g.at(1).get<double>()),
                                              deg_to_rad(g.at(2).get<double>())});
            }
        }
        if (j.contains("train")) {
            const auto& t = j["train"];
            cfg.train_cfg.epochs = get_or(t, "epochs", cfg.train_cfg.epochs);
            cfg.train_cfg.batch_size = get_or(t, "batch_size", cfg.train_cfg.batch_size);
            cfg.train_cfg.lr = get_or(t, "learning_rate", cfg.train_cfg.lr);
            cfg.train_cfg.hidden_dim = get_or(t, "hidden_dim", cfg.train_cfg.hidden_dim);
        }
        if (j.contains("sweep")) {
            const auto& s = j["sweep"];
            cfg.closed_form_trials =
                get_or(s, "closed_form_trials", cfg.closed_form_trials);
            cfg.mlp_trials = get_or(s, "mlp_trials", cfg.mlp_trials);
            cfg.rss_grid = get_or(s, "rss_grid_db", cfg.rss_grid);
            cfg.azimuth_grid = get_or(s, "azimuth_grid_deg", cfg.azimuth_grid);
            cfg.elevation_grid = get_or(s, "elevation_grid_deg", cfg.elevation_grid);
            if (s.contains("baseline")) {
                const auto& b = s["baseline"];
                cfg.baseline_rss_db = get_or(b, "rss_db", cfg.baseline_rss_db);
                cfg.baseline_azimuth_deg =
                    get_or(b, "azimuth_deg", cfg.baseline_azimuth_deg);
                cfg.baseline_elevation_deg =
                    get_or(b, "elevation_deg", cfg.baseline_elevation_deg);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return cfg;
}

json resolved_config_json(const ExperimentConfig& cfg) {
    json grid = json::array();
    const auto& noise =
        cfg.noise_grid.empty() ? default_noise_grid() : cfg.noise_grid;
    for (const auto& g : noise)
        grid.push_back({g.sigma_rss_db, rad_to_deg(g.sigma_azimuth_rad),
                        rad_to_deg(g.sigma_elevation_rad)});
    return json{
        {"seed", cfg.seed},
        {"out_dir", cfg.out_dir.string()},
        {"scene",
         {{"box_size", cfg.scene.box_size},
          {"anchor_count", cfg.scene.anchor_count},
          {"anchor_layout", cfg.scene.anchor_layout == AnchorLayout::FixedSeeded
                                ? "fixed_seeded"
                                : "user_provided"}}},
        {"path_loss",
         {{"p0_dbm", cfg.path_loss.p0_dbm},
          {"d0_m", cfg.path_loss.d0},
          {"gamma_true_range", cfg.path_loss.gamma_true_range},
          {"gamma_rx", cfg.path_loss.gamma_rx}}},
        {"dataset",
         {{"sample_count", cfg.sample_count},
          {"split_ratios", cfg.split_ratios},
          {"noise_grid_db_deg_deg", grid}}},
        {"train",
         {{"epochs", cfg.train_cfg.epochs},
          {"batch_size", cfg.train_cfg.batch_size},
          {"learning_rate", cfg.train_cfg.lr},
          {"hidden_dim", cfg.train_cfg.hidden_dim}}},
        {"sweep",
         {{"closed_form_trials", cfg.closed_form_trials},
          {"mlp_trials", cfg.mlp_trials},
          {"rss_grid_db", cfg.rss_grid},
          {"azimuth_grid_deg", cfg.azimuth_grid},
          {"elevation_grid_deg", cfg.elevation_grid},
          {"baseline",
           {{"rss_db", cfg.baseline_rss_db},
            {"azimuth_deg", cfg.baseline_azimuth_deg},
            {"elevation_deg", cfg.baseline_elevation_deg}}}}},
    };
}

void write_meta(const fs::path& target, const ExperimentConfig& cfg,
                const std::string& command) {
    json meta{{"command", command}, {"config", resolved_config_json(cfg)}};
    std::ofstream out(target.string() + ".meta.json");
    if (!out) throw Error("cannot write " + target.string() + ".meta.json");
    out << meta.dump(1) << '\n';
}

DatasetManifest manifest_from_config(const ExperimentConfig& cfg) {
    return make_manifest(cfg.scene, cfg.path_loss, cfg.seed, cfg.sample_count,
                         cfg.split_ratios,
                         cfg.noise_grid.empty() ? default_noise_grid()
                                                : cfg.noise_grid);
}

int cmd_gen_data(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const auto manifest = manifest_from_config(cfg);
    const auto dataset = generate(manifest);
    const fs::path path = cfg.out_dir / "dataset.bin";
    save_dataset(dataset, path);
    write_meta(path, cfg, "gen-data");

    std::cout << "wrote " << path.string() << "\n"
              << "  samples:    " << manifest.sample_count << "\n"
              << "  anchors:    " << manifest.anchors.size() << " (box "
              << manifest.scene_cfg.box_size << " m)\n"
              << "  noise grid: " << manifest.noise_grid.size() << " levels\n"
              << "  splits:     " << manifest.split_ratios[0] << "/"
              << manifest.split_ratios[1] << "/" << manifest.split_ratios[2]
              << "\n";
    return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& mode_name,
              std::optional<fs::path> dataset_path) {
    const InputMode mode = input_mode_from_name(mode_name);
    fs::create_directories(cfg.out_dir);

    const fs::path ds_path =
        dataset_path.value_or(cfg.out_dir / "dataset.bin");
    const Dataset dataset = load_dataset(ds_path);
    const auto& manifest = dataset.manifest;
    const Splits splits =
        split(dataset.size(), manifest.split_ratios, manifest.seed);

    TrainConfig tc = cfg.train_cfg;
    tc.input_mode = mode;
    tc.seed = substream(cfg.seed, mode == InputMode::Preprocessed
                                      ? kStreamTrainPreprocessed
                                      : kStreamTrainRaw);

    const Matrix& features =
        mode == InputMode::Preprocessed ? dataset.features : dataset.theta;
    auto result = train(features, dataset.targets, splits.train, splits.val, tc);
    result.model.scene_fingerprint =
        scene_fingerprint(manifest.anchors, manifest.path_loss);

    const fs::path ckpt = cfg.out_dir / ("mlp_" + mode_name + ".ckpt.json");
    save_checkpoint(result.model, ckpt);

    const fs::path curve_path = cfg.out_dir / ("train_curve_" + mode_name + ".csv");
    {
        std::ofstream out(curve_path, std::ios::binary);
        if (!out) throw Error("cannot write " + curve_path.string());
        out << "epoch,train_mse,val_mse\n";
        for (std::size_t e = 0; e < result.curve.size(); ++e)
            out << e << ',' << format_double(result.curve[e].train_mse) << ','
                << format_double(result.curve[e].val_mse) << '\n';
    }
    write_meta(curve_path, cfg, "train --mode " + mode_name);

    const double test_mse =
        mean_squared_error(result.model, features, dataset.targets, splits.test);
    std::cout << "wrote " << ckpt.string() << "\n"
              << "  input dim:    " << result.model.input_dim << "\n"
              << "  best epoch:   " << result.best_epoch << "\n"
              << "  val rmse (m):  " << format_double(std::sqrt(result.best_val_mse))
              << "\n"
              << "  test rmse (m): " << format_double(std::sqrt(test_mse)) << "\n";
    return kExitOk;
}

void write_plot_script(const fs::path& dir) {
    std::ofstream out(dir / "plot_sweeps.gp");
    if (!out) throw Error("cannot write plot script");
    out << R"(# gnuplot script: RMSE-vs-noise curves for every estimator
set datafile separator comma
set key top left
set grid
set style data linespoints
set terminal pngcairo size 900,600
methods = "wls ls mlp_raw mlp_pre"

set output 'rmse_vs_sigma_rss.png'
set xlabel 'RSS noise std dev (dB)'
set ylabel 'RMSE (m)'
plot for [i=1:words(methods)] 'sweep_rss.csv' \
    using 2:(strcol(3) eq word(methods,i) ? $4 : 1/0) every ::1 \
    title word(methods,i)

set output 'rmse_vs_sigma_azimuth.png'
set xlabel 'azimuth noise std dev (deg)'
set ylabel 'RMSE (m)'
plot for [i=1:words(methods)] 'sweep_azimuth.csv' \
    using 2:(strcol(3) eq word(methods,i) ? $4 : 1/0) every ::1 \
    title word(methods,i)

set output 'rmse_vs_sigma_elevation.png'
set xlabel 'elevation noise std dev (deg)'
set ylabel 'RMSE (m)'
plot for [i=1:words(methods)] 'sweep_elevation.csv' \
    using 2:(strcol(3) eq word(methods,i) ? $4 : 1/0) every ::1 \
    title word(methods,i)
)";
}

int cmd_sweep(const ExperimentConfig& cfg,
              const std::vector<std::string>& checkpoints) {
    fs::create_directories(cfg.out_dir);
    const auto manifest = manifest_from_config(cfg);

    std::optional<MlpModel> raw_model;
    std::optional<MlpModel> pre_model;
    for (const auto& c : checkpoints) {
        MlpModel model = load_checkpoint(c);
        auto& slot =
            model.input_mode == InputMode::Raw ? raw_model : pre_model;
        if (slot.has_value())
            throw ConfigError("sweep: two checkpoints with input mode '" +
                              std::string(input_mode_name(model.input_mode)) + "'");
        slot = std::move(model);
    }

    int mlp_trials = cfg.mlp_trials;
    if (mlp_trials == 0)
        mlp_trials = static_cast<int>(
            split(cfg.sample_count, cfg.split_ratios, cfg.seed).test.size());

    SweepSpec base;
    base.fixed_rss_db = cfg.baseline_rss_db;
    base.fixed_azimuth_deg = cfg.baseline_azimuth_deg;
    base.fixed_elevation_deg = cfg.baseline_elevation_deg;
    base.closed_form_trials = cfg.closed_form_trials;
    base.mlp_trials = mlp_trials;
    base.seed = substream(cfg.seed, kStreamSweep);

    const struct {
        SweepVariable variable;
        const std::vector<double>* grid;
        const char* file;
    } sweeps[] = {
        {SweepVariable::SigmaRss, &cfg.rss_grid, "sweep_rss.csv"},
        {SweepVariable::SigmaAzimuth, &cfg.azimuth_grid, "sweep_azimuth.csv"},
        {SweepVariable::SigmaElevation, &cfg.elevation_grid, "sweep_elevation.csv"},
    };
    for (const auto& sweep : sweeps) {
        SweepSpec spec = base;
        spec.variable = sweep.variable;
        spec.grid = *sweep.grid;
        const SweepResult result = run_sweep(
            spec, manifest.anchors, manifest.scene_cfg, manifest.path_loss,
            raw_model ? &*raw_model : nullptr, pre_model ? &*pre_model : nullptr);
        const fs::path csv = cfg.out_dir / sweep.file;
        write_sweep_csv(result, csv);
        write_meta(csv, cfg, "sweep");
        std::cout << format_report(result);
    }
    write_plot_script(cfg.out_dir);
    std::cout << "wrote " << (cfg.out_dir / "plot_sweeps.gp").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid RSS/AoA positioning benchmark"};
    app.require_subcommand(1);

    std::string kernels = "auto";
    app.add_option("--kernels", kernels, "kernel backend: auto, scalar or avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (json)")
            ->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_override, "override the output directory");
    };

    auto* gen = app.add_subcommand("gen-data", "generate a measurement corpus");
    add_common(gen);

    auto* tr = app.add_subcommand("train", "train the MLP estimator");
    add_common(tr);
    std::string mode;
    tr->add_option("--mode", mode, "input representation: raw or preprocessed")
        ->required()
        ->check(CLI::IsMember({"raw", "preprocessed"}));
    std::string dataset_override;
    tr->add_option("--dataset", dataset_override, "dataset file (default <out>/dataset.bin)");

    auto* sw = app.add_subcommand("sweep", "run the RMSE noise sweeps");
    add_common(sw);
    std::vector<std::string> checkpoints;
    sw->add_option("--checkpoint", checkpoints, "MLP checkpoint(s) to evaluate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (kernels == "scalar") kern::select_backend(kern::Backend::Scalar);
        if (kernels == "avx2") kern::select_backend(kern::Backend::Avx2);

        ExperimentConfig cfg = parse_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (out_override) cfg.out_dir = *out_override;

        if (gen->parsed()) return cmd_gen_data(cfg);
        if (tr->parsed())
            return cmd_train(cfg, mode,
                             dataset_override.empty()
                                 ? std::nullopt
                                 : std::optional<fs::path>(dataset_override));
        if (sw->parsed()) return cmd_sweep(cfg, checkpoints);
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
