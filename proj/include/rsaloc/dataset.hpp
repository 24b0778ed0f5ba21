#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "rsaloc/linalg.hpp"
#include "rsaloc/measurement.hpp"
#include "rsaloc/scene.hpp"

namespace rsaloc {

/// Everything needed to regenerate a dataset bit-for-bit: seed, resolved
/// anchor set (fixed for the whole experiment), path loss, sample count,
/// split ratios and the noise-level grid samples are drawn from.
struct DatasetManifest {
    std::uint64_t seed = 0;
    SceneConfig scene_cfg;
    PathLossConfig path_loss;
    std::vector<Point3> anchors;
    std::size_t sample_count = 100000;
    std::array<double, 3> split_ratios{0.75, 0.15, 0.10};
    std::vector<NoiseConfig> noise_grid;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);
};

/// Generated corpus: per sample the stacked observation theta (3N), the
/// preprocessed feature vector (12N), the true position, the noise level
/// it was drawn at and the generating exponent.
struct Dataset {
    DatasetManifest manifest;
    Matrix theta;     // M x 3N
    Matrix features;  // M x 12N
    Matrix targets;   // M x 3
    std::vector<NoiseConfig> noise;
    std::vector<double> gamma_true;

    std::size_t size() const { return targets.rows(); }
};

struct Splits {
    std::vector<std::size_t> train, val, test;
};

/// Default training noise grid: the RSS sweep values crossed with baseline
/// angle noise, plus each angle sweep crossed with baseline RSS noise,
/// deduplicated. Covers every noise point the benchmark sweeps evaluate.
std::vector<NoiseConfig> default_noise_grid();

/// Resolves a manifest: validates configs and draws the experiment's fixed
/// anchor set from the seed.
DatasetManifest make_manifest(const SceneConfig& cfg, const PathLossConfig& pl,
                              std::uint64_t seed, std::size_t sample_count,
                              std::array<double, 3> split_ratios,
                              std::vector<NoiseConfig> noise_grid);

/// Generates the corpus. Each sample uses an RNG stream derived from
/// (seed, sample index), so the result does not depend on generation order.
Dataset generate(const DatasetManifest& manifest);

/// Seeded disjoint exhaustive partition; fractional sizes round down and
/// the remainder goes to the training split.
Splits split(std::size_t count, std::array<double, 3> ratios, std::uint64_t seed);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Hash of (anchors, path loss); ties models to the geometry they were
/// trained on.
std::uint64_t scene_fingerprint(const std::vector<Point3>& anchors,
                                const PathLossConfig& pl);

}  // namespace rsaloc
