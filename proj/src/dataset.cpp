#include "rsaloc/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "rsaloc/errors.hpp"
#include "rsaloc/linearization.hpp"
#include "rsaloc/rng.hpp"

namespace rsaloc {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'A', 'L', 'O', 'C', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;

// RNG stream tags under the experiment seed
constexpr std::uint64_t kStreamAnchors = 1;
constexpr std::uint64_t kStreamSamples = 2;
constexpr std::uint64_t kStreamSplit = 3;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) buf.push_back(static_cast<char>(v >> (8 * k)));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) buf.push_back(static_cast<char>(v >> (8 * k)));
}

void put_f64(std::string& buf, double d) {
    put_u64(buf, std::bit_cast<std::uint64_t>(d));
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void bytes(char* dst, std::size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw FormatError("dataset: file truncated");
    }

    std::uint32_t u32() {
        unsigned char b[4];
        bytes(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) |
               (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    }

    std::uint64_t u64() {
        unsigned char b[8];
        bytes(reinterpret_cast<char*>(b), 8);
        std::uint64_t v = 0;
        for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

private:
    std::istream& in_;
};

std::string layout_name(AnchorLayout layout) {
    return layout == AnchorLayout::FixedSeeded ? "fixed_seeded" : "user_provided";
}

AnchorLayout layout_from_name(const std::string& name) {
    if (name == "fixed_seeded") return AnchorLayout::FixedSeeded;
    if (name == "user_provided") return AnchorLayout::UserProvided;
    throw FormatError("manifest: unknown anchor layout '" + name + "'");
}

}  // namespace

std::vector<NoiseConfig> default_noise_grid() {
    constexpr double kBaselineRssDb = 3.0;
    const double base_angle = deg_to_rad(5.0);

    std::vector<NoiseConfig> grid;
    for (int s = 0; s <= 6; ++s)
        grid.push_back({static_cast<double>(s), base_angle, base_angle});
    for (int s = 0; s <= 10; ++s)
        grid.push_back({kBaselineRssDb, deg_to_rad(static_cast<double>(s)), base_angle});
    for (int s = 0; s <= 10; ++s)
        grid.push_back({kBaselineRssDb, base_angle, deg_to_rad(static_cast<double>(s))});

    std::vector<NoiseConfig> unique;
    for (const auto& g : grid)
        if (std::find(unique.begin(), unique.end(), g) == unique.end())
            unique.push_back(g);
    return unique;
}

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["sample_count"] = sample_count;
    j["split_ratios"] = split_ratios;
    j["scene"] = {{"box_size", scene_cfg.box_size},
                  {"anchor_count", scene_cfg.anchor_count},
                  {"anchor_layout", layout_name(scene_cfg.anchor_layout)}};
    j["path_loss"] = {{"p0_dbm", path_loss.p0_dbm},
                      {"d0_m", path_loss.d0},
                      {"gamma_true_range", path_loss.gamma_true_range},
                      {"gamma_rx", path_loss.gamma_rx}};
    j["anchors"] = nlohmann::json::array();
    for (const auto& a : anchors) j["anchors"].push_back({a.x, a.y, a.z});
    j["noise_grid"] = nlohmann::json::array();
    for (const auto& g : noise_grid)
        j["noise_grid"].push_back({{"sigma_rss_db", g.sigma_rss_db},
                                   {"sigma_azimuth_rad", g.sigma_azimuth_rad},
                                   {"sigma_elevation_rad", g.sigma_elevation_rad}});
    return j;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
    DatasetManifest m;
    try {
        m.seed = j.at("seed").get<std::uint64_t>();
        m.sample_count = j.at("sample_count").get<std::size_t>();
        m.split_ratios = j.at("split_ratios").get<std::array<double, 3>>();
        const auto& scene = j.at("scene");
        m.scene_cfg.box_size = scene.at("box_size").get<double>();
        m.scene_cfg.anchor_count = scene.at("anchor_count").get<int>();
        m.scene_cfg.anchor_layout =
            layout_from_name(scene.at("anchor_layout").get<std::string>());
        const auto& pl = j.at("path_loss");
        m.path_loss.p0_dbm = pl.at("p0_dbm").get<double>();
        m.path_loss.d0 = pl.at("d0_m").get<double>();
        m.path_loss.gamma_true_range =
            pl.at("gamma_true_range").get<std::array<double, 2>>();
        m.path_loss.gamma_rx = pl.at("gamma_rx").get<double>();
        for (const auto& a : j.at("anchors"))
            m.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>(),
                                 a.at(2).get<double>()});
        for (const auto& g : j.at("noise_grid"))
            m.noise_grid.push_back({g.at("sigma_rss_db").get<double>(),
                                    g.at("sigma_azimuth_rad").get<double>(),
                                    g.at("sigma_elevation_rad").get<double>()});
        if (m.scene_cfg.anchor_layout == AnchorLayout::UserProvided)
            m.scene_cfg.user_anchors = m.anchors;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    return m;
}

DatasetManifest make_manifest(const SceneConfig& cfg, const PathLossConfig& pl,
                              std::uint64_t seed, std::size_t sample_count,
                              std::array<double, 3> split_ratios,
                              std::vector<NoiseConfig> noise_grid) {
    cfg.validate();
    pl.validate();
    if (sample_count == 0) throw ConfigError("manifest: sample_count must be positive");
    if (noise_grid.empty()) throw ConfigError("manifest: noise grid is empty");
    for (const auto& g : noise_grid) g.validate();

    double ratio_sum = 0.0;
    for (double r : split_ratios) {
        if (!(r > 0.0)) throw ConfigError("manifest: split ratios must be positive");
        ratio_sum += r;
    }
    if (std::abs(ratio_sum - 1.0) > 1e-9)
        throw ConfigError("manifest: split ratios must sum to 1");

    DatasetManifest m;
    m.seed = seed;
    m.scene_cfg = cfg;
    m.path_loss = pl;
    m.sample_count = sample_count;
    m.split_ratios = split_ratios;
    m.noise_grid = std::move(noise_grid);

    RandomSource anchor_rng(substream(seed, kStreamAnchors));
    m.anchors = sample_anchors(cfg, anchor_rng);
    return m;
}

Dataset generate(const DatasetManifest& manifest) {
    const std::size_t n = manifest.anchors.size();
    const std::size_t m = manifest.sample_count;
    if (n == 0) throw ConfigError("generate: manifest has no anchors");

    Dataset ds;
    ds.manifest = manifest;
    ds.theta = Matrix(m, 3 * n);
    ds.features = Matrix(m, 12 * n);
    ds.targets = Matrix(m, 3);
    ds.noise.resize(m);
    ds.gamma_true.resize(m);

    const std::uint64_t sample_base = substream(manifest.seed, kStreamSamples);
    for (std::size_t i = 0; i < m; ++i) {
        RandomSource rng(substream(sample_base, i));

        const auto& noise =
            manifest.noise_grid[rng.next_below(manifest.noise_grid.size())];
        const Scene scene = sample_target(manifest.anchors, manifest.scene_cfg,
                                          manifest.path_loss, rng);
        const MeasurementVector theta =
            synthesize_measurements(scene, manifest.path_loss, noise, rng);
        const FeatureVector fv =
            features_from_measurements(theta, manifest.anchors, manifest.path_loss);

        const auto stacked = theta.stacked();
        std::copy(stacked.begin(), stacked.end(), ds.theta.row(i).begin());
        std::copy(fv.x.begin(), fv.x.end(), ds.features.row(i).begin());
        ds.targets(i, 0) = scene.target.x;
        ds.targets(i, 1) = scene.target.y;
        ds.targets(i, 2) = scene.target.z;
        ds.noise[i] = noise;
        ds.gamma_true[i] = scene.gamma_true;
    }
    return ds;
}

Splits split(std::size_t count, std::array<double, 3> ratios, std::uint64_t seed) {
    double ratio_sum = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0)) throw ConfigError("split: ratios must be positive");
        ratio_sum += r;
    }
    if (std::abs(ratio_sum - 1.0) > 1e-9)
        throw ConfigError("split: ratios must sum to 1");
    if (count == 0) throw ConfigError("split: empty dataset");

    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    RandomSource rng(substream(seed, kStreamSplit));
    for (std::size_t i = count; i > 1; --i)
        std::swap(order[i - 1], order[rng.next_below(i)]);

    const auto n_val = static_cast<std::size_t>(
        std::floor(ratios[1] * static_cast<double>(count)));
    const auto n_test = static_cast<std::size_t>(
        std::floor(ratios[2] * static_cast<double>(count)));
    const std::size_t n_train = count - n_val - n_test;  // remainder to train

    Splits s;
    s.train.assign(order.begin(), order.begin() + n_train);
    s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    s.test.assign(order.begin() + n_train + n_val, order.end());
    return s;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    const std::string manifest = dataset.manifest.to_json().dump();
    const std::size_t m = dataset.size();
    const std::size_t n = dataset.manifest.anchors.size();

    std::string buf;
    buf.reserve(24 + manifest.size() + m * (15 * n + 7) * 8);
    buf.append(kMagic, sizeof(kMagic));
    put_u32(buf, kDatasetVersion);
    put_u64(buf, manifest.size());
    buf.append(manifest);
    put_u64(buf, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (double v : dataset.theta.row(i)) put_f64(buf, v);
        for (double v : dataset.features.row(i)) put_f64(buf, v);
        for (double v : dataset.targets.row(i)) put_f64(buf, v);
        put_f64(buf, dataset.noise[i].sigma_rss_db);
        put_f64(buf, dataset.noise[i].sigma_azimuth_rad);
        put_f64(buf, dataset.noise[i].sigma_elevation_rad);
        put_f64(buf, dataset.gamma_true[i]);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("dataset: cannot write " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("dataset: write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("dataset: cannot read " + path.string());
    Reader r(in);

    char magic[8];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("dataset: bad magic bytes in " + path.string());
    const std::uint32_t version = r.u32();
    if (version != kDatasetVersion)
        throw FormatError("dataset: version " + std::to_string(version) +
                          " unsupported (expected " +
                          std::to_string(kDatasetVersion) + ")");

    const std::uint64_t manifest_len = r.u64();
    if (manifest_len > (1ULL << 30))
        throw FormatError("dataset: implausible manifest length in " +
                          path.string());
    std::string manifest_text(manifest_len, '\0');
    r.bytes(manifest_text.data(), manifest_len);

    nlohmann::json mj;
    try {
        mj = nlohmann::json::parse(manifest_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("dataset manifest: ") + e.what());
    }

    Dataset ds;
    ds.manifest = DatasetManifest::from_json(mj);
    const std::uint64_t m = r.u64();
    if (m != ds.manifest.sample_count)
        throw FormatError("dataset: record count disagrees with manifest");

    const std::size_t n = ds.manifest.anchors.size();
    ds.theta = Matrix(m, 3 * n);
    ds.features = Matrix(m, 12 * n);
    ds.targets = Matrix(m, 3);
    ds.noise.resize(m);
    ds.gamma_true.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (double& v : ds.theta.row(i)) v = r.f64();
        for (double& v : ds.features.row(i)) v = r.f64();
        for (double& v : ds.targets.row(i)) v = r.f64();
        ds.noise[i].sigma_rss_db = r.f64();
        ds.noise[i].sigma_azimuth_rad = r.f64();
        ds.noise[i].sigma_elevation_rad = r.f64();
        ds.gamma_true[i] = r.f64();
    }
    return ds;
}

std::uint64_t scene_fingerprint(const std::vector<Point3>& anchors,
                                const PathLossConfig& pl) {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a over the raw doubles
    auto absorb = [&h](double v) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        for (int k = 0; k < 8; ++k) {
            h ^= (bits >> (8 * k)) & 0xFF;
            h *= 0x100000001B3ULL;
        }
    };
    for (const auto& a : anchors) {
        absorb(a.x);
        absorb(a.y);
        absorb(a.z);
    }
    absorb(pl.p0_dbm);
    absorb(pl.d0);
    absorb(pl.gamma_true_range[0]);
    absorb(pl.gamma_true_range[1]);
    absorb(pl.gamma_rx);
    return h;
}

}  // namespace rsaloc
