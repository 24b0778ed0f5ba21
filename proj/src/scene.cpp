#include "rsaloc/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsaloc/errors.hpp"
#include "rsaloc/linalg.hpp"

namespace rsaloc {

namespace {

constexpr int kMaxRedraws = 100000;

bool anchors_distinct(const std::vector<Point3>& anchors) {
    for (std::size_t i = 0; i < anchors.size(); ++i)
        for (std::size_t j = i + 1; j < anchors.size(); ++j)
            if ((anchors[i] - anchors[j]).norm() == 0.0) return false;
    return true;
}

bool target_admissible(const Point3& t, const std::vector<Point3>& anchors) {
    for (const auto& a : anchors)
        if ((t - a).norm() < kMinTargetAnchorDistance) return false;
    return true;
}

}  // namespace

void SceneConfig::validate() const {
    if (!(box_size > 0.0)) throw ConfigError("scene: box_size must be positive");
    if (anchor_count < 4)
        throw ConfigError("scene: anchor_count must be at least 4");
    if (anchor_layout == AnchorLayout::UserProvided &&
        static_cast<int>(user_anchors.size()) != anchor_count)
        throw ConfigError("scene: expected " + std::to_string(anchor_count) +
                          " user anchors, got " +
                          std::to_string(user_anchors.size()));
}

void PathLossConfig::validate() const {
    if (!(d0 > 0.0)) throw ConfigError("path_loss: d0 must be positive");
    if (!(gamma_true_range[0] > 0.0) ||
        !(gamma_true_range[1] >= gamma_true_range[0]))
        throw ConfigError("path_loss: gamma_true_range must be positive and ordered");
    if (!(gamma_rx > 0.0)) throw ConfigError("path_loss: gamma_rx must be positive");
}

double anchor_condition(const std::vector<Point3>& anchors) {
    const double n = static_cast<double>(anchors.size());
    Point3 mean{};
    for (const auto& a : anchors) mean = mean + a;
    mean = mean * (1.0 / n);

    // Gram matrix of the centered N x 3 coordinate matrix
    std::array<double, 9> g{};
    for (const auto& a : anchors) {
        const Point3 c = a - mean;
        g[0] += c.x * c.x; g[1] += c.x * c.y; g[2] += c.x * c.z;
        g[4] += c.y * c.y; g[5] += c.y * c.z; g[8] += c.z * c.z;
    }
    g[3] = g[1]; g[6] = g[2]; g[7] = g[5];

    const auto eig = sym3_eigenvalues(g);
    if (eig[0] <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(eig[2] / eig[0]);
}

std::vector<Point3> sample_anchors(const SceneConfig& cfg, RandomSource& rng) {
    cfg.validate();
    if (cfg.anchor_layout == AnchorLayout::UserProvided) {
        if (!anchors_distinct(cfg.user_anchors))
            throw ConfigError("scene: user anchors must be pairwise distinct");
        if (anchor_condition(cfg.user_anchors) > kMaxAnchorCondition)
            throw ConfigError("scene: user anchor set is degenerate");
        return cfg.user_anchors;
    }

    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        std::vector<Point3> anchors(cfg.anchor_count);
        for (auto& a : anchors) {
            a.x = rng.uniform(0.0, cfg.box_size);
            a.y = rng.uniform(0.0, cfg.box_size);
            a.z = rng.uniform(0.0, cfg.box_size);
        }
        if (anchors_distinct(anchors) &&
            anchor_condition(anchors) <= kMaxAnchorCondition)
            return anchors;
    }
    throw ConfigError("scene: could not draw a non-degenerate anchor set");
}

Scene sample_target(const std::vector<Point3>& anchors, const SceneConfig& cfg,
                    const PathLossConfig& pl, RandomSource& rng) {
    cfg.validate();
    pl.validate();

    Scene scene;
    scene.anchors = anchors;
    scene.gamma_true = rng.uniform(pl.gamma_true_range[0], pl.gamma_true_range[1]);
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        Point3 t{rng.uniform(0.0, cfg.box_size), rng.uniform(0.0, cfg.box_size),
                 rng.uniform(0.0, cfg.box_size)};
        if (target_admissible(t, anchors)) {
            scene.target = t;
            return scene;
        }
    }
    throw ConfigError("scene: could not place target away from anchors");
}

Scene sample_scene(const SceneConfig& cfg, const PathLossConfig& pl,
                   RandomSource& rng) {
    const auto anchors = sample_anchors(cfg, rng);
    return sample_target(anchors, cfg, pl, rng);
}

Geometry geometry_between(const Point3& target, const Point3& anchor) {
    const Vec3 d = target - anchor;
    const double dist = d.norm();
    if (dist == 0.0)
        throw DegenerateGeometryError("geometry: target coincides with anchor");

    Geometry g;
    g.distance = dist;
    g.azimuth = (d.x == 0.0 && d.y == 0.0) ? 0.0 : std::atan2(d.y, d.x);
    if (g.azimuth <= -std::numbers::pi) g.azimuth = std::numbers::pi;
    g.elevation = std::acos(std::clamp(d.z / dist, -1.0, 1.0));
    return g;
}

Geometry true_geometry(const Scene& scene, int anchor_index) {
    if (anchor_index < 0 ||
        anchor_index >= static_cast<int>(scene.anchors.size()))
        throw ConfigError("geometry: anchor index out of range");
    return geometry_between(scene.target, scene.anchors[anchor_index]);
}

nlohmann::json scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["anchors"] = nlohmann::json::array();
    for (const auto& a : scene.anchors)
        j["anchors"].push_back({a.x, a.y, a.z});
    j["target"] = {scene.target.x, scene.target.y, scene.target.z};
    j["gamma_true"] = scene.gamma_true;
    return j;
}

Scene scene_from_json(const nlohmann::json& j) {
    Scene scene;
    try {
        for (const auto& a : j.at("anchors"))
            scene.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>(),
                                     a.at(2).get<double>()});
        const auto& t = j.at("target");
        scene.target = {t.at(0).get<double>(), t.at(1).get<double>(),
                        t.at(2).get<double>()};
        scene.gamma_true = j.at("gamma_true").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("scene json: ") + e.what());
    }
    return scene;
}

}  // namespace rsaloc
