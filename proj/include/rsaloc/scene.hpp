#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "rsaloc/geometry.hpp"
#include "rsaloc/rng.hpp"

namespace rsaloc {

enum class AnchorLayout { FixedSeeded, UserProvided };

/// Geometry of the region of interest: a box of side `box_size` holding
/// `anchor_count` anchors and the target.
struct SceneConfig {
    double box_size = 15.0;
    int anchor_count = 4;
    AnchorLayout anchor_layout = AnchorLayout::FixedSeeded;
    /// Only read when anchor_layout == UserProvided.
    std::vector<Point3> user_anchors;

    void validate() const;
};

/// Log-distance path-loss model parameters. `gamma_true_range` is the range
/// the generating exponent is drawn from per scene; `gamma_rx` is the fixed
/// exponent the receiver assumes when inverting measurements.
struct PathLossConfig {
    double p0_dbm = -10.0;
    double d0 = 1.0;
    std::array<double, 2> gamma_true_range{2.2, 2.8};
    double gamma_rx = 2.5;

    void validate() const;
};

/// A concrete placement: fixed anchors, one target, one generating exponent.
/// Immutable after construction; safe to share across threads.
struct Scene {
    std::vector<Point3> anchors;
    Point3 target;
    double gamma_true = 0.0;
};

/// Distance / azimuth / elevation of the target as seen from one anchor.
struct Geometry {
    double distance = 0.0;
    double azimuth = 0.0;    // (-pi, pi]
    double elevation = 0.0;  // [0, pi]
};

/// Minimum target-anchor separation; targets closer than this are resampled.
inline constexpr double kMinTargetAnchorDistance = 0.5;

/// Anchor sets whose centered coordinate matrix is worse-conditioned than
/// this are rejected (redrawn when seeded, error when user-provided).
inline constexpr double kMaxAnchorCondition = 1e6;

/// Condition number of the centered anchor coordinate matrix.
double anchor_condition(const std::vector<Point3>& anchors);

/// Draws an anchor set per the configured layout. Seeded layouts redraw
/// until the non-degeneracy checks pass; user-provided sets must already
/// satisfy them.
std::vector<Point3> sample_anchors(const SceneConfig& cfg, RandomSource& rng);

/// Draws a full scene: anchors, then target and generating exponent.
Scene sample_scene(const SceneConfig& cfg, const PathLossConfig& pl,
                   RandomSource& rng);

/// Draws a fresh target and generating exponent over an existing anchor set.
/// The per-sample operation of dataset generation and Monte Carlo trials,
/// where anchors stay fixed for the whole experiment.
Scene sample_target(const std::vector<Point3>& anchors, const SceneConfig& cfg,
                    const PathLossConfig& pl, RandomSource& rng);

/// True distance/azimuth/elevation between two points.
/// Azimuth is the four-quadrant arctangent of (dy, dx); when the offset is
/// vertical (dx = dy = 0) the azimuth is 0 by convention.
Geometry geometry_between(const Point3& target, const Point3& anchor);

/// geometry_between for scene.target and scene.anchors[anchor_index].
Geometry true_geometry(const Scene& scene, int anchor_index);

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

}  // namespace rsaloc
