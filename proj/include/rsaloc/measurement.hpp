#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rsaloc/rng.hpp"
#include "rsaloc/scene.hpp"

namespace rsaloc {

/// Per-measurement noise standard deviations.
struct NoiseConfig {
    double sigma_rss_db = 0.0;
    double sigma_azimuth_rad = 0.0;
    double sigma_elevation_rad = 0.0;

    void validate() const;

    bool operator==(const NoiseConfig&) const = default;
};

/// One observation of the target: RSS (dBm), azimuth and elevation (rad)
/// per anchor. The stacked vector order is [rss; azimuth; elevation].
struct MeasurementVector {
    std::vector<double> rss;
    std::vector<double> azimuth;
    std::vector<double> elevation;

    std::size_t anchor_count() const { return rss.size(); }

    /// Stacked observation theta of length 3N.
    std::vector<double> stacked() const;
};

/// Noiseless received power at the given distance.
double noiseless_rss(double distance, const PathLossConfig& pl, double gamma);

/// RSS per anchor: log-distance path loss with the scene's generating
/// exponent plus i.i.d. Gaussian shadowing of sigma_rss_db.
std::vector<double> synthesize_rss(const Scene& scene, const PathLossConfig& pl,
                                   const NoiseConfig& noise, RandomSource& rng);

/// Azimuth/elevation per anchor: true angles plus Gaussian noise. Azimuth
/// wraps to (-pi, pi]; elevation clamps to [0, pi].
std::pair<std::vector<double>, std::vector<double>> synthesize_angles(
    const Scene& scene, const NoiseConfig& noise, RandomSource& rng);

/// Full stacked observation; consumes RSS noise first, then azimuth, then
/// elevation, so draws are reproducible.
MeasurementVector synthesize_measurements(const Scene& scene,
                                          const PathLossConfig& pl,
                                          const NoiseConfig& noise,
                                          RandomSource& rng);

/// Log of the independent-Gaussian likelihood of `theta` at a candidate
/// position. The predicted RSS uses the receiver's assumed exponent
/// (pl.gamma_rx), never the generating one. Diagnostic only; all sigmas
/// must be strictly positive.
double log_likelihood(const MeasurementVector& theta, const Point3& candidate,
                      const std::vector<Point3>& anchors,
                      const PathLossConfig& pl, const NoiseConfig& noise);

}  // namespace rsaloc
