#include "rsaloc/measurement.hpp"

#include <algorithm>
#include <cmath>

#include "rsaloc/errors.hpp"

namespace rsaloc {

void NoiseConfig::validate() const {
    if (sigma_rss_db < 0.0 || sigma_azimuth_rad < 0.0 || sigma_elevation_rad < 0.0)
        throw ConfigError("noise: sigmas must be non-negative");
}

std::vector<double> MeasurementVector::stacked() const {
    std::vector<double> theta;
    theta.reserve(3 * anchor_count());
    theta.insert(theta.end(), rss.begin(), rss.end());
    theta.insert(theta.end(), azimuth.begin(), azimuth.end());
    theta.insert(theta.end(), elevation.begin(), elevation.end());
    return theta;
}

double noiseless_rss(double distance, const PathLossConfig& pl, double gamma) {
    return pl.p0_dbm - 10.0 * gamma * std::log10(distance / pl.d0);
}

std::vector<double> synthesize_rss(const Scene& scene, const PathLossConfig& pl,
                                   const NoiseConfig& noise, RandomSource& rng) {
    noise.validate();
    std::vector<double> rss(scene.anchors.size());
    for (std::size_t i = 0; i < scene.anchors.size(); ++i) {
        const auto g = geometry_between(scene.target, scene.anchors[i]);
        rss[i] = noiseless_rss(g.distance, pl, scene.gamma_true) +
                 rng.normal(0.0, noise.sigma_rss_db);
    }
    return rss;
}

std::pair<std::vector<double>, std::vector<double>> synthesize_angles(
    const Scene& scene, const NoiseConfig& noise, RandomSource& rng) {
    noise.validate();
    const std::size_t n = scene.anchors.size();
    std::vector<double> azimuth(n);
    std::vector<double> elevation(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto g = geometry_between(scene.target, scene.anchors[i]);
        azimuth[i] = wrap_angle(g.azimuth + rng.normal(0.0, noise.sigma_azimuth_rad));
        elevation[i] = std::clamp(
            g.elevation + rng.normal(0.0, noise.sigma_elevation_rad), 0.0,
            std::numbers::pi);
    }
    return {std::move(azimuth), std::move(elevation)};
}

MeasurementVector synthesize_measurements(const Scene& scene,
                                          const PathLossConfig& pl,
                                          const NoiseConfig& noise,
                                          RandomSource& rng) {
    MeasurementVector theta;
    theta.rss = synthesize_rss(scene, pl, noise, rng);
    auto [azimuth, elevation] = synthesize_angles(scene, noise, rng);
    theta.azimuth = std::move(azimuth);
    theta.elevation = std::move(elevation);
    return theta;
}

double log_likelihood(const MeasurementVector& theta, const Point3& candidate,
                      const std::vector<Point3>& anchors,
                      const PathLossConfig& pl, const NoiseConfig& noise) {
    if (noise.sigma_rss_db <= 0.0 || noise.sigma_azimuth_rad <= 0.0 ||
        noise.sigma_elevation_rad <= 0.0)
        throw ConfigError("log_likelihood: all sigmas must be positive");
    if (theta.anchor_count() != anchors.size())
        throw ConfigError("log_likelihood: anchor count mismatch");

    const double two_pi = 2.0 * std::numbers::pi;
    auto term = [&](double observed, double predicted, double sigma) {
        const double r = observed - predicted;
        return -0.5 * std::log(two_pi * sigma * sigma) -
               r * r / (2.0 * sigma * sigma);
    };

    double ll = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const auto g = geometry_between(candidate, anchors[i]);
        ll += term(theta.rss[i], noiseless_rss(g.distance, pl, pl.gamma_rx),
                   noise.sigma_rss_db);
        ll += term(theta.azimuth[i], g.azimuth, noise.sigma_azimuth_rad);
        ll += term(theta.elevation[i], g.elevation, noise.sigma_elevation_rad);
    }
    return ll;
}

}  // namespace rsaloc
