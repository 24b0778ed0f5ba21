#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rsaloc/linalg.hpp"
#include "rsaloc/measurement.hpp"
#include "rsaloc/scene.hpp"

namespace rsaloc {

/// Linearized observation system A t ~ b. Rows are grouped in three blocks
/// of N: RSS rows, then azimuth rows, then elevation rows.
struct LinearSystem {
    Matrix a;               // 3N x 3
    std::vector<double> b;  // 3N
};

/// Distance-derived weights: w_i = 1 - d_hat_i / sum_j d_hat_j, with
/// d_hat_i the RSS-inverted distance. Weights sum to N - 1 by construction.
struct WeightVector {
    std::vector<double> w;
    std::vector<double> d_hat;  // meters
};

/// MLP input built from the weighted system: column-major vec(A_w) followed
/// by b_w, length 12N.
struct FeatureVector {
    std::vector<double> x;
};

/// Spherical direction vectors per anchor: u_i points along the measured
/// angles, c_i = [-sin(az), cos(az), 0] is horizontal and orthogonal to u_i.
struct DirectionVectors {
    std::vector<Vec3> u;
    std::vector<Vec3> c;
};

/// Per-anchor lambda_i = 10^(P_i / (10 gamma_rx)) and the reference
/// eta = 10^(P_0 / (10 gamma_rx)). At zero noise and matched exponent,
/// lambda_i * d_i = eta * d_0 exactly.
std::pair<std::vector<double>, double> lambda_eta(std::span<const double> rss,
                                                  const PathLossConfig& pl);

DirectionVectors direction_vectors(std::span<const double> azimuth,
                                   std::span<const double> elevation);

/// Builds the 3N x 3 system from one observation. RSS rows are
/// lambda_i u_i^T with rhs lambda_i u_i^T a_i + eta d0; azimuth rows are
/// c_i^T with rhs c_i^T a_i; elevation rows are (cos(el_i) u_i - k)^T with
/// rhs against a_i, k = [0,0,1]. Noiseless matched-exponent measurements
/// satisfy A t = b to numerical precision.
LinearSystem build_system(const MeasurementVector& theta,
                          const std::vector<Point3>& anchors,
                          const PathLossConfig& pl);

/// Distance estimates d_hat_i = d0 * 10^((P0 - P_i)/(10 gamma_rx)) and the
/// weights derived from them.
WeightVector build_weights(std::span<const double> rss, const PathLossConfig& pl);

/// Applies the block-diagonal weighting (w_i repeated across the three
/// measurement blocks): returns (W A, W b).
std::pair<Matrix, std::vector<double>> apply_weights(const LinearSystem& sys,
                                                     const WeightVector& weights);

/// Flattens (A_w, b_w) into the 12N feature vector.
FeatureVector feature_vector(const Matrix& a_w, std::span<const double> b_w);

/// Full preprocessing chain from a raw observation to the feature vector.
FeatureVector features_from_measurements(const MeasurementVector& theta,
                                         const std::vector<Point3>& anchors,
                                         const PathLossConfig& pl);

}  // namespace rsaloc
