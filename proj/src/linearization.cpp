#include "rsaloc/linearization.hpp"

#include <cmath>

#include "rsaloc/errors.hpp"

namespace rsaloc {

std::pair<std::vector<double>, double> lambda_eta(std::span<const double> rss,
                                                  const PathLossConfig& pl) {
    pl.validate();
    std::vector<double> lambda(rss.size());
    for (std::size_t i = 0; i < rss.size(); ++i)
        lambda[i] = std::pow(10.0, rss[i] / (10.0 * pl.gamma_rx));
    const double eta = std::pow(10.0, pl.p0_dbm / (10.0 * pl.gamma_rx));
    return {std::move(lambda), eta};
}

DirectionVectors direction_vectors(std::span<const double> azimuth,
                                   std::span<const double> elevation) {
    if (azimuth.size() != elevation.size())
        throw ConfigError("direction_vectors: angle length mismatch");
    DirectionVectors dv;
    dv.u.resize(azimuth.size());
    dv.c.resize(azimuth.size());
    for (std::size_t i = 0; i < azimuth.size(); ++i) {
        const double sa = std::sin(azimuth[i]), ca = std::cos(azimuth[i]);
        const double se = std::sin(elevation[i]), ce = std::cos(elevation[i]);
        dv.u[i] = {ca * se, sa * se, ce};
        dv.c[i] = {-sa, ca, 0.0};
    }
    return dv;
}

LinearSystem build_system(const MeasurementVector& theta,
                          const std::vector<Point3>& anchors,
                          const PathLossConfig& pl) {
    const std::size_t n = anchors.size();
    if (theta.anchor_count() != n)
        throw ConfigError("build_system: anchor count mismatch");

    const auto [lambda, eta] = lambda_eta(theta.rss, pl);
    const auto dv = direction_vectors(theta.azimuth, theta.elevation);
    constexpr Vec3 k{0.0, 0.0, 1.0};

    LinearSystem sys;
    sys.a = Matrix(3 * n, 3);
    sys.b.assign(3 * n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 rss_row = lambda[i] * dv.u[i];
        sys.a(i, 0) = rss_row.x;
        sys.a(i, 1) = rss_row.y;
        sys.a(i, 2) = rss_row.z;
        sys.b[i] = rss_row.dot(anchors[i]) + eta * pl.d0;

        sys.a(n + i, 0) = dv.c[i].x;
        sys.a(n + i, 1) = dv.c[i].y;
        sys.a(n + i, 2) = dv.c[i].z;
        sys.b[n + i] = dv.c[i].dot(anchors[i]);

        const Vec3 ele_row = std::cos(theta.elevation[i]) * dv.u[i] - k;
        sys.a(2 * n + i, 0) = ele_row.x;
        sys.a(2 * n + i, 1) = ele_row.y;
        sys.a(2 * n + i, 2) = ele_row.z;
        sys.b[2 * n + i] = ele_row.dot(anchors[i]);
    }
    return sys;
}

WeightVector build_weights(std::span<const double> rss, const PathLossConfig& pl) {
    pl.validate();
    WeightVector wv;
    wv.d_hat.resize(rss.size());
    wv.w.resize(rss.size());

    double total = 0.0;
    for (std::size_t i = 0; i < rss.size(); ++i) {
        wv.d_hat[i] =
            pl.d0 * std::pow(10.0, (pl.p0_dbm - rss[i]) / (10.0 * pl.gamma_rx));
        total += wv.d_hat[i];
    }
    for (std::size_t i = 0; i < rss.size(); ++i)
        wv.w[i] = 1.0 - wv.d_hat[i] / total;
    return wv;
}

std::pair<Matrix, std::vector<double>> apply_weights(const LinearSystem& sys,
                                                     const WeightVector& weights) {
    const std::size_t n = weights.w.size();
    if (sys.a.rows() != 3 * n || sys.b.size() != 3 * n)
        throw ConfigError("apply_weights: dimension mismatch");

    Matrix a_w = sys.a;
    std::vector<double> b_w = sys.b;
    for (std::size_t block = 0; block < 3; ++block) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = block * n + i;
            for (std::size_t c = 0; c < 3; ++c) a_w(r, c) *= weights.w[i];
            b_w[r] *= weights.w[i];
        }
    }
    return {std::move(a_w), std::move(b_w)};
}

FeatureVector feature_vector(const Matrix& a_w, std::span<const double> b_w) {
    if (a_w.cols() != 3 || a_w.rows() != b_w.size())
        throw ConfigError("feature_vector: dimension mismatch");

    FeatureVector fv;
    fv.x.reserve(4 * a_w.rows());
    // column-major vec(A_w), then b_w
    for (std::size_t c = 0; c < a_w.cols(); ++c)
        for (std::size_t r = 0; r < a_w.rows(); ++r) fv.x.push_back(a_w(r, c));
    fv.x.insert(fv.x.end(), b_w.begin(), b_w.end());
    return fv;
}

FeatureVector features_from_measurements(const MeasurementVector& theta,
                                         const std::vector<Point3>& anchors,
                                         const PathLossConfig& pl) {
    const auto sys = build_system(theta, anchors, pl);
    const auto weights = build_weights(theta.rss, pl);
    const auto [a_w, b_w] = apply_weights(sys, weights);
    return feature_vector(a_w, b_w);
}

}  // namespace rsaloc
