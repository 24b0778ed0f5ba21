#include "rsaloc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rsaloc {

LstsqSolution lstsq(const Matrix& a, std::span<const double> b) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (b.size() != m) throw std::invalid_argument("lstsq: rhs length mismatch");
    if (m < n) throw std::invalid_argument("lstsq: underdetermined system");

    Matrix r = a;
    std::vector<double> qtb(b.begin(), b.end());
    std::vector<double> v(m);

    for (std::size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < m; ++i) norm += r(i, k) * r(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            // column of zeros below the pivot: rank deficient
            return {std::vector<double>(n, 0.0),
                    std::numeric_limits<double>::infinity()};
        }
        const double alpha = r(k, k) >= 0.0 ? -norm : norm;

        double vnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            v[i] = r(i, k);
            if (i == k) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 > 0.0) {
            for (std::size_t j = k; j < n; ++j) {
                double dot = 0.0;
                for (std::size_t i = k; i < m; ++i) dot += v[i] * r(i, j);
                const double f = 2.0 * dot / vnorm2;
                for (std::size_t i = k; i < m; ++i) r(i, j) -= f * v[i];
            }
            double dot = 0.0;
            for (std::size_t i = k; i < m; ++i) dot += v[i] * qtb[i];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < m; ++i) qtb[i] -= f * v[i];
        }
        r(k, k) = alpha;
        for (std::size_t i = k + 1; i < m; ++i) r(i, k) = 0.0;
    }

    double dmax = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double d = std::abs(r(k, k));
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
    }
    const double cond =
        dmin == 0.0 ? std::numeric_limits<double>::infinity() : dmax / dmin;

    std::vector<double> x(n, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        double s = qtb[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= r(k, j) * x[j];
        x[k] = s / r(k, k);
    }
    return {std::move(x), cond};
}

std::array<double, 3> sym3_eigenvalues(const std::array<double, 9>& m) {
    const double a = m[0], b = m[4], c = m[8];
    const double d = m[1], e = m[5], f = m[2];

    const double p1 = d * d + e * e + f * f;
    if (p1 == 0.0) {
        std::array<double, 3> eig{a, b, c};
        std::sort(eig.begin(), eig.end());
        return eig;
    }

    const double q = (a + b + c) / 3.0;
    const double p2 =
        (a - q) * (a - q) + (b - q) * (b - q) + (c - q) * (c - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);

    // B = (M - q I) / p, then r = det(B) / 2 lies in [-1, 1]
    const double b00 = (a - q) / p, b11 = (b - q) / p, b22 = (c - q) / p;
    const double b01 = d / p, b12 = e / p, b02 = f / p;
    double r = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
               b02 * (b01 * b12 - b11 * b02);
    r *= 0.5;
    r = std::clamp(r, -1.0, 1.0);

    const double phi = std::acos(r) / 3.0;
    const double two_pi_3 = 2.0 * std::numbers::pi / 3.0;
    const double eig_hi = q + 2.0 * p * std::cos(phi);
    const double eig_lo = q + 2.0 * p * std::cos(phi + two_pi_3);
    const double eig_mid = 3.0 * q - eig_hi - eig_lo;
    return {eig_lo, eig_mid, eig_hi};
}

}  // namespace rsaloc
