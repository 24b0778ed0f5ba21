#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "rsaloc/kernels.hpp"
#include "rsaloc/rng.hpp"

using namespace rsaloc;

namespace {

std::vector<double> random_vec(std::size_t n, RandomSource& rng, double scale = 2.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-scale, scale);
    return v;
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

void require_close(const std::vector<double>& a, const std::vector<double>& b,
                   double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        INFO("index ", i);
        REQUIRE(close_rel(a[i], b[i], tol));
    }
}

const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 11, 16, 17, 33, 128, 1000};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar reference unit checks") {
    const auto& k = kern::scalar_ops();

    std::vector<double> a{1.0, 2.0, 3.0};
    std::vector<double> b{4.0, -5.0, 6.0};
    CHECK(k.dot(a.data(), b.data(), 3) == doctest::Approx(12.0));
    CHECK(k.sum(a.data(), 3) == doctest::Approx(6.0));

    std::vector<double> y{1.0, 1.0, 1.0};
    k.axpy(y.data(), 2.0, a.data(), 3);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[2] == doctest::Approx(7.0));

    // identity matvec
    std::vector<double> eye{1, 0, 0, 0, 1, 0, 0, 0, 1};
    std::vector<double> out(3);
    k.matvec(eye.data(), 3, 3, a.data(), nullptr, out.data());
    require_close(out, a, 1e-15);

    std::vector<double> x{-1.0, 0.0, 2.5};
    std::vector<double> r(3);
    k.relu(x.data(), r.data(), 3);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 2.5);

    std::vector<double> up{5.0, 5.0, 5.0};
    k.relu_grad(up.data(), x.data(), r.data(), 3);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);  // gate closed at exactly zero
    CHECK(r[2] == 5.0);
}

TEST_CASE("adam first step moves a scalar parameter by ~ -lr") {
    const auto& k = kern::scalar_ops();
    double p = 0.0, m = 0.0, v = 0.0, g = 1.0;
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double inv_bc1 = 1.0 / (1.0 - b1);
    const double inv_bc2 = 1.0 / (1.0 - b2);
    k.adam_update(&p, &m, &v, &g, 1, lr, b1, b2, eps, inv_bc1, inv_bc2);

    CHECK(m == doctest::Approx(0.1));
    CHECK(v == doctest::Approx(0.001));
    CHECK(p == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(p == doctest::Approx(-0.01 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("zero gradient leaves parameters unchanged") {
    const auto& k = kern::scalar_ops();
    std::vector<double> p{1.5, -2.5}, m(2, 0.0), v(2, 0.0), g(2, 0.0);
    for (int step = 1; step <= 10; ++step) {
        const double inv_bc1 = 1.0 / (1.0 - std::pow(0.9, step));
        const double inv_bc2 = 1.0 / (1.0 - std::pow(0.999, step));
        k.adam_update(p.data(), m.data(), v.data(), g.data(), 2, 0.01, 0.9,
                      0.999, 1e-8, inv_bc1, inv_bc2);
    }
    CHECK(p[0] == 1.5);
    CHECK(p[1] == -2.5);
}

TEST_CASE("simd backend matches the scalar reference") {
    if (!kern::backend_supported(kern::Backend::Avx2)) {
        MESSAGE("avx2 unavailable; skipping equivalence checks");
        return;
    }
    const kern::Backend before = kern::active_backend();
    kern::select_backend(kern::Backend::Avx2);
    const auto& simd = kern::ops();
    const auto& ref = kern::scalar_ops();

    RandomSource rng(20240517);
    for (std::size_t n : kSizes) {
        const auto a = random_vec(n, rng);
        const auto b = random_vec(n, rng);

        CHECK(close_rel(simd.dot(a.data(), b.data(), n),
                        ref.dot(a.data(), b.data(), n), 1e-13));
        CHECK(close_rel(simd.sum(a.data(), n), ref.sum(a.data(), n), 1e-13));

        auto y0 = random_vec(n, rng);
        auto y1 = y0;
        simd.axpy(y0.data(), 1.7, a.data(), n);
        ref.axpy(y1.data(), 1.7, a.data(), n);
        require_close(y0, y1, 1e-13);

        auto s0 = a;
        auto s1 = a;
        simd.scale(s0.data(), -0.35, n);
        ref.scale(s1.data(), -0.35, n);
        require_close(s0, s1, 1e-14);

        auto r0 = std::vector<double>(n);
        auto r1 = std::vector<double>(n);
        simd.relu(a.data(), r0.data(), n);
        ref.relu(a.data(), r1.data(), n);
        require_close(r0, r1, 0.0);

        simd.relu_grad(b.data(), a.data(), r0.data(), n);
        ref.relu_grad(b.data(), a.data(), r1.data(), n);
        require_close(r0, r1, 0.0);

        const auto gain = random_vec(n, rng);
        const auto bias = random_vec(n, rng);
        simd.norm_affine(a.data(), 0.4, 1.9, gain.data(), bias.data(), r0.data(), n);
        ref.norm_affine(a.data(), 0.4, 1.9, gain.data(), bias.data(), r1.data(), n);
        require_close(r0, r1, 1e-13);
    }

    // matrix kernels across shapes that exercise the remainder lanes
    const std::pair<std::size_t, std::size_t> shapes[] = {
        {3, 7}, {8, 12}, {128, 48}, {5, 129}};
    for (auto [rows, cols] : shapes) {
        const auto w = random_vec(rows * cols, rng);
        const auto x = random_vec(cols, rng);
        const auto v = random_vec(rows, rng);
        const auto bias = random_vec(rows, rng);

        std::vector<double> o0(rows), o1(rows);
        simd.matvec(w.data(), rows, cols, x.data(), bias.data(), o0.data());
        ref.matvec(w.data(), rows, cols, x.data(), bias.data(), o1.data());
        require_close(o0, o1, 1e-13);

        std::vector<double> t0(cols), t1(cols);
        simd.matvec_t(w.data(), rows, cols, v.data(), t0.data());
        ref.matvec_t(w.data(), rows, cols, v.data(), t1.data());
        require_close(t0, t1, 1e-13);

        auto w0 = w;
        auto w1 = w;
        simd.ger(w0.data(), rows, cols, 0.6, v.data(), x.data());
        ref.ger(w1.data(), rows, cols, 0.6, v.data(), x.data());
        require_close(w0, w1, 1e-13);
    }

    // adam: state must stay in lockstep across many steps
    {
        const std::size_t n = 103;
        auto p0 = random_vec(n, rng);
        auto p1 = p0;
        std::vector<double> m0(n, 0.0), v0(n, 0.0), m1(n, 0.0), v1(n, 0.0);
        for (int step = 1; step <= 25; ++step) {
            const auto g = random_vec(n, rng);
            const double inv_bc1 = 1.0 / (1.0 - std::pow(0.9, step));
            const double inv_bc2 = 1.0 / (1.0 - std::pow(0.999, step));
            simd.adam_update(p0.data(), m0.data(), v0.data(), g.data(), n, 0.01,
                             0.9, 0.999, 1e-8, inv_bc1, inv_bc2);
            ref.adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, 0.01,
                            0.9, 0.999, 1e-8, inv_bc1, inv_bc2);
        }
        require_close(p0, p1, 1e-12);
        require_close(m0, m1, 1e-12);
        require_close(v0, v1, 1e-12);
    }

    kern::select_backend(before);
}

TEST_CASE("backend selection reports and switches") {
    CHECK(kern::backend_supported(kern::Backend::Scalar));
    CHECK(kern::backend_name(kern::Backend::Scalar) == "scalar");
    CHECK(kern::backend_name(kern::Backend::Avx2) == "avx2");

    const kern::Backend before = kern::active_backend();
    kern::select_backend(kern::Backend::Scalar);
    CHECK(kern::active_backend() == kern::Backend::Scalar);
    kern::select_backend(before);
}

}  // TEST_SUITE
