#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rsaloc/dataset.hpp"
#include "rsaloc/errors.hpp"
#include "rsaloc/evaluation.hpp"

using namespace rsaloc;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

MlpModel stub_model(InputMode mode, int dim, std::uint64_t fingerprint) {
    RandomSource rng(404);
    MlpModel m = init_model(mode, dim, 16, rng);
    m.normalizer.mean.assign(dim, 0.0);
    m.normalizer.std_dev.assign(dim, 1.0);
    m.scene_fingerprint = fingerprint;
    return m;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("rmse oracles") {
    const std::vector<Point3> truths{{1, 2, 3}, {4, 5, 6}};
    CHECK(rmse(truths, truths) == 0.0);

    const std::vector<Point3> t1{{0, 0, 0}};
    const std::vector<Point3> e1{{3, 4, 0}};
    CHECK(rmse(t1, e1) == doctest::Approx(5.0));

    const std::vector<Point3> t2{{0, 0, 0}, {0, 0, 0}};
    const std::vector<Point3> e2{{1, 0, 0}, {0, 0, std::sqrt(3.0)}};
    CHECK(rmse(t2, e2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    CHECK_THROWS_AS(rmse({}, {}), ConfigError);
    CHECK_THROWS_AS(rmse(t1, t2), ConfigError);
}

TEST_CASE("rmse does not depend on trial order") {
    RandomSource rng(501);
    std::vector<Point3> truths(500), estimates(500);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        truths[i] = {rng.uniform(0, 15), rng.uniform(0, 15), rng.uniform(0, 15)};
        estimates[i] = {truths[i].x + rng.normal(0, 0.5),
                        truths[i].y + rng.normal(0, 0.5),
                        truths[i].z + rng.normal(0, 0.5)};
    }
    const double forward_order = rmse(truths, estimates);
    std::reverse(truths.begin(), truths.end());
    std::reverse(estimates.begin(), estimates.end());
    const double reverse_order = rmse(truths, estimates);
    CHECK(forward_order == doctest::Approx(reverse_order).epsilon(1e-12));
}

TEST_CASE("bootstrap interval of an all-zero error set is [0, 0]") {
    const std::vector<double> zeros(100, 0.0);
    const auto [lo, hi] = bootstrap_rmse_ci(zeros, 1000, 1);
    CHECK(lo == 0.0);
    CHECK(hi == 0.0);
}

TEST_CASE("bootstrap interval brackets the point estimate") {
    RandomSource rng(502);
    std::vector<double> sq(400);
    for (auto& v : sq) {
        const double e = rng.normal(0.0, 1.0);
        v = e * e;
    }
    double total = 0.0;
    for (double v : sq) total += v;
    const double point = std::sqrt(total / sq.size());
    const auto [lo, hi] = bootstrap_rmse_ci(sq, 1000, 3);
    CHECK(lo <= point);
    CHECK(hi >= point);
    CHECK(lo < hi);

    // deterministic for a fixed seed
    const auto [lo2, hi2] = bootstrap_rmse_ci(sq, 1000, 3);
    CHECK(lo == lo2);
    CHECK(hi == hi2);
}

TEST_CASE("spec validation") {
    SweepSpec spec;
    spec.grid = {};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.grid = {0.0, 2.0, 2.0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.grid = {2.0, 0.0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.grid = {0.0, 2.0};
    CHECK_NOTHROW(spec.validate());
}

TEST_CASE("noiseless matched-exponent sweep point is exact for wls and ls") {
    SceneConfig cfg;
    PathLossConfig pl;
    pl.gamma_true_range = {2.5, 2.5};
    const auto manifest =
        make_manifest(cfg, pl, 61, 10, {0.75, 0.15, 0.10}, default_noise_grid());

    SweepSpec spec;
    spec.variable = SweepVariable::SigmaRss;
    spec.grid = {0.0};
    spec.fixed_azimuth_deg = 0.0;
    spec.fixed_elevation_deg = 0.0;
    spec.closed_form_trials = 500;
    spec.seed = 62;

    const auto result = run_sweep(spec, manifest.anchors, cfg, pl, nullptr, nullptr);
    REQUIRE(result.points.size() == 1);
    const auto* wls = result.points[0].find(Method::Wls);
    const auto* ls = result.points[0].find(Method::Ls);
    REQUIRE(wls != nullptr);
    REQUIRE(ls != nullptr);
    CHECK(wls->rmse < 1e-6);
    CHECK(ls->rmse < 1e-6);
    CHECK(wls->failures == 0);
    CHECK(wls->trials == 500);
}

TEST_CASE("sweep emits one cell per method and grid point") {
    SceneConfig cfg;
    PathLossConfig pl;
    const auto manifest =
        make_manifest(cfg, pl, 63, 10, {0.75, 0.15, 0.10}, default_noise_grid());
    const auto fp = scene_fingerprint(manifest.anchors, pl);
    const MlpModel raw = stub_model(InputMode::Raw, 12, fp);
    const MlpModel pre = stub_model(InputMode::Preprocessed, 48, fp);

    SweepSpec spec;
    spec.variable = SweepVariable::SigmaAzimuth;
    spec.grid = {0, 2, 4, 6, 8, 10, 12};
    spec.closed_form_trials = 50;
    spec.mlp_trials = 25;
    spec.seed = 64;

    const auto result = run_sweep(spec, manifest.anchors, cfg, pl, &raw, &pre);
    REQUIRE(result.points.size() == 7);
    int cells = 0;
    for (const auto& p : result.points) {
        CHECK(p.cells.size() == 4);
        cells += static_cast<int>(p.cells.size());
        const auto* mlp = p.find(Method::MlpPre);
        REQUIRE(mlp != nullptr);
        CHECK(mlp->trials == 25);
    }
    CHECK(cells == 28);
}

TEST_CASE("sweep rejects mismatched models") {
    SceneConfig cfg;
    PathLossConfig pl;
    const auto manifest =
        make_manifest(cfg, pl, 65, 10, {0.75, 0.15, 0.10}, default_noise_grid());
    const auto fp = scene_fingerprint(manifest.anchors, pl);

    SweepSpec spec;
    spec.grid = {0.0, 1.0};
    spec.closed_form_trials = 10;
    spec.mlp_trials = 5;

    const MlpModel wrong_fp = stub_model(InputMode::Raw, 12, fp ^ 1);
    CHECK_THROWS_AS(run_sweep(spec, manifest.anchors, cfg, pl, &wrong_fp, nullptr),
                    ConfigError);

    const MlpModel wrong_dim = stub_model(InputMode::Preprocessed, 24, fp);
    CHECK_THROWS_AS(run_sweep(spec, manifest.anchors, cfg, pl, nullptr, &wrong_dim),
                    ConfigError);

    const MlpModel wrong_mode = stub_model(InputMode::Raw, 48, fp);
    CHECK_THROWS_AS(run_sweep(spec, manifest.anchors, cfg, pl, nullptr, &wrong_mode),
                    ConfigError);
}

TEST_CASE("closed-form rmse grows with noise up to interval overlap") {
    SceneConfig cfg;
    PathLossConfig pl;
    const auto manifest =
        make_manifest(cfg, pl, 66, 10, {0.75, 0.15, 0.10}, default_noise_grid());

    SweepSpec spec;
    spec.variable = SweepVariable::SigmaRss;
    spec.grid = {0, 2, 4, 6};
    spec.closed_form_trials = 400;
    spec.seed = 67;

    const auto result = run_sweep(spec, manifest.anchors, cfg, pl, nullptr, nullptr);
    for (auto method : {Method::Wls, Method::Ls}) {
        for (std::size_t p = 1; p < result.points.size(); ++p) {
            const auto* prev = result.points[p - 1].find(method);
            const auto* cur = result.points[p].find(method);
            CHECK(cur->rmse >= prev->ci_low);
        }
    }
}

TEST_CASE("csv output is stable across reruns and matches the schema") {
    SceneConfig cfg;
    PathLossConfig pl;
    const auto manifest =
        make_manifest(cfg, pl, 68, 10, {0.75, 0.15, 0.10}, default_noise_grid());

    SweepSpec spec;
    spec.variable = SweepVariable::SigmaElevation;
    spec.grid = {0, 5, 10};
    spec.closed_form_trials = 60;
    spec.seed = 69;

    const auto dir = std::filesystem::temp_directory_path();
    const auto pa = dir / "rsaloc_sweep_a.csv";
    const auto pb = dir / "rsaloc_sweep_b.csv";
    write_sweep_csv(run_sweep(spec, manifest.anchors, cfg, pl, nullptr, nullptr), pa);
    write_sweep_csv(run_sweep(spec, manifest.anchors, cfg, pl, nullptr, nullptr), pb);

    const auto text = slurp(pa);
    CHECK(text == slurp(pb));
    CHECK(text.rfind("sweep_var,value,method,rmse_m,trials,failures,ci_low,ci_high\n",
                     0) == 0);
    CHECK(text.find("sigma_elevation_deg,5,wls,") != std::string::npos);

    std::filesystem::remove(pa);
    std::filesystem::remove(pb);
}

TEST_CASE("report ranks methods and recognizes ties and dominance") {
    SweepResult result;
    result.variable = SweepVariable::SigmaRss;
    SweepPoint point;
    point.value = 2.0;
    point.cells = {
        {Method::Wls, 1.25, 100, 0, 1.1, 1.4},
        {Method::Ls, 1.25, 100, 0, 1.1, 1.4},      // identical estimates: tie
        {Method::MlpRaw, 2.5, 100, 0, 2.2, 2.8},   // dominated
        {Method::MlpPre, 0.75, 100, 0, 0.6, 0.9},  // dominates
    };
    result.points.push_back(point);

    const auto report = compare_report(result);
    REQUIRE(report.size() == 1);
    const auto& ranking = report[0].ranking;
    REQUIRE(ranking.size() == 4);
    CHECK(ranking[0].method == Method::MlpPre);
    CHECK(ranking[0].rank == 1);
    CHECK(ranking[1].rank == 2);
    CHECK(ranking[2].rank == 2);  // tie shares the rank
    CHECK(ranking[3].method == Method::MlpRaw);
    CHECK(ranking[3].rank == 4);

    const auto text = format_report(result);
    CHECK(text.find("mlp_pre") != std::string::npos);
    CHECK(text.find("#1") != std::string::npos);
}

}  // TEST_SUITE
