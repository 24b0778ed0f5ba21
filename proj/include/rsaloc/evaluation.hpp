#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rsaloc/dataset.hpp"
#include "rsaloc/estimators.hpp"
#include "rsaloc/mlp.hpp"

namespace rsaloc {

enum class SweepVariable { SigmaRss, SigmaAzimuth, SigmaElevation };

std::string_view sweep_variable_name(SweepVariable v);  // CSV column value

/// One noise sweep: the swept sigma takes each grid value (dB for RSS,
/// degrees for angles) while the other two stay at their fixed values.
struct SweepSpec {
    SweepVariable variable = SweepVariable::SigmaRss;
    std::vector<double> grid;
    double fixed_rss_db = 3.0;
    double fixed_azimuth_deg = 5.0;
    double fixed_elevation_deg = 5.0;
    int closed_form_trials = 10000;
    int mlp_trials = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct MethodCell {
    Method method = Method::Wls;
    double rmse = 0.0;
    long trials = 0;
    long failures = 0;  // singular geometries, excluded from the RMSE
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct SweepPoint {
    double value = 0.0;
    std::vector<MethodCell> cells;

    const MethodCell* find(Method m) const;
};

struct SweepResult {
    SweepVariable variable = SweepVariable::SigmaRss;
    std::vector<SweepPoint> points;
};

/// Root mean squared Euclidean position error.
double rmse(std::span<const Point3> truths, std::span<const Point3> estimates);

/// 95% bootstrap confidence interval on the RMSE of the given squared
/// errors (percentile method, seeded resampling).
std::pair<double, double> bootstrap_rmse_ci(std::span<const double> squared_errors,
                                            int resamples, std::uint64_t seed);

/// Runs the Monte Carlo sweep over fresh trials (fixed anchors, fresh
/// target and generating exponent per trial; every method sees the same
/// measurements). MLP models are optional; when given, their scene
/// fingerprint and input dimension must match. A point whose closed-form
/// failure rate exceeds 1% aborts the sweep.
SweepResult run_sweep(const SweepSpec& spec, const std::vector<Point3>& anchors,
                      const SceneConfig& scene_cfg, const PathLossConfig& pl,
                      const MlpModel* mlp_raw, const MlpModel* mlp_pre);

/// CSV with header `sweep_var,value,method,rmse_m,trials,failures,ci_low,ci_high`.
void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

struct RankedMethod {
    Method method = Method::Wls;
    double rmse = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int rank = 0;  // 1-based; equal RMSE shares a rank (tie)
};

struct PointRanking {
    double value = 0.0;
    std::vector<RankedMethod> ranking;  // best first
};

/// Per grid point, methods ordered by RMSE with bootstrap intervals.
std::vector<PointRanking> compare_report(const SweepResult& result);

std::string format_report(const SweepResult& result);

/// Shortest round-trip decimal representation; used for all CSV numbers so
/// reruns are byte-identical.
std::string format_double(double v);

}  // namespace rsaloc
