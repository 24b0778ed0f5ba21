#include "rsaloc/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rsaloc/errors.hpp"
#include "rsaloc/linearization.hpp"
#include "rsaloc/rng.hpp"

namespace rsaloc {

namespace {

constexpr std::uint64_t kStreamSweepBase = 0x10;
constexpr std::uint64_t kStreamBootstrap = 0x20;
constexpr int kBootstrapResamples = 1000;
constexpr double kMaxFailureRate = 0.01;

NoiseConfig noise_at(const SweepSpec& spec, double value) {
    NoiseConfig n{spec.fixed_rss_db, deg_to_rad(spec.fixed_azimuth_deg),
                  deg_to_rad(spec.fixed_elevation_deg)};
    switch (spec.variable) {
        case SweepVariable::SigmaRss: n.sigma_rss_db = value; break;
        case SweepVariable::SigmaAzimuth: n.sigma_azimuth_rad = deg_to_rad(value); break;
        case SweepVariable::SigmaElevation: n.sigma_elevation_rad = deg_to_rad(value); break;
    }
    return n;
}

double quantile(std::span<const double> sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void check_model(const MlpModel& model, InputMode expected_mode,
                 std::size_t expected_dim, std::uint64_t fingerprint) {
    if (model.input_mode != expected_mode)
        throw ConfigError("sweep: checkpoint input mode mismatch");
    if (static_cast<std::size_t>(model.input_dim) != expected_dim)
        throw ConfigError("sweep: model input dimension " +
                          std::to_string(model.input_dim) + " does not match scene (" +
                          std::to_string(expected_dim) + ")");
    if (model.scene_fingerprint != fingerprint)
        throw ConfigError("sweep: model was trained on a different scene "
                          "(fingerprint mismatch)");
}

}  // namespace

std::string_view sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::SigmaRss: return "sigma_rss_db";
        case SweepVariable::SigmaAzimuth: return "sigma_azimuth_deg";
        case SweepVariable::SigmaElevation: return "sigma_elevation_deg";
    }
    return "?";
}

void SweepSpec::validate() const {
    if (grid.empty()) throw ConfigError("sweep: grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0) throw ConfigError("sweep: grid values must be non-negative");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw ConfigError("sweep: grid must be strictly increasing");
    }
    if (closed_form_trials < 1)
        throw ConfigError("sweep: closed_form_trials must be >= 1");
    if (mlp_trials < 0) throw ConfigError("sweep: mlp_trials must be >= 0");
    if (fixed_rss_db < 0.0 || fixed_azimuth_deg < 0.0 || fixed_elevation_deg < 0.0)
        throw ConfigError("sweep: fixed noise values must be non-negative");
}

double rmse(std::span<const Point3> truths, std::span<const Point3> estimates) {
    if (truths.empty() || truths.size() != estimates.size())
        throw ConfigError("rmse: input lengths must match and be non-empty");
    double total = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const Vec3 e = estimates[i] - truths[i];
        total += e.dot(e);
    }
    return std::sqrt(total / static_cast<double>(truths.size()));
}

std::pair<double, double> bootstrap_rmse_ci(std::span<const double> squared_errors,
                                            int resamples, std::uint64_t seed) {
    if (squared_errors.empty())
        throw ConfigError("bootstrap: no samples");
    RandomSource rng(seed);
    const std::size_t n = squared_errors.size();
    std::vector<double> stats(resamples);
    for (int r = 0; r < resamples; ++r) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            total += squared_errors[rng.next_below(n)];
        stats[r] = std::sqrt(total / static_cast<double>(n));
    }
    std::sort(stats.begin(), stats.end());
    return {quantile(stats, 0.025), quantile(stats, 0.975)};
}

const MethodCell* SweepPoint::find(Method m) const {
    for (const auto& c : cells)
        if (c.method == m) return &c;
    return nullptr;
}

SweepResult run_sweep(const SweepSpec& spec, const std::vector<Point3>& anchors,
                      const SceneConfig& scene_cfg, const PathLossConfig& pl,
                      const MlpModel* mlp_raw, const MlpModel* mlp_pre) {
    spec.validate();
    scene_cfg.validate();
    pl.validate();
    const std::size_t n_anchors = anchors.size();
    const std::uint64_t fingerprint = scene_fingerprint(anchors, pl);
    if (mlp_raw)
        check_model(*mlp_raw, InputMode::Raw, 3 * n_anchors, fingerprint);
    if (mlp_pre)
        check_model(*mlp_pre, InputMode::Preprocessed, 12 * n_anchors, fingerprint);

    const int total_trials =
        std::max(spec.closed_form_trials,
                 (mlp_raw || mlp_pre) ? spec.mlp_trials : 0);
    const std::uint64_t var_stream = substream(
        spec.seed, kStreamSweepBase + static_cast<std::uint64_t>(spec.variable));

    SweepResult result;
    result.variable = spec.variable;

    for (std::size_t p = 0; p < spec.grid.size(); ++p) {
        const NoiseConfig noise = noise_at(spec, spec.grid[p]);
        const std::uint64_t point_stream = substream(var_stream, p);

        std::vector<double> sq_wls, sq_ls, sq_raw, sq_pre;
        sq_wls.reserve(spec.closed_form_trials);
        sq_ls.reserve(spec.closed_form_trials);
        long fail_wls = 0, fail_ls = 0;

        for (int t = 0; t < total_trials; ++t) {
            // trial streams are shared across grid points (common random
            // numbers): the same trial index sees the same geometry and
            // unit noise draws at every noise level, which sharpens the
            // along-grid comparison
            RandomSource rng(substream(var_stream, static_cast<std::uint64_t>(t)));
            const Scene scene = sample_target(anchors, scene_cfg, pl, rng);
            const MeasurementVector theta =
                synthesize_measurements(scene, pl, noise, rng);

            const bool want_closed = t < spec.closed_form_trials;
            const bool want_mlp = (mlp_raw || mlp_pre) && t < spec.mlp_trials;
            if (!want_closed && !want_mlp) continue;

            const LinearSystem sys = build_system(theta, anchors, pl);
            const WeightVector weights = build_weights(theta.rss, pl);

            auto record = [&scene](std::vector<double>& out, const Point3& est) {
                const Vec3 e = est - scene.target;
                out.push_back(e.dot(e));
            };

            if (want_closed) {
                try {
                    record(sq_wls, solve_wls(sys, weights).position);
                } catch (const SingularGeometryError&) {
                    ++fail_wls;
                }
                try {
                    record(sq_ls, solve_ls(sys).position);
                } catch (const SingularGeometryError&) {
                    ++fail_ls;
                }
            }
            if (want_mlp) {
                if (mlp_raw) record(sq_raw, predict(*mlp_raw, theta.stacked()));
                if (mlp_pre) {
                    const auto [a_w, b_w] = apply_weights(sys, weights);
                    const FeatureVector fv = feature_vector(a_w, b_w);
                    record(sq_pre, predict(*mlp_pre, fv.x));
                }
            }
        }

        const double cf_trials = static_cast<double>(spec.closed_form_trials);
        if (static_cast<double>(std::max(fail_wls, fail_ls)) / cf_trials >
            kMaxFailureRate)
            throw Error("sweep: singular-geometry failure rate above 1% at " +
                        std::string(sweep_variable_name(spec.variable)) + " = " +
                        format_double(spec.grid[p]));

        SweepPoint point;
        point.value = spec.grid[p];
        auto add_cell = [&](Method method, const std::vector<double>& sq,
                            long trials, long failures) {
            if (trials <= 0) return;
            MethodCell cell;
            cell.method = method;
            cell.trials = trials;
            cell.failures = failures;
            double total = 0.0;
            for (double e : sq) total += e;
            cell.rmse = std::sqrt(total / static_cast<double>(sq.size()));
            const std::uint64_t boot_seed = substream(
                substream(point_stream, kStreamBootstrap),
                static_cast<std::uint64_t>(method));
            std::tie(cell.ci_low, cell.ci_high) =
                bootstrap_rmse_ci(sq, kBootstrapResamples, boot_seed);
            point.cells.push_back(cell);
        };
        add_cell(Method::Wls, sq_wls, spec.closed_form_trials, fail_wls);
        add_cell(Method::Ls, sq_ls, spec.closed_form_trials, fail_ls);
        if (mlp_raw) add_cell(Method::MlpRaw, sq_raw, spec.mlp_trials, 0);
        if (mlp_pre) add_cell(Method::MlpPre, sq_pre, spec.mlp_trials, 0);
        result.points.push_back(std::move(point));
    }
    return result;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("sweep: cannot write " + path.string());

    out << "sweep_var,value,method,rmse_m,trials,failures,ci_low,ci_high\n";
    for (const auto& point : result.points) {
        for (const auto& cell : point.cells) {
            out << sweep_variable_name(result.variable) << ','
                << format_double(point.value) << ',' << method_name(cell.method)
                << ',' << format_double(cell.rmse) << ',' << cell.trials << ','
                << cell.failures << ',' << format_double(cell.ci_low) << ','
                << format_double(cell.ci_high) << '\n';
        }
    }
    if (!out) throw Error("sweep: write failed for " + path.string());
}

std::vector<PointRanking> compare_report(const SweepResult& result) {
    std::vector<PointRanking> report;
    for (const auto& point : result.points) {
        PointRanking pr;
        pr.value = point.value;
        for (const auto& cell : point.cells)
            pr.ranking.push_back(
                {cell.method, cell.rmse, cell.ci_low, cell.ci_high, 0});
        std::stable_sort(pr.ranking.begin(), pr.ranking.end(),
                         [](const RankedMethod& a, const RankedMethod& b) {
                             return a.rmse < b.rmse;
                         });
        for (std::size_t i = 0; i < pr.ranking.size(); ++i) {
            if (i > 0 && pr.ranking[i].rmse == pr.ranking[i - 1].rmse)
                pr.ranking[i].rank = pr.ranking[i - 1].rank;  // tie
            else
                pr.ranking[i].rank = static_cast<int>(i) + 1;
        }
        report.push_back(std::move(pr));
    }
    return report;
}

std::string format_report(const SweepResult& result) {
    const auto report = compare_report(result);
    std::ostringstream out;
    out << "sweep " << sweep_variable_name(result.variable) << "\n";
    for (const auto& pr : report) {
        out << "  value " << format_double(pr.value) << ":";
        for (const auto& rm : pr.ranking) {
            out << "  #" << rm.rank << " " << method_name(rm.method) << " rmse="
                << format_double(rm.rmse) << " ci=[" << format_double(rm.ci_low)
                << "," << format_double(rm.ci_high) << "]";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace rsaloc
