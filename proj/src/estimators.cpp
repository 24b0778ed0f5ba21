#include "rsaloc/estimators.hpp"

#include <cmath>

#include "rsaloc/errors.hpp"

namespace rsaloc {

namespace {

PositionEstimate solve_weighted(const Matrix& a_w, std::span<const double> b_w,
                                Method method) {
    const auto sol = lstsq(a_w, b_w);
    const double cond_normal = sol.cond_r * sol.cond_r;
    if (!std::isfinite(cond_normal) || cond_normal > kSingularConditionThreshold)
        throw SingularGeometryError("estimator: weighted system is rank deficient");

    return {{sol.x[0], sol.x[1], sol.x[2]}, cond_normal, method};
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::Wls: return "wls";
        case Method::Ls: return "ls";
        case Method::MlpRaw: return "mlp_raw";
        case Method::MlpPre: return "mlp_pre";
    }
    return "?";
}

PositionEstimate solve_wls(const LinearSystem& sys, const WeightVector& weights) {
    const auto [a_w, b_w] = apply_weights(sys, weights);
    return solve_weighted(a_w, b_w, Method::Wls);
}

PositionEstimate solve_ls(const LinearSystem& sys) {
    return solve_weighted(sys.a, sys.b, Method::Ls);
}

}  // namespace rsaloc
