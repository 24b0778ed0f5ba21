#pragma once

#include <string_view>

#include "rsaloc/linearization.hpp"

namespace rsaloc {

enum class Method { Wls, Ls, MlpRaw, MlpPre };

std::string_view method_name(Method m);

/// Closed-form position estimate with a conditioning diagnostic (proxy for
/// the condition number of the normal-equations matrix).
struct PositionEstimate {
    Point3 position;
    double condition_estimate = 0.0;
    Method method = Method::Wls;
};

/// Condition estimates above this raise SingularGeometryError instead of
/// returning a meaningless solution.
inline constexpr double kSingularConditionThreshold = 1e12;

/// Minimizer of ||W (A t - b)||_2 via QR of the weighted system. Agrees with
/// the explicit normal-equations solution on well-conditioned systems but
/// does not form the normal matrix.
PositionEstimate solve_wls(const LinearSystem& sys, const WeightVector& weights);

/// Unweighted counterpart: minimizer of ||A t - b||_2.
PositionEstimate solve_ls(const LinearSystem& sys);

}  // namespace rsaloc
