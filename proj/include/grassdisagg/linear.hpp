#pragma once

#include <span>
#include <vector>

#include "grassdisagg/features.hpp"

namespace grassdisagg {

/// y = bias + weights . x
struct LinearModel {
    double bias = 0.0;
    std::vector<double> weights;
    /// Set when the fit fell back to a bias-only or under-determined solution.
    bool degenerate = false;

    double predict(std::span<const double> x) const;

    /// Coefficients expressed on the unscaled features that `scaler` maps from.
    LinearModel unstandardized(const Standardizer& scaler) const;

    bool operator==(const LinearModel&) const = default;
};

/// Least squares with intercept via complete orthogonal decomposition;
/// minimum-norm solution when the design is rank deficient.
LinearModel fit_linear(const FeatureMatrix& x, std::span<const double> y);

}  // namespace grassdisagg
