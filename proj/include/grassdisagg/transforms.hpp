#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace grassdisagg {

/// Representation of the growth series the regressor learns on.
enum class Transform { raw, diff, cumul };

std::string_view to_string(Transform t) noexcept;
Transform parse_transform(std::string_view name);

/// raw: unchanged. diff: D1 = X1, Dt = Xt - Xt-1. cumul: St = sum_{i<=t} Xi.
std::vector<double> forward(Transform mode, std::span<const double> x);

/// Exact inverse of forward.
std::vector<double> inverse(Transform mode, std::span<const double> z);

/// Integrates a differenced series, choosing the integration constant so the
/// result sums to `total`. Equals inverse(diff, z) shifted by one constant.
std::vector<double> inverse_diff_with_total(std::span<const double> z, double total);

}  // namespace grassdisagg
