#include "grassdisagg/transforms.hpp"

#include <string>

#include "grassdisagg/error.hpp"

namespace grassdisagg {

std::string_view to_string(Transform t) noexcept {
    switch (t) {
        case Transform::raw: return "raw";
        case Transform::diff: return "diff";
        case Transform::cumul: return "cumul";
    }
    return "raw";
}

Transform parse_transform(std::string_view name) {
    if (name == "raw") return Transform::raw;
    if (name == "diff") return Transform::diff;
    if (name == "cumul") return Transform::cumul;
    throw Error(ErrorCode::ConfigError, "unknown preprocessing '" + std::string(name) + "' (raw|diff|cumul)");
}

namespace {

void require_non_empty(std::size_t n) {
    if (n == 0) throw Error(ErrorCode::EmptySeries, "series must contain at least one value");
}

std::vector<double> running_sum(std::span<const double> x) {
    std::vector<double> out(x.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        acc += x[t];
        out[t] = acc;
    }
    return out;
}

std::vector<double> first_difference(std::span<const double> x) {
    std::vector<double> out(x.size());
    out[0] = x[0];
    for (std::size_t t = 1; t < x.size(); ++t) out[t] = x[t] - x[t - 1];
    return out;
}

}  // namespace

std::vector<double> forward(Transform mode, std::span<const double> x) {
    require_non_empty(x.size());
    switch (mode) {
        case Transform::diff: return first_difference(x);
        case Transform::cumul: return running_sum(x);
        case Transform::raw: break;
    }
    return {x.begin(), x.end()};
}

std::vector<double> inverse(Transform mode, std::span<const double> z) {
    require_non_empty(z.size());
    switch (mode) {
        case Transform::diff: return running_sum(z);
        case Transform::cumul: return first_difference(z);
        case Transform::raw: break;
    }
    return {z.begin(), z.end()};
}

std::vector<double> inverse_diff_with_total(std::span<const double> z, double total) {
    require_non_empty(z.size());
    std::vector<double> x = running_sum(z);
    double sum = 0.0;
    for (double v : x) sum += v;
    const double shift = (total - sum) / static_cast<double>(x.size());
    for (double& v : x) v += shift;
    return x;
}

}  // namespace grassdisagg
