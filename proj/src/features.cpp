#include "grassdisagg/features.hpp"

#include <cmath>
#include <string>

#include "grassdisagg/error.hpp"

namespace grassdisagg {

FeatureMatrix::FeatureMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    for (const auto& r : rows) append_row(std::span<const double>(r.begin(), r.size()));
}

void FeatureMatrix::append_row(std::span<const double> row) {
    if (rows_ == 0 && cols_ == 0) cols_ = row.size();
    if (row.size() != cols_)
        throw Error(ErrorCode::WidthMismatch,
                    "row width " + std::to_string(row.size()) + " != " + std::to_string(cols_));
    values_.insert(values_.end(), row.begin(), row.end());
    ++rows_;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> positions) const {
    FeatureMatrix out(positions.size(), cols_);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const auto src = row(positions[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

void FeatureMatrix::check_finite() const {
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k]))
            throw Error(ErrorCode::ShapeError, "non-finite feature at row " + std::to_string(k / cols_) +
                                                   ", column " + std::to_string(k % cols_));
    }
}

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> sd)
    : mean_(std::move(mean)), sd_(std::move(sd)) {
    if (mean_.size() != sd_.size()) throw Error(ErrorCode::WidthMismatch, "standardizer mean/sd widths differ");
}

Standardizer Standardizer::fit(const FeatureMatrix& x) {
    const std::size_t d = x.cols();
    std::vector<double> mean(d, 0.0);
    std::vector<double> sd(d, 1.0);
    if (x.rows() == 0) return {mean, sd};
    const auto m = static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    for (double& v : mean) v /= m;
    std::vector<double> ss(d, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = x(i, j) - mean[j];
            ss[j] += c * c;
        }
    for (std::size_t j = 0; j < d; ++j) {
        const double s = std::sqrt(ss[j] / m);
        sd[j] = s < kSigmaFloor ? 1.0 : s;
    }
    return {mean, sd};
}

Standardizer Standardizer::identity(std::size_t width) {
    return {std::vector<double>(width, 0.0), std::vector<double>(width, 1.0)};
}

void Standardizer::transform_into(std::span<const double> x, std::span<double> out) const {
    if (x.size() != mean_.size() || out.size() != mean_.size())
        throw Error(ErrorCode::WidthMismatch,
                    "feature width " + std::to_string(x.size()) + " != " + std::to_string(mean_.size()));
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean_[j]) / sd_[j];
}

std::vector<double> Standardizer::transform(std::span<const double> x) const {
    std::vector<double> out(x.size());
    transform_into(x, out);
    return out;
}

FeatureMatrix Standardizer::transform(const FeatureMatrix& x) const {
    FeatureMatrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) transform_into(x.row(i), out.row(i));
    return out;
}

TargetScaler TargetScaler::fit(std::span<const double> y) {
    TargetScaler s;
    if (y.empty()) return s;
    const auto m = static_cast<double>(y.size());
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= m;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / m);
    s.mean = mean;
    s.sd = sd < Standardizer::kSigmaFloor ? 1.0 : sd;
    return s;
}

}  // namespace grassdisagg
