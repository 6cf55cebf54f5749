#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace grassdisagg {

/// Dense row-major design matrix of fixed width.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}
    FeatureMatrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    /// First append fixes the width when the matrix is empty and has no width yet.
    void append_row(std::span<const double> row);
    void reserve_rows(std::size_t n) { values_.reserve(n * cols_); }

    const std::vector<double>& values() const { return values_; }

    /// Rows at the given positions, in the given order.
    FeatureMatrix select_rows(std::span<const std::size_t> positions) const;

    /// Throws ShapeError on NaN/Inf.
    void check_finite() const;

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Per-feature z-score scaling, fitted on training rows only.
class Standardizer {
public:
    static constexpr double kSigmaFloor = 1e-12;

    Standardizer() = default;
    Standardizer(std::vector<double> mean, std::vector<double> sd);

    /// Population mean/sd per column; sd below the floor is replaced by 1.
    static Standardizer fit(const FeatureMatrix& x);
    /// Identity scaling of the given width.
    static Standardizer identity(std::size_t width);

    std::size_t width() const { return mean_.size(); }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& sd() const { return sd_; }

    std::vector<double> transform(std::span<const double> x) const;
    void transform_into(std::span<const double> x, std::span<double> out) const;
    FeatureMatrix transform(const FeatureMatrix& x) const;

    bool operator==(const Standardizer&) const = default;

private:
    std::vector<double> mean_;
    std::vector<double> sd_;
};

/// Scalar z-score for regression targets.
struct TargetScaler {
    double mean = 0.0;
    double sd = 1.0;

    static TargetScaler fit(std::span<const double> y);
    double forward(double v) const { return (v - mean) / sd; }
    double inverse(double v) const { return v * sd + mean; }

    bool operator==(const TargetScaler&) const = default;
};

}  // namespace grassdisagg
