#include "grassdisagg/linear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "grassdisagg/error.hpp"

namespace grassdisagg {

double LinearModel::predict(std::span<const double> x) const {
    if (x.size() != weights.size())
        throw Error(ErrorCode::WidthMismatch,
                    "feature width " + std::to_string(x.size()) + " != " + std::to_string(weights.size()));
    double acc = bias;
    for (std::size_t j = 0; j < x.size(); ++j) acc += weights[j] * x[j];
    return acc;
}

LinearModel LinearModel::unstandardized(const Standardizer& scaler) const {
    if (scaler.width() != weights.size()) throw Error(ErrorCode::WidthMismatch, "scaler width differs from model");
    LinearModel out = *this;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        out.weights[j] = weights[j] / scaler.sd()[j];
        out.bias -= out.weights[j] * scaler.mean()[j];
    }
    return out;
}

LinearModel fit_linear(const FeatureMatrix& x, std::span<const double> y) {
    const std::size_t m = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != m)
        throw Error(ErrorCode::ShapeError, std::to_string(m) + " rows but " + std::to_string(y.size()) + " targets");
    if (m == 0) throw Error(ErrorCode::DegenerateInput, "no training rows");

    LinearModel model;
    model.weights.assign(d, 0.0);

    const bool constant_target = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (constant_target) {
        model.bias = y[0];
        model.degenerate = true;
        return model;
    }

    Eigen::MatrixXd a(m, d + 1);
    Eigen::VectorXd b(m);
    for (std::size_t i = 0; i < m; ++i) {
        a(static_cast<Eigen::Index>(i), 0) = 1.0;
        for (std::size_t j = 0; j < d; ++j)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = x(i, j);
        b(static_cast<Eigen::Index>(i)) = y[i];
    }

    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    const Eigen::VectorXd theta = cod.solve(b);
    if (!theta.allFinite()) throw Error(ErrorCode::DegenerateInput, "least-squares solution is not finite");

    model.bias = theta(0);
    for (std::size_t j = 0; j < d; ++j) model.weights[j] = theta(static_cast<Eigen::Index>(j + 1));
    model.degenerate = m < d + 1 || cod.rank() < static_cast<Eigen::Index>(d + 1);
    return model;
}

}  // namespace grassdisagg
