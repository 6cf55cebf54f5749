#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grassdisagg/features.hpp"

namespace grassdisagg {

struct SvrParams {
    double c_box = 100.0;
    double epsilon = 0.1;
    /// Gaussian kernel width; <= 0 selects 1/d.
    double gamma = 0.0;
    /// Maximal KKT violation accepted at termination.
    double tolerance = 1e-3;
    /// Pair updates without improving the best violation before giving up; 0 selects 10*m.
    std::size_t max_stall = 0;

    bool operator==(const SvrParams&) const = default;
};

/// epsilon-SVR with Gaussian kernel K(u,v) = exp(-gamma |u-v|^2).
struct SvrModel {
    FeatureMatrix support_vectors;
    std::vector<double> coefficients;  // alpha_i - alpha_i*, |c| <= c_box
    double bias = 0.0;
    double gamma = 1.0;
    double c_box = 100.0;
    double epsilon = 0.1;

    // Solver diagnostics.
    bool converged = true;
    std::size_t iterations = 0;
    double dual_objective = 0.0;

    double predict(std::span<const double> x) const;

    bool operator==(const SvrModel&) const = default;
};

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma);

/// Full m x m Gram matrix, rows filled in parallel on up to `jobs` threads.
std::vector<double> rbf_gram_matrix(const FeatureMatrix& x, double gamma, int jobs);

namespace reference {
/// Serial Gram matrix; the parallel kernel must match it bit for bit.
std::vector<double> rbf_gram_matrix(const FeatureMatrix& x, double gamma);
}  // namespace reference

/// Solves the epsilon-SVR dual by sequential pairwise (SMO) updates with
/// second-order working-set selection. Inputs are used as given; scaling is
/// the caller's responsibility.
SvrModel fit_svr(const FeatureMatrix& x, std::span<const double> y, const SvrParams& params = {}, int jobs = 1);

/// Same solver on a precomputed Gram matrix; returns the full coefficient
/// vector (length m, zeros kept) through `coefficients`.
struct SvrDualSolution {
    std::vector<double> coefficients;
    double bias = 0.0;
    double dual_objective = 0.0;
    bool converged = true;
    std::size_t iterations = 0;
};
SvrDualSolution solve_svr_dual(std::span<const double> gram, std::span<const double> y, const SvrParams& params);

}  // namespace grassdisagg
