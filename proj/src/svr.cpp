#include "grassdisagg/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "grassdisagg/error.hpp"
#include "grassdisagg/parallel.hpp"

namespace grassdisagg {

double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double diff = u[k] - v[k];
        d2 += diff * diff;
    }
    return std::exp(-gamma * d2);
}

std::vector<double> reference::rbf_gram_matrix(const FeatureMatrix& x, double gamma) {
    const std::size_t m = x.rows();
    std::vector<double> gram(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) gram[i * m + j] = rbf_kernel(x.row(i), x.row(j), gamma);
    return gram;
}

std::vector<double> rbf_gram_matrix(const FeatureMatrix& x, double gamma, int jobs) {
    const std::size_t m = x.rows();
    std::vector<double> gram(m * m);
    parallel_for(m, jobs, [&](std::size_t i) {
        const auto xi = x.row(i);
        double* out = gram.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) out[j] = rbf_kernel(xi, x.row(j), gamma);
    });
    return gram;
}

double SvrModel::predict(std::span<const double> x) const {
    if (x.size() != support_vectors.cols() && support_vectors.rows() > 0)
        throw Error(ErrorCode::WidthMismatch, "feature width " + std::to_string(x.size()) + " != " +
                                                  std::to_string(support_vectors.cols()));
    double acc = 0.0;
    for (std::size_t i = 0; i < support_vectors.rows(); ++i)
        acc += coefficients[i] * rbf_kernel(support_vectors.row(i), x, gamma);
    return acc + bias;
}

namespace {

// Dual in 2m variables beta = (alpha, alpha*), sign s = (+1..., -1...):
//   min 1/2 beta' Q beta + p' beta,  Q_ij = s_i s_j K(i mod m, j mod m),
//   p = (eps - y, eps + y),  s' beta = 0,  0 <= beta <= C.
class SmoSolver {
public:
    SmoSolver(std::span<const double> gram, std::span<const double> y, const SvrParams& params)
        : gram_(gram), m_(y.size()), c_(params.c_box), tol_(params.tolerance) {
        const std::size_t n = 2 * m_;
        beta_.assign(n, 0.0);
        grad_.resize(n);
        p_.resize(n);
        for (std::size_t i = 0; i < m_; ++i) {
            p_[i] = params.epsilon - y[i];
            p_[i + m_] = params.epsilon + y[i];
        }
        grad_ = p_;
        max_stall_ = params.max_stall > 0 ? params.max_stall : 10 * m_;
        max_iter_ = std::max<std::size_t>(10'000'000, 100 * m_);
    }

    SvrDualSolution run() {
        std::size_t iter = 0;
        std::size_t stall = 0;
        double best_violation = std::numeric_limits<double>::infinity();
        bool converged = false;
        while (iter < max_iter_) {
            std::size_t i = 0;
            std::size_t j = 0;
            const double violation = select_pair(i, j);
            if (violation < tol_) {
                converged = true;
                break;
            }
            if (violation < best_violation) {
                best_violation = violation;
                stall = 0;
            } else if (++stall >= max_stall_) {
                break;
            }
            update_pair(i, j);
            ++iter;
        }

        SvrDualSolution out;
        out.converged = converged;
        out.iterations = iter;
        out.coefficients.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) out.coefficients[i] = beta_[i] - beta_[i + m_];
        out.bias = -compute_rho();
        double obj = 0.0;
        for (std::size_t t = 0; t < 2 * m_; ++t) obj += beta_[t] * (grad_[t] + p_[t]);
        out.dual_objective = 0.5 * obj;
        return out;
    }

private:
    double sign(std::size_t t) const { return t < m_ ? 1.0 : -1.0; }
    double kernel(std::size_t a, std::size_t b) const { return gram_[(a % m_) * m_ + (b % m_)]; }
    double q(std::size_t a, std::size_t b) const { return sign(a) * sign(b) * kernel(a, b); }
    bool at_upper(std::size_t t) const { return beta_[t] >= c_; }
    bool at_lower(std::size_t t) const { return beta_[t] <= 0.0; }
    bool in_up(std::size_t t) const { return sign(t) > 0 ? !at_upper(t) : !at_lower(t); }
    bool in_low(std::size_t t) const { return sign(t) > 0 ? !at_lower(t) : !at_upper(t); }

    // Returns the maximal violating-pair gap; fills the working set.
    double select_pair(std::size_t& out_i, std::size_t& out_j) const {
        constexpr double kTau = 1e-12;
        const std::size_t n = 2 * m_;
        double g_max = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_up(t)) continue;
            const double v = -sign(t) * grad_[t];
            if (v > g_max) {
                g_max = v;
                i = t;
            }
        }
        double g_max2 = -std::numeric_limits<double>::infinity();
        double best_obj = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double v = sign(t) * grad_[t];
            g_max2 = std::max(g_max2, v);
            if (i == n) continue;
            const double b = g_max + v;
            if (b > 0.0) {
                double a = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
                if (a <= 0.0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj < best_obj) {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        out_i = i;
        out_j = j;
        // No movable pair left: the current point is optimal.
        if (i == n || j == n) return 0.0;
        return g_max + g_max2;
    }

    void update_pair(std::size_t i, std::size_t j) {
        constexpr double kTau = 1e-12;
        const double old_i = beta_[i];
        const double old_j = beta_[j];
        const double qij = q(i, j);
        if (sign(i) != sign(j)) {
            double quad = kernel(i, i) + kernel(j, j) + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = beta_[i] - beta_[j];
            beta_[i] += delta;
            beta_[j] += delta;
            if (diff > 0.0) {
                if (beta_[j] < 0.0) {
                    beta_[j] = 0.0;
                    beta_[i] = diff;
                }
            } else if (beta_[i] < 0.0) {
                beta_[i] = 0.0;
                beta_[j] = -diff;
            }
            if (diff > 0.0) {
                if (beta_[i] > c_) {
                    beta_[i] = c_;
                    beta_[j] = c_ - diff;
                }
            } else if (beta_[j] > c_) {
                beta_[j] = c_;
                beta_[i] = c_ + diff;
            }
        } else {
            double quad = kernel(i, i) + kernel(j, j) - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = beta_[i] + beta_[j];
            beta_[i] -= delta;
            beta_[j] += delta;
            if (sum > c_) {
                if (beta_[i] > c_) {
                    beta_[i] = c_;
                    beta_[j] = sum - c_;
                }
            } else if (beta_[j] < 0.0) {
                beta_[j] = 0.0;
                beta_[i] = sum;
            }
            if (sum > c_) {
                if (beta_[j] > c_) {
                    beta_[j] = c_;
                    beta_[i] = sum - c_;
                }
            } else if (beta_[i] < 0.0) {
                beta_[i] = 0.0;
                beta_[j] = sum;
            }
        }

        const double d_i = beta_[i] - old_i;
        const double d_j = beta_[j] - old_j;
        const double s_i = sign(i);
        const double s_j = sign(j);
        const double* k_i = gram_.data() + (i % m_) * m_;
        const double* k_j = gram_.data() + (j % m_) * m_;
        for (std::size_t t = 0; t < m_; ++t) {
            const double shared = s_i * k_i[t] * d_i + s_j * k_j[t] * d_j;
            grad_[t] += shared;       // s_t = +1
            grad_[t + m_] -= shared;  // s_t = -1
        }
    }

    double compute_rho() const {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        std::size_t n_free = 0;
        for (std::size_t t = 0; t < 2 * m_; ++t) {
            const double yg = sign(t) * grad_[t];
            if (at_upper(t)) {
                if (sign(t) < 0)
                    ub = std::min(ub, yg);
                else
                    lb = std::max(lb, yg);
            } else if (at_lower(t)) {
                if (sign(t) > 0)
                    ub = std::min(ub, yg);
                else
                    lb = std::max(lb, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        if (n_free > 0) return sum_free / static_cast<double>(n_free);
        if (std::isinf(ub) || std::isinf(lb)) return std::isinf(ub) ? (std::isinf(lb) ? 0.0 : lb) : ub;
        return 0.5 * (ub + lb);
    }

    std::span<const double> gram_;
    std::size_t m_;
    double c_;
    double tol_;
    std::size_t max_stall_ = 0;
    std::size_t max_iter_ = 0;
    std::vector<double> beta_;
    std::vector<double> grad_;
    std::vector<double> p_;
};

void check_params(const SvrParams& params) {
    if (!(params.c_box > 0.0)) throw Error(ErrorCode::ConfigError, "SVR box constraint must be > 0");
    if (!(params.epsilon >= 0.0)) throw Error(ErrorCode::ConfigError, "SVR epsilon must be >= 0");
    if (!(params.tolerance > 0.0)) throw Error(ErrorCode::ConfigError, "SVR tolerance must be > 0");
}

}  // namespace

SvrDualSolution solve_svr_dual(std::span<const double> gram, std::span<const double> y, const SvrParams& params) {
    check_params(params);
    if (gram.size() != y.size() * y.size()) throw Error(ErrorCode::ShapeError, "Gram matrix must be m x m");
    if (y.size() < 2) throw Error(ErrorCode::DegenerateInput, "SVR needs at least 2 training rows");
    return SmoSolver(gram, y, params).run();
}

SvrModel fit_svr(const FeatureMatrix& x, std::span<const double> y, const SvrParams& params, int jobs) {
    check_params(params);
    if (x.rows() != y.size())
        throw Error(ErrorCode::ShapeError,
                    std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) + " targets");
    if (x.rows() < 2) throw Error(ErrorCode::DegenerateInput, "SVR needs at least 2 training rows");

    const double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(std::max<std::size_t>(1, x.cols()));
    const std::vector<double> gram = rbf_gram_matrix(x, gamma, jobs);
    const SvrDualSolution sol = SmoSolver(gram, y, params).run();

    SvrModel model;
    model.gamma = gamma;
    model.c_box = params.c_box;
    model.epsilon = params.epsilon;
    model.bias = sol.bias;
    model.converged = sol.converged;
    model.iterations = sol.iterations;
    model.dual_objective = sol.dual_objective;
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < sol.coefficients.size(); ++i) {
        if (sol.coefficients[i] != 0.0) {
            support.push_back(i);
            model.coefficients.push_back(sol.coefficients[i]);
        }
    }
    model.support_vectors = x.select_rows(support);
    return model;
}

}  // namespace grassdisagg
