#include <doctest.h>

#include <cmath>
#include <vector>

#include "grassdisagg/random.hpp"
#include "grassdisagg/svr.hpp"
#include "oracles.hpp"
#include "toy_sets.hpp"

using namespace grassdisagg;

TEST_CASE("dense QP oracle reproduces the stored optima") {
    for (const auto& set : toy::svr_toy_sets()) {
        CAPTURE(set.name);
        const auto gram = reference::rbf_gram_matrix(set.matrix(), set.gamma);
        const auto ref = oracle::dense_svr_dual(gram, set.y, set.c_box, set.epsilon);
        CHECK(std::abs(ref.objective - set.reference_objective) <= 1e-6);
    }
}

TEST_CASE("SMO dual objective and KKT on toy sets") {
    for (const auto& set : toy::svr_toy_sets()) {
        CAPTURE(set.name);
        const auto gram = reference::rbf_gram_matrix(set.matrix(), set.gamma);
        const auto sol = solve_svr_dual(gram, set.y, set.params());
        CHECK(sol.converged);
        CHECK(std::abs(sol.dual_objective - set.reference_objective) <= 1e-3);
        const auto ref = oracle::dense_svr_dual(gram, set.y, set.c_box, set.epsilon);
        CHECK(std::abs(sol.dual_objective - ref.objective) <= 1e-3);
        CHECK(oracle::svr_kkt_violation(gram, set.y, sol.coefficients, sol.bias, set.c_box, set.epsilon) <= 1e-2);

        double sum = 0.0;
        for (double b : sol.coefficients) {
            CHECK(std::abs(b) <= set.c_box + 1e-12);
            sum += b;
        }
        CHECK(std::abs(sum) <= 1e-10);
    }
}

TEST_CASE("fit_svr keeps only support vectors and predicts like the dual") {
    const auto set = toy::svr_toy_sets()[1];
    const auto x = set.matrix();
    const SvrModel model = fit_svr(x, set.y, set.params());
    const auto gram = reference::rbf_gram_matrix(x, set.gamma);
    const auto sol = solve_svr_dual(gram, set.y, set.params());
    std::size_t nonzero = 0;
    for (double b : sol.coefficients) nonzero += b != 0.0;
    CHECK(model.support_vectors.rows() == nonzero);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double f = sol.bias;
        for (std::size_t j = 0; j < x.rows(); ++j) f += sol.coefficients[j] * gram[i * x.rows() + j];
        CHECK(model.predict(x.row(i)) == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("constant targets lie inside the tube") {
    const FeatureMatrix x{{0.0, 1.0}, {1.0, 0.0}, {2.0, 2.0}, {3.0, 1.0}};
    const std::vector<double> y(4, 4.2);
    const SvrModel model = fit_svr(x, y);
    CHECK(model.support_vectors.rows() == 0);
    CHECK(model.predict(std::vector<double>{10.0, -3.0}) == doctest::Approx(4.2).epsilon(1e-12));
}

TEST_CASE("noiseless linear data is fitted within the tube") {
    Rng rng(12);
    FeatureMatrix x;
    std::vector<double> y;
    for (int i = 0; i < 60; ++i) {
        const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
        x.append_row(std::vector<double>{a, b});
        y.push_back(0.5 + a - 0.5 * b);
    }
    SvrParams p;
    p.epsilon = 0.05;
    p.gamma = 0.5;
    const SvrModel model = fit_svr(x, y, p);
    for (std::size_t i = 0; i < x.rows(); ++i) CHECK(std::abs(model.predict(x.row(i)) - y[i]) <= p.epsilon + 1e-2);
}

TEST_CASE("parallel Gram matrix equals the serial reference") {
    Rng rng(8);
    FeatureMatrix x;
    for (int i = 0; i < 150; ++i) {
        std::vector<double> r(27);
        for (double& v : r) v = rng.normal();
        x.append_row(r);
    }
    const auto serial = reference::rbf_gram_matrix(x, 1.0 / 27.0);
    for (int jobs : {1, 2, 4}) CHECK(rbf_gram_matrix(x, 1.0 / 27.0, jobs) == serial);
    CHECK(serial[0] == 1.0);
    CHECK(serial[1] == serial[150]);
}

TEST_CASE("default gamma is one over the width") {
    const FeatureMatrix x{{0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 0.0, 0.0}, {2.0, 0.0, 1.0, 0.0}};
    const SvrModel model = fit_svr(x, std::vector<double>{0.0, 1.0, 3.0});
    CHECK(model.gamma == 0.25);
}
