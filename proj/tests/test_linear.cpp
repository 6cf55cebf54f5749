#include <doctest.h>

#include <cmath>
#include <vector>

#include "grassdisagg/error.hpp"
#include "grassdisagg/features.hpp"
#include "grassdisagg/linear.hpp"
#include "grassdisagg/random.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace grassdisagg;

TEST_CASE("feature matrix basics") {
    FeatureMatrix m;
    m.append_row(std::vector<double>{1.0, 2.0});
    m.append_row(std::vector<double>{3.0, 4.0});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 2);
    CHECK(m(1, 0) == 3.0);
    CHECK(testutil::code_of([&] { m.append_row(std::vector<double>{1.0}); }) == ErrorCode::WidthMismatch);
    const std::vector<std::size_t> pick{1, 1, 0};
    const FeatureMatrix s = m.select_rows(pick);
    CHECK(s == FeatureMatrix{{3.0, 4.0}, {3.0, 4.0}, {1.0, 2.0}});
    m(0, 1) = std::nan("");
    CHECK(testutil::code_of([&] { m.check_finite(); }) == ErrorCode::ShapeError);
}

TEST_CASE("standardizer") {
    const FeatureMatrix x{{1.0, 5.0}, {3.0, 5.0}, {5.0, 5.0}};
    const Standardizer s = Standardizer::fit(x);
    CHECK(s.mean()[0] == doctest::Approx(3.0));
    CHECK(s.sd()[0] == doctest::Approx(std::sqrt(8.0 / 3.0)));
    CHECK(s.sd()[1] == 1.0);  // constant column
    const auto z = s.transform(std::vector<double>{3.0, 7.0});
    CHECK(z[0] == doctest::Approx(0.0));
    CHECK(z[1] == doctest::Approx(2.0));
    CHECK(testutil::code_of([&] { s.transform(std::vector<double>{1.0}); }) == ErrorCode::WidthMismatch);
}

TEST_CASE("fit_linear: exact line y = 2 + 3x") {
    FeatureMatrix x;
    std::vector<double> y;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 100; ++i) {
        const double v = 0.1 * i - 3.0;
        x.append_row(std::vector<double>{v});
        rows.push_back({v});
        y.push_back(2.0 + 3.0 * v);
    }
    const LinearModel m = fit_linear(x, y);
    const auto ref = oracle::normal_equations(rows, y);
    CHECK(std::abs(m.bias - 2.0) <= 1e-8);
    CHECK(std::abs(m.weights[0] - 3.0) <= 1e-8);
    CHECK(std::abs(m.bias - ref[0]) <= 1e-8);
    CHECK(std::abs(m.weights[0] - ref[1]) <= 1e-8);
    CHECK_FALSE(m.degenerate);
}

TEST_CASE("fit_linear: constant target") {
    const FeatureMatrix x{{1.0, 2.0}, {3.0, 1.0}, {0.0, 5.0}};
    const std::vector<double> y{5.0, 5.0, 5.0};
    const LinearModel m = fit_linear(x, y);
    CHECK(m.bias == 5.0);
    CHECK(m.weights == std::vector<double>{0.0, 0.0});
    CHECK(m.degenerate);
}

TEST_CASE("fit_linear: random 50 x 27 system against normal equations") {
    Rng rng(99);
    FeatureMatrix x;
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> r(27);
        for (double& v : r) v = rng.normal();
        x.append_row(r);
        rows.push_back(r);
        y.push_back(rng.normal() * 3.0 + r[0] - 2.0 * r[5]);
    }
    const LinearModel m = fit_linear(x, y);
    const auto ref = oracle::normal_equations(rows, y);
    CHECK(std::abs(m.bias - ref[0]) <= 1e-6);
    for (std::size_t j = 0; j < 27; ++j) CHECK(std::abs(m.weights[j] - ref[j + 1]) <= 1e-6);
}

TEST_CASE("fit_linear: under-determined is flagged") {
    const FeatureMatrix x{{1.0, 2.0, 3.0}, {2.0, 1.0, 0.0}};
    const std::vector<double> y{1.0, 2.0};
    const LinearModel m = fit_linear(x, y);
    CHECK(m.degenerate);
    CHECK(m.predict(x.row(0)) == doctest::Approx(1.0));
    CHECK(m.predict(x.row(1)) == doctest::Approx(2.0));
}

TEST_CASE("linear predict") {
    LinearModel m;
    m.bias = 1.0;
    m.weights = std::vector<double>(27, 0.0);
    m.weights[0] = 2.0;
    std::vector<double> x(27, 0.0);
    x[0] = 3.0;
    CHECK(m.predict(x) == 7.0);
    CHECK(testutil::code_of([&] { m.predict(std::vector<double>{1.0}); }) == ErrorCode::WidthMismatch);
}

TEST_CASE("unstandardized coefficients reproduce predictions") {
    Rng rng(3);
    FeatureMatrix x;
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> r{rng.uniform(0, 100), rng.uniform(-5, 5), rng.uniform(1000, 2000)};
        x.append_row(r);
        y.push_back(1.0 + 0.5 * r[0] - r[1] + 0.01 * r[2] + rng.normal());
    }
    const Standardizer s = Standardizer::fit(x);
    const LinearModel scaled = fit_linear(s.transform(x), y);
    const LinearModel raw = scaled.unstandardized(s);
    for (std::size_t i = 0; i < x.rows(); ++i)
        CHECK(raw.predict(x.row(i)) == doctest::Approx(scaled.predict(s.transform(x.row(i)))).epsilon(1e-10));
}
