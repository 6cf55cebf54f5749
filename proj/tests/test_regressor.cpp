#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <vector>

#include "grassdisagg/error.hpp"
#include "grassdisagg/random.hpp"
#include "grassdisagg/regressor.hpp"
#include "test_util.hpp"

using namespace grassdisagg;

namespace {

void linear_problem(FeatureMatrix& x, std::vector<double>& y, std::size_t m) {
    Rng rng(31);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> r{rng.uniform(0.0, 50.0), rng.uniform(-10.0, 10.0), rng.uniform(1000.0, 20000.0)};
        x.append_row(r);
        y.push_back(4.0 + 0.7 * r[0] - 1.5 * r[1] + 0.002 * r[2]);
    }
}

Regressor round_trip(const Regressor& r) {
    std::stringstream s;
    r.write(s);
    return Regressor::read(s);
}

}  // namespace

TEST_CASE("linear regressor reproduces noiseless training targets") {
    FeatureMatrix x;
    std::vector<double> y;
    linear_problem(x, y, 60);
    const Regressor r = Regressor::fit(x, y, RegressorSpec{});
    for (std::size_t i = 0; i < x.rows(); ++i) CHECK(std::abs(r.predict(x.row(i)) - y[i]) <= 1e-8);
    CHECK(r.kind() == RegressorKind::linear);
    CHECK(r.width() == 3);
}

TEST_CASE("constant forest regressor") {
    FeatureMatrix x;
    std::vector<double> y;
    linear_problem(x, y, 30);
    std::fill(y.begin(), y.end(), 12.5);
    RegressorSpec spec;
    spec.kind = RegressorKind::forest;
    spec.forest.n_trees = 5;
    const Regressor r = Regressor::fit(x, y, spec);
    CHECK(r.predict(std::vector<double>{1.0, 2.0, 3.0}) == 12.5);
}

TEST_CASE("write/read is exact for every kind") {
    FeatureMatrix x;
    std::vector<double> y;
    linear_problem(x, y, 80);
    for (auto kind : {RegressorKind::linear, RegressorKind::svr, RegressorKind::forest}) {
        CAPTURE(to_string(kind));
        RegressorSpec spec;
        spec.kind = kind;
        spec.forest.n_trees = 8;
        spec.sample_cap = 50;
        const Regressor r = Regressor::fit(x, y, spec);
        const Regressor back = round_trip(r);
        CHECK(back == r);
        for (std::size_t i = 0; i < x.rows(); ++i) CHECK(back.predict(x.row(i)) == r.predict(x.row(i)));
    }
}

TEST_CASE("sampling cap bounds the training rows") {
    FeatureMatrix x;
    std::vector<double> y;
    linear_problem(x, y, 120);
    RegressorSpec spec;
    spec.kind = RegressorKind::svr;
    spec.sample_cap = 40;
    spec.sampling_seed = 3;
    CHECK(Regressor::fit(x, y, spec).training_rows() == 40);
    spec.kind = RegressorKind::linear;
    CHECK(Regressor::fit(x, y, spec).training_rows() == 120);

    const auto rows = sample_rows(120, 40, 3);
    CHECK(rows.size() == 40);
    CHECK(std::is_sorted(rows.begin(), rows.end()));
    CHECK(std::adjacent_find(rows.begin(), rows.end()) == rows.end());
    CHECK(rows == sample_rows(120, 40, 3));
    CHECK(sample_rows(10, 0, 1).size() == 10);
    CHECK(sample_rows(10, 50, 1).size() == 10);
}

TEST_CASE("errors") {
    FeatureMatrix x;
    std::vector<double> y;
    linear_problem(x, y, 10);
    const Regressor r = Regressor::fit(x, y, RegressorSpec{});
    CHECK(testutil::code_of([&] { r.predict(std::vector<double>{1.0}); }) == ErrorCode::WidthMismatch);
    x(2, 1) = std::numeric_limits<double>::infinity();
    CHECK(testutil::code_of([&] { Regressor::fit(x, y, RegressorSpec{}); }) == ErrorCode::ShapeError);

    std::stringstream bad("grassdisagg-regressor 99\n");
    CHECK(testutil::code_of([&] { Regressor::read(bad); }) == ErrorCode::ModelFormat);
    std::stringstream cut;
    r.write(cut);
    std::string text = cut.str();
    std::stringstream truncated(text.substr(0, text.size() / 2));
    CHECK(testutil::code_of([&] { Regressor::read(truncated); }) == ErrorCode::ModelFormat);
    CHECK(testutil::code_of([] { parse_regressor_kind("knn"); }) == ErrorCode::ConfigError);
    CHECK(parse_regressor_kind("forest") == RegressorKind::forest);
}
