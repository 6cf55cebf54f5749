#include <doctest.h>

#include <cmath>
#include <vector>

#include "grassdisagg/error.hpp"
#include "grassdisagg/eval.hpp"
#include "grassdisagg/random.hpp"
#include "grassdisagg/synthgen.hpp"
#include "test_util.hpp"

using namespace grassdisagg;

namespace {

std::pair<Dataset, Dataset> small_split(int sites = 10, int years = 2) {
    GenParams p = preset_params("default");
    p.n_sites = sites;
    p.n_years = years;
    return split_by_site(generate_dataset(p), 0.3, 4);
}

}  // namespace

TEST_CASE("rmse") {
    std::vector<double> x(37), zeros(37, 0.0), fives(37, 5.0);
    for (std::size_t i = 0; i < 37; ++i) x[i] = 1.5 * i;
    CHECK(rmse(x, x) == 0.0);
    CHECK(rmse(zeros, fives) == 5.0);
    std::vector<double> pred(37, 0.0);
    pred[0] = 3.0;
    pred[1] = 4.0;
    CHECK(rmse(zeros, pred) == doctest::Approx(std::sqrt(25.0 / 37.0)).epsilon(1e-15));
    CHECK(rmse(zeros, pred) == doctest::Approx(0.8220).epsilon(1e-4));
    CHECK(testutil::code_of([&] { rmse(x, std::vector<double>(36, 0.0)); }) == ErrorCode::LengthError);
}

TEST_CASE("naive baseline") {
    Dataset one;
    one.add(testutil::make_record("A", 2001, 1));
    CHECK(naive_baseline(one) == one[0].growth);

    Dataset two = one;
    two.add(testutil::make_record("B", 2001, 2));
    const GrowthSeries mid = naive_baseline(two);
    for (std::size_t t = 0; t < kPeriods; ++t)
        CHECK(mid[t] == doctest::Approx(0.5 * (two[0].growth[t] + two[1].growth[t])).epsilon(1e-15));
}

TEST_CASE("describe") {
    const Distribution d = describe({4.0, 1.0, 3.0, 2.0, 5.0});
    CHECK(d.count == 5);
    CHECK(d.mean == 3.0);
    CHECK(d.sd == doctest::Approx(std::sqrt(2.5)));
    CHECK(d.min == 1.0);
    CHECK(d.q1 == 2.0);
    CHECK(d.median == 3.0);
    CHECK(d.q3 == 4.0);
    CHECK(d.max == 5.0);
    CHECK(describe({1.0, 2.0, 3.0, 4.0}).median == 2.5);
}

TEST_CASE("nemenyi q table") {
    CHECK(nemenyi_q(2, 0.05) == 1.960);
    CHECK(nemenyi_q(10, 0.05) == 3.164);
    CHECK(nemenyi_q(20, 0.05) == 3.544);
    CHECK(nemenyi_q(2, 0.10) == 1.645);
    CHECK(nemenyi_q(10, 0.10) == 2.920);
    CHECK(testutil::code_of([] { nemenyi_q(1, 0.05); }) == ErrorCode::ShapeError);
    CHECK(testutil::code_of([] { nemenyi_q(21, 0.05); }) == ErrorCode::ShapeError);
    CHECK(testutil::code_of([] { nemenyi_q(5, 0.01); }) == ErrorCode::ConfigError);
}

TEST_CASE("friedman ranks") {
    SUBCASE("one method always better") {
        std::vector<std::vector<double>> e;
        for (int s = 0; s < 20; ++s) e.push_back({1.0 + s, 2.0 + s});
        const RankAnalysis r = friedman_nemenyi(e);
        CHECK(r.mean_ranks == std::vector<double>{1.0, 2.0});
    }
    SUBCASE("identical columns tie") {
        std::vector<std::vector<double>> e(30, std::vector<double>(4, 2.5));
        const RankAnalysis r = friedman_nemenyi(e);
        for (double m : r.mean_ranks) CHECK(m == 2.5);
        for (const auto& row : r.significant)
            for (bool b : row) CHECK_FALSE(b);
        CHECK(r.friedman_chi2 == 0.0);
    }
    SUBCASE("K = 10, N = 100 critical difference and rank sums") {
        Rng rng(1);
        std::vector<std::vector<double>> e(100, std::vector<double>(10));
        for (auto& row : e)
            for (std::size_t k = 0; k < 10; ++k) row[k] = std::floor(rng.uniform(0.0, 4.0)) + 0.1 * k * rng.uniform();
        const RankAnalysis r = friedman_nemenyi(e, 0.05);
        CHECK(r.critical_difference == doctest::Approx(3.164 * std::sqrt(110.0 / 600.0)).epsilon(1e-12));
        CHECK(std::abs(r.critical_difference - 1.3548) <= 1e-3);
        for (const auto& ranks : r.ranks) {
            double sum = 0.0;
            for (double v : ranks) sum += v;
            CHECK(sum == 55.0);
        }
    }
    SUBCASE("ties share the average rank") {
        const RankAnalysis r = friedman_nemenyi({{1.0, 1.0, 3.0, 0.5}, {2.0, 1.0, 1.0, 1.0}});
        CHECK(r.ranks[0] == std::vector<double>{2.5, 2.5, 4.0, 1.0});
        CHECK(r.ranks[1] == std::vector<double>{4.0, 2.0, 2.0, 2.0});
    }
}

TEST_CASE("friedman statistic against a hand computation") {
    // Ranks per series: (1,2,3), (1,3,2), (1,2,3), (2,1,3); rank sums 5, 8, 11.
    const std::vector<std::vector<double>> e{{1, 2, 3}, {1, 3, 2}, {1, 2, 3}, {2, 1, 3}};
    const RankAnalysis r = friedman_nemenyi(e);
    const double n = 4, k = 3;
    const double chi2 = 12.0 / (n * k * (k + 1)) * (25.0 + 64.0 + 121.0) - 3.0 * n * (k + 1);
    CHECK(r.friedman_chi2 == doctest::Approx(chi2));
    CHECK(r.friedman_p == doctest::Approx(std::exp(-chi2 / 2.0)));  // chi-squared with 2 dof
}

TEST_CASE("evaluate: naive only when no configs") {
    const auto [train, test] = small_split();
    const EvalReport r = evaluate_methods(train, test, {});
    CHECK(r.methods == std::vector<std::string>{"naive"});
    CHECK(r.per_series.size() == test.size());
    CHECK_FALSE(r.ranks.has_value());
}

TEST_CASE("evaluate: nine methods plus naive, deterministic for any job count") {
    const auto [train, test] = small_split(12, 2);
    DisaggConfig base;
    base.forest.n_trees = 10;
    const auto configs = standard_methods(base);
    const EvalReport a = evaluate_methods(train, test, configs, {1, 0.05});
    const EvalReport b = evaluate_methods(train, test, configs, {3, 0.05});
    REQUIRE(a.methods.size() == 10);
    CHECK(a.methods.back() == "naive");
    CHECK(a.ranks.has_value());
    REQUIRE(a.per_series.size() == b.per_series.size());
    for (std::size_t i = 0; i < a.per_series.size(); ++i) {
        CHECK(a.per_series[i].rmse == b.per_series[i].rmse);
        CHECK(a.per_series[i].method == b.per_series[i].method);
    }

    testutil::TempDir dir("report");
    write_report(a, dir / "a", "hdr", true);
    write_report(b, dir / "b", "hdr", true);
    for (const char* f : {"per_series.csv", "aggregate.csv", "ranks.csv", "nemenyi.csv", "summary.txt", "boxplot.svg"})
        CHECK(testutil::read_text(dir / "a" / f) == testutil::read_text(dir / "b" / f));
    CHECK(testutil::read_text(dir / "a" / "aggregate.csv").rfind("# hdr\n", 0) == 0);
}

TEST_CASE("init study: a model without lag weights gives ratio 1") {
    const auto [train, test] = small_split();
    DisaggConfig cfg;
    cfg.order = 1;
    const std::vector<DisaggConfig> configs{cfg};
    const InitRatioStudy s = init_ratio_study(train, test, configs);
    REQUIRE(s.rows.size() == 1);
    CHECK(s.rows[0].ratios.size() == test.size());

    // Constant training growth makes the fitted lag weight exactly zero.
    Dataset flat;
    for (const auto& r : train.records()) {
        AnnualRecord c = r;
        c.growth.fill(20.0);
        c.cumulative = annual_cumulative(c.growth);
        flat.add(c);
    }
    Dataset flat_test;
    for (const auto& r : test.records()) {
        AnnualRecord c = r;
        for (std::size_t t = 0; t < kPeriods; ++t) c.growth[t] = t < 3 ? 20.0 : 20.0 + std::sin(static_cast<double>(t));
        c.cumulative = annual_cumulative(c.growth);
        flat_test.add(c);
    }
    DisaggConfig scaled;
    scaled.average_init_value = 20.0;
    const std::vector<DisaggConfig> one{scaled};
    const InitRatioStudy f = init_ratio_study(flat, flat_test, one);
    for (const auto& ratio : f.rows[0].ratios) {
        REQUIRE(ratio.has_value());
        CHECK(*ratio == doctest::Approx(1.0).epsilon(1e-12));
    }
}
