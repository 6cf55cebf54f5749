#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "grassdisagg/engine.hpp"
#include "grassdisagg/error.hpp"
#include "grassdisagg/eval.hpp"
#include "grassdisagg/linear.hpp"
#include "grassdisagg/synthgen.hpp"
#include "test_util.hpp"

using namespace grassdisagg;

namespace {

Regressor constant_model(double bias, std::size_t order = 3) {
    LinearModel m;
    m.bias = bias;
    m.weights.assign(feature_width(order), 0.0);
    return Regressor(m, Standardizer::identity(feature_width(order)));
}

double sum(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }

}  // namespace

TEST_CASE("training set shape and ordering") {
    Dataset one;
    one.add(testutil::make_record("A", 2001, 1));
    const TrainingSet a = build_training_set(one, DisaggConfig{});
    CHECK(a.x.rows() == 34);
    CHECK(a.x.cols() == 27);
    CHECK(a.y.size() == 34);

    Dataset two = one;
    two.add(testutil::make_record("B", 2001, 2));
    const TrainingSet b = build_training_set(two, DisaggConfig{});
    CHECK(b.x.rows() == 68);
    for (std::size_t i = 0; i < 34; ++i) {
        CHECK(b.y[i] == a.y[i]);
        CHECK(std::equal(a.x.row(i).begin(), a.x.row(i).end(), b.x.row(i).begin()));
    }
}

TEST_CASE("feature layout: lags then climate t..t-p") {
    const AnnualRecord r = testutil::make_record("A", 2001, 4);
    Dataset ds;
    ds.add(r);
    const TrainingSet set = build_training_set(ds, DisaggConfig{});
    const auto row = set.x.row(7);  // t = 10 (0-based)
    CHECK(set.y[7] == r.growth[10]);
    CHECK(row[0] == r.growth[9]);
    CHECK(row[1] == r.growth[8]);
    CHECK(row[2] == r.growth[7]);
    for (std::size_t j = 0; j <= 3; ++j) {
        const auto c = r.climate[10 - j].as_array();
        for (std::size_t k = 0; k < kClimateVars; ++k) CHECK(row[3 + j * kClimateVars + k] == c[k]);
    }
}

TEST_CASE("cumul targets are non-decreasing on generated data") {
    GenParams p = preset_params("default");
    p.n_sites = 5;
    p.n_years = 2;
    const Dataset ds = generate_dataset(p);
    DisaggConfig cfg;
    cfg.preprocessing = Transform::cumul;
    const TrainingSet set = build_training_set(ds, cfg);
    for (std::size_t i = 1; i < set.y.size(); ++i)
        if (i % 34 != 0) CHECK(set.y[i] >= set.y[i - 1]);
}

TEST_CASE("average initial values") {
    DisaggConfig cfg;
    CHECK(average_initial_values(cfg) == std::vector<double>{9.0, 9.0, 9.0});
    cfg.preprocessing = Transform::diff;
    CHECK(average_initial_values(cfg) == std::vector<double>{0.0, 0.0, 0.0});
    cfg.preprocessing = Transform::cumul;
    CHECK(average_initial_values(cfg) == std::vector<double>{9.0, 18.0, 27.0});
}

TEST_CASE("concrete initial values need known growth") {
    DisaggConfig cfg;
    cfg.init = InitMode::concrete;
    cfg.preprocessing = Transform::diff;
    AnnualRecord r = testutil::make_record("A", 2001, 5);
    CHECK(initial_values(cfg, r) ==
          std::vector<double>{r.growth[0], r.growth[1] - r.growth[0], r.growth[2] - r.growth[1]});
    r.growth[1] = std::nan("");
    CHECK(testutil::code_of([&] { initial_values(cfg, r); }) == ErrorCode::MissingGrowth);
}

TEST_CASE("zero-weight model degenerates to a constant") {
    const AnnualRecord r = testutil::make_record("A", 2001, 6);
    const DisaggConfig cfg;
    const auto init = average_initial_values(cfg);
    const DisaggResult out = disaggregate(constant_model(4.5), r.climate, std::nullopt, cfg, init);
    for (std::size_t t = 0; t < 3; ++t) CHECK(out.reconstructed[t] == 9.0);
    for (std::size_t t = 3; t < kPeriods; ++t) CHECK(out.reconstructed[t] == 4.5);
    CHECK_FALSE(out.negativity_flag);
}

TEST_CASE("scale post-processing meets the total") {
    const AnnualRecord r = testutil::make_record("A", 2001, 7);
    DisaggConfig cfg;
    cfg.postprocessing = PostProcess::scale;
    const auto out = disaggregate(constant_model(4.5), r.climate, 400.0, cfg, average_initial_values(cfg));
    CHECK(std::abs(out.achieved_sum - 400.0) <= 1e-7);
    CHECK(std::abs(sum(out.reconstructed) - 400.0) <= 1e-7);
    CHECK(out.raw_prediction[5] == 4.5);
}

TEST_CASE("diff mode integrates with the total") {
    const AnnualRecord r = testutil::make_record("A", 2001, 8);
    DisaggConfig cfg;
    cfg.preprocessing = Transform::diff;
    const auto init = average_initial_values(cfg);
    const auto with_total = disaggregate(constant_model(0.5), r.climate, 500.0, cfg, init);
    CHECK(std::abs(sum(with_total.reconstructed) - 500.0) <= 1e-9);
    const auto without = disaggregate(constant_model(0.5), r.climate, std::nullopt, cfg, init);
    CHECK(without.reconstructed[0] == 0.0);
    CHECK(without.reconstructed[36] == doctest::Approx(0.5 * 34));
}

TEST_CASE("post-processing formulas") {
    const std::vector<double> x{1.0, 2.0, 3.0};
    CHECK(postprocess(x, 12.0, PostProcess::scale) == std::vector<double>{2.0, 4.0, 6.0});
    CHECK(postprocess(x, 9.0, PostProcess::translate) == std::vector<double>{2.0, 3.0, 4.0});
    CHECK(postprocess(x, 6.0, PostProcess::scale) == x);
    CHECK(postprocess(x, 100.0, PostProcess::none) == x);
    CHECK(testutil::code_of([] { postprocess(std::vector<double>{1.0, -1.0}, 5.0, PostProcess::scale); }) ==
          ErrorCode::ZeroSumScale);
    CHECK(testutil::code_of([] { postprocess(std::vector<double>{}, 5.0, PostProcess::translate); }) ==
          ErrorCode::EmptySeries);
}

TEST_CASE("clamp and rescale") {
    const auto out = clamp_and_rescale(std::vector<double>{-2.0, 1.0, 3.0}, 8.0);
    CHECK(out == std::vector<double>{0.0, 2.0, 6.0});
    CHECK(clamp_and_rescale(std::vector<double>{-1.0, 2.0}, std::nullopt) == std::vector<double>{0.0, 2.0});
    CHECK(clamp_and_rescale(std::vector<double>{-1.0, -2.0}, 4.0) == std::vector<double>{2.0, 2.0});
}

TEST_CASE("precondition errors") {
    const AnnualRecord r = testutil::make_record("A", 2001, 9);
    DisaggConfig cfg;
    const auto init = average_initial_values(cfg);
    CHECK(testutil::code_of([&] {
              disaggregate(constant_model(1.0), r.climate, std::nullopt, cfg, std::vector<double>{1.0});
          }) == ErrorCode::ShapeError);
    CHECK(testutil::code_of([&] { disaggregate(constant_model(1.0, 2), r.climate, std::nullopt, cfg, init); }) ==
          ErrorCode::WidthMismatch);
    cfg.postprocessing = PostProcess::scale;
    CHECK(testutil::code_of([&] { disaggregate(constant_model(1.0), r.climate, std::nullopt, cfg, init); }) ==
          ErrorCode::MissingCumulative);
    cfg.postprocessing = PostProcess::none;
    CHECK(testutil::code_of([&] {
              disaggregate(constant_model(std::numeric_limits<double>::infinity()), r.climate, std::nullopt, cfg,
                           init);
          }) == ErrorCode::PredictionNonFinite);
    CHECK(testutil::code_of([] { train(Dataset{}, DisaggConfig{}); }) == ErrorCode::EmptyDataset);
}

TEST_CASE("exact linear law is recovered by lm with concrete init") {
    const GenParams p = preset_params("exact-linear");
    const Dataset ds = generate_dataset(p);
    DisaggConfig cfg;
    cfg.init = InitMode::concrete;
    const TrainedModel model = train(ds, cfg);
    double worst = 0.0;
    for (const auto& r : ds.records()) {
        const auto out = disaggregate(model.regressor, r.climate, std::nullopt, cfg, initial_values(cfg, r));
        worst = std::max(worst, rmse(r.growth, out.reconstructed));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("model save/load round trip") {
    testutil::TempDir dir("model");
    GenParams p = preset_params("default");
    p.n_sites = 6;
    p.n_years = 2;
    const Dataset ds = generate_dataset(p);
    for (const char* method : {"lm-diff-scale", "svr-raw", "rf-cumul-concrete"}) {
        CAPTURE(method);
        DisaggConfig cfg = parse_method(method, DisaggConfig{});
        cfg.forest.n_trees = 5;
        const TrainedModel model = train(ds, cfg);
        model.save(dir / "m.txt");
        const TrainedModel back = TrainedModel::load(dir / "m.txt");
        CHECK(back == model);
        model.save(dir / "m2.txt");
        CHECK(testutil::read_text(dir / "m.txt") == testutil::read_text(dir / "m2.txt"));
    }
    testutil::write_text(dir / "bad.txt", "not a model\n");
    CHECK(testutil::code_of([&] { TrainedModel::load(dir / "bad.txt"); }) == ErrorCode::ModelFormat);
}

TEST_CASE("batch disaggregation matches the single-series path for any job count") {
    GenParams p = preset_params("default");
    p.n_sites = 8;
    p.n_years = 2;
    const Dataset ds = generate_dataset(p);
    DisaggConfig cfg = parse_method("lm-raw-scale", DisaggConfig{});
    const TrainedModel model = train(ds, cfg);
    std::vector<BatchItem> items;
    for (const auto& r : ds.records()) items.push_back({&r, r.cumulative, true});
    const auto serial = disaggregate_batch(model.regressor, items, cfg, 1);
    const auto parallel = disaggregate_batch(model.regressor, items, cfg, 4);
    REQUIRE(serial.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto single =
            disaggregate(model.regressor, ds[i].climate, ds[i].cumulative, cfg, initial_values(cfg, ds[i]));
        CHECK(serial[i].reconstructed == single.reconstructed);
        CHECK(parallel[i].reconstructed == single.reconstructed);
    }
    items[3].growth_known = false;
    cfg.init = InitMode::concrete;
    CHECK(testutil::code_of([&] { disaggregate_batch(model.regressor, items, cfg, 2); }) ==
          ErrorCode::MissingGrowth);
}
