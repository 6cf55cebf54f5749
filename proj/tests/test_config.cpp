#include <doctest.h>

#include "grassdisagg/config.hpp"
#include "grassdisagg/error.hpp"
#include "test_util.hpp"

using namespace grassdisagg;

TEST_CASE("key = value parsing") {
    KeyValues kv = KeyValues::parse("# comment\norder = 4\n\nregressor=svr   # trailing\nsvr.c = 10\norder = 5\n");
    CHECK(kv.get("order") == "5");
    CHECK(kv.take_int("order") == 5);
    CHECK(kv.take("regressor") == "svr");
    CHECK(kv.unused() == std::vector<std::string>{"svr.c"});
    CHECK(testutil::code_of([] { KeyValues::parse("no equals sign\n"); }) == ErrorCode::ConfigError);
    KeyValues bad = KeyValues::parse("order = three\n");
    CHECK(testutil::code_of([&] { bad.take_int("order"); }) == ErrorCode::ConfigError);
}

TEST_CASE("merge lets the overlay win") {
    KeyValues base = KeyValues::parse("order = 3\ninit = average\n");
    base.merge(KeyValues::parse("order = 2\n"));
    CHECK(base.get("order") == "2");
    CHECK(base.get("init") == "average");
}

TEST_CASE("config text round-trips through apply") {
    DisaggConfig cfg;
    cfg.order = 2;
    cfg.preprocessing = Transform::cumul;
    cfg.regressor = RegressorKind::forest;
    cfg.init = InitMode::concrete;
    cfg.postprocessing = PostProcess::translate;
    cfg.svr.c_box = 12.5;
    cfg.forest.n_trees = 17;
    cfg.forest.bootstrap = false;
    cfg.seed = 1234;
    KeyValues kv = KeyValues::parse(cfg.to_text());
    DisaggConfig back;
    back.apply(kv);
    CHECK(kv.unused().empty());
    CHECK(back == cfg);
    CHECK(back.hash() == cfg.hash());
    back.seed = 1235;
    CHECK(back.hash() != cfg.hash());
}

TEST_CASE("method names") {
    const DisaggConfig base;
    CHECK(base.method_name() == "lm-raw");
    const DisaggConfig c = parse_method("svr-diff-concrete-scale", base);
    CHECK(c.regressor == RegressorKind::svr);
    CHECK(c.preprocessing == Transform::diff);
    CHECK(c.init == InitMode::concrete);
    CHECK(c.postprocessing == PostProcess::scale);
    CHECK(c.method_name() == "svr-diff-concrete-scale");
    CHECK(parse_method("rf-cumul-trans", base).postprocessing == PostProcess::translate);
    CHECK(testutil::code_of([&] { parse_method("svr", base); }) == ErrorCode::ConfigError);
    CHECK(testutil::code_of([&] { parse_method("svr-raw-bogus", base); }) == ErrorCode::ConfigError);
}

TEST_CASE("standard methods: nine combinations") {
    const auto methods = standard_methods(DisaggConfig{});
    REQUIRE(methods.size() == 9);
    CHECK(methods[0].method_name() == "lm-raw");
    CHECK(methods[4].method_name() == "svr-diff");
    CHECK(methods[8].method_name() == "rf-cumul");
}

TEST_CASE("validation") {
    DisaggConfig cfg;
    cfg.order = 0;
    CHECK(testutil::code_of([&] { cfg.validate(); }) == ErrorCode::ConfigError);
    cfg.order = 37;
    CHECK(testutil::code_of([&] { cfg.validate(); }) == ErrorCode::ConfigError);
    cfg.order = 36;
    cfg.validate();
    cfg.average_init_value = -1.0;
    CHECK(testutil::code_of([&] { cfg.validate(); }) == ErrorCode::ConfigError);
}

TEST_CASE("sub-seeds differ by stream") {
    DisaggConfig cfg;
    const RegressorSpec a = cfg.regressor_spec();
    CHECK(a.forest.seed != a.sampling_seed);
    cfg.regressor = RegressorKind::svr;
    CHECK(cfg.regressor_spec().sample_cap == 2000);
    cfg.regressor = RegressorKind::forest;
    CHECK(cfg.regressor_spec().sample_cap == 5000);
    cfg.regressor = RegressorKind::linear;
    CHECK(cfg.regressor_spec().sample_cap == 0);
}
