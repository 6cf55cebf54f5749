#include "grassdisagg/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "grassdisagg/csv.hpp"
#include "grassdisagg/error.hpp"
#include "grassdisagg/parallel.hpp"
#include "grassdisagg/transforms.hpp"

namespace grassdisagg {

std::size_t feature_width(std::size_t order) { return order + (order + 1) * kClimateVars; }

void fill_features(std::span<const double> z, const ClimateSeries& climate, std::size_t t, std::size_t order,
                   std::span<double> out) {
    std::size_t k = 0;
    for (std::size_t i = 1; i <= order; ++i) out[k++] = z[t - i];
    for (std::size_t j = 0; j <= order; ++j) {
        const auto step = climate[t - j].as_array();
        for (double v : step) out[k++] = v;
    }
}

TrainingSet build_training_set(const Dataset& ds, const DisaggConfig& cfg) {
    cfg.validate();
    const std::size_t p = cfg.order;
    const std::size_t width = feature_width(p);
    TrainingSet set;
    set.x = FeatureMatrix(0, width);
    set.x.reserve_rows(ds.size() * (kPeriods - p));
    set.y.reserve(ds.size() * (kPeriods - p));
    std::vector<double> row(width);
    for (const auto& record : ds.records()) {
        const std::vector<double> z = forward(cfg.preprocessing, record.growth);
        for (std::size_t t = p; t < kPeriods; ++t) {
            fill_features(z, record.climate, t, p, row);
            set.x.append_row(row);
            set.y.push_back(z[t]);
        }
    }
    return set;
}

std::vector<double> average_initial_values(const DisaggConfig& cfg) {
    cfg.validate();
    // Differenced series start from zero increments, not forward() of the constant prefix.
    if (cfg.preprocessing == Transform::diff) return std::vector<double>(cfg.order, 0.0);
    const std::vector<double> prefix(cfg.order, cfg.average_init_value);
    return forward(cfg.preprocessing, prefix);
}

std::vector<double> initial_values(const DisaggConfig& cfg, const AnnualRecord& record) {
    cfg.validate();
    if (cfg.init == InitMode::average) return average_initial_values(cfg);
    // forward() on a prefix equals the prefix of forward() for all three modes.
    const std::span<const double> prefix(record.growth.data(), cfg.order);
    for (double v : prefix)
        if (!std::isfinite(v))
            throw Error(ErrorCode::MissingGrowth, "concrete initialization needs the first " +
                                                      std::to_string(cfg.order) + " growth values of (" +
                                                      record.site_id + ", " + std::to_string(record.year) + ")");
    return forward(cfg.preprocessing, prefix);
}

std::vector<double> postprocess(std::span<const double> x, double total, PostProcess kind) {
    if (x.empty()) throw Error(ErrorCode::EmptySeries, "cannot post-process an empty series");
    std::vector<double> out(x.begin(), x.end());
    double sum = 0.0;
    for (double v : x) sum += v;
    switch (kind) {
        case PostProcess::none:
            break;
        case PostProcess::scale: {
            if (!(std::abs(sum) > 1e-9))
                throw Error(ErrorCode::ZeroSumScale, "cannot rescale a series summing to " + csv::format_double(sum));
            const double factor = total / sum;
            for (double& v : out) v *= factor;
            break;
        }
        case PostProcess::translate: {
            const double shift = (total - sum) / static_cast<double>(out.size());
            for (double& v : out) v += shift;
            break;
        }
    }
    return out;
}

std::vector<double> clamp_and_rescale(std::span<const double> x, std::optional<double> total) {
    std::vector<double> out(x.begin(), x.end());
    for (double& v : out) v = std::max(v, 0.0);
    if (!total) return out;
    double sum = 0.0;
    for (double v : out) sum += v;
    if (!(sum > 1e-9)) {
        // Nothing positive left to rescale: spread the total evenly.
        std::fill(out.begin(), out.end(), *total / static_cast<double>(out.size()));
        return out;
    }
    return postprocess(out, *total, PostProcess::scale);
}

DisaggResult disaggregate(const Regressor& model, const ClimateSeries& climate, std::optional<double> cumulative,
                          const DisaggConfig& cfg, std::span<const double> init) {
    cfg.validate();
    const std::size_t p = cfg.order;
    if (init.size() != p)
        throw Error(ErrorCode::ShapeError,
                    "initialization holds " + std::to_string(init.size()) + " values, order is " + std::to_string(p));
    if (model.width() != feature_width(p))
        throw Error(ErrorCode::WidthMismatch, "model expects " + std::to_string(model.width()) +
                                                  " features, order " + std::to_string(p) + " gives " +
                                                  std::to_string(feature_width(p)));
    if (cfg.postprocessing != PostProcess::none && !cumulative)
        throw Error(ErrorCode::MissingCumulative,
                    "post-processing '" + std::string(to_string(cfg.postprocessing)) + "' needs the cumulative value");

    std::vector<double> z(kPeriods, 0.0);
    std::copy(init.begin(), init.end(), z.begin());
    std::vector<double> row(feature_width(p));
    for (std::size_t t = p; t < kPeriods; ++t) {
        fill_features(z, climate, t, p, row);
        const double v = model.predict(row);
        if (!std::isfinite(v))
            throw Error(ErrorCode::PredictionNonFinite, "model returned " + csv::format_double(v) + " at period " +
                                                            std::to_string(t + 1));
        z[t] = v;
    }

    const std::vector<double> x = cfg.preprocessing == Transform::diff && cumulative
                                      ? inverse_diff_with_total(z, *cumulative)
                                      : inverse(cfg.preprocessing, z);
    DisaggResult result;
    std::copy(x.begin(), x.end(), result.raw_prediction.begin());
    const std::vector<double> final_x =
        cfg.postprocessing == PostProcess::none ? x : postprocess(x, *cumulative, cfg.postprocessing);
    std::copy(final_x.begin(), final_x.end(), result.reconstructed.begin());
    for (double v : result.reconstructed) {
        result.achieved_sum += v;
        result.negativity_flag = result.negativity_flag || v < 0.0;
    }
    return result;
}

TrainedModel train(const Dataset& ds, const DisaggConfig& cfg, int jobs) {
    if (ds.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
    const TrainingSet set = build_training_set(ds, cfg);
    return TrainedModel{cfg, Regressor::fit(set.x, set.y, cfg.regressor_spec(), jobs)};
}

std::vector<DisaggResult> disaggregate_batch(const Regressor& model, std::span<const BatchItem> items,
                                             const DisaggConfig& cfg, int jobs) {
    std::vector<DisaggResult> out(items.size());
    parallel_for(items.size(), jobs, [&](std::size_t i) {
        const BatchItem& item = items[i];
        if (cfg.init == InitMode::concrete && !item.growth_known)
            throw Error(ErrorCode::MissingGrowth, "concrete initialization needs known growth for (" +
                                                      item.record->site_id + ", " +
                                                      std::to_string(item.record->year) + ")");
        const auto init = initial_values(cfg, *item.record);
        out[i] = disaggregate(model, item.record->climate, item.cumulative, cfg, init);
    });
    return out;
}

namespace {
constexpr const char* kModelMagic = "grassdisagg-model 1";
}

void TrainedModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write model '" + path.string() + "'");
    out << kModelMagic << '\n' << "config-begin\n" << config.to_text() << "config-end\n";
    regressor.write(out);
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open model '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kModelMagic)
        throw Error(ErrorCode::ModelFormat, path.string() + ": not a grassdisagg model file (version 1)");
    if (!std::getline(in, line) || line != "config-begin")
        throw Error(ErrorCode::ModelFormat, path.string() + ": missing config-begin");
    std::string text;
    while (std::getline(in, line) && line != "config-end") text += line + '\n';
    if (line != "config-end") throw Error(ErrorCode::ModelFormat, path.string() + ": missing config-end");

    TrainedModel model;
    KeyValues kv = KeyValues::parse(text, path.string());
    model.config.apply(kv);
    if (const auto extra = kv.unused(); !extra.empty())
        throw Error(ErrorCode::ModelFormat, path.string() + ": unknown config key '" + extra.front() + "'");
    model.config.validate();
    model.regressor = Regressor::read(in);
    if (model.regressor.width() != feature_width(model.config.order))
        throw Error(ErrorCode::ModelFormat, path.string() + ": regressor width does not match order");
    return model;
}

}  // namespace grassdisagg
