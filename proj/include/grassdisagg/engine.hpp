#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "grassdisagg/config.hpp"
#include "grassdisagg/data.hpp"
#include "grassdisagg/features.hpp"
#include "grassdisagg/regressor.hpp"

namespace grassdisagg {

/// Feature layout for order p: [z(t-1) .. z(t-p), y(t) .. y(t-p)] with the
/// six climate variables of each step flattened, i.e. p + (p+1)*6 columns.
std::size_t feature_width(std::size_t order);

/// Writes the feature row predicting index t (0-based, t >= order) of `z`.
void fill_features(std::span<const double> z, const ClimateSeries& climate, std::size_t t, std::size_t order,
                   std::span<double> out);

struct TrainingSet {
    FeatureMatrix x;
    std::vector<double> y;
};

/// Teacher-forced rows: for each record (in order) and each t in [p, 37),
/// features from the ground-truth transformed series, target z(t).
TrainingSet build_training_set(const Dataset& ds, const DisaggConfig& cfg);

/// First p values of the transformed series: taken from the record's growth
/// (concrete) or from a constant average-growth prefix v (average).
std::vector<double> initial_values(const DisaggConfig& cfg, const AnnualRecord& record);
/// raw: v,v,v. diff: 0,0,0. cumul: v,2v,3v.
std::vector<double> average_initial_values(const DisaggConfig& cfg);

struct DisaggResult {
    GrowthSeries reconstructed{};
    GrowthSeries raw_prediction{};
    bool negativity_flag = false;
    double achieved_sum = 0.0;
};

/// Rescales or shifts `x` so it sums to `total`. Translation spreads the gap
/// evenly, adding (total - sum)/n to every value.
std::vector<double> postprocess(std::span<const double> x, double total, PostProcess kind);

/// Clamps negatives to zero, then rescales to `total` when given.
std::vector<double> clamp_and_rescale(std::span<const double> x, std::optional<double> total);

/// Recursive reconstruction: seeds the transformed series with `init`, then
/// predicts each later step from previously predicted values and the climate.
DisaggResult disaggregate(const Regressor& model, const ClimateSeries& climate, std::optional<double> cumulative,
                          const DisaggConfig& cfg, std::span<const double> init);

/// Fitted method: the configuration it was trained with plus its regressor.
struct TrainedModel {
    DisaggConfig config;
    Regressor regressor;

    void save(const std::filesystem::path& path) const;
    static TrainedModel load(const std::filesystem::path& path);
    bool operator==(const TrainedModel&) const = default;
};

TrainedModel train(const Dataset& ds, const DisaggConfig& cfg, int jobs = 1);

struct BatchItem {
    const AnnualRecord* record = nullptr;
    std::optional<double> cumulative;
    /// Required for concrete initialization.
    bool growth_known = true;
};

/// Disaggregates every item on up to `jobs` threads; results in input order.
std::vector<DisaggResult> disaggregate_batch(const Regressor& model, std::span<const BatchItem> items,
                                             const DisaggConfig& cfg, int jobs);

}  // namespace grassdisagg
