#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "grassdisagg/features.hpp"
#include "grassdisagg/forest.hpp"
#include "grassdisagg/linear.hpp"
#include "grassdisagg/svr.hpp"

namespace grassdisagg {

enum class RegressorKind { linear, svr, forest };

std::string_view to_string(RegressorKind kind) noexcept;
RegressorKind parse_regressor_kind(std::string_view name);

struct RegressorSpec {
    RegressorKind kind = RegressorKind::linear;
    SvrParams svr;
    ForestParams forest;
    /// Uniform row subsample (without replacement) for svr/forest; 0 keeps all rows.
    std::size_t sample_cap = 0;
    std::uint64_t sampling_seed = 0;
};

/// Fitted prediction function f_theta: standardizes raw features with the
/// train-fitted scaler, evaluates the learner and maps SVR targets back.
/// Immutable once fitted.
class Regressor {
public:
    using Model = std::variant<LinearModel, SvrModel, ForestModel>;

    Regressor() = default;
    Regressor(Model model, Standardizer scaler, TargetScaler target = {});

    static Regressor fit(const FeatureMatrix& x, std::span<const double> y, const RegressorSpec& spec, int jobs = 1);

    /// Prediction for one unscaled feature vector.
    double predict(std::span<const double> features) const;

    RegressorKind kind() const;
    std::size_t width() const { return scaler_.width(); }
    const Model& model() const { return model_; }
    const Standardizer& scaler() const { return scaler_; }
    const TargetScaler& target_scaler() const { return target_; }
    std::size_t training_rows() const { return training_rows_; }

    /// Versioned text block; doubles are hexfloats so the round trip is bit-exact.
    void write(std::ostream& out) const;
    static Regressor read(std::istream& in);

    bool operator==(const Regressor& other) const {
        return model_ == other.model_ && scaler_ == other.scaler_ && target_ == other.target_;
    }

private:
    Model model_;
    Standardizer scaler_;
    TargetScaler target_;
    std::size_t training_rows_ = 0;
};

/// Sorted row positions of a seeded uniform subsample of size min(cap, m).
std::vector<std::size_t> sample_rows(std::size_t m, std::size_t cap, std::uint64_t seed);

}  // namespace grassdisagg
