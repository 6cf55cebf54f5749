#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grassdisagg/config.hpp"
#include "grassdisagg/data.hpp"

namespace grassdisagg {

/// Root mean square error over all periods.
double rmse(std::span<const double> truth, std::span<const double> pred);

/// Per-period mean growth of the training records.
GrowthSeries naive_baseline(const Dataset& train);

inline constexpr const char* kNaiveMethod = "naive";

/// Summary statistics of a sample (quartiles by linear interpolation).
struct Distribution {
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (n - 1)
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};
Distribution describe(std::vector<double> values);

/// Studentized-range based Nemenyi constant q_alpha for K methods (2..20);
/// alpha must be 0.05 or 0.10.
double nemenyi_q(std::size_t k, double alpha);

struct RankAnalysis {
    std::vector<double> mean_ranks;
    /// Per-series ranks (1 = lowest error), ties share the average rank.
    std::vector<std::vector<double>> ranks;
    double critical_difference = 0.0;
    std::vector<std::vector<bool>> significant;  // |rank diff| > CD
    double friedman_chi2 = 0.0;
    double friedman_p = 1.0;
    double iman_davenport_f = 0.0;
};

/// Friedman ranks plus the Nemenyi critical difference
/// CD = q_alpha * sqrt(K (K + 1) / (6 N)). `errors[s][k]` is the error of
/// method k on series s.
RankAnalysis friedman_nemenyi(const std::vector<std::vector<double>>& errors, double alpha = 0.05);

struct SeriesScore {
    std::string site_id;
    int year = 0;
    std::string method;
    double rmse = 0.0;
    bool negativity_flag = false;
};

struct MethodSummary {
    std::string method;
    Distribution rmse;
    std::size_t negative_series = 0;
};

struct EvalReport {
    std::vector<std::string> methods;  // configs in order, then "naive"
    std::vector<SeriesScore> per_series;  // series-major, methods in `methods` order
    std::vector<MethodSummary> aggregate;
    std::optional<RankAnalysis> ranks;
    double alpha = 0.05;
    std::vector<std::string> notes;

    const MethodSummary* summary(const std::string& method) const;
};

struct EvalOptions {
    int jobs = 1;
    double alpha = 0.05;
};

/// Fits every config on `train`, disaggregates every `test` record and scores
/// it against the truth. A method that fails is dropped with a note.
EvalReport evaluate_methods(const Dataset& train, const Dataset& test, std::span<const DisaggConfig> configs,
                            const EvalOptions& options = {});

struct InitRatioRow {
    std::string method;  // method name of the average-init variant
    std::vector<std::optional<double>> ratios;  // per test series, absent when concrete RMSE < 1e-12
    Distribution summary;
    std::size_t below_one = 0;
    std::size_t absent = 0;
};

struct InitRatioStudy {
    std::vector<const AnnualRecord*> series;
    std::vector<InitRatioRow> rows;
    std::vector<std::string> notes;
};

/// RMSE(average init) / RMSE(concrete init) per config and test series.
InitRatioStudy init_ratio_study(const Dataset& train, const Dataset& test, std::span<const DisaggConfig> configs,
                                const EvalOptions& options = {});

/// Writes per_series.csv, aggregate.csv, ranks.csv, nemenyi.csv and
/// summary.txt (plus boxplot.svg when requested). Each file starts with
/// `header` as a `#` comment line when non-empty.
void write_report(const EvalReport& report, const std::filesystem::path& dir, const std::string& header,
                  bool with_svg = false);

/// Writes init_ratio.csv (per series) and init_ratio_summary.csv.
void write_init_study(const InitRatioStudy& study, const std::filesystem::path& dir, const std::string& header);

}  // namespace grassdisagg
