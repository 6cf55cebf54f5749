#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace grassdisagg {

/// Number of 10-day periods ("decades") per year.
inline constexpr std::size_t kPeriods = 37;

/// Exogenous variables per period: Tmin, Tmax, Tavg, Rain, RG, im.
inline constexpr std::size_t kClimateVars = 6;

struct ClimateStep {
    double t_min = 0.0;  // degC
    double t_max = 0.0;  // degC
    double t_avg = 0.0;  // degC
    double rain = 0.0;   // mm, 10-day total
    double rg = 0.0;     // J/cm2, 10-day total
    double im = 0.0;     // de Martonne index, mm/degC

    std::array<double, kClimateVars> as_array() const { return {t_min, t_max, t_avg, rain, rg, im}; }

    bool operator==(const ClimateStep&) const = default;
};

using GrowthSeries = std::array<double, kPeriods>;
using ClimateSeries = std::array<ClimateStep, kPeriods>;

struct AnnualRecord {
    std::string site_id;
    int year = 0;
    GrowthSeries growth{};  // kg DM/ha/d, decade-average daily growth
    ClimateSeries climate{};
    double cumulative = 0.0;  // sum of the 37 decade means

    bool operator==(const AnnualRecord&) const = default;
};

/// Immutable-after-construction collection of annual records, indexed by site.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<AnnualRecord> records);

    /// Appends a record; throws DuplicateRecord on a repeated (site, year).
    void add(AnnualRecord record);

    const std::vector<AnnualRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const AnnualRecord& operator[](std::size_t i) const { return records_[i]; }

    /// Site ids in lexicographic order, each mapped to its record positions.
    const std::map<std::string, std::vector<std::size_t>>& site_index() const { return site_index_; }
    std::vector<std::string> sites() const;

    bool operator==(const Dataset& other) const { return records_ == other.records_; }

private:
    std::vector<AnnualRecord> records_;
    std::map<std::string, std::vector<std::size_t>> site_index_;
};

/// Column names of the series CSV. Defaults are the canonical header.
struct CsvSchema {
    std::string id = "id";
    std::string year = "year";
    std::string period = "period";
    std::string t_min = "Tmin";
    std::string t_max = "Tmax";
    std::string t_avg = "Tavg";
    std::string rain = "Rain";
    std::string rg = "RG";
    std::string im = "im";
    std::string growth = "growth";
};

struct LoadOptions {
    /// Accept empty growth cells (climate-only input for inference). Missing
    /// growth is stored as NaN and reported through `has_growth`.
    bool allow_missing_growth = false;
};

/// Loaded climate-only or full dataset with a per-record growth availability flag.
struct LoadResult {
    Dataset dataset;
    std::vector<bool> has_growth;
};

/// Reads a dataset from CSV. Every (site, year) must carry periods 1..37
/// exactly once. `im` is recomputed; a non-empty file value is only checked.
Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema = {});
LoadResult load_series(const std::filesystem::path& path, const CsvSchema& schema,
                       const LoadOptions& options);

/// Writes the canonical CSV (round-trips exactly through load_dataset).
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

/// de Martonne index as tabulated for the dataset: 37 * rain / (t_avg + 10).
double martonne_index(double rain, double t_avg);

/// Left-to-right sum of the 37 decade values.
double annual_cumulative(std::span<const double> growth);

/// Throws InvariantViolation if the climate step breaks its invariants.
void validate_climate(const ClimateStep& step);

/// Site-disjoint train/test split. ceil(test_fraction * #sites) sites go to test.
std::pair<Dataset, Dataset> split_by_site(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// Number of test sites chosen by split_by_site for a given site count.
std::size_t test_site_count(std::size_t n_sites, double test_fraction);

}  // namespace grassdisagg
