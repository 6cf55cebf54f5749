#include "grassdisagg/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "grassdisagg/csv.hpp"
#include "grassdisagg/error.hpp"
#include "grassdisagg/random.hpp"

namespace grassdisagg {

Dataset::Dataset(std::vector<AnnualRecord> records) {
    records_.reserve(records.size());
    for (auto& r : records) add(std::move(r));
}

void Dataset::add(AnnualRecord record) {
    auto& positions = site_index_[record.site_id];
    for (std::size_t pos : positions) {
        if (records_[pos].year == record.year)
            throw Error(ErrorCode::DuplicateRecord,
                        "site '" + record.site_id + "' year " + std::to_string(record.year) + " appears twice");
    }
    positions.push_back(records_.size());
    records_.push_back(std::move(record));
}

std::vector<std::string> Dataset::sites() const {
    std::vector<std::string> out;
    out.reserve(site_index_.size());
    for (const auto& [site, _] : site_index_) out.push_back(site);
    return out;
}

double martonne_index(double rain, double t_avg) {
    if (!(t_avg > -10.0))
        throw Error(ErrorCode::DomainError, "de Martonne index undefined for Tavg <= -10 (got " +
                                                csv::format_double(t_avg) + ")");
    return 37.0 * rain / (t_avg + 10.0);
}

double annual_cumulative(std::span<const double> growth) {
    if (growth.size() != kPeriods)
        throw Error(ErrorCode::LengthError,
                    "expected " + std::to_string(kPeriods) + " values, got " + std::to_string(growth.size()));
    double sum = 0.0;
    for (double g : growth) sum += g;
    return sum;
}

void validate_climate(const ClimateStep& s) {
    if (!(s.t_min <= s.t_avg && s.t_avg <= s.t_max))
        throw Error(ErrorCode::InvariantViolation, "temperatures must satisfy Tmin <= Tavg <= Tmax");
    if (!(s.rain >= 0.0)) throw Error(ErrorCode::InvariantViolation, "negative rain");
    if (!(s.rg >= 0.0)) throw Error(ErrorCode::InvariantViolation, "negative radiation");
    if (!(s.t_avg > -10.0)) throw Error(ErrorCode::InvariantViolation, "Tavg <= -10");
}

namespace {

struct PendingRecord {
    AnnualRecord record;
    std::array<long long, kPeriods> row_of_period{};  // 0 = not seen
    std::array<bool, kPeriods> growth_present{};
};

std::string row_context(long long row) { return "row " + std::to_string(row) + ": "; }

}  // namespace

LoadResult load_series(const std::filesystem::path& path, const CsvSchema& schema, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");

    std::string line;
    auto is_comment = [](const std::string& l) { return !l.empty() && l.front() == '#'; };
    long long row = 0;
    do {
        if (!std::getline(in, line))
            throw Error(ErrorCode::SchemaError, path.string() + ": empty file, header required");
        ++row;
    } while (is_comment(line));
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM

    const auto header = csv::split(line);
    auto column = [&](const std::string& name, bool required) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            if (required) throw Error(ErrorCode::SchemaError, path.string() + ": header lacks column '" + name + "'");
            return -1;
        }
        return it - header.begin();
    };
    const auto c_id = column(schema.id, true);
    const auto c_year = column(schema.year, true);
    const auto c_period = column(schema.period, true);
    const auto c_tmin = column(schema.t_min, true);
    const auto c_tmax = column(schema.t_max, true);
    const auto c_tavg = column(schema.t_avg, true);
    const auto c_rain = column(schema.rain, true);
    const auto c_rg = column(schema.rg, true);
    const auto c_im = column(schema.im, false);
    const auto c_growth = column(schema.growth, !options.allow_missing_growth);

    std::vector<PendingRecord> pending;
    std::map<std::pair<std::string, long long>, std::size_t> key_to_pending;

    while (std::getline(in, line)) {
        ++row;
        if (csv::trim(line).empty() || is_comment(line)) continue;
        const auto fields = csv::split(line);
        if (fields.size() != header.size())
            throw Error(ErrorCode::SchemaError, row_context(row) + "expected " + std::to_string(header.size()) +
                                                    " fields, got " + std::to_string(fields.size()));

        auto number = [&](std::ptrdiff_t col, const std::string& name) {
            double v = 0.0;
            if (!csv::parse_double(fields[static_cast<std::size_t>(col)], v))
                throw Error(ErrorCode::NonNumeric, row_context(row) + "column '" + name + "' value '" +
                                                       std::string(fields[static_cast<std::size_t>(col)]) + "'");
            return v;
        };
        auto integer = [&](std::ptrdiff_t col, const std::string& name) {
            long long v = 0;
            if (!csv::parse_int(fields[static_cast<std::size_t>(col)], v))
                throw Error(ErrorCode::NonNumeric, row_context(row) + "column '" + name + "' value '" +
                                                       std::string(fields[static_cast<std::size_t>(col)]) + "'");
            return v;
        };

        const std::string site(fields[static_cast<std::size_t>(c_id)]);
        if (site.empty()) throw Error(ErrorCode::InvariantViolation, row_context(row) + "empty id");
        const long long year = integer(c_year, schema.year);
        const long long period = integer(c_period, schema.period);
        if (period < 1 || period > static_cast<long long>(kPeriods))
            throw Error(ErrorCode::InvariantViolation,
                        row_context(row) + "period " + std::to_string(period) + " outside 1..37");

        ClimateStep step;
        step.t_min = number(c_tmin, schema.t_min);
        step.t_max = number(c_tmax, schema.t_max);
        step.t_avg = number(c_tavg, schema.t_avg);
        step.rain = number(c_rain, schema.rain);
        step.rg = number(c_rg, schema.rg);
        try {
            validate_climate(step);
        } catch (const Error& e) {
            throw Error(e.code(), row_context(row) + e.what());
        }
        step.im = martonne_index(step.rain, step.t_avg);
        if (c_im >= 0 && !csv::trim(fields[static_cast<std::size_t>(c_im)]).empty()) {
            const double file_im = number(c_im, schema.im);
            if (std::abs(file_im - step.im) > 1e-6 * std::abs(step.im) && std::abs(file_im - step.im) > 1e-12)
                throw Error(ErrorCode::ImMismatch, row_context(row) + "file im " + csv::format_double(file_im) +
                                                       " vs recomputed " + csv::format_double(step.im));
        }

        bool growth_present = false;
        double growth = std::numeric_limits<double>::quiet_NaN();
        if (c_growth >= 0 && !csv::trim(fields[static_cast<std::size_t>(c_growth)]).empty()) {
            growth = number(c_growth, schema.growth);
            if (growth < 0.0)
                throw Error(ErrorCode::InvariantViolation,
                            row_context(row) + "negative growth " + csv::format_double(growth));
            growth_present = true;
        } else if (!options.allow_missing_growth) {
            throw Error(ErrorCode::NonNumeric, row_context(row) + "missing growth value");
        }

        const auto key = std::make_pair(site, year);
        auto [it, inserted] = key_to_pending.try_emplace(key, pending.size());
        if (inserted) {
            PendingRecord p;
            p.record.site_id = site;
            p.record.year = static_cast<int>(year);
            pending.push_back(std::move(p));
        }
        PendingRecord& p = pending[it->second];
        const auto idx = static_cast<std::size_t>(period - 1);
        if (p.row_of_period[idx] != 0)
            throw Error(ErrorCode::InvariantViolation, row_context(row) + "period " + std::to_string(period) +
                                                           " duplicated for (" + site + ", " + std::to_string(year) +
                                                           "), first seen at row " +
                                                           std::to_string(p.row_of_period[idx]));
        p.row_of_period[idx] = row;
        p.record.climate[idx] = step;
        p.record.growth[idx] = growth;
        p.growth_present[idx] = growth_present;
    }

    LoadResult result;
    for (auto& p : pending) {
        for (std::size_t t = 0; t < kPeriods; ++t) {
            if (p.row_of_period[t] == 0)
                throw Error(ErrorCode::MissingPeriod, "(" + p.record.site_id + ", " + std::to_string(p.record.year) +
                                                          ") lacks period " + std::to_string(t + 1));
        }
        const auto present = std::count(p.growth_present.begin(), p.growth_present.end(), true);
        if (present != 0 && present != static_cast<long>(kPeriods))
            throw Error(ErrorCode::InvariantViolation, "(" + p.record.site_id + ", " +
                                                           std::to_string(p.record.year) +
                                                           ") has growth for only some periods");
        const bool full = present == static_cast<long>(kPeriods);
        p.record.cumulative = full ? annual_cumulative(p.record.growth) : std::numeric_limits<double>::quiet_NaN();
        result.has_growth.push_back(full);
        result.dataset.add(std::move(p.record));
    }
    return result;
}

Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema) {
    return load_series(path, schema, LoadOptions{}).dataset;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << "id,year,period,Tmin,Tmax,Tavg,Rain,RG,im,growth\n";
    for (const auto& r : ds.records()) {
        for (std::size_t t = 0; t < kPeriods; ++t) {
            const auto& c = r.climate[t];
            out << r.site_id << ',' << r.year << ',' << (t + 1) << ',' << csv::format_double(c.t_min) << ','
                << csv::format_double(c.t_max) << ',' << csv::format_double(c.t_avg) << ','
                << csv::format_double(c.rain) << ',' << csv::format_double(c.rg) << ','
                << csv::format_double(c.im) << ',';
            if (std::isfinite(r.growth[t])) out << csv::format_double(r.growth[t]);
            out << '\n';
        }
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

std::size_t test_site_count(std::size_t n_sites, double test_fraction) {
    // Guard against products like 469 * (141/469) landing just above 141.
    const double raw = test_fraction * static_cast<double>(n_sites);
    auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    return std::clamp<std::size_t>(n, 1, n_sites - 1);
}

std::pair<Dataset, Dataset> split_by_site(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(ErrorCode::ConfigError, "test fraction must lie in (0, 1)");
    std::vector<std::string> sites = ds.sites();
    if (sites.size() < 2)
        throw Error(ErrorCode::TooFewSites, "need at least 2 distinct sites, got " + std::to_string(sites.size()));

    Rng rng(seed);
    rng.shuffle(std::span<std::string>(sites));
    const std::size_t n_test = test_site_count(sites.size(), test_fraction);
    const std::set<std::string> test_sites(sites.begin(), sites.begin() + static_cast<std::ptrdiff_t>(n_test));

    Dataset train;
    Dataset test;
    for (const auto& r : ds.records()) {
        if (test_sites.contains(r.site_id))
            test.add(r);
        else
            train.add(r);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace grassdisagg
