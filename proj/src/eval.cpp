#include "grassdisagg/eval.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "grassdisagg/csv.hpp"
#include "grassdisagg/engine.hpp"
#include "grassdisagg/error.hpp"

namespace grassdisagg {

double rmse(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size())
        throw Error(ErrorCode::LengthError, "rmse: lengths " + std::to_string(truth.size()) + " and " +
                                                std::to_string(pred.size()) + " differ");
    if (truth.empty()) throw Error(ErrorCode::EmptySeries, "rmse of empty series");
    double ss = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        const double d = truth[t] - pred[t];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(truth.size()));
}

GrowthSeries naive_baseline(const Dataset& train) {
    if (train.empty()) throw Error(ErrorCode::EmptyDataset, "naive baseline needs at least one training record");
    GrowthSeries mean{};
    for (const auto& r : train.records())
        for (std::size_t t = 0; t < kPeriods; ++t) mean[t] += r.growth[t];
    const auto n = static_cast<double>(train.size());
    for (double& v : mean) v /= n;
    // Identical inputs must give back the exact series.
    for (std::size_t t = 0; t < kPeriods; ++t) {
        const double first = train[0].growth[t];
        const bool same = std::all_of(train.records().begin(), train.records().end(),
                                      [&](const AnnualRecord& r) { return r.growth[t] == first; });
        if (same) mean[t] = first;
    }
    return mean;
}

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

Distribution describe(std::vector<double> values) {
    Distribution d;
    d.count = values.size();
    if (values.empty()) return d;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    d.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - d.mean) * (v - d.mean);
        d.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    d.min = values.front();
    d.max = values.back();
    d.q1 = quantile_sorted(values, 0.25);
    d.median = quantile_sorted(values, 0.5);
    d.q3 = quantile_sorted(values, 0.75);
    return d;
}

double nemenyi_q(std::size_t k, double alpha) {
    // Two-tailed Nemenyi constants: studentized range quantile / sqrt(2),
    // infinite degrees of freedom. Entries for K <= 10 follow the commonly
    // published table; the remainder come from the same quantile function.
    static constexpr double q05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219,
                                     3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544};
    static constexpr double q10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978,
                                     3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319};
    if (k < 2 || k > 20) throw Error(ErrorCode::ShapeError, "Nemenyi table covers 2..20 methods, got " + std::to_string(k));
    if (std::abs(alpha - 0.05) < 1e-12) return q05[k - 2];
    if (std::abs(alpha - 0.10) < 1e-12) return q10[k - 2];
    throw Error(ErrorCode::ConfigError, "Nemenyi table only has alpha = 0.05 or 0.10");
}

RankAnalysis friedman_nemenyi(const std::vector<std::vector<double>>& errors, double alpha) {
    const std::size_t n = errors.size();
    if (n < 2) throw Error(ErrorCode::ShapeError, "need at least 2 series, got " + std::to_string(n));
    const std::size_t k = errors.front().size();
    if (k < 2) throw Error(ErrorCode::ShapeError, "need at least 2 methods, got " + std::to_string(k));
    for (const auto& row : errors) {
        if (row.size() != k) throw Error(ErrorCode::ShapeError, "ragged error matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw Error(ErrorCode::ShapeError, "absent or non-finite cell in error matrix");
    }
    const double q = nemenyi_q(k, alpha);

    RankAnalysis out;
    out.ranks.assign(n, std::vector<double>(k));
    out.mean_ranks.assign(k, 0.0);
    std::vector<std::size_t> order(k);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& row = errors[s];
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
            // positions i..j (0-based) share ranks i+1..j+1
            const double shared = 0.5 * static_cast<double>(i + j + 2);
            for (std::size_t t = i; t <= j; ++t) out.ranks[s][order[t]] = shared;
            i = j + 1;
        }
        for (std::size_t m = 0; m < k; ++m) out.mean_ranks[m] += out.ranks[s][m];
    }
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    for (double& r : out.mean_ranks) r /= nd;

    out.critical_difference = q * std::sqrt(kd * (kd + 1.0) / (6.0 * nd));
    out.significant.assign(k, std::vector<bool>(k, false));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
            out.significant[a][b] = std::abs(out.mean_ranks[a] - out.mean_ranks[b]) > out.critical_difference;

    double sum_sq = 0.0;
    for (double r : out.mean_ranks) sum_sq += r * r;
    out.friedman_chi2 = 12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
    if (out.friedman_chi2 < 0.0) out.friedman_chi2 = 0.0;
    const boost::math::chi_squared chi2(kd - 1.0);
    out.friedman_p = boost::math::cdf(boost::math::complement(chi2, out.friedman_chi2));
    const double denom = nd * (kd - 1.0) - out.friedman_chi2;
    out.iman_davenport_f = denom > 0.0 ? (nd - 1.0) * out.friedman_chi2 / denom
                                       : std::numeric_limits<double>::infinity();
    return out;
}

const MethodSummary* EvalReport::summary(const std::string& method) const {
    for (const auto& s : aggregate)
        if (s.method == method) return &s;
    return nullptr;
}

namespace {

/// Regressors are shared between methods that differ only in how they
/// disaggregate (initialization, post-processing).
std::string fit_key(DisaggConfig cfg) {
    cfg.init = InitMode::average;
    cfg.postprocessing = PostProcess::none;
    cfg.average_init_value = 0.0;
    return cfg.to_text();
}

class FitCache {
public:
    FitCache(const Dataset& train, int jobs) : train_(train), jobs_(jobs) {}

    const Regressor& get(const DisaggConfig& cfg) {
        const std::string key = fit_key(cfg);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, train(train_, cfg, jobs_).regressor).first;
        return it->second;
    }

private:
    const Dataset& train_;
    int jobs_;
    std::map<std::string, Regressor> cache_;
};

std::vector<BatchItem> batch_items(const Dataset& test) {
    std::vector<BatchItem> items;
    items.reserve(test.size());
    for (const auto& r : test.records()) items.push_back({&r, r.cumulative, true});
    return items;
}

}  // namespace

EvalReport evaluate_methods(const Dataset& train, const Dataset& test, std::span<const DisaggConfig> configs,
                            const EvalOptions& options) {
    if (train.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
    if (test.empty()) throw Error(ErrorCode::EmptyDataset, "test set is empty");
    for (const auto& r : test.records())
        if (train.site_index().contains(r.site_id))
            throw Error(ErrorCode::InvariantViolation, "site '" + r.site_id + "' is in both train and test sets");

    EvalReport report;
    report.alpha = options.alpha;
    const std::size_t n = test.size();
    std::vector<std::vector<double>> columns;  // per method, per series
    std::vector<std::vector<bool>> negatives;

    FitCache cache(train, options.jobs);
    const auto items = batch_items(test);
    for (const auto& cfg : configs) {
        const std::string name = cfg.method_name();
        if (std::find(report.methods.begin(), report.methods.end(), name) != report.methods.end()) {
            report.notes.push_back("duplicate method '" + name + "' skipped");
            continue;
        }
        try {
            const Regressor& model = cache.get(cfg);
            const auto results = disaggregate_batch(model, items, cfg, options.jobs);
            std::vector<double> col(n);
            std::vector<bool> neg(n);
            for (std::size_t s = 0; s < n; ++s) {
                col[s] = rmse(test[s].growth, results[s].reconstructed);
                neg[s] = results[s].negativity_flag;
            }
            report.methods.push_back(name);
            columns.push_back(std::move(col));
            negatives.push_back(std::move(neg));
        } catch (const Error& e) {
            report.notes.push_back("method '" + name + "' excluded: " + e.what());
        }
    }

    const GrowthSeries naive = naive_baseline(train);
    {
        std::vector<double> col(n);
        for (std::size_t s = 0; s < n; ++s) col[s] = rmse(test[s].growth, naive);
        report.methods.emplace_back(kNaiveMethod);
        columns.push_back(std::move(col));
        negatives.emplace_back(n, false);
    }

    const std::size_t k = report.methods.size();
    report.per_series.reserve(n * k);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t m = 0; m < k; ++m)
            report.per_series.push_back(
                {test[s].site_id, test[s].year, report.methods[m], columns[m][s], negatives[m][s]});

    for (std::size_t m = 0; m < k; ++m) {
        MethodSummary summary;
        summary.method = report.methods[m];
        summary.rmse = describe(columns[m]);
        summary.negative_series = static_cast<std::size_t>(std::count(negatives[m].begin(), negatives[m].end(), true));
        report.aggregate.push_back(summary);
    }

    if (k >= 2 && n >= 2 && k <= 20) {
        std::vector<std::vector<double>> errors(n, std::vector<double>(k));
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t m = 0; m < k; ++m) errors[s][m] = columns[m][s];
        report.ranks = friedman_nemenyi(errors, options.alpha);
    } else {
        report.notes.push_back("rank analysis skipped: needs 2..20 methods and at least 2 series");
    }
    return report;
}

InitRatioStudy init_ratio_study(const Dataset& train, const Dataset& test, std::span<const DisaggConfig> configs,
                                const EvalOptions& options) {
    if (train.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
    if (test.empty()) throw Error(ErrorCode::EmptyDataset, "test set is empty");
    InitRatioStudy study;
    for (const auto& r : test.records()) study.series.push_back(&r);

    FitCache cache(train, options.jobs);
    const auto items = batch_items(test);
    for (const auto& base : configs) {
        DisaggConfig concrete = base;
        concrete.init = InitMode::concrete;
        DisaggConfig average = base;
        average.init = InitMode::average;
        try {
            const Regressor& model = cache.get(base);
            const auto with_concrete = disaggregate_batch(model, items, concrete, options.jobs);
            const auto with_average = disaggregate_batch(model, items, average, options.jobs);
            InitRatioRow row;
            row.method = average.method_name();
            std::vector<double> present;
            for (std::size_t s = 0; s < test.size(); ++s) {
                const double rc = rmse(test[s].growth, with_concrete[s].reconstructed);
                const double ra = rmse(test[s].growth, with_average[s].reconstructed);
                if (rc < 1e-12) {
                    row.ratios.emplace_back(std::nullopt);
                    ++row.absent;
                    continue;
                }
                const double ratio = ra / rc;
                row.ratios.emplace_back(ratio);
                present.push_back(ratio);
                if (ratio < 1.0) ++row.below_one;
            }
            row.summary = describe(std::move(present));
            study.rows.push_back(std::move(row));
        } catch (const Error& e) {
            study.notes.push_back("method '" + average.method_name() + "' excluded: " + e.what());
        }
    }
    return study;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path, const std::string& header) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    if (!header.empty()) out << "# " << header << '\n';
    return out;
}

std::string fmt(double v) { return csv::format_double(v); }

std::string fixed(double v, int digits) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

void write_svg(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    const std::size_t k = report.aggregate.size();
    const double width = 80.0 + 70.0 * static_cast<double>(k);
    const double height = 360.0;
    const double top = 20.0;
    const double bottom = 300.0;
    double hi = 0.0;
    for (const auto& s : report.aggregate) hi = std::max(hi, s.rmse.max);
    if (hi <= 0.0) hi = 1.0;
    auto ypos = [&](double v) { return bottom - (bottom - top) * v / hi; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\""
        << fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<line x1=\"60\" y1=\"" << fixed(top, 1) << "\" x2=\"60\" y2=\"" << fixed(bottom, 1)
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = hi * tick / 4.0;
        out << "<text x=\"55\" y=\"" << fixed(ypos(v) + 4.0, 1) << "\" text-anchor=\"end\">" << fixed(v, 1)
            << "</text>\n";
    }
    for (std::size_t m = 0; m < k; ++m) {
        const auto& d = report.aggregate[m].rmse;
        const double cx = 95.0 + 70.0 * static_cast<double>(m);
        out << "<line x1=\"" << fixed(cx, 1) << "\" y1=\"" << fixed(ypos(d.min), 1) << "\" x2=\"" << fixed(cx, 1)
            << "\" y2=\"" << fixed(ypos(d.max), 1) << "\" stroke=\"black\"/>\n";
        out << "<rect x=\"" << fixed(cx - 20.0, 1) << "\" y=\"" << fixed(ypos(d.q3), 1)
            << "\" width=\"40\" height=\"" << fixed(std::max(0.5, ypos(d.q1) - ypos(d.q3)), 1)
            << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
        out << "<line x1=\"" << fixed(cx - 20.0, 1) << "\" y1=\"" << fixed(ypos(d.median), 1) << "\" x2=\""
            << fixed(cx + 20.0, 1) << "\" y2=\"" << fixed(ypos(d.median), 1)
            << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fixed(cx, 1) << "\" y=\"" << fixed(bottom + 16.0, 1)
            << "\" text-anchor=\"middle\" transform=\"rotate(30 " << fixed(cx, 1) << ' ' << fixed(bottom + 16.0, 1)
            << ")\">" << report.aggregate[m].method << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace

void write_report(const EvalReport& report, const std::filesystem::path& dir, const std::string& header,
                  bool with_svg) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_output(dir / "per_series.csv", header);
        out << "id,year,method,rmse,negative\n";
        for (const auto& s : report.per_series)
            out << s.site_id << ',' << s.year << ',' << s.method << ',' << fmt(s.rmse) << ','
                << (s.negativity_flag ? 1 : 0) << '\n';
    }
    {
        auto out = open_output(dir / "aggregate.csv", header);
        out << "method,n,mean,sd,min,q1,median,q3,max,negative_series\n";
        for (const auto& a : report.aggregate) {
            const auto& d = a.rmse;
            out << a.method << ',' << d.count << ',' << fmt(d.mean) << ',' << fmt(d.sd) << ',' << fmt(d.min) << ','
                << fmt(d.q1) << ',' << fmt(d.median) << ',' << fmt(d.q3) << ',' << fmt(d.max) << ','
                << a.negative_series << '\n';
        }
    }
    {
        auto out = open_output(dir / "ranks.csv", header);
        out << "method,mean_rank,critical_difference\n";
        if (report.ranks)
            for (std::size_t m = 0; m < report.methods.size(); ++m)
                out << report.methods[m] << ',' << fmt(report.ranks->mean_ranks[m]) << ','
                    << fmt(report.ranks->critical_difference) << '\n';
    }
    {
        auto out = open_output(dir / "nemenyi.csv", header);
        out << "method";
        for (const auto& m : report.methods) out << ',' << m;
        out << '\n';
        if (report.ranks)
            for (std::size_t a = 0; a < report.methods.size(); ++a) {
                out << report.methods[a];
                for (std::size_t b = 0; b < report.methods.size(); ++b)
                    out << ',' << (report.ranks->significant[a][b] ? 1 : 0);
                out << '\n';
            }
    }
    {
        auto out = open_output(dir / "summary.txt", header);
        out << "methods: " << report.methods.size() << ", test series: "
            << (report.methods.empty() ? 0 : report.per_series.size() / report.methods.size()) << "\n\n";
        out << std::left << std::setw(24) << "method" << std::right << std::setw(10) << "mean" << std::setw(10)
            << "sd" << std::setw(10) << "median" << std::setw(12) << "mean rank" << std::setw(10) << "neg" << '\n';
        for (std::size_t m = 0; m < report.aggregate.size(); ++m) {
            const auto& a = report.aggregate[m];
            out << std::left << std::setw(24) << a.method << std::right << std::setw(10) << fixed(a.rmse.mean, 3)
                << std::setw(10) << fixed(a.rmse.sd, 3) << std::setw(10) << fixed(a.rmse.median, 3)
                << std::setw(12) << (report.ranks ? fixed(report.ranks->mean_ranks[m], 3) : std::string("-"))
                << std::setw(10) << a.negative_series << '\n';
        }
        if (report.ranks) {
            out << "\nFriedman chi2 = " << fixed(report.ranks->friedman_chi2, 4)
                << ", p = " << fmt(report.ranks->friedman_p)
                << ", Iman-Davenport F = " << fixed(report.ranks->iman_davenport_f, 4) << '\n';
            out << "Nemenyi critical difference (alpha = " << fmt(report.alpha)
                << ") = " << fixed(report.ranks->critical_difference, 4) << '\n';
            const auto naive_it = std::find(report.methods.begin(), report.methods.end(), kNaiveMethod);
            if (naive_it != report.methods.end()) {
                const auto nv = static_cast<std::size_t>(naive_it - report.methods.begin());
                out << "significantly better than naive:";
                bool any = false;
                for (std::size_t m = 0; m < report.methods.size(); ++m) {
                    if (m != nv && report.ranks->significant[m][nv] &&
                        report.ranks->mean_ranks[m] < report.ranks->mean_ranks[nv]) {
                        out << ' ' << report.methods[m];
                        any = true;
                    }
                }
                out << (any ? "" : " none") << '\n';
            }
        }
        for (const auto& note : report.notes) out << "note: " << note << '\n';
    }
    if (with_svg) write_svg(report, dir / "boxplot.svg");
}

void write_init_study(const InitRatioStudy& study, const std::filesystem::path& dir, const std::string& header) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_output(dir / "init_ratio.csv", header);
        out << "id,year,method,ratio\n";
        for (const auto& row : study.rows)
            for (std::size_t s = 0; s < study.series.size(); ++s) {
                out << study.series[s]->site_id << ',' << study.series[s]->year << ',' << row.method << ',';
                if (row.ratios[s]) out << fmt(*row.ratios[s]);
                out << '\n';
            }
    }
    {
        auto out = open_output(dir / "init_ratio_summary.csv", header);
        out << "method,n,absent,below_one,mean,sd,min,q1,median,q3,max\n";
        for (const auto& row : study.rows) {
            const auto& d = row.summary;
            out << row.method << ',' << d.count << ',' << row.absent << ',' << row.below_one << ',' << fmt(d.mean)
                << ',' << fmt(d.sd) << ',' << fmt(d.min) << ',' << fmt(d.q1) << ',' << fmt(d.median) << ','
                << fmt(d.q3) << ',' << fmt(d.max) << '\n';
        }
        for (const auto& note : study.notes) out << "# note: " << note << '\n';
    }
}

}  // namespace grassdisagg
