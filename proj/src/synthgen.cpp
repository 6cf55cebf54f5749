#include "grassdisagg/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "grassdisagg/error.hpp"
#include "grassdisagg/parallel.hpp"
#include "grassdisagg/random.hpp"

namespace grassdisagg {

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct SiteProfile {
    double temp_mean;
    double temp_amp;
    double dtr;
    double rain_mean;
    double summer_dry;
    double soil_capacity;
};

SiteProfile draw_site(const GenParams& p, int site) {
    Rng rng(derive_seed(p.seed, "site", static_cast<std::uint64_t>(site)));
    const auto& c = p.climate;
    SiteProfile s{};
    s.temp_mean = rng.uniform(c.temp_mean_lo, c.temp_mean_hi);
    s.temp_amp = rng.uniform(c.temp_amp_lo, c.temp_amp_hi);
    s.dtr = rng.uniform(c.dtr_lo, c.dtr_hi);
    s.rain_mean = rng.uniform(c.rain_mean_lo, c.rain_mean_hi);
    s.summer_dry = rng.uniform(c.summer_dry_lo, c.summer_dry_hi);
    s.soil_capacity = rng.uniform(p.growth.soil_capacity_lo, p.growth.soil_capacity_hi);
    return s;
}

ClimateSeries draw_climate(const GenParams& p, const SiteProfile& site, Rng& rng) {
    const auto& c = p.climate;
    ClimateSeries out{};
    const double year_anomaly = c.year_anomaly_sd * rng.normal();
    for (std::size_t t = 0; t < kPeriods; ++t) {
        const double doy = 10.0 * static_cast<double>(t) + 5.0;
        ClimateStep& s = out[t];

        s.t_avg = site.temp_mean + year_anomaly - site.temp_amp * std::cos(kTwoPi * (doy - 20.0) / 365.0) +
                  c.temp_noise * rng.normal();
        s.t_avg = std::max(s.t_avg, -9.0);
        const double dtr = std::clamp(site.dtr + 1.5 * rng.normal(), 2.0, 18.0);
        const double below = rng.uniform(0.35, 0.65);
        s.t_min = std::max(s.t_avg - below * dtr, -15.0);
        s.t_max = s.t_avg + (1.0 - below) * dtr;

        const double seasonal = 1.0 + 0.3 * std::cos(kTwoPi * (doy - 15.0) / 365.0);
        const double bump = std::exp(-std::pow((doy - 205.0) / 45.0, 2.0));
        const double mean_rain = site.rain_mean * seasonal * (1.0 - (1.0 - site.summer_dry) * bump);
        const double p_wet = std::clamp(0.2 + 0.5 * mean_rain / 30.0, 0.05, 0.9);
        int wet_days = 0;
        double rain = 0.0;
        for (int d = 0; d < 10; ++d) {
            if (rng.uniform() < p_wet) {
                ++wet_days;
                rain += rng.exponential(mean_rain / (10.0 * p_wet));
            }
        }
        s.rain = rain;

        const double clear = c.rad_mean - c.rad_amp * std::cos(kTwoPi * (doy + 10.0) / 365.0);
        const double cloud = std::clamp(1.0 - 0.35 * wet_days / 10.0 + 0.05 * rng.normal(), 0.4, 1.1);
        s.rg = 10.0 * clear * cloud;
        s.im = martonne_index(s.rain, s.t_avg);
    }
    return out;
}

double temperature_response(const GrowthParams& g, double t) {
    if (t <= g.t_base) return 0.0;
    if (t <= g.t_opt) return (t - g.t_base) / (g.t_opt - g.t_base);
    const double over = (t - g.t_opt) / g.t_high;
    return std::max(0.0, 1.0 - over * over);
}

GrowthSeries realistic_growth(const GenParams& p, const SiteProfile& site, const ClimateSeries& climate, Rng& rng) {
    const auto& g = p.growth;
    GrowthSeries out{};
    const double capacity = site.soil_capacity;
    double soil = capacity;
    double previous = 0.0;
    for (std::size_t t = 0; t < kPeriods; ++t) {
        const ClimateStep& s = climate[t];
        const double daily_rg = s.rg / 10.0;
        const double demand = g.et_coeff * s.rg * std::max(0.0, s.t_avg + 5.0) / 25.0;
        soil = std::clamp(soil + s.rain - demand * soil / capacity, 0.0, capacity);
        const double rel = soil / capacity;
        const double water = (1.0 + g.water_half_sat) * rel / (rel + g.water_half_sat);
        const double potential = g.rue * daily_rg * temperature_response(g, s.t_avg) * water;
        const double noise = g.noise_sigma * rng.normal();
        const double value = t == 0 ? potential + noise : g.smooth * previous + (1.0 - g.smooth) * potential + noise;
        out[t] = std::max(0.0, value);
        previous = out[t];
    }
    return out;
}

GrowthSeries exact_linear_growth(const ClimateSeries& climate) {
    const ExactLinearLaw& law = kExactLinearLaw;
    GrowthSeries out{};
    for (std::size_t t = 0; t < 3; ++t) out[t] = law.init;
    for (std::size_t t = 3; t < kPeriods; ++t) {
        double v = law.bias;
        for (std::size_t i = 1; i <= 3; ++i) v += law.phi[i - 1] * out[t - i];
        for (std::size_t j = 0; j <= 3; ++j) {
            const auto y = climate[t - j].as_array();
            for (std::size_t k = 0; k < kClimateVars; ++k) v += law.psi[j][k] * y[k];
        }
        out[t] = v;
    }
    return out;
}

}  // namespace

void GenParams::validate() const {
    if (n_sites < 1) throw Error(ErrorCode::ConfigError, "n_sites must be >= 1");
    if (n_years < 1) throw Error(ErrorCode::ConfigError, "n_years must be >= 1");
    if (!(growth.noise_sigma >= 0.0)) throw Error(ErrorCode::ConfigError, "noise sigma must be >= 0");
    if (!(growth.smooth >= 0.0 && growth.smooth < 1.0)) throw Error(ErrorCode::ConfigError, "smooth must lie in [0, 1)");
    if (!(climate.summer_dry_lo >= 0.0 && climate.summer_dry_lo <= climate.summer_dry_hi))
        throw Error(ErrorCode::ConfigError, "summer dryness range is invalid");
}

void GenParams::apply(KeyValues& kv) {
    if (auto v = kv.take_int("gen.n_sites")) n_sites = static_cast<int>(*v);
    if (auto v = kv.take_int("gen.n_years")) n_years = static_cast<int>(*v);
    if (auto v = kv.take_int("gen.first_year")) first_year = static_cast<int>(*v);
    if (auto v = kv.take_double("gen.noise_sigma")) growth.noise_sigma = *v;
    if (auto v = kv.take_double("gen.rue")) growth.rue = *v;
    if (auto v = kv.take_double("gen.smooth")) growth.smooth = *v;
    if (auto v = kv.take_double("gen.summer_dry_lo")) climate.summer_dry_lo = *v;
    if (auto v = kv.take_double("gen.summer_dry_hi")) climate.summer_dry_hi = *v;
}

GenParams preset_params(std::string_view name) {
    GenParams p;
    p.preset = std::string(name);
    if (name == "default") return p;
    if (name == "stress") {
        p.climate.summer_dry_lo = 0.05;
        p.climate.summer_dry_hi = 0.25;
        p.climate.rain_mean_lo = 14.0;
        p.climate.rain_mean_hi = 22.0;
        return p;
    }
    if (name == "exact-linear") {
        p.mode = GenMode::exact_linear;
        p.n_sites = 50;
        p.n_years = 2;
        p.growth.noise_sigma = 0.0;
        return p;
    }
    throw Error(ErrorCode::ConfigError, "unknown preset '" + std::string(name) + "' (default|stress|exact-linear)");
}

std::string site_name(int site, int n_sites) {
    const std::size_t digits = std::max<std::size_t>(4, std::to_string(n_sites).size());
    std::string num = std::to_string(site + 1);
    return "S" + std::string(digits - std::min(digits, num.size()), '0') + num;
}

AnnualRecord generate_record(const GenParams& p, int site, int year_index) {
    const SiteProfile profile = draw_site(p, site);
    Rng rng(derive_seed(derive_seed(p.seed, "site-year", static_cast<std::uint64_t>(site)), "year",
                        static_cast<std::uint64_t>(year_index)));
    AnnualRecord r;
    r.site_id = site_name(site, p.n_sites);
    r.year = p.first_year + year_index;
    r.climate = draw_climate(p, profile, rng);
    r.growth = p.mode == GenMode::exact_linear ? exact_linear_growth(r.climate) : realistic_growth(p, profile, r.climate, rng);
    for (double v : r.growth)
        if (!(v >= 0.0)) throw Error(ErrorCode::InvariantViolation, "generator produced negative growth");
    r.cumulative = annual_cumulative(r.growth);
    return r;
}

Dataset generate_dataset(const GenParams& params, int jobs) {
    params.validate();
    const auto n = static_cast<std::size_t>(params.n_sites) * static_cast<std::size_t>(params.n_years);
    std::vector<AnnualRecord> records(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        const auto site = static_cast<int>(i / static_cast<std::size_t>(params.n_years));
        const auto year = static_cast<int>(i % static_cast<std::size_t>(params.n_years));
        records[i] = generate_record(params, site, year);
    });
    return Dataset(std::move(records));
}

}  // namespace grassdisagg
