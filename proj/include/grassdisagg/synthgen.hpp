#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "grassdisagg/config.hpp"
#include "grassdisagg/data.hpp"

namespace grassdisagg {

enum class GenMode { realistic, exact_linear };

/// Site-level climate ranges; each site draws its own values uniformly.
struct ClimateParams {
    double temp_mean_lo = 8.5, temp_mean_hi = 13.5;  // annual mean Tavg, degC
    double temp_amp_lo = 5.5, temp_amp_hi = 8.0;     // seasonal half-range, degC
    double temp_noise = 1.3;                         // per-period anomaly sd
    double year_anomaly_sd = 0.7;
    double dtr_lo = 6.0, dtr_hi = 11.0;              // diurnal range, degC
    double rad_mean = 1100.0, rad_amp = 800.0;       // clear-sky daily RG, J/cm2
    double rain_mean_lo = 14.0, rain_mean_hi = 36.0; // mm per 10 days
    double summer_dry_lo = 0.35, summer_dry_hi = 1.0;  // summer rain multiplier
};

/// Growth response: rue * daily RG * f(T) * f(water), AR-smoothed.
struct GrowthParams {
    double rue = 0.115;           // kg DM/ha/d per J/cm2/d
    double t_base = 0.0;          // degC, no growth below
    double t_opt = 15.0;          // degC
    double t_high = 11.0;         // degC above optimum where growth stops
    double soil_capacity_lo = 40.0, soil_capacity_hi = 140.0;  // mm, drawn per site
    double et_coeff = 0.0019;     // mm per (J/cm2) per 10 days at 20 degC
    double water_half_sat = 0.25; // relative soil water at half response
    double smooth = 0.3;          // weight on the previous period
    double noise_sigma = 2.0;     // kg DM/ha/d
};

struct GenParams {
    std::string preset = "default";
    int n_sites = 200;
    int first_year = 2015;
    int n_years = 5;
    std::uint64_t seed = 42;
    GenMode mode = GenMode::realistic;
    ClimateParams climate;
    GrowthParams growth;

    /// Throws ConfigError on n_sites < 1, n_years < 1, sigma < 0.
    void validate() const;
    /// Recognised keys: gen.n_sites, gen.n_years, gen.first_year, gen.noise_sigma,
    /// gen.rue, gen.smooth, gen.summer_dry_lo, gen.summer_dry_hi.
    void apply(KeyValues& kv);
};

/// Presets: "default", "stress" (dry summers), "exact-linear".
GenParams preset_params(std::string_view name);

/// Coefficients of the order-3 law used by the exact-linear mode:
/// g(t) = bias + sum_i phi_i g(t-i) + sum_j psi_j . y(t-j), g(1..3) = 9.
/// The bias covers the worst-case negative temperature terms, so growth
/// stays non-negative for Tmin >= -15 and Tavg, Tmax > -10.
struct ExactLinearLaw {
    double bias;
    std::array<double, 3> phi;
    std::array<std::array<double, kClimateVars>, 4> psi;  // lag j = 0..3
    double init;
};
inline constexpr ExactLinearLaw kExactLinearLaw{
    6.0,
    {0.45, 0.2, 0.1},
    {{{0.05, 0.05, 0.2, 0.03, 0.0006, 0.01},
      {0.02, 0.02, 0.1, 0.02, 0.0003, 0.005},
      {0.01, 0.01, 0.05, 0.01, 0.0002, 0.003},
      {0.005, 0.005, 0.02, 0.005, 0.0001, 0.002}}},
    9.0,
};

/// Deterministic dataset: records ordered by site then year, each (site, year)
/// drawn from its own derived seed, so any `jobs` gives the same output.
Dataset generate_dataset(const GenParams& params, int jobs = 1);

/// One annual record; exposed for tests of per-pair independence.
AnnualRecord generate_record(const GenParams& params, int site, int year_index);

std::string site_name(int site, int n_sites);

}  // namespace grassdisagg
