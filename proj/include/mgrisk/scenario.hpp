#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "mgrisk/model.hpp"

namespace mgrisk {

/// Raised when a sampler is called outside its domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Hour-by-scenario matrix stored row-major by hour.
class HourScenarioGrid {
public:
    HourScenarioGrid() = default;
    HourScenarioGrid(int hours, int scenarios, double fill = 0.0)
        : hours_(hours), scenarios_(scenarios),
          data_(static_cast<std::size_t>(hours) * static_cast<std::size_t>(scenarios), fill) {}

    int hours() const { return hours_; }
    int scenarios() const { return scenarios_; }

    double& operator()(int t, int s) { return data_[index(t, s)]; }
    double operator()(int t, int s) const { return data_[index(t, s)]; }

    const std::vector<double>& raw() const { return data_; }
    bool operator==(const HourScenarioGrid&) const = default;

private:
    std::size_t index(int t, int s) const {
        return static_cast<std::size_t>(t) * static_cast<std::size_t>(scenarios_) +
               static_cast<std::size_t>(s);
    }
    int hours_ = 0;
    int scenarios_ = 0;
    std::vector<double> data_;
};

struct TurbineCurve {
    double cut_in = 3.0;  // m/s
    double rated = 12.0;  // m/s
    double cut_out = 25.0; // m/s

    bool operator==(const TurbineCurve&) const = default;
};

struct StochasticProfileSpec {
    std::vector<double> load_mean; // kW per hour
    std::vector<double> load_std;  // kW per hour
    std::vector<double> irradiance_alpha;
    std::vector<double> irradiance_beta;
    // Clear-sky shape multiplied onto the Beta draw, in [0,1] per hour.
    std::vector<double> solar_envelope;
    std::vector<double> wind_shape; // Weibull k
    std::vector<double> wind_scale; // m/s
    TurbineCurve turbine_curve;
    int sunrise = 6;
    int sunset = 18;
    // Replace irradiance and wind draws with their analytic means. The
    // uniform stream is still consumed so seeds stay aligned.
    bool renewables_at_mean = false;

    bool operator==(const StochasticProfileSpec&) const = default;
};

/// Default profile for a config: load normal around base_load with 5% std,
/// irradiance Beta(2,2) under a half-sine daylight envelope, wind Weibull(2, 8 m/s).
StochasticProfileSpec default_profile_spec(const MicrogridConfig& config);

std::vector<Violation> validate_profile_spec(const StochasticProfileSpec& spec, int horizon);

struct ScenarioSet {
    int scenario_count = 0;
    std::uint64_t seed = 0;
    std::vector<double> prob;
    HourScenarioGrid load;              // PL[t][s]
    std::vector<HourScenarioGrid> pv_max; // per PV unit, in MicrogridConfig::units_of_kind(PV) order
    std::vector<HourScenarioGrid> wt_max; // per WT unit

    int hours() const { return load.hours(); }
    bool operator==(const ScenarioSet&) const = default;
};

// Samplers. All are pure functions of their arguments.

/// Box-Muller: mean + std * sqrt(-2 ln u1) * cos(2 pi u2), clamped at 0.
double sample_normal(double mean, double std_dev, double u1, double u2);

/// Inverse-CDF sample of Beta(alpha, beta).
double sample_beta(double alpha, double beta, double u);

/// Inverse transform: scale * (-ln(1-u))^(1/shape).
double sample_weibull(double shape, double scale, double u);

double wind_power_curve(double speed, const TurbineCurve& curve, double capacity);

double pv_power(double irradiance_fraction, double capacity, int hour, int sunrise, int sunset);

/// Uniform stream used by the scenario generator: std::mt19937_64 seeded
/// through std::seed_seq{seed_lo, seed_hi, stream_lo, stream_hi}; the top 53
/// bits of each draw map to (k + 0.5) / 2^53, strictly inside (0,1).
/// Scenario s uses stream s, so scenarios can be generated in any order.
class UniformStream {
public:
    UniformStream(std::uint64_t seed, std::uint64_t stream);
    double next();

private:
    std::mt19937_64 engine_;
};

ScenarioSet generate_scenarios(const MicrogridConfig& config, const StochasticProfileSpec& spec,
                               int count, std::uint64_t seed);

/// Throws ConfigError unless the set's dimensions match the config.
void check_dimensions(const MicrogridConfig& config, const ScenarioSet& scenarios);

} // namespace mgrisk
