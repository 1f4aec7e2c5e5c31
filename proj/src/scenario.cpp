#include "mgrisk/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>

namespace mgrisk {

double sample_normal(double mean, double std_dev, double u1, double u2) {
    if (!(u1 > 0.0 && u1 < 1.0) || !(u2 > 0.0 && u2 < 1.0))
        throw DomainError("sample_normal: uniforms must lie in (0,1)");
    if (!(std_dev >= 0.0)) throw DomainError("sample_normal: std must be >= 0");
    if (std_dev == 0.0) return std::max(0.0, mean);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return std::max(0.0, mean + std_dev * z);
}

double sample_beta(double alpha, double beta, double u) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("sample_beta: shapes must be > 0");
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("sample_beta: u outside [0,1]");
    if (alpha == 1.0 && beta == 1.0) return u;
    return boost::math::ibeta_inv(alpha, beta, u);
}

double sample_weibull(double shape, double scale, double u) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw DomainError("sample_weibull: shape and scale must be > 0");
    if (!(u > 0.0 && u < 1.0)) throw DomainError("sample_weibull: u outside (0,1)");
    return scale * std::pow(-std::log1p(-u), 1.0 / shape);
}

double wind_power_curve(double speed, const TurbineCurve& curve, double capacity) {
    if (speed < curve.cut_in || speed > curve.cut_out) return 0.0;
    if (speed >= curve.rated) return capacity;
    return capacity * (speed - curve.cut_in) / (curve.rated - curve.cut_in);
}

double pv_power(double irradiance_fraction, double capacity, int hour, int sunrise, int sunset) {
    if (hour < sunrise || hour >= sunset) return 0.0;
    return capacity * irradiance_fraction;
}

UniformStream::UniformStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double UniformStream::next() {
    // Top 53 bits, shifted half a step so 0 and 1 are never produced.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

StochasticProfileSpec default_profile_spec(const MicrogridConfig& config) {
    const auto h = static_cast<std::size_t>(config.horizon);
    StochasticProfileSpec spec;
    spec.load_mean = config.base_load;
    spec.load_mean.resize(h, 0.0);
    spec.load_std.resize(h);
    for (std::size_t t = 0; t < h; ++t) spec.load_std[t] = 0.05 * spec.load_mean[t];
    spec.irradiance_alpha.assign(h, 2.0);
    spec.irradiance_beta.assign(h, 2.0);
    spec.wind_shape.assign(h, 2.0);
    spec.wind_scale.assign(h, 8.0);
    spec.solar_envelope.assign(h, 0.0);
    const double span = spec.sunset - spec.sunrise;
    for (int t = spec.sunrise; t < spec.sunset && t < config.horizon; ++t)
        spec.solar_envelope[static_cast<std::size_t>(t)] =
            std::sin(std::numbers::pi * (t + 0.5 - spec.sunrise) / span);
    return spec;
}

std::vector<Violation> validate_profile_spec(const StochasticProfileSpec& spec, int horizon) {
    std::vector<Violation> out;
    const auto h = static_cast<std::size_t>(horizon);
    auto sized = [&](const std::vector<double>& v, const char* name) {
        if (v.size() != h) {
            out.push_back({"PROFILE_LENGTH", std::string(name) + " must have one entry per hour"});
            return false;
        }
        return true;
    };
    auto each = [&](const std::vector<double>& v, const char* name, const char* code, auto&& ok) {
        if (!sized(v, name)) return;
        for (std::size_t t = 0; t < v.size(); ++t)
            if (!ok(v[t])) {
                out.push_back({code, std::string(name) + "[" + std::to_string(t) + "] out of range"});
                return;
            }
    };
    auto nonneg = [](double x) { return x >= 0.0; };
    auto positive = [](double x) { return x > 0.0; };
    each(spec.load_mean, "load_mean", "PROFILE_LOAD_MEAN", nonneg);
    each(spec.load_std, "load_std", "PROFILE_LOAD_STD", nonneg);
    each(spec.irradiance_alpha, "irradiance_alpha", "PROFILE_BETA_SHAPE", positive);
    each(spec.irradiance_beta, "irradiance_beta", "PROFILE_BETA_SHAPE", positive);
    each(spec.solar_envelope, "solar_envelope", "PROFILE_ENVELOPE",
         [](double x) { return x >= 0.0 && x <= 1.0; });
    each(spec.wind_shape, "wind_shape", "PROFILE_WEIBULL", positive);
    each(spec.wind_scale, "wind_scale", "PROFILE_WEIBULL", positive);
    const auto& c = spec.turbine_curve;
    if (!(c.cut_in < c.rated && c.rated < c.cut_out))
        out.push_back({"PROFILE_TURBINE_CURVE", "need cut_in < rated < cut_out"});
    if (!(spec.sunrise <= spec.sunset))
        out.push_back({"PROFILE_DAYLIGHT", "sunrise must not be after sunset"});
    return out;
}

ScenarioSet generate_scenarios(const MicrogridConfig& config, const StochasticProfileSpec& spec,
                               int count, std::uint64_t seed) {
    if (count < 1) throw ConfigError("scenario count must be >= 1");
    if (auto v = validate_profile_spec(spec, config.horizon); !v.empty())
        throw ConfigError("invalid stochastic profile:\n" + format_violations(v));

    const int hours = config.horizon;
    const auto pv_units = config.units_of_kind(RenewableKind::PV);
    const auto wt_units = config.units_of_kind(RenewableKind::WT);

    ScenarioSet set;
    set.scenario_count = count;
    set.seed = seed;
    set.prob.assign(static_cast<std::size_t>(count), 1.0 / count);
    set.load = HourScenarioGrid(hours, count);
    set.pv_max.assign(pv_units.size(), HourScenarioGrid(hours, count));
    set.wt_max.assign(wt_units.size(), HourScenarioGrid(hours, count));

    // Each scenario owns an independent stream, so the loop body can run in
    // any order (or concurrently) and produce identical output.
    for (int s = 0; s < count; ++s) {
        UniformStream rng(seed, static_cast<std::uint64_t>(s));
        for (int t = 0; t < hours; ++t) {
            const auto ti = static_cast<std::size_t>(t);
            const double u1 = rng.next();
            const double u2 = rng.next();
            set.load(t, s) = sample_normal(spec.load_mean[ti], spec.load_std[ti], u1, u2);

            const double u_sun = rng.next();
            const double a = spec.irradiance_alpha[ti];
            const double b = spec.irradiance_beta[ti];
            const double clear = spec.renewables_at_mean ? a / (a + b) : sample_beta(a, b, u_sun);
            const double fraction = std::clamp(spec.solar_envelope[ti] * clear, 0.0, 1.0);
            for (std::size_t k = 0; k < pv_units.size(); ++k) {
                const double cap = config.renewables[pv_units[k]].capacity;
                set.pv_max[k](t, s) = pv_power(fraction, cap, t, spec.sunrise, spec.sunset);
            }

            const double u_wind = rng.next();
            const double k_shape = spec.wind_shape[ti];
            const double scale = spec.wind_scale[ti];
            const double speed = spec.renewables_at_mean
                                     ? scale * std::tgamma(1.0 + 1.0 / k_shape)
                                     : sample_weibull(k_shape, scale, u_wind);
            for (std::size_t k = 0; k < wt_units.size(); ++k) {
                const double cap = config.renewables[wt_units[k]].capacity;
                set.wt_max[k](t, s) = wind_power_curve(speed, spec.turbine_curve, cap);
            }
        }
    }
    return set;
}

void check_dimensions(const MicrogridConfig& config, const ScenarioSet& scenarios) {
    const int S = scenarios.scenario_count;
    auto fail = [](const std::string& what) { throw ConfigError("scenario dimension mismatch: " + what); };
    if (S < 1) fail("no scenarios");
    if (static_cast<int>(scenarios.prob.size()) != S) fail("probability count");
    auto grid_ok = [&](const HourScenarioGrid& g) {
        return g.hours() == config.horizon && g.scenarios() == S;
    };
    if (!grid_ok(scenarios.load)) fail("load grid");
    if (scenarios.pv_max.size() != config.units_of_kind(RenewableKind::PV).size()) fail("PV unit count");
    if (scenarios.wt_max.size() != config.units_of_kind(RenewableKind::WT).size()) fail("WT unit count");
    for (const auto& g : scenarios.pv_max)
        if (!grid_ok(g)) fail("PV grid");
    for (const auto& g : scenarios.wt_max)
        if (!grid_ok(g)) fail("WT grid");
}

} // namespace mgrisk
