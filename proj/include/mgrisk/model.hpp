#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgrisk {

/// Raised for malformed inputs that cannot be reported as plain violations
/// (unreadable files, unknown keys, mismatched dimensions).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DieselGenerator {
    std::string id;
    int bus = 4;
    double p_min = 0.0;     // kW
    double p_max = 0.0;     // kW
    double ramp_up = 0.0;   // kW/h
    double ramp_down = 0.0; // kW/h
    bool initial_on = false;
    double initial_power = 0.0; // kW

    bool operator==(const DieselGenerator&) const = default;
};

enum class RenewableKind { PV, WT };

std::string to_string(RenewableKind kind);
RenewableKind renewable_kind_from_string(const std::string& text);

struct RenewableUnit {
    std::string id;
    int bus = 1;
    RenewableKind kind = RenewableKind::PV;
    double capacity = 0.0; // kW

    bool operator==(const RenewableUnit&) const = default;
};

struct Battery {
    double energy_capacity = 0.0; // kWh
    double p_ch_max = 0.0;        // kW
    double p_disch_max = 0.0;     // kW
    double eta_ch = 1.0;
    double eta_disch = 1.0;
    double soc_init = 0.0; // kWh
    double soc_min = 0.0;  // kWh
    double soc_max = 0.0;  // kWh

    bool operator==(const Battery&) const = default;
};

struct MicrogridConfig {
    int horizon = 24;
    double time_step = 1.0; // hours
    std::vector<DieselGenerator> generators;
    std::vector<RenewableUnit> renewables;
    Battery battery;
    std::vector<double> base_load; // kW, one entry per hour

    /// Indices into `renewables` of the given kind, in declaration order.
    std::vector<std::size_t> units_of_kind(RenewableKind kind) const;
    double total_capacity(RenewableKind kind) const;

    bool operator==(const MicrogridConfig&) const = default;
};

struct RiskConfig {
    std::vector<double> targets; // kWh per scenario
    double lambda = 1.0;
    std::optional<double> eur;   // absent: derived from a baseline solve
    std::optional<double> big_m; // absent: derived from the scenario loads

    bool operator==(const RiskConfig&) const = default;
};

struct CaseOptions {
    bool drp_enabled = false;
    double drp_flex = 0.15;
    bool drp_energy_neutral = true;
    // Bounds the post-DRP load itself to [-flex*PL, +flex*PL] (clamped at 0)
    // instead of bounding the deviation. Audit mode only.
    bool drp_literal = false;
    bool covid_enabled = false;
    double cvd = -0.0288;
    bool ur_enabled = false;

    bool operator==(const CaseOptions&) const = default;
};

struct Violation {
    std::string code;
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Checks every physical and configuration invariant. An empty result means
/// the inputs are valid; nothing is thrown.
std::vector<Violation> validate_config(const MicrogridConfig& config,
                                       const RiskConfig& risk,
                                       const CaseOptions& options);

/// Config-only overload for callers that have no risk/case inputs yet.
std::vector<Violation> validate_config(const MicrogridConfig& config);

/// The six-bus study system: six PV units on buses 1-2 (32 kW and 16 kW per
/// bus), two WTs on bus 3 (42 kW total), DGRs on buses 4-6, battery and load
/// on bus 6, 24 h horizon.
MicrogridConfig default_study_config();

std::string format_violations(const std::vector<Violation>& violations);

} // namespace mgrisk
