#include "mgrisk/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mgrisk {

std::string to_string(RenewableKind kind) {
    return kind == RenewableKind::PV ? "PV" : "WT";
}

RenewableKind renewable_kind_from_string(const std::string& text) {
    if (text == "PV") return RenewableKind::PV;
    if (text == "WT") return RenewableKind::WT;
    throw ConfigError("unknown renewable kind '" + text + "' (expected PV or WT)");
}

std::vector<std::size_t> MicrogridConfig::units_of_kind(RenewableKind kind) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < renewables.size(); ++i)
        if (renewables[i].kind == kind) out.push_back(i);
    return out;
}

double MicrogridConfig::total_capacity(RenewableKind kind) const {
    double sum = 0.0;
    for (const auto& unit : renewables)
        if (unit.kind == kind) sum += unit.capacity;
    return sum;
}

namespace {

class Collector {
public:
    void add(std::string code, std::string message) {
        out_.push_back({std::move(code), std::move(message)});
    }
    std::vector<Violation> take() { return std::move(out_); }

private:
    std::vector<Violation> out_;
};

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void check_generators(const MicrogridConfig& config, Collector& c) {
    for (const auto& g : config.generators) {
        const std::string who = "generator '" + g.id + "'";
        if (g.bus < 1 || g.bus > 6)
            c.add("GEN_BUS_RANGE", who + ": bus " + std::to_string(g.bus) + " outside 1..6");
        if (!(g.p_min >= 0.0)) c.add("GEN_PMIN_NEGATIVE", who + ": p_min < 0");
        if (g.p_min > g.p_max)
            c.add("GEN_PMIN_GT_PMAX", who + ": p_min " + num(g.p_min) + " > p_max " + num(g.p_max));
        if (!(g.ramp_up > 0.0)) c.add("GEN_RAMP_UP_NONPOSITIVE", who + ": ramp_up must be > 0");
        if (!(g.ramp_down > 0.0))
            c.add("GEN_RAMP_DOWN_NONPOSITIVE", who + ": ramp_down must be > 0");
        if (!g.initial_on && g.initial_power != 0.0)
            c.add("GEN_INITIAL_POWER_WHILE_OFF", who + ": initially off but initial_power != 0");
        if (g.initial_on && (g.initial_power < g.p_min || g.initial_power > g.p_max))
            c.add("GEN_INITIAL_POWER_RANGE", who + ": initial_power outside [p_min, p_max]");
    }
}

void check_renewables(const MicrogridConfig& config, Collector& c) {
    for (const auto& r : config.renewables) {
        if (!(r.capacity > 0.0))
            c.add("REN_CAPACITY_NONPOSITIVE", "renewable '" + r.id + "': capacity must be > 0");
        if (r.bus < 1 || r.bus > 6)
            c.add("REN_BUS_RANGE", "renewable '" + r.id + "': bus outside 1..6");
    }
}

void check_battery(const Battery& b, Collector& c) {
    if (!(0.0 <= b.soc_min && b.soc_min <= b.soc_init && b.soc_init <= b.soc_max &&
          b.soc_max <= b.energy_capacity))
        c.add("BAT_SOC_ORDER", "battery: need 0 <= soc_min <= soc_init <= soc_max <= energy_capacity");
    if (!(b.p_ch_max > 0.0)) c.add("BAT_PCH_NONPOSITIVE", "battery: p_ch_max must be > 0");
    if (!(b.p_disch_max > 0.0)) c.add("BAT_PDISCH_NONPOSITIVE", "battery: p_disch_max must be > 0");
    if (!(b.eta_ch > 0.0 && b.eta_ch <= 1.0)) c.add("BAT_ETA_CH_RANGE", "battery: eta_ch outside (0,1]");
    if (!(b.eta_disch > 0.0 && b.eta_disch <= 1.0))
        c.add("BAT_ETA_DISCH_RANGE", "battery: eta_disch outside (0,1]");
}

void check_system(const MicrogridConfig& config, Collector& c) {
    if (config.horizon < 1) c.add("CFG_HORIZON", "horizon must be >= 1");
    if (!(config.time_step > 0.0)) c.add("CFG_TIME_STEP", "time_step must be > 0");
    if (config.generators.empty() && config.renewables.empty())
        c.add("CFG_NO_SOURCES", "at least one generator or renewable unit is required");
    if (static_cast<long>(config.base_load.size()) != config.horizon)
        c.add("CFG_LOAD_LENGTH", "base_load has " + std::to_string(config.base_load.size()) +
                                     " entries, horizon is " + std::to_string(config.horizon));
    for (std::size_t t = 0; t < config.base_load.size(); ++t)
        if (!(config.base_load[t] >= 0.0))
            c.add("CFG_LOAD_NEGATIVE", "base_load[" + std::to_string(t) + "] < 0");

    std::set<std::string> ids;
    auto unique = [&](const std::string& id) {
        if (!ids.insert(id).second) c.add("CFG_DUPLICATE_ID", "duplicate unit id '" + id + "'");
    };
    for (const auto& g : config.generators) unique(g.id);
    for (const auto& r : config.renewables) unique(r.id);
}

void check_risk(const MicrogridConfig& config, const RiskConfig& risk, Collector& c) {
    for (std::size_t s = 0; s < risk.targets.size(); ++s)
        if (!(risk.targets[s] >= 0.0))
            c.add("RISK_TARGET_NEGATIVE", "target[" + std::to_string(s) + "] < 0");
    if (!(risk.lambda >= 0.0 && risk.lambda <= 1.0))
        c.add("LAMBDA_RANGE", "lambda " + num(risk.lambda) + " outside [0,1]");
    if (risk.eur && !(*risk.eur >= 0.0)) c.add("RISK_EUR_NEGATIVE", "EUR must be >= 0");
    if (risk.big_m) {
        double max_target = 0.0;
        for (double t : risk.targets) max_target = std::max(max_target, t);
        double max_load = 0.0;
        for (double l : config.base_load) max_load = std::max(max_load, l);
        const double floor = max_target + config.horizon * max_load;
        if (!(*risk.big_m > floor))
            c.add("RISK_BIG_M_TOO_SMALL",
                  "big_m " + num(*risk.big_m) + " must exceed " + num(floor));
    }
}

void check_options(const CaseOptions& o, Collector& c) {
    if (!(o.drp_flex >= 0.0 && o.drp_flex < 1.0))
        c.add("DRP_FLEX_RANGE", "drp_flex " + num(o.drp_flex) + " outside [0,1)");
    if (!(o.cvd > -1.0)) c.add("CVD_RANGE", "cvd " + num(o.cvd) + " must be > -1");
}

} // namespace

std::vector<Violation> validate_config(const MicrogridConfig& config) {
    Collector c;
    check_system(config, c);
    check_generators(config, c);
    check_renewables(config, c);
    check_battery(config.battery, c);
    return c.take();
}

std::vector<Violation> validate_config(const MicrogridConfig& config,
                                       const RiskConfig& risk,
                                       const CaseOptions& options) {
    auto out = validate_config(config);
    Collector c;
    check_risk(config, risk, c);
    check_options(options, c);
    auto more = c.take();
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

MicrogridConfig default_study_config() {
    MicrogridConfig config;
    config.horizon = 24;
    config.time_step = 1.0;

    // Per-bus PV aggregates split evenly over three units each.
    for (int k = 0; k < 3; ++k)
        config.renewables.push_back({"PV" + std::to_string(k + 1), 1, RenewableKind::PV, 32.0 / 3.0});
    for (int k = 0; k < 3; ++k)
        config.renewables.push_back({"PV" + std::to_string(k + 4), 2, RenewableKind::PV, 16.0 / 3.0});
    config.renewables.push_back({"WT1", 3, RenewableKind::WT, 21.0});
    config.renewables.push_back({"WT2", 3, RenewableKind::WT, 21.0});

    config.generators = {
        {"DGR1", 4, 5.0, 28.0, 15.0, 15.0, true, 15.0},
        {"DGR2", 5, 5.0, 28.0, 15.0, 15.0, true, 15.0},
        {"DGR3", 6, 4.0, 22.0, 12.0, 12.0, false, 0.0},
    };

    config.battery = Battery{
        .energy_capacity = 60.0,
        .p_ch_max = 15.0,
        .p_disch_max = 15.0,
        .eta_ch = 0.95,
        .eta_disch = 0.95,
        .soc_init = 30.0,
        .soc_min = 6.0,
        .soc_max = 57.0,
    };

    config.base_load = {58, 54, 52, 51, 52, 56, 64, 72, 78, 80, 82, 84,
                        83, 82, 80, 80, 84, 92, 100, 104, 100, 92, 80, 66};
    return config;
}

std::string format_violations(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) out += v.code + ": " + v.message + "\n";
    return out;
}

} // namespace mgrisk
