#include "mgrisk/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mgrisk/milp.hpp"

namespace mgrisk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- JSON helpers ---------------------------------------------------------

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T get_required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    return get_required<T>(obj, key, where);
}

std::optional<double> get_optional(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return get_required<double>(obj, key, where);
}

json generator_to_json(const DieselGenerator& g) {
    return {{"id", g.id},           {"bus", g.bus},         {"p_min", g.p_min},
            {"p_max", g.p_max},     {"ramp_up", g.ramp_up}, {"ramp_down", g.ramp_down},
            {"initial_on", g.initial_on}, {"initial_power", g.initial_power}};
}

DieselGenerator generator_from_json(const json& j, const std::string& where) {
    reject_unknown(j, {"id", "bus", "p_min", "p_max", "ramp_up", "ramp_down", "initial_on", "initial_power"}, where);
    DieselGenerator g;
    g.id = get_required<std::string>(j, "id", where);
    g.bus = get_required<int>(j, "bus", where);
    g.p_min = get_required<double>(j, "p_min", where);
    g.p_max = get_required<double>(j, "p_max", where);
    g.ramp_up = get_required<double>(j, "ramp_up", where);
    g.ramp_down = get_required<double>(j, "ramp_down", where);
    g.initial_on = get_or<bool>(j, "initial_on", false, where);
    g.initial_power = get_or<double>(j, "initial_power", 0.0, where);
    return g;
}

json system_to_json(const MicrogridConfig& c) {
    json gens = json::array();
    for (const auto& g : c.generators) gens.push_back(generator_to_json(g));
    json rens = json::array();
    for (const auto& r : c.renewables)
        rens.push_back({{"id", r.id}, {"bus", r.bus}, {"kind", to_string(r.kind)}, {"capacity", r.capacity}});
    const Battery& b = c.battery;
    return {{"horizon", c.horizon},
            {"time_step", c.time_step},
            {"generators", gens},
            {"renewables", rens},
            {"battery",
             {{"energy_capacity", b.energy_capacity},
              {"p_ch_max", b.p_ch_max},
              {"p_disch_max", b.p_disch_max},
              {"eta_ch", b.eta_ch},
              {"eta_disch", b.eta_disch},
              {"soc_init", b.soc_init},
              {"soc_min", b.soc_min},
              {"soc_max", b.soc_max}}},
            {"base_load", c.base_load}};
}

MicrogridConfig system_from_json(const json& j) {
    const std::string where = "system";
    reject_unknown(j, {"horizon", "time_step", "generators", "renewables", "battery", "base_load"}, where);
    MicrogridConfig c;
    c.horizon = get_or<int>(j, "horizon", 24, where);
    c.time_step = get_or<double>(j, "time_step", 1.0, where);
    const json gens = j.value("generators", json::array());
    if (!gens.is_array()) throw ConfigError("system.generators: expected an array");
    for (std::size_t i = 0; i < gens.size(); ++i)
        c.generators.push_back(generator_from_json(gens[i], "system.generators[" + std::to_string(i) + "]"));
    const json rens = j.value("renewables", json::array());
    if (!rens.is_array()) throw ConfigError("system.renewables: expected an array");
    for (std::size_t i = 0; i < rens.size(); ++i) {
        const std::string w = "system.renewables[" + std::to_string(i) + "]";
        reject_unknown(rens[i], {"id", "bus", "kind", "capacity"}, w);
        RenewableUnit r;
        r.id = get_required<std::string>(rens[i], "id", w);
        r.bus = get_required<int>(rens[i], "bus", w);
        r.kind = renewable_kind_from_string(get_required<std::string>(rens[i], "kind", w));
        r.capacity = get_required<double>(rens[i], "capacity", w);
        c.renewables.push_back(r);
    }
    const json& b = j.contains("battery") ? j.at("battery") : throw ConfigError("system: missing key 'battery'");
    const std::string bw = "system.battery";
    reject_unknown(b, {"energy_capacity", "p_ch_max", "p_disch_max", "eta_ch", "eta_disch", "soc_init", "soc_min", "soc_max"}, bw);
    c.battery.energy_capacity = get_required<double>(b, "energy_capacity", bw);
    c.battery.p_ch_max = get_required<double>(b, "p_ch_max", bw);
    c.battery.p_disch_max = get_required<double>(b, "p_disch_max", bw);
    c.battery.eta_ch = get_or<double>(b, "eta_ch", 1.0, bw);
    c.battery.eta_disch = get_or<double>(b, "eta_disch", 1.0, bw);
    c.battery.soc_init = get_required<double>(b, "soc_init", bw);
    c.battery.soc_min = get_required<double>(b, "soc_min", bw);
    c.battery.soc_max = get_required<double>(b, "soc_max", bw);
    c.base_load = get_required<std::vector<double>>(j, "base_load", where);
    return c;
}

json risk_to_json(const RiskConfig& r) {
    json j = {{"targets", r.targets}, {"lambda", r.lambda}};
    if (r.eur) j["eur"] = *r.eur;
    if (r.big_m) j["big_m"] = *r.big_m;
    return j;
}

RiskConfig risk_from_json(const json& j) {
    const std::string where = "risk";
    reject_unknown(j, {"targets", "lambda", "eur", "big_m"}, where);
    RiskConfig r;
    r.targets = get_or<std::vector<double>>(j, "targets", {}, where);
    r.lambda = get_or<double>(j, "lambda", 1.0, where);
    r.eur = get_optional(j, "eur", where);
    r.big_m = get_optional(j, "big_m", where);
    return r;
}

json options_to_json(const CaseOptions& o) {
    return {{"drp_enabled", o.drp_enabled},     {"drp_flex", o.drp_flex},
            {"drp_energy_neutral", o.drp_energy_neutral}, {"drp_literal", o.drp_literal},
            {"covid_enabled", o.covid_enabled}, {"cvd", o.cvd},
            {"ur_enabled", o.ur_enabled}};
}

CaseOptions options_from_json(const json& j) {
    const std::string where = "options";
    reject_unknown(j, {"drp_enabled", "drp_flex", "drp_energy_neutral", "drp_literal", "covid_enabled", "cvd", "ur_enabled"}, where);
    CaseOptions o;
    o.drp_enabled = get_or<bool>(j, "drp_enabled", o.drp_enabled, where);
    o.drp_flex = get_or<double>(j, "drp_flex", o.drp_flex, where);
    o.drp_energy_neutral = get_or<bool>(j, "drp_energy_neutral", o.drp_energy_neutral, where);
    o.drp_literal = get_or<bool>(j, "drp_literal", o.drp_literal, where);
    o.covid_enabled = get_or<bool>(j, "covid_enabled", o.covid_enabled, where);
    o.cvd = get_or<double>(j, "cvd", o.cvd, where);
    o.ur_enabled = get_or<bool>(j, "ur_enabled", o.ur_enabled, where);
    return o;
}

json profile_json(const StochasticProfileSpec& p) {
    return {{"load_mean", p.load_mean},
            {"load_std", p.load_std},
            {"irradiance_alpha", p.irradiance_alpha},
            {"irradiance_beta", p.irradiance_beta},
            {"solar_envelope", p.solar_envelope},
            {"wind_shape", p.wind_shape},
            {"wind_scale", p.wind_scale},
            {"turbine_curve",
             {{"cut_in", p.turbine_curve.cut_in}, {"rated", p.turbine_curve.rated}, {"cut_out", p.turbine_curve.cut_out}}},
            {"sunrise", p.sunrise},
            {"sunset", p.sunset},
            {"renewables_at_mean", p.renewables_at_mean}};
}

StochasticProfileSpec profile_from_json(const json& j, const MicrogridConfig& system) {
    const std::string where = "scenarios.profile";
    reject_unknown(j, {"load_mean", "load_std", "irradiance_alpha", "irradiance_beta", "solar_envelope", "wind_shape",
                       "wind_scale", "turbine_curve", "sunrise", "sunset", "renewables_at_mean"},
                   where);
    // Start from the defaults so a profile section may override only a few fields.
    StochasticProfileSpec p = default_profile_spec(system);
    using V = std::vector<double>;
    p.load_mean = get_or<V>(j, "load_mean", p.load_mean, where);
    p.load_std = get_or<V>(j, "load_std", p.load_std, where);
    p.irradiance_alpha = get_or<V>(j, "irradiance_alpha", p.irradiance_alpha, where);
    p.irradiance_beta = get_or<V>(j, "irradiance_beta", p.irradiance_beta, where);
    p.solar_envelope = get_or<V>(j, "solar_envelope", p.solar_envelope, where);
    p.wind_shape = get_or<V>(j, "wind_shape", p.wind_shape, where);
    p.wind_scale = get_or<V>(j, "wind_scale", p.wind_scale, where);
    if (j.contains("turbine_curve")) {
        const json& c = j.at("turbine_curve");
        reject_unknown(c, {"cut_in", "rated", "cut_out"}, where + ".turbine_curve");
        p.turbine_curve.cut_in = get_or<double>(c, "cut_in", p.turbine_curve.cut_in, where);
        p.turbine_curve.rated = get_or<double>(c, "rated", p.turbine_curve.rated, where);
        p.turbine_curve.cut_out = get_or<double>(c, "cut_out", p.turbine_curve.cut_out, where);
    }
    p.sunrise = get_or<int>(j, "sunrise", p.sunrise, where);
    p.sunset = get_or<int>(j, "sunset", p.sunset, where);
    p.renewables_at_mean = get_or<bool>(j, "renewables_at_mean", p.renewables_at_mean, where);
    return p;
}

// ---- CSV helpers ------------------------------------------------------------

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    out.push_back(std::move(cell));
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) rows.push_back(split_csv_line(line));
    return rows;
}

double parse_number(const std::string& text, const std::string& where) {
    if (text == "inf") return kInf;
    if (text == "-inf") return -kInf;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError(where + ": not a number: '" + text + "'");
    return v;
}

// Solver output can carry round-off like 3e-16 on values that are zero.
std::string clean(double v) {
    return format_double(std::abs(v) < 1e-12 ? 0.0 : v);
}

void write_grid(const HourScenarioGrid& grid, const fs::path& path) {
    std::ostringstream os;
    os << "hour";
    for (int s = 0; s < grid.scenarios(); ++s) os << ",s" << (s + 1);
    os << '\n';
    for (int t = 0; t < grid.hours(); ++t) {
        os << t;
        for (int s = 0; s < grid.scenarios(); ++s) os << ',' << format_double(grid(t, s));
        os << '\n';
    }
    write_text_file(path, os.str());
}

HourScenarioGrid read_grid(const fs::path& path, int hours, int scenarios) {
    const auto rows = read_csv(path);
    const std::string where = path.filename().string();
    if (rows.size() != static_cast<std::size_t>(hours) + 1)
        throw ConfigError(where + ": expected " + std::to_string(hours) + " hour rows");
    HourScenarioGrid grid(hours, scenarios);
    for (int t = 0; t < hours; ++t) {
        const auto& row = rows[static_cast<std::size_t>(t) + 1];
        if (row.size() != static_cast<std::size_t>(scenarios) + 1)
            throw ConfigError(where + ": row " + std::to_string(t) + " should have " + std::to_string(scenarios) +
                              " scenario columns");
        for (int s = 0; s < scenarios; ++s)
            grid(t, s) = parse_number(row[static_cast<std::size_t>(s) + 1], where);
    }
    return grid;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

} // namespace

// ---- text files ---------------------------------------------------------------

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + path.string());
}

// ---- study config ---------------------------------------------------------------

StochasticProfileSpec StudyConfig::profile_or_default() const {
    return profile ? *profile : default_profile_spec(system);
}

StudyConfig default_study() {
    StudyConfig study;
    study.system = default_study_config();
    return study;
}

StudyConfig parse_study_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(root, {"schema_version", "system", "risk", "options", "scenarios"}, "config");
    const int version = get_required<int>(root, "schema_version", "config");
    if (version != kConfigSchemaVersion)
        throw ConfigError("config: unsupported schema_version " + std::to_string(version) + " (expected " +
                          std::to_string(kConfigSchemaVersion) + ")");
    StudyConfig study;
    if (!root.contains("system")) throw ConfigError("config: missing key 'system'");
    study.system = system_from_json(root.at("system"));
    if (root.contains("risk")) study.risk = risk_from_json(root.at("risk"));
    if (root.contains("options")) study.options = options_from_json(root.at("options"));
    if (root.contains("scenarios")) {
        const json& sj = root.at("scenarios");
        reject_unknown(sj, {"count", "seed", "profile"}, "scenarios");
        study.scenario_count = get_or<int>(sj, "count", study.scenario_count, "scenarios");
        study.seed = get_or<std::uint64_t>(sj, "seed", study.seed, "scenarios");
        if (sj.contains("profile")) study.profile = profile_from_json(sj.at("profile"), study.system);
    }
    return study;
}

std::string profile_to_json(const StochasticProfileSpec& profile) {
    return profile_json(profile).dump(2);
}

std::string study_config_to_json(const StudyConfig& study) {
    json scen = {{"count", study.scenario_count}, {"seed", study.seed}};
    if (study.profile) scen["profile"] = profile_json(*study.profile);
    json root = {{"schema_version", kConfigSchemaVersion},
                 {"system", system_to_json(study.system)},
                 {"risk", risk_to_json(study.risk)},
                 {"options", options_to_json(study.options)},
                 {"scenarios", scen}};
    return root.dump(2) + "\n";
}

StudyConfig load_study_config(const fs::path& path) {
    return parse_study_config(read_text_file(path));
}

void save_study_config(const StudyConfig& study, const fs::path& path) {
    write_text_file(path, study_config_to_json(study));
}

// ---- scenario bundle ---------------------------------------------------------------

void write_scenario_bundle(const ScenarioSet& scenarios, const MicrogridConfig& config,
                           const StochasticProfileSpec& profile, const fs::path& dir) {
    check_dimensions(config, scenarios);
    fs::create_directories(dir);
    json files = json::array();
    write_grid(scenarios.load, dir / "load.csv");
    files.push_back("load.csv");
    json pv_ids = json::array();
    json wt_ids = json::array();
    const auto pv_units = config.units_of_kind(RenewableKind::PV);
    const auto wt_units = config.units_of_kind(RenewableKind::WT);
    for (std::size_t k = 0; k < pv_units.size(); ++k) {
        const std::string name = "pv_" + config.renewables[pv_units[k]].id + ".csv";
        write_grid(scenarios.pv_max[k], dir / name);
        files.push_back(name);
        pv_ids.push_back(config.renewables[pv_units[k]].id);
    }
    for (std::size_t k = 0; k < wt_units.size(); ++k) {
        const std::string name = "wt_" + config.renewables[wt_units[k]].id + ".csv";
        write_grid(scenarios.wt_max[k], dir / name);
        files.push_back(name);
        wt_ids.push_back(config.renewables[wt_units[k]].id);
    }
    std::ostringstream prob;
    prob << "scenario,prob\n";
    for (std::size_t s = 0; s < scenarios.prob.size(); ++s) prob << "s" << (s + 1) << ',' << format_double(scenarios.prob[s]) << '\n';
    write_text_file(dir / "prob.csv", prob.str());
    files.push_back("prob.csv");

    json manifest = {{"schema_version", kConfigSchemaVersion},
                     {"kind", "scenario_bundle"},
                     {"seed", scenarios.seed},
                     {"scenario_count", scenarios.scenario_count},
                     {"hours", scenarios.hours()},
                     {"pv_units", pv_ids},
                     {"wt_units", wt_ids},
                     {"files", files},
                     {"profile", profile_json(profile)}};
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

ScenarioSet read_scenario_bundle(const MicrogridConfig& config, const fs::path& dir) {
    json manifest;
    try {
        manifest = json::parse(read_text_file(dir / "manifest.json"));
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario manifest is not valid JSON: " + std::string(e.what()));
    }
    const std::string where = "scenario manifest";
    ScenarioSet set;
    set.seed = get_required<std::uint64_t>(manifest, "seed", where);
    set.scenario_count = get_required<int>(manifest, "scenario_count", where);
    const int hours = get_required<int>(manifest, "hours", where);
    if (hours != config.horizon)
        throw ConfigError("scenario bundle has " + std::to_string(hours) + " hours, config horizon is " +
                          std::to_string(config.horizon));
    const auto pv_ids = get_required<std::vector<std::string>>(manifest, "pv_units", where);
    const auto wt_ids = get_required<std::vector<std::string>>(manifest, "wt_units", where);
    auto expect_ids = [&](RenewableKind kind, const std::vector<std::string>& ids) {
        std::vector<std::string> want;
        for (std::size_t i : config.units_of_kind(kind)) want.push_back(config.renewables[i].id);
        if (want != ids) throw ConfigError("scenario bundle " + to_string(kind) + " units do not match the config");
    };
    expect_ids(RenewableKind::PV, pv_ids);
    expect_ids(RenewableKind::WT, wt_ids);

    const int S = set.scenario_count;
    set.load = read_grid(dir / "load.csv", hours, S);
    for (const auto& id : pv_ids) set.pv_max.push_back(read_grid(dir / ("pv_" + id + ".csv"), hours, S));
    for (const auto& id : wt_ids) set.wt_max.push_back(read_grid(dir / ("wt_" + id + ".csv"), hours, S));

    const auto prob_rows = read_csv(dir / "prob.csv");
    if (prob_rows.size() != static_cast<std::size_t>(S) + 1) throw ConfigError("prob.csv: expected one row per scenario");
    for (int s = 0; s < S; ++s) {
        const auto& row = prob_rows[static_cast<std::size_t>(s) + 1];
        if (row.size() != 2) throw ConfigError("prob.csv: malformed row");
        set.prob.push_back(parse_number(row[1], "prob.csv"));
    }
    double mass = 0.0;
    for (double p : set.prob) mass += p;
    if (std::abs(mass - 1.0) > 1e-12) throw ConfigError("prob.csv: probabilities sum to " + format_double(mass));
    check_dimensions(config, set);
    return set;
}

// ---- case outputs ---------------------------------------------------------------

void write_solution_csv(const CaseResult& result, const MicrogridConfig& config, const fs::path& path) {
    if (!result.problem) throw ConfigError("write_solution_csv: case has no solved model");
    const BuiltProblem& bp = *result.problem;
    const VariableMap& m = bp.map;
    const auto& v = result.values;
    auto val = [&](int idx) { return clean(v[static_cast<std::size_t>(idx)]); };
    auto bin = [&](int idx) { return std::to_string(std::lround(v[static_cast<std::size_t>(idx)])); };
    const auto pv_units = config.units_of_kind(RenewableKind::PV);
    const auto wt_units = config.units_of_kind(RenewableKind::WT);
    const bool drp = !m.drp.empty();

    std::ostringstream os;
    os << "scenario,hour,load";
    for (const auto& g : config.generators) os << ",P_" << g.id;
    for (const auto& g : config.generators) os << ",u_" << g.id;
    for (std::size_t i : pv_units) os << ",PV_" << config.renewables[i].id;
    for (std::size_t j : wt_units) os << ",WT_" << config.renewables[j].id;
    os << ",charge,discharge,mode,soc,ens";
    if (drp) os << ",drp";
    os << '\n';
    for (int s = 0; s < m.scenarios; ++s)
        for (int t = 0; t < m.hours; ++t) {
            os << (s + 1) << ',' << t << ',' << format_double(bp.load(t, s));
            for (int g = 0; g < m.generators; ++g) os << ',' << val(m.P(g, t, s));
            for (int g = 0; g < m.generators; ++g) os << ',' << bin(m.U(g, t, s));
            for (int i = 0; i < m.pv_units; ++i) os << ',' << val(m.PV(i, t, s));
            for (int j = 0; j < m.wt_units; ++j) os << ',' << val(m.WT(j, t, s));
            os << ',' << val(m.Charge(t, s)) << ',' << val(m.Discharge(t, s)) << ',' << bin(m.Mode(t, s)) << ','
               << val(m.Soc(t, s)) << ',' << val(m.Ens(t, s));
            if (drp) os << ',' << val(m.Drp(t, s));
            os << '\n';
        }
    write_text_file(path, os.str());
}

void write_summary_csv(const CaseResult& r, const fs::path& path) {
    std::ostringstream os;
    os << "scenario,prob,tens_kwh,target_kwh,ur_kwh,passive_ur_kwh\n";
    for (std::size_t s = 0; s < r.tens.size(); ++s)
        os << "SC" << (s + 1) << ',' << format_double(r.prob[s]) << ',' << clean(r.tens[s]) << ','
           << format_double(r.targets[s]) << ',' << clean(r.ur[s]) << ',' << clean(r.passive[s]) << '\n';
    os << "average,1," << clean(r.expected_tens) << ",," << clean(r.expected_ur) << ','
       << clean(expected_over_scenarios(r.passive, r.prob)) << '\n';
    write_text_file(path, os.str());
}

void write_result_csv(const CaseResult& r, const fs::path& path) {
    std::ostringstream os;
    os << "key,value\n";
    auto row = [&](const char* key, const std::string& value) { os << key << ',' << csv_field(value) << '\n'; };
    row("name", r.name);
    row("drp_enabled", bool_text(r.options.drp_enabled));
    row("drp_flex", format_double(r.options.drp_flex));
    row("drp_energy_neutral", bool_text(r.options.drp_energy_neutral));
    row("drp_literal", bool_text(r.options.drp_literal));
    row("covid_enabled", bool_text(r.options.covid_enabled));
    row("cvd", format_double(r.options.cvd));
    row("ur_enabled", bool_text(r.options.ur_enabled));
    row("lambda", r.lambda ? format_double(*r.lambda) : "");
    row("eur", r.eur ? format_double(*r.eur) : "");
    row("big_m", format_double(r.big_m));
    row("scenario_seed", std::to_string(r.scenario_seed));
    row("scenario_count", std::to_string(r.tens.size()));
    row("status", to_string(r.status));
    row("objective", clean(r.objective));
    row("gap", clean(r.gap));
    row("nodes", std::to_string(r.nodes));
    row("expected_tens", clean(r.expected_tens));
    row("expected_ur", clean(r.expected_ur));
    row("se_pv", clean(r.spilled.pv));
    row("se_wt", clean(r.spilled.wt));
    row("se_total", clean(r.spilled.total));
    write_text_file(path, os.str());
}

void write_audit_csv(const CaseResult& r, const fs::path& path) {
    std::ostringstream os;
    os << "check,value,limit,passed\n";
    auto row = [&](const char* check, double value, double limit, bool ok) {
        os << check << ',' << format_double(value) << ',' << format_double(limit) << ',' << bool_text(ok) << '\n';
    };
    const double tol = 1e-6;
    row("max_constraint_residual", r.audit.max_residual, tol, r.audit.max_residual <= tol);
    row("max_bound_violation", r.audit.max_bound_violation, tol, r.audit.max_bound_violation <= tol);
    row("max_integrality_violation", r.audit.max_integrality_violation, tol, r.audit.max_integrality_violation <= tol);
    row("se_pv_nonnegative", r.spilled.pv, 0.0, r.spilled.pv >= 0.0);
    row("se_wt_nonnegative", r.spilled.wt, 0.0, r.spilled.wt >= 0.0);
    const double additivity = r.spilled.total - (r.spilled.pv + r.spilled.wt);
    row("se_total_additivity", additivity, 0.0, additivity == 0.0);
    write_text_file(path, os.str());
}

CaseResult read_case_result(const fs::path& dir) {
    std::map<std::string, std::string> kv;
    const auto rows = read_csv(dir / "result.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw ConfigError((dir / "result.csv").string() + ": malformed row");
        kv[rows[i][0]] = rows[i][1];
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError((dir / "result.csv").string() + ": missing key " + key);
        return it->second;
    };
    auto num = [&](const char* key) { return parse_number(need(key), "result.csv " + std::string(key)); };
    auto opt = [&](const char* key) -> std::optional<double> {
        const auto& text = need(key);
        if (text.empty()) return std::nullopt;
        return parse_number(text, "result.csv");
    };
    CaseResult r;
    r.name = need("name");
    r.options.drp_enabled = need("drp_enabled") == "true";
    r.options.drp_flex = num("drp_flex");
    r.options.drp_energy_neutral = need("drp_energy_neutral") == "true";
    r.options.drp_literal = need("drp_literal") == "true";
    r.options.covid_enabled = need("covid_enabled") == "true";
    r.options.cvd = num("cvd");
    r.options.ur_enabled = need("ur_enabled") == "true";
    r.lambda = opt("lambda");
    r.eur = opt("eur");
    r.big_m = num("big_m");
    r.scenario_seed = std::stoull(need("scenario_seed"));
    const std::string status = need("status");
    r.status = status == "optimal" ? MipStatus::Optimal : status == "node_limit" ? MipStatus::NodeLimit
                                                                                   : MipStatus::Infeasible;
    r.objective = num("objective");
    r.gap = num("gap");
    r.nodes = std::stoll(need("nodes"));
    r.expected_tens = num("expected_tens");
    r.expected_ur = num("expected_ur");
    r.spilled = {num("se_pv"), num("se_wt"), num("se_total")};

    const auto summary = read_csv(dir / "summary.csv");
    for (std::size_t i = 1; i < summary.size(); ++i) {
        const auto& row = summary[i];
        if (row.size() != 6) throw ConfigError((dir / "summary.csv").string() + ": malformed row");
        if (row[0] == "average") continue;
        r.prob.push_back(parse_number(row[1], "summary.csv"));
        r.tens.push_back(parse_number(row[2], "summary.csv"));
        r.targets.push_back(parse_number(row[3], "summary.csv"));
        r.ur.push_back(parse_number(row[4], "summary.csv"));
        r.passive.push_back(parse_number(row[5], "summary.csv"));
    }
    return r;
}

void write_sweep_csv(const SweepResult& sweep, const fs::path& path) {
    std::ostringstream os;
    os << "lambda,ok,expected_tens_kwh,expected_ur_kwh,ur_cap_kwh,se_pv_kwh,se_wt_kwh,se_total_kwh,error\n";
    const CaseResult& b = sweep.baseline;
    os << "baseline,true," << clean(b.expected_tens) << ',' << clean(b.expected_ur) << ",," << clean(b.spilled.pv)
       << ',' << clean(b.spilled.wt) << ',' << clean(b.spilled.total) << ",\n";
    const double eur = b.expected_ur;
    for (const auto& p : sweep.points) {
        os << format_double(p.lambda) << ',' << bool_text(p.ok) << ',';
        const double cap = p.lambda * (p.ok && p.result.eur ? *p.result.eur : eur);
        if (p.ok) {
            const CaseResult& r = p.result;
            os << clean(r.expected_tens) << ',' << clean(r.expected_ur) << ',' << clean(cap) << ','
               << clean(r.spilled.pv) << ',' << clean(r.spilled.wt) << ',' << clean(r.spilled.total) << ",\n";
        } else {
            os << ",," << clean(cap) << ",,,," << csv_field(p.error) << '\n';
        }
    }
    write_text_file(path, os.str());
}

} // namespace mgrisk
