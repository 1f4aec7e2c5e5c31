#include "mgrisk/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

#include "json.hpp"
#include "mgrisk/milp.hpp"

namespace mgrisk {

namespace fs = std::filesystem;
using nlohmann::json;

CaseKind parse_case_kind(const std::string& text) {
    if (text == "base") return CaseKind::Base;
    if (text == "ur") return CaseKind::Ur;
    if (text == "drp") return CaseKind::Drp;
    if (text == "covid") return CaseKind::Covid;
    if (text == "combined") return CaseKind::Combined;
    throw ConfigError("unknown case '" + text + "' (expected base, ur, drp, covid or combined)");
}

std::string to_string(CaseKind kind) {
    switch (kind) {
    case CaseKind::Base: return "base";
    case CaseKind::Ur: return "ur";
    case CaseKind::Drp: return "drp";
    case CaseKind::Covid: return "covid";
    case CaseKind::Combined: return "combined";
    }
    return "base";
}

CaseOptions case_options(CaseKind kind, bool with_ur, const CaseOptions& tuning) {
    CaseOptions o = tuning;
    o.drp_enabled = kind == CaseKind::Drp || kind == CaseKind::Combined;
    o.covid_enabled = kind == CaseKind::Covid || kind == CaseKind::Combined;
    o.ur_enabled = kind == CaseKind::Ur || with_ur;
    return o;
}

std::string case_dir_name(CaseKind kind, bool with_ur) {
    if (kind == CaseKind::Ur || (kind == CaseKind::Base && with_ur)) return "ur";
    return to_string(kind) + (with_ur ? "_ur" : "");
}

std::vector<CaseSpec> standard_cases(const CaseOptions& tuning) {
    std::vector<CaseSpec> out;
    for (CaseKind k : {CaseKind::Base, CaseKind::Drp, CaseKind::Covid})
        for (bool ur : {false, true}) out.push_back({case_dir_name(k, ur), case_options(k, ur, tuning)});
    return out;
}

std::vector<double> default_lambda_grid() {
    return {0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
}

void require_valid(const StudyConfig& study) {
    RiskConfig risk = study.risk;
    auto violations = validate_config(study.system, risk, study.options);
    if (study.scenario_count < 1)
        violations.push_back({"SCENARIO_COUNT", "scenario count must be >= 1"});
    const auto profile = validate_profile_spec(study.profile_or_default(), study.system.horizon);
    violations.insert(violations.end(), profile.begin(), profile.end());
    if (!violations.empty()) throw ConfigError("invalid configuration:\n" + format_violations(violations));
}

ScenarioSet generate_bundle(const StudyConfig& study, const fs::path& dir) {
    require_valid(study);
    const auto profile = study.profile_or_default();
    ScenarioSet set = generate_scenarios(study.system, profile, study.scenario_count, study.seed);
    write_scenario_bundle(set, study.system, profile, dir);
    return set;
}

CaseResult solve_and_write(const StudyConfig& study, const ScenarioSet& scenarios, const CaseSpec& spec,
                           const fs::path& dir, const SolverOptions& solver) {
    CaseResult r = solve_case(study.system, scenarios, study.risk, spec.options, solver, spec.name);
    write_solution_csv(r, study.system, dir / "solution.csv");
    write_summary_csv(r, dir / "summary.csv");
    write_result_csv(r, dir / "result.csv");
    write_audit_csv(r, dir / "audit.csv");
    return r;
}

SweepResult sweep_and_write(const StudyConfig& study, const ScenarioSet& scenarios, const CaseOptions& options,
                            const std::vector<double>& lambdas, int jobs, const fs::path& dir,
                            const SolverOptions& solver) {
    SweepResult sweep = lambda_sweep(study.system, scenarios, study.risk, options, lambdas, solver, jobs);
    auto write_case = [&](const CaseResult& r, const fs::path& sub) {
        write_solution_csv(r, study.system, sub / "solution.csv");
        write_summary_csv(r, sub / "summary.csv");
        write_result_csv(r, sub / "result.csv");
        write_audit_csv(r, sub / "audit.csv");
    };
    write_case(sweep.baseline, dir / "baseline");
    for (const auto& p : sweep.points)
        if (p.ok) write_case(p.result, dir / ("lambda_" + format_double(p.lambda)));
    write_sweep_csv(sweep, dir / "sweep.csv");
    return sweep;
}

namespace {

std::string percent_text(const std::optional<double>& p) {
    return p ? format_double(*p) : std::string("undefined");
}

// Order in which cases appear as spilled-energy columns.
const std::vector<std::string> kCaseOrder = {"base", "ur", "drp", "drp_ur", "covid", "covid_ur", "combined", "combined_ur"};

} // namespace

void write_report(const fs::path& run_dir, const fs::path& report_dir) {
    std::map<std::string, CaseResult> cases;
    for (const auto& name : kCaseOrder)
        if (fs::exists(run_dir / name / "result.csv")) cases.emplace(name, read_case_result(run_dir / name));
    if (cases.size() < 2)
        throw ConfigError("report needs at least two solved cases under " + run_dir.string() + ", found " +
                          std::to_string(cases.size()));
    if (!cases.count("base")) throw ConfigError("report needs the base case under " + run_dir.string());
    fs::create_directories(report_dir);

    // Per-scenario ENS tables for the UR-free cases.
    for (const char* name : {"base", "drp", "covid", "combined"}) {
        auto it = cases.find(name);
        if (it == cases.end()) continue;
        const CaseResult& r = it->second;
        std::ostringstream os;
        os << "scenario,ens_kwh,target_kwh,passive_ur_kwh\n";
        for (std::size_t s = 0; s < r.tens.size(); ++s)
            os << "SC" << (s + 1) << ',' << format_double(r.tens[s]) << ',' << format_double(r.targets[s]) << ','
               << format_double(r.passive[s]) << '\n';
        os << "average," << format_double(r.expected_tens) << ",," << format_double(r.expected_ur) << '\n';
        write_text_file(report_dir / ("ens_" + std::string(name) + ".csv"), os.str());
    }

    {
        std::ostringstream os;
        os << "metric";
        for (const auto& name : kCaseOrder)
            if (cases.count(name)) os << ',' << name;
        os << '\n';
        auto line = [&](const char* metric, double SpilledEnergy::*field) {
            os << metric;
            for (const auto& name : kCaseOrder)
                if (cases.count(name)) os << ',' << format_double(cases.at(name).spilled.*field);
            os << '\n';
        };
        line("se_pv_kwh", &SpilledEnergy::pv);
        line("se_wt_kwh", &SpilledEnergy::wt);
        line("se_total_kwh", &SpilledEnergy::total);
        write_text_file(report_dir / "spilled_energy.csv", os.str());
    }

    // DRP is compared with base, COVID with the case before it in the chain
    // (DRP) and with base, and each UR variant with its UR-free twin.
    struct Pair {
        const char* base;
        const char* variant;
        const char* note;
    };
    const std::vector<Pair> pairs = {
        {"base", "drp", ""},
        {"drp", "covid", "chained comparison; the published -53.88% for this pair equals covid vs base instead"},
        {"base", "covid", ""},
        {"base", "combined", ""},
        {"base", "ur", ""},
        {"drp", "drp_ur", ""},
        {"covid", "covid_ur", ""},
        {"combined", "combined_ur", ""},
    };
    std::ostringstream os;
    os << "base_case,variant_case,metric,base_value,variant_value,percent_change,note\n";
    for (const auto& p : pairs) {
        if (!cases.count(p.base) || !cases.count(p.variant)) continue;
        for (const auto& d : compare_cases(cases.at(p.base), cases.at(p.variant))) {
            os << p.base << ',' << p.variant << ',' << d.metric << ',' << format_double(d.base) << ','
               << format_double(d.variant) << ',' << percent_text(d.percent) << ',';
            if (d.metric == "expected_tens" && *p.note) os << '"' << p.note << '"';
            os << '\n';
        }
    }
    write_text_file(report_dir / "comparison.csv", os.str());
}

// ---- manifest ---------------------------------------------------------------------

std::string manifest_to_json(const RunManifest& m) {
    json cases = json::array();
    for (const auto& c : m.cases) {
        json entry = {{"name", c.name},
                      {"drp_enabled", c.options.drp_enabled},
                      {"covid_enabled", c.options.covid_enabled},
                      {"ur_enabled", c.options.ur_enabled}};
        for (const auto& [name, value] : m.eur)
            if (name == c.name) entry["eur"] = value;
        for (const auto& t : m.timings)
            if (t.name == c.name) entry["solve_seconds"] = t.seconds;
        cases.push_back(entry);
    }
    json timings = json::array();
    for (const auto& t : m.timings) timings.push_back({{"name", t.name}, {"seconds", t.seconds}});
    json root = {{"schema_version", kConfigSchemaVersion},
                 {"kind", "run"},
                 {"tool_version", m.tool_version},
                 {"config_path", m.config_path},
                 {"config", json::parse(study_config_to_json(m.study))},
                 {"seed", m.study.seed},
                 {"scenario_count", m.study.scenario_count},
                 {"cases", cases},
                 {"lambda_grid", m.lambda_grid},
                 {"jobs", m.jobs},
                 {"output_dir", m.output_dir.string()},
                 {"timings", timings},
                 {"files", m.files}};
    return root.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!root.is_object() || root.value("kind", "") != "run") throw ConfigError("not a run manifest");
    if (root.value("schema_version", 0) != kConfigSchemaVersion) throw ConfigError("manifest: unsupported schema_version");
    RunManifest m;
    try {
        m.tool_version = root.value("tool_version", std::string(kToolVersion));
        m.config_path = root.value("config_path", std::string());
        m.study = parse_study_config(root.at("config").dump());
        // Top-level seed/count win so a manifest can be edited by hand.
        m.study.seed = root.value("seed", m.study.seed);
        m.study.scenario_count = root.value("scenario_count", m.study.scenario_count);
        for (const auto& c : root.at("cases")) {
            CaseSpec spec;
            spec.name = c.at("name").get<std::string>();
            spec.options = m.study.options;
            spec.options.drp_enabled = c.at("drp_enabled").get<bool>();
            spec.options.covid_enabled = c.at("covid_enabled").get<bool>();
            spec.options.ur_enabled = c.at("ur_enabled").get<bool>();
            m.cases.push_back(spec);
        }
        m.lambda_grid = root.at("lambda_grid").get<std::vector<double>>();
        m.jobs = root.value("jobs", 1);
        m.output_dir = root.value("output_dir", std::string());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }
    return m;
}

std::vector<std::string> list_files(const fs::path& dir) {
    std::vector<std::string> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file()) out.push_back(fs::relative(entry.path(), dir).generic_string());
    std::sort(out.begin(), out.end());
    return out;
}

PipelineOutcome run_pipeline(RunManifest manifest, const SolverOptions& solver) {
    require_valid(manifest.study);
    const fs::path out = manifest.output_dir;
    if (out.empty()) throw ConfigError("run: output directory not set");
    fs::create_directories(out);

    PipelineOutcome outcome;
    const ScenarioSet scenarios = generate_bundle(manifest.study, out / "scenarios");
    manifest.timings.clear();
    manifest.eur.clear();
    for (const auto& spec : manifest.cases) {
        const CaseResult r = solve_and_write(manifest.study, scenarios, spec, out / spec.name, solver);
        manifest.timings.push_back({spec.name, r.solve_seconds});
        if (r.eur) manifest.eur.emplace_back(spec.name, *r.eur);
    }
    if (!manifest.lambda_grid.empty()) {
        const auto t0 = std::chrono::steady_clock::now();
        const SweepResult sweep = sweep_and_write(manifest.study, scenarios, manifest.study.options,
                                                  manifest.lambda_grid, manifest.jobs, out / "sweep", solver);
        manifest.timings.push_back(
            {"sweep", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
        outcome.sweep_ok = sweep.all_ok();
    }
    if (manifest.cases.size() >= 2) write_report(out, out / "report");

    manifest.files = list_files(out);
    manifest.files.erase(std::remove(manifest.files.begin(), manifest.files.end(), "manifest.json"),
                         manifest.files.end());
    write_text_file(out / "manifest.json", manifest_to_json(manifest));
    outcome.manifest = std::move(manifest);
    return outcome;
}

} // namespace mgrisk
