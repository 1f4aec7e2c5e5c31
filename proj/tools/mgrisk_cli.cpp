// mgrisk: scenario generation, case solves, lambda sweeps and reports for
// the islanded-microgrid upside-risk model.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mgrisk/formulation.hpp"
#include "mgrisk/milp.hpp"
#include "mgrisk/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mgrisk;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> scenarios;
};

StudyConfig load_study(const Common& c) {
    StudyConfig study = c.config.empty() ? default_study() : load_study_config(c.config);
    if (c.seed) study.seed = *c.seed;
    if (c.scenarios) study.scenario_count = *c.scenarios;
    return study;
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Study config (JSON); built-in study system if omitted")
        ->envname("MGRISK_CONFIG")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Scenario seed")->envname("MGRISK_SEED");
    cmd->add_option("--scenarios", c.scenarios, "Number of scenarios")->envname("MGRISK_SCENARIOS")->check(CLI::PositiveNumber);
}

ScenarioSet scenarios_for(const StudyConfig& study, const std::string& bundle, const fs::path& out) {
    if (!bundle.empty()) return read_scenario_bundle(study.system, bundle);
    return generate_bundle(study, out / "scenarios");
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--lambda-grid", "not a number: '" + item + "'");
        }
    }
    return grid;
}

void print_case(const CaseResult& r) {
    std::cout << r.name << ": " << to_string(r.status) << ", expected TENS " << format_double(r.expected_tens)
              << " kWh, expected UR " << format_double(r.expected_ur) << " kWh";
    if (r.lambda) std::cout << " (lambda " << format_double(*r.lambda) << ", EUR " << format_double(r.eur.value_or(0.0)) << ")";
    std::cout << ", " << r.nodes << " nodes, audit max residual " << format_double(r.audit.max_residual) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic islanded-microgrid scheduling with an upside-risk cap"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common common;
    std::string out = "mgrisk_out";
    std::string bundle;
    std::string case_name = "base";
    bool with_ur = false;
    std::optional<double> lambda;
    std::string grid_text;
    int jobs = 1;
    std::string trace;
    std::string run_dir;
    std::string manifest_path;
    std::string lp_path;

    auto out_opt = [&](CLI::App* cmd, const char* help) {
        cmd->add_option("--out", out, help)->envname("MGRISK_OUT");
    };
    auto case_opts = [&](CLI::App* cmd) {
        cmd->add_option("--case", case_name, "Case: base, ur, drp, covid or combined")
            ->check(CLI::IsMember({"base", "ur", "drp", "covid", "combined"}));
        cmd->add_flag("--with-ur", with_ur, "Add the upside-risk cap to the chosen case");
        cmd->add_option("--lambda", lambda, "Risk factor in [0,1] for the UR cap")->check(CLI::Range(0.0, 1.0));
    };

    auto* gen = app.add_subcommand("generate", "Generate a scenario bundle");
    add_common(gen, common);
    out_opt(gen, "Bundle directory");

    auto* solve = app.add_subcommand("solve", "Solve one case and write solution, summary and audit files");
    add_common(solve, common);
    case_opts(solve);
    solve->add_option("--bundle", bundle, "Scenario bundle directory (generated if omitted)")->check(CLI::ExistingDirectory);
    solve->add_option("--trace", trace, "Write a branch-and-bound node trace CSV here");
    out_opt(solve, "Case output directory");

    auto* sweep = app.add_subcommand("sweep", "Solve the UR case over a grid of lambda values");
    add_common(sweep, common);
    sweep->add_option("--case", case_name, "Underlying case: base, drp, covid or combined")
        ->check(CLI::IsMember({"base", "drp", "covid", "combined"}));
    sweep->add_option("--bundle", bundle, "Scenario bundle directory (generated if omitted)")->check(CLI::ExistingDirectory);
    sweep->add_option("--lambda-grid", grid_text, "Comma-separated lambda values")->required();
    sweep->add_option("--jobs", jobs, "Concurrent solves")->envname("MGRISK_JOBS")->check(CLI::PositiveNumber);
    out_opt(sweep, "Sweep output directory");

    auto* report = app.add_subcommand("report", "Compare the cases of a run directory");
    report->add_option("run_dir", run_dir, "Directory holding case subdirectories")->required()->check(CLI::ExistingDirectory);
    report->add_option("--out", out, "Report directory (default: <run_dir>/report)");

    auto* run = app.add_subcommand("run", "Full study: scenarios, six cases, lambda sweep, report, manifest");
    add_common(run, common);
    run->add_option("--lambda-grid", grid_text, "Comma-separated lambda values (default 0.5,0.6,0.7,0.8,0.9,0.95)");
    run->add_option("--jobs", jobs, "Concurrent sweep solves")->envname("MGRISK_JOBS")->check(CLI::PositiveNumber);
    out_opt(run, "Run directory");

    auto* replay = app.add_subcommand("replay", "Re-run a study from its manifest.json");
    replay->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
    replay->add_option("--out", out, "Run directory for the replay")->required();

    auto* export_lp = app.add_subcommand("export-lp", "Write the model of one case in LP format");
    add_common(export_lp, common);
    case_opts(export_lp);
    export_lp->add_option("--bundle", bundle, "Scenario bundle directory")->required()->check(CLI::ExistingDirectory);
    export_lp->add_option("--out", lp_path, "LP file")->required();

    auto* solve_lp_cmd = app.add_subcommand("solve-lp", "Solve an LP-format model with the built-in solver");
    solve_lp_cmd->add_option("lp_file", lp_path, "LP file")->required()->check(CLI::ExistingFile);

    auto* validate = app.add_subcommand("validate", "Check a config and print every violation");
    add_common(validate, common);

    auto* show_config = app.add_subcommand("config", "Write the effective study config as JSON (a starting point for edits)");
    add_common(show_config, common);
    show_config->add_option("--out", lp_path, "Config file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            const StudyConfig study = load_study(common);
            const ScenarioSet set = generate_bundle(study, out);
            std::cout << "wrote " << set.scenario_count << " scenarios (seed " << set.seed << ") to " << out << "\n";
            return kExitOk;
        }
        if (*show_config) {
            const StudyConfig study = load_study(common);
            if (lp_path.empty())
                std::cout << study_config_to_json(study);
            else
                save_study_config(study, lp_path);
            return kExitOk;
        }
        if (*validate) {
            require_valid(load_study(common));
            std::cout << "config OK\n";
            return kExitOk;
        }
        if (*solve || *export_lp) {
            StudyConfig study = load_study(common);
            require_valid(study);
            if (lambda) study.risk.lambda = *lambda;
            const CaseKind kind = parse_case_kind(case_name);
            const CaseSpec spec{case_dir_name(kind, with_ur), case_options(kind, with_ur, study.options)};
            if (*export_lp) {
                const ScenarioSet set = read_scenario_bundle(study.system, bundle);
                RiskConfig risk = study.risk;
                if (spec.options.ur_enabled && (risk.targets.empty() || !risk.eur)) {
                    // Fill targets and EUR the same way a solve would.
                    CaseResult base = solve_case(study.system, set, risk, spec.options, {}, spec.name);
                    risk.targets = base.targets;
                    risk.eur = base.eur;
                }
                BuiltProblem bp = build_problem(study.system, set, risk, spec.options);
                std::ofstream os(lp_path);
                if (!os) throw ConfigError("cannot write " + lp_path);
                write_lp(bp.model, os);
                std::cout << "wrote " << bp.model.num_variables() << " columns, " << bp.model.num_constraints()
                          << " rows to " << lp_path << "\n";
                return kExitOk;
            }
            const ScenarioSet set = scenarios_for(study, bundle, out);
            SolverOptions solver;
            std::ofstream trace_file;
            if (!trace.empty()) {
                trace_file.open(trace);
                if (!trace_file) throw ConfigError("cannot write " + trace);
                trace_file << "component,node,depth,bound,incumbent\n";
                solver.node_trace = &trace_file;
            }
            const CaseResult r = solve_and_write(study, set, spec, out, solver);
            print_case(r);
            return kExitOk;
        }
        if (*sweep) {
            const StudyConfig study = load_study(common);
            require_valid(study);
            const std::vector<double> grid = parse_grid(grid_text);
            if (grid.empty()) {
                std::cerr << "error: --lambda-grid is empty\n";
                return kExitUsage;
            }
            for (double l : grid)
                if (!(l >= 0.0 && l <= 1.0)) {
                    std::cerr << "error: lambda " << l << " outside [0,1]\n";
                    return kExitUsage;
                }
            const ScenarioSet set = scenarios_for(study, bundle, out);
            const CaseOptions options = case_options(parse_case_kind(case_name), false, study.options);
            const SweepResult result = sweep_and_write(study, set, options, grid, jobs, out);
            print_case(result.baseline);
            for (const auto& p : result.points) {
                if (p.ok)
                    print_case(p.result);
                else
                    std::cerr << "lambda " << p.lambda << " failed: " << p.error << "\n";
            }
            return result.all_ok() ? kExitOk : kExitPartialSweep;
        }
        if (*report) {
            const fs::path dest = app.get_subcommand("report")->count("--out") ? fs::path(out) : fs::path(run_dir) / "report";
            write_report(run_dir, dest);
            std::cout << "report written to " << dest.string() << "\n";
            return kExitOk;
        }
        if (*run || *replay) {
            RunManifest manifest;
            if (*replay) {
                manifest = parse_manifest(read_text_file(manifest_path));
            } else {
                manifest.config_path = common.config;
                manifest.study = load_study(common);
                manifest.cases = standard_cases(manifest.study.options);
                manifest.lambda_grid = grid_text.empty() ? default_lambda_grid() : parse_grid(grid_text);
                manifest.jobs = jobs;
            }
            manifest.output_dir = out;
            const PipelineOutcome outcome = run_pipeline(manifest);
            for (const auto& t : outcome.manifest.timings)
                std::cout << t.name << ": " << format_double(t.seconds) << " s\n";
            std::cout << "run written to " << out << "\n";
            return outcome.sweep_ok ? kExitOk : kExitPartialSweep;
        }
        if (*solve_lp_cmd) {
            const MilpModel model = parse_lp(read_text_file(lp_path));
            const MipSolution mip = branch_and_bound(model);
            std::cout << "status " << to_string(mip.status) << "\nobjective " << format_double(mip.objective)
                      << "\nnodes " << mip.nodes_explored << "\n";
            if (!mip.has_incumbent()) return kExitSolver;
            const AuditReport audit = audit_solution(model, mip.values);
            std::cout << "audit " << (audit.passed ? "passed" : "FAILED") << " (max residual "
                      << format_double(audit.max_residual) << ")\n";
            return audit.passed ? kExitOk : kExitSolver;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormulationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        if (!trace.empty()) std::cerr << "node trace written to " << trace << "\n";
        return kExitSolver;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitUsage;
}
