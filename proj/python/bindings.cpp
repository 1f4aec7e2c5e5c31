#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mgrisk/analysis.hpp"
#include "mgrisk/pipeline.hpp"

namespace py = pybind11;
using namespace mgrisk;

namespace {

StudyConfig study_from(const std::optional<std::string>& config_json, std::optional<int> count,
                       std::optional<std::uint64_t> seed) {
    StudyConfig s = config_json ? parse_study_config(*config_json) : default_study();
    if (count) s.scenario_count = *count;
    if (seed) s.seed = *seed;
    require_valid(s);
    return s;
}

py::array_t<double> grid_array(const HourScenarioGrid& g) {
    py::array_t<double> out({g.hours(), g.scenarios()});
    auto view = out.mutable_unchecked<2>();
    for (int t = 0; t < g.hours(); ++t)
        for (int s = 0; s < g.scenarios(); ++s) view(t, s) = g(t, s);
    return out;
}

py::dict scenarios_dict(const MicrogridConfig& config, const ScenarioSet& set) {
    py::dict pv, wt;
    const auto pv_units = config.units_of_kind(RenewableKind::PV);
    const auto wt_units = config.units_of_kind(RenewableKind::WT);
    for (std::size_t i = 0; i < pv_units.size(); ++i) pv[py::str(config.renewables[pv_units[i]].id)] = grid_array(set.pv_max[i]);
    for (std::size_t j = 0; j < wt_units.size(); ++j) wt[py::str(config.renewables[wt_units[j]].id)] = grid_array(set.wt_max[j]);
    py::dict d;
    d["seed"] = set.seed;
    d["prob"] = set.prob;
    d["load"] = grid_array(set.load);
    d["pv"] = pv;
    d["wt"] = wt;
    return d;
}

// ENS per (hour, scenario) from a solved case.
py::array_t<double> ens_array(const CaseResult& r) {
    if (!r.problem) throw AnalysisError("case has no solved model");
    const auto& map = r.problem->map;
    py::array_t<double> out({map.hours, map.scenarios});
    auto view = out.mutable_unchecked<2>();
    for (int t = 0; t < map.hours; ++t)
        for (int s = 0; s < map.scenarios; ++s) view(t, s) = r.values[static_cast<std::size_t>(map.Ens(t, s))];
    return out;
}

ScenarioSet scenarios_for(const StudyConfig& s) {
    return generate_scenarios(s.system, s.profile_or_default(), s.scenario_count, s.seed);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stochastic islanded-microgrid scheduling with an upside-risk cap";
    m.attr("__version__") = kToolVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_ValueError);
    py::register_exception<FormulationError>(m, "FormulationError", PyExc_ValueError);
    py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);

    m.def("passive_ur", &passive_ur, py::arg("tens"), py::arg("target"));
    m.def("expected_over_scenarios", &expected_over_scenarios, py::arg("values"), py::arg("prob"));
    m.def("sample_normal", &sample_normal, py::arg("mean"), py::arg("std"), py::arg("u1"), py::arg("u2"));
    m.def("sample_beta", &sample_beta, py::arg("alpha"), py::arg("beta"), py::arg("u"));
    m.def("sample_weibull", &sample_weibull, py::arg("shape"), py::arg("scale"), py::arg("u"));

    m.def("default_config_json", [] { return study_config_to_json(default_study()); },
          "The built-in study system as config JSON text");

    m.def(
        "validate_config_json",
        [](const std::string& text) {
            const StudyConfig s = parse_study_config(text);
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& v : validate_config(s.system, s.risk, s.options)) out.emplace_back(v.code, v.message);
            if (s.profile)
                for (const auto& v : validate_profile_spec(*s.profile, s.system.horizon)) out.emplace_back(v.code, v.message);
            return out;
        },
        py::arg("config_json"), "List of (code, message) violations; empty when valid");

    m.def(
        "generate_scenarios",
        [](std::optional<std::string> config, std::optional<int> count, std::optional<std::uint64_t> seed) {
            const StudyConfig s = study_from(config, count, seed);
            return scenarios_dict(s.system, scenarios_for(s));
        },
        py::arg("config_json") = py::none(), py::arg("count") = py::none(), py::arg("seed") = py::none());

    py::class_<SpilledEnergy>(m, "SpilledEnergy")
        .def_readonly("pv", &SpilledEnergy::pv)
        .def_readonly("wt", &SpilledEnergy::wt)
        .def_readonly("total", &SpilledEnergy::total)
        .def("__repr__", [](const SpilledEnergy& s) {
            return "SpilledEnergy(pv=" + format_double(s.pv) + ", wt=" + format_double(s.wt) +
                   ", total=" + format_double(s.total) + ")";
        });

    py::class_<CaseResult>(m, "CaseResult")
        .def_readonly("name", &CaseResult::name)
        .def_readonly("lambda_", &CaseResult::lambda)
        .def_readonly("eur", &CaseResult::eur)
        .def_readonly("big_m", &CaseResult::big_m)
        .def_readonly("prob", &CaseResult::prob)
        .def_readonly("targets", &CaseResult::targets)
        .def_readonly("tens", &CaseResult::tens)
        .def_readonly("ur", &CaseResult::ur)
        .def_readonly("passive_ur", &CaseResult::passive)
        .def_readonly("expected_tens", &CaseResult::expected_tens)
        .def_readonly("expected_ur", &CaseResult::expected_ur)
        .def_readonly("spilled", &CaseResult::spilled)
        .def_readonly("objective", &CaseResult::objective)
        .def_readonly("gap", &CaseResult::gap)
        .def_readonly("nodes", &CaseResult::nodes)
        .def_readonly("solve_seconds", &CaseResult::solve_seconds)
        .def_property_readonly("status", [](const CaseResult& r) { return to_string(r.status); })
        .def_property_readonly("audit_passed", [](const CaseResult& r) { return r.audit.passed; })
        .def_property_readonly("max_residual", [](const CaseResult& r) { return r.audit.max_residual; })
        .def_property_readonly("ens", &ens_array, "ENS in kW per (hour, scenario)")
        .def("__repr__", [](const CaseResult& r) {
            return "CaseResult(" + r.name + ", expected_tens=" + format_double(r.expected_tens) +
                   ", expected_ur=" + format_double(r.expected_ur) + ")";
        });

    m.def(
        "solve_case",
        [](const std::string& kind, bool with_ur, std::optional<double> lambda, std::optional<std::string> config,
           std::optional<int> count, std::optional<std::uint64_t> seed) {
            StudyConfig s = study_from(config, count, seed);
            if (lambda) s.risk.lambda = *lambda;
            const CaseKind k = parse_case_kind(kind);
            const ScenarioSet set = scenarios_for(s);
            py::gil_scoped_release release;
            return solve_case(s.system, set, s.risk, case_options(k, with_ur, s.options), {}, case_dir_name(k, with_ur));
        },
        py::arg("case") = "base", py::arg("with_ur") = false, py::arg("lambda_") = py::none(),
        py::arg("config_json") = py::none(), py::arg("count") = py::none(), py::arg("seed") = py::none());

    m.def(
        "lambda_sweep",
        [](std::vector<double> lambdas, const std::string& kind, int jobs, std::optional<std::string> config,
           std::optional<int> count, std::optional<std::uint64_t> seed) {
            const StudyConfig s = study_from(config, count, seed);
            const ScenarioSet set = scenarios_for(s);
            SweepResult sweep;
            {
                py::gil_scoped_release release;
                sweep = lambda_sweep(s.system, set, s.risk, case_options(parse_case_kind(kind), false, s.options),
                                     std::move(lambdas), {}, jobs);
            }
            py::list points;
            for (auto& p : sweep.points) {
                py::dict d;
                d["lambda"] = p.lambda;
                d["ok"] = p.ok;
                d["error"] = p.error;
                d["result"] = p.ok ? py::cast(std::move(p.result)) : py::none();
                points.append(d);
            }
            return py::make_tuple(sweep.baseline, points);
        },
        py::arg("lambdas"), py::arg("case") = "base", py::arg("jobs") = 1, py::arg("config_json") = py::none(),
        py::arg("count") = py::none(), py::arg("seed") = py::none(),
        "Returns (baseline, points); each point is a dict with lambda, ok, error and result");

    m.def(
        "compare_cases",
        [](const CaseResult& base, const CaseResult& variant) {
            py::dict out;
            for (const auto& d : compare_cases(base, variant))
                out[py::str(d.metric)] = d.percent ? py::cast(*d.percent) : py::none();
            return out;
        },
        py::arg("base"), py::arg("variant"), "Percent change per metric; None where the base is zero");

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& out, std::optional<std::vector<double>> grid, int jobs,
           std::optional<std::string> config, std::optional<int> count, std::optional<std::uint64_t> seed) {
            RunManifest manifest;
            manifest.study = study_from(config, count, seed);
            manifest.cases = standard_cases(manifest.study.options);
            manifest.lambda_grid = grid ? *grid : default_lambda_grid();
            manifest.jobs = jobs;
            manifest.output_dir = out;
            py::gil_scoped_release release;
            return run_pipeline(manifest).manifest.files;
        },
        py::arg("output_dir"), py::arg("lambda_grid") = py::none(), py::arg("jobs") = 1,
        py::arg("config_json") = py::none(), py::arg("count") = py::none(), py::arg("seed") = py::none(),
        "Full study run; returns the written files relative to output_dir");

    m.def(
        "replay",
        [](const std::filesystem::path& manifest_path, const std::filesystem::path& out) {
            RunManifest manifest = parse_manifest(read_text_file(manifest_path));
            manifest.output_dir = out;
            py::gil_scoped_release release;
            return run_pipeline(manifest).manifest.files;
        },
        py::arg("manifest"), py::arg("output_dir"));
}
