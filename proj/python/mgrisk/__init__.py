"""Python bindings for the mgrisk microgrid scheduler.

Configs are plain dicts in the same layout as the JSON config files
(see ``default_config()``); pass ``config=None`` for the built-in study.
"""

import json

from . import _core
from ._core import (
    AnalysisError,
    CaseResult,
    ConfigError,
    FormulationError,
    SolverFailure,
    SpilledEnergy,
    compare_cases,
    expected_over_scenarios,
    passive_ur,
    sample_beta,
    sample_normal,
    sample_weibull,
)

__version__ = _core.__version__


def _text(config):
    if config is None or isinstance(config, str):
        return config
    return json.dumps(config)


def default_config():
    return json.loads(_core.default_config_json())


def validate_config(config):
    """List of (code, message) pairs; empty when the config is valid."""
    return _core.validate_config_json(_text(config))


def generate_scenarios(config=None, count=None, seed=None):
    return _core.generate_scenarios(_text(config), count, seed)


def solve_case(case="base", with_ur=False, lambda_=None, config=None, count=None, seed=None):
    return _core.solve_case(case, with_ur, lambda_, _text(config), count, seed)


def lambda_sweep(lambdas, case="base", jobs=1, config=None, count=None, seed=None):
    return _core.lambda_sweep(list(lambdas), case, jobs, _text(config), count, seed)


def run_pipeline(output_dir, lambda_grid=None, jobs=1, config=None, count=None, seed=None):
    grid = None if lambda_grid is None else list(lambda_grid)
    return _core.run_pipeline(str(output_dir), grid, jobs, _text(config), count, seed)


def replay(manifest, output_dir):
    return _core.replay(str(manifest), str(output_dir))


__all__ = [
    "AnalysisError",
    "CaseResult",
    "ConfigError",
    "FormulationError",
    "SolverFailure",
    "SpilledEnergy",
    "compare_cases",
    "default_config",
    "expected_over_scenarios",
    "generate_scenarios",
    "lambda_sweep",
    "passive_ur",
    "replay",
    "run_pipeline",
    "sample_beta",
    "sample_normal",
    "sample_weibull",
    "solve_case",
    "validate_config",
]
