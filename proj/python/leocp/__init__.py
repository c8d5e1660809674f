"""Python interface to the leocp core library.

Configs may be passed as dicts or JSON strings; distance arrays have shape
(snapshots, satellites, stations) with inf for unreachable pairs.
"""

import json
import os

from . import _leocp
from ._leocp import (
    BudgetExceeded,
    ConfigError,
    InfeasibleInstance,
    cnpa,
    constellation,
    evaluate,
    exhaustive,
    orbital_period,
    positions,
    predict_handovers,
    random_select,
    single_best,
)

__all__ = [
    "BudgetExceeded",
    "ConfigError",
    "InfeasibleInstance",
    "cnpa",
    "constellation",
    "distance_fields",
    "evaluate",
    "exhaustive",
    "load_config",
    "normalize_config",
    "orbital_period",
    "positions",
    "predict_handovers",
    "random_select",
    "run_pipeline",
    "run_scenario",
    "single_best",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def load_config(path):
    """Effective config of a JSON file, with defaults filled in and stations inlined."""
    return json.loads(_leocp.load_config(os.fspath(path)))


def normalize_config(config, base_dir=""):
    return json.loads(_leocp.normalize_config(_text(config), os.fspath(base_dir)))


def distance_fields(config, base_dir=""):
    """Returns (times, distances) for every snapshot of the config."""
    return _leocp.distance_fields(_text(config), os.fspath(base_dir))


def run_scenario(config, base_dir=""):
    """Runs placement, assignment and simulation in memory."""
    out = _leocp.run_scenario(_text(config), os.fspath(base_dir))
    out["metrics"] = json.loads(out.pop("metrics_json"))
    return out


def run_pipeline(config_path, subcommand="all", **overrides):
    """Same as the CLI. Returns (exit_code, log, errors)."""
    return _leocp.run_pipeline(os.fspath(config_path), subcommand, **overrides)
