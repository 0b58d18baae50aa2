"""Distributed optimal output consensus: coordinator, adaptive trackers and verification."""

import json as _json

from ._core import (
    BracketNotFound,
    DegenerateRoots,
    Diverged,
    Error,
    InvalidArgument,
    InvalidGraph,
    InvalidSpectrum,
    IoError,
    NonConvexDetected,
    NotHurwitz,
    NotStronglyConnected,
    Scenario,
    SchemaError,
    SingularSystem,
    SingularT,
    Trajectory,
    Unsupported,
    XiUnderflow,
    aggregate_gradient,
    companion_pair,
    coordinator_run,
    global_optimum,
    load_scenario,
    parse_scenario,
    phi_gamma,
    preset_names,
    psi_true,
    run,
    select_gains,
    solve_sylvester,
    spectral,
)
from . import _core


def preset(name):
    """The JSON document of a built-in preset, as a dict."""
    return _json.loads(_core.preset_json(name))


def scenario_from_dict(doc):
    return parse_scenario(_json.dumps(doc))


def verify(scenario, trajectory):
    """Checks a trajectory against the independent oracles; returns the report as a dict."""
    return _json.loads(_core.verify_json(scenario, trajectory))


def metrics(trajectory):
    return _json.loads(_core.metrics_json(trajectory))


__all__ = [name for name in dir() if not name.startswith("_")]
