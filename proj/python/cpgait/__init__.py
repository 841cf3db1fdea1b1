"""Bursting-neuron CPG: phase reduction and gait selection on the torus."""

import json

from ._core import (
    I_EXT_MAX,
    I_EXT_MIN,
    ConfigError,
    CouplingTable,
    NeuronParams,
    NumericalError,
    alpha_bounds,
    det_closed_form,
    det_dense,
    example_couplings,
    fourier_coupling,
    limit_cycle,
    solve_eta,
)
from . import _core


def _text(config):
    # accept a dict or JSON text
    return config if isinstance(config, str) else json.dumps(config)


def phase_model(config=None, i_ext=None):
    return _core.phase_model(_text(config or {}), i_ext)


def census(config, delta_i=None):
    return _core.census(_text(config), delta_i)


def sweep(config, threads=0):
    return _core.sweep(_text(config), threads)


__all__ = [
    "I_EXT_MAX",
    "I_EXT_MIN",
    "ConfigError",
    "CouplingTable",
    "NeuronParams",
    "NumericalError",
    "alpha_bounds",
    "census",
    "det_closed_form",
    "det_dense",
    "example_couplings",
    "fourier_coupling",
    "limit_cycle",
    "phase_model",
    "solve_eta",
    "sweep",
]
