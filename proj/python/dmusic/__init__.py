"""Python bindings for the D-MUSIC pipeline."""

import json

from ._dmusic import (
    Error,
    decouple,
    modulate,
    multipole_order,
    music_with_prior,
    standard_music,
    synthesize,
    uniform_grid,
)
from . import _dmusic

__all__ = [
    "Error",
    "decouple",
    "detect_clusters",
    "modulate",
    "multipole_order",
    "music_with_prior",
    "run",
    "standard_music",
    "sweep",
    "synthesize",
    "uniform_grid",
]


def run(grid, values, sigma, omega=1.0, config=None):
    """Full pipeline on an unmodulated measurement; returns the report as a dict."""
    text = json.dumps(config) if config else ""
    return json.loads(_dmusic.run_json(grid, values, sigma, omega, text))


def detect_clusters(grid, values, o_init, d_init, ict, sigma, omega=1.0, lambda_=0.5):
    return json.loads(_dmusic.detect_clusters_json(grid, values, o_init, d_init, ict, sigma, omega, lambda_))


def sweep(kind, draws, seed):
    return json.loads(_dmusic.sweep_json(kind, draws, seed))
