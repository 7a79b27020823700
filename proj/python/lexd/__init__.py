"""Python bindings for the lexd core."""

import json

from ._lexd import (
    ConfigError,
    InputError,
    StageError,
    apply_bins,
    config_keys,
    discover,
    distribution,
    dynamic_complexity,
    features,
    fit_bins,
    fluctuation,
    load_recordings,
    points_of_return,
    quality,
    render_config,
    resample_energy,
    write_planted_corpus,
)
from ._lexd import run_pipeline as _run_pipeline


def _config_text(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_config_text(v) for v in value) + "]"
    return str(value)


def run_pipeline(config, parse=True):
    """Run the full pipeline. ``config`` maps config keys to values; lists and
    booleans are rendered in config syntax.

    Returns the parsed result document, or the raw JSON text with ``parse=False``.
    """
    text = _run_pipeline({k: _config_text(v) for k, v in config.items()})
    return json.loads(text) if parse else text


__all__ = [
    "ConfigError",
    "InputError",
    "StageError",
    "apply_bins",
    "config_keys",
    "discover",
    "distribution",
    "dynamic_complexity",
    "features",
    "fit_bins",
    "fluctuation",
    "load_recordings",
    "points_of_return",
    "quality",
    "render_config",
    "resample_energy",
    "run_pipeline",
    "write_planted_corpus",
]
