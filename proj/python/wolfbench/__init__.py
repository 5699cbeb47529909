"""Security workbench for biometric matchers.

Populations, reports and certificates travel as JSON text; ``evaluate``,
``wolf`` and ``replay`` return parsed dictionaries.
"""

import json

from ._wolfbench import (
    CalibrationError,
    ConfigError,
    ModeError,
    WolfbenchError,
    __version__,
    daugman_threshold,
    entropy_gaussian,
    gaussian_adaptive_threshold,
    general_adaptive_threshold,
    generate_population,
    normalize_population,
    p_s_exact,
    parse_policy,
    std_normal_cdf,
)
from . import _wolfbench as _native

__all__ = [
    "CalibrationError",
    "ConfigError",
    "ModeError",
    "WolfbenchError",
    "__version__",
    "daugman_threshold",
    "entropy_gaussian",
    "evaluate",
    "gaussian_adaptive_threshold",
    "general_adaptive_threshold",
    "generate_population",
    "normalize_population",
    "p_s_exact",
    "parse_policy",
    "replay",
    "std_normal_cdf",
    "sweep",
    "wolf",
]


def _population_text(population):
    return population if isinstance(population, str) else json.dumps(population)


def evaluate(population, policy, mode="exact", samples=10000, seed=0, jobs=1, **search):
    """EvalReport as a dict. ``population`` is JSON text or a parsed dict."""
    return json.loads(_native.evaluate(_population_text(population), policy, mode, samples, seed, jobs, search))


def wolf(population, policy, mode="exact", samples=10000, seed=0, jobs=1, **search):
    """Wolf certificate as a dict."""
    return json.loads(_native.wolf(_population_text(population), policy, mode, samples, seed, jobs, search))


def sweep(population, kind, grid, mode="exact", samples=10000, seed=0, jobs=1, **search):
    """Sweep CSV text with header parameter,frr,far,ar,wap,stderr_wap."""
    return _native.sweep(_population_text(population), kind, list(grid), mode, samples, seed, jobs, search)


def replay(report, jobs=1):
    """Re-runs a report's embedded configuration; returns the new report text."""
    text = report if isinstance(report, str) else json.dumps(report)
    return _native.replay(text, jobs)
