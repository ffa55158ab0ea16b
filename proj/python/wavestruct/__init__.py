"""Python access to the wavestruct solver core."""

import json

from ._wavestruct import (
    DomainError,
    ParameterError,
    bessel_i,
    bessel_k,
    cq_convolve,
    cq_weights,
    selftest,
)
from . import _wavestruct

__all__ = [
    "DomainError",
    "ParameterError",
    "bessel_i",
    "bessel_k",
    "cq_convolve",
    "cq_weights",
    "default_config",
    "run_study",
    "selftest",
]


def default_config(geometry="disk", scheme="tr"):
    """Default study settings as a dict (same layout as the JSON config files)."""
    return json.loads(_wavestruct.default_config(geometry, scheme))


def run_study(config):
    """Run a convergence study. `config` is a dict or a JSON string.

    Returns a dict with the report rows, the CSV body and the JSON metadata.
    """
    text = config if isinstance(config, str) else json.dumps(config)
    out = _wavestruct.run_study(text)
    out["metadata"] = json.loads(out["metadata"])
    return out
