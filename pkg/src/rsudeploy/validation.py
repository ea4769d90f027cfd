"""Small input-checking helpers shared by the library entry points.

Follows the usual estimator convention: constructors store parameters
verbatim, and everything is checked at fit/call time through these helpers.
"""

from __future__ import annotations

import math
import numbers

import numpy as np


class SchemaError(ValueError):
    """A scenario document does not match the documented file schema."""


class ValidationError(ValueError):
    """Structurally valid input violates a domain invariant."""


def check_positive(name: str, value, allow_zero: bool = False):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if v < 0 or (v == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be {bound}, got {value!r}")
    return v


def check_probability(name: str, value):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ValueError(f"{name} must be a probability in [0, 1], got {value!r}")
    v = float(value)
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"{name} must be in [0, 1], got {value!r}")
    return v


def check_int(name: str, value, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    v = int(value)
    if minimum is not None and v < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value!r}")
    return v


def check_choice(name: str, value, options) -> str:
    if value not in options:
        raise ValueError(f"{name} must be one of {sorted(options)}, got {value!r}")
    return value


def rng_from_seed(seed) -> np.random.Generator:
    """Build the single sequential random stream used by all stochastic code."""
    return np.random.default_rng(check_int("seed", seed, minimum=0))
