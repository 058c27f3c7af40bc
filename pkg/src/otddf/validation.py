"""Input-validation helpers used throughout the package.

Small sklearn-style checkers: normalize seeds into generators, coerce
arrays, and enforce dimension contracts with uniform error types.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .exceptions import InvalidInputError

SeedLike = Union[int, np.integer, np.random.SeedSequence, np.random.Generator, None]


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Normalize an int / SeedSequence / Generator / None into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    if seed is None or isinstance(seed, (int, np.integer)):
        return np.random.default_rng(seed)
    raise InvalidInputError(f"cannot build a random generator from {type(seed).__name__}")


def trajectory_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Independent per-trajectory stream: splittable child (seed, index)."""
    return np.random.SeedSequence(seed, spawn_key=(index,))


def as_float_array(x, name: str, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise InvalidInputError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    return arr


def check_vector(x, length: int, name: str) -> np.ndarray:
    """Coerce to float array and check the trailing dimension."""
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (length,):
        raise InvalidInputError(f"{name}: expected trailing dimension {length}, got shape {arr.shape}")
    return arr


def check_positive(value, name: str) -> float:
    v = float(value)
    if not v > 0:
        raise InvalidInputError(f"{name} must be > 0, got {value}")
    return v


def check_count(value, name: str, minimum: int = 1) -> int:
    v = int(value)
    if v < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}, got {value}")
    return v


def check_weights(weights: Sequence[float], n: int, tol: float = 1e-12) -> np.ndarray:
    """Validate a probability vector: nonnegative, sums to one within tol."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise InvalidInputError(f"weights: expected shape ({n},), got {w.shape}")
    if np.any(w < 0):
        raise InvalidInputError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > tol:
        raise InvalidInputError(f"weights must sum to 1 within {tol}, got {w.sum()!r}")
    return w
