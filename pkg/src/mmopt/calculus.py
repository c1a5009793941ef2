"""Combinators that build new mixed monotonic functions from existing ones.

Each combinator preserves the defining monotonicity (nondecreasing in the
first argument, nonincreasing in the second), so problem constructors never
hand-verify it.  Outputs close over their parts; evaluation is pure and
re-entrant, so results are safe to share.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .core import BoxNd, MMFunction
from .errors import (
    DimensionMismatch,
    DirectionViolation,
    DomainError,
    EmptyList,
    NegativeWeight,
    NegativityDetected,
    NonpositiveDenominator,
)

__all__ = [
    "mm_sum",
    "mm_weighted_sum",
    "mm_min",
    "mm_max",
    "mm_compose_nondecreasing",
    "mm_compose_nonincreasing",
    "mm_product",
    "mm_ratio",
]


def _common_dim(parts: Sequence[MMFunction]) -> int:
    if not parts:
        raise EmptyList("need at least one function")
    dim = parts[0].dim
    for p in parts[1:]:
        if p.dim != dim:
            raise DimensionMismatch(f"mixed dimensions: {p.dim} vs {dim}")
    return dim


def mm_sum(parts: Sequence[MMFunction]) -> MMFunction:
    """Pointwise sum of mixed monotonic functions."""
    parts = tuple(parts)
    dim = _common_dim(parts)
    if len(parts) == 1:
        return parts[0]

    def fn(x, y):
        return sum(p.eval(x, y) for p in parts)

    return MMFunction(dim, fn, name="sum")


def mm_weighted_sum(weights, parts: Sequence[MMFunction]) -> MMFunction:
    """Nonnegative-weighted sum of mixed monotonic functions."""
    parts = tuple(parts)
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size != len(parts):
        raise DimensionMismatch(f"{w.size} weights for {len(parts)} functions")
    if np.any(w < 0):
        raise NegativeWeight("weights must be nonnegative")
    dim = _common_dim(parts)
    w = w.copy()
    w.flags.writeable = False

    def fn(x, y):
        return sum(wi * p.eval(x, y) for wi, p in zip(w, parts))

    return MMFunction(dim, fn, name="wsum")


def mm_min(parts: Sequence[MMFunction]) -> MMFunction:
    """Pointwise minimum of mixed monotonic functions."""
    parts = tuple(parts)
    dim = _common_dim(parts)
    if len(parts) == 1:
        return parts[0]

    def fn(x, y):
        return min(p.eval(x, y) for p in parts)

    return MMFunction(dim, fn, name="min")


def mm_max(parts: Sequence[MMFunction]) -> MMFunction:
    """Pointwise maximum of mixed monotonic functions."""
    parts = tuple(parts)
    dim = _common_dim(parts)
    if len(parts) == 1:
        return parts[0]

    def fn(x, y):
        return max(p.eval(x, y) for p in parts)

    return MMFunction(dim, fn, name="max")


def _spot_check_direction(g, lo: float, hi: float, nondecreasing: bool):
    """Sample 100 points of a scalar map and verify the declared direction.

    Non-finite samples (outside the map's domain) are skipped; the check is
    a tripwire, not a proof.
    """
    ts = np.linspace(lo, hi, 100)
    prev_t = prev_v = None
    for t in ts:
        try:
            v = float(g(t))
        except (ValueError, ZeroDivisionError, OverflowError):
            continue
        if not math.isfinite(v):
            continue
        if prev_v is not None:
            ok = v >= prev_v - 1e-12 if nondecreasing else v <= prev_v + 1e-12
            if not ok:
                word = "nondecreasing" if nondecreasing else "nonincreasing"
                raise DirectionViolation(
                    f"map declared {word} but g({prev_t}) = {prev_v} and g({t}) = {v}"
                )
        prev_t, prev_v = t, v


def _apply_scalar(g, value: float, name: str) -> float:
    try:
        out = float(g(value))
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise DomainError(f"{name}: scalar map undefined at {value}") from exc
    if math.isnan(out):
        raise DomainError(f"{name}: scalar map produced NaN at {value}")
    return out


def mm_compose_nondecreasing(
    g: Callable[[float], float],
    inner: MMFunction,
    check_range: tuple[float, float] | None = None,
) -> MMFunction:
    """Compose a nondecreasing scalar map with a mixed monotonic function.

    ``check_range=(lo, hi)`` spot-checks the declared direction of ``g`` by
    sampling; omit it when no meaningful sampling interval exists.
    """
    if check_range is not None:
        _spot_check_direction(g, check_range[0], check_range[1], nondecreasing=True)

    def fn(x, y):
        return _apply_scalar(g, inner.eval(x, y), "compose")

    return MMFunction(inner.dim, fn, name=f"g({inner.name})")


def mm_compose_nonincreasing(
    h: Callable[[float], float],
    inner: MMFunction,
    check_range: tuple[float, float] | None = None,
) -> MMFunction:
    """Compose a nonincreasing scalar map with a mixed monotonic function.

    The arguments are swapped into the inner function -- the result
    evaluates ``h(inner(y, x))`` -- so that the composition is again
    nondecreasing in ``x`` and nonincreasing in ``y``.
    """
    if check_range is not None:
        _spot_check_direction(h, check_range[0], check_range[1], nondecreasing=False)

    def fn(x, y):
        return _apply_scalar(h, inner.eval(y, x), "compose")

    return MMFunction(inner.dim, fn, name=f"h({inner.name})")


def mm_product(parts: Sequence[MMFunction], domain_box: BoxNd) -> MMFunction:
    """Product of nonnegative mixed monotonic functions on ``domain_box``.

    Nonnegativity of every factor is sampled at construction (1000 argument
    pairs drawn from the box) and hard-checked at every evaluation; a factor
    below -1e-12 aborts with :class:`~mmopt.errors.NegativityDetected`.
    Values in [-1e-12, 0) are clamped to zero, and exact zeros are admitted.
    """
    parts = tuple(parts)
    dim = _common_dim(parts)
    if domain_box.dim != dim:
        raise DimensionMismatch("domain box dimension differs from the factors")

    rng = np.random.default_rng(0)
    r, width = domain_box.r, domain_box.s - domain_box.r
    for _ in range(1000):
        x = r + width * rng.random(dim)
        y = r + width * rng.random(dim)
        for p in parts:
            v = p.eval(x, y)
            if v < -1e-12:
                raise NegativityDetected(f"factor {p.name} sampled negative ({v}) at construction")

    def fn(x, y):
        out = 1.0
        for p in parts:
            v = p.eval(x, y)
            if v < -1e-12:
                raise NegativityDetected(f"factor {p.name} evaluated negative ({v})")
            out *= v if v > 0.0 else 0.0
        return out

    return MMFunction(dim, fn, name="prod")


def mm_ratio(numerator: MMFunction, denominator: MMFunction) -> MMFunction:
    """Mixed monotonic quotient of a nonnegative numerator by a positive,
    nondecreasing-in-``x`` denominator.

    The denominator is evaluated with swapped arguments (the reciprocal of a
    positive mixed monotonic function with swapped arguments is mixed
    monotonic again), so the result is
    ``numerator(x, y) / denominator(y, x)`` -- for a denominator depending
    only on its first slot this is the familiar ``p(x) / q(y)`` shape.
    """
    if numerator.dim != denominator.dim:
        raise DimensionMismatch("numerator and denominator dimensions differ")

    def fn(x, y):
        q = denominator.eval(y, x)
        if q <= 0.0:
            raise NonpositiveDenominator(f"denominator evaluated to {q}")
        return numerator.eval(x, y) / q

    return MMFunction(numerator.dim, fn, name=f"{numerator.name}/{denominator.name}")
