"""Fundamental geometric and problem-definition types.

Everything here is immutable after construction.  A mixed monotonic (MM)
function ``F(x, y)`` is nondecreasing in ``x`` and nonincreasing in ``y``
(componentwise); the objective it represents is the diagonal ``f(x) = F(x, x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    CornerOrderViolation,
    DimensionMismatch,
    EvaluationError,
    MMOptError,
    NonFiniteEntry,
)

__all__ = [
    "BoxNd",
    "MMFunction",
    "MMConstraint",
    "ProblemInstance",
    "SolverConfig",
    "SolverResult",
    "MMPropertyReport",
    "make_box",
    "check_mm_property",
    "FEASIBILITY_MODES",
    "STATUS_ETA_OPTIMAL",
    "STATUS_RELATIVE_ETA_OPTIMAL",
    "STATUS_EPS_ETA_APPROXIMATE",
    "STATUS_INFEASIBLE",
    "STATUS_ITERATION_LIMIT",
    "STATUS_TIME_LIMIT",
]

# Feasibility handling strategies a problem may declare.
FEASIBILITY_MODES = (
    "mm-conclusive",
    "normal",
    "conormal",
    "mm-sufficient-only",
    "custom-oracle",
)

STATUS_ETA_OPTIMAL = "eta-optimal"
STATUS_RELATIVE_ETA_OPTIMAL = "relative-eta-optimal"
STATUS_EPS_ETA_APPROXIMATE = "eps-eta-approximate"
STATUS_INFEASIBLE = "infeasible"
STATUS_ITERATION_LIMIT = "iteration-limit"
STATUS_TIME_LIMIT = "time-limit"


def _as_readonly_vector(v, name: str) -> np.ndarray:
    arr = np.array(v, dtype=float, copy=True)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionMismatch(f"{name} must be a 1-d vector with n >= 1, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class BoxNd:
    """Axis-aligned hyperrectangle ``[r, s]`` with a creation index.

    ``r <= s`` componentwise; zero-width dimensions are allowed.  Boxes are
    the unit of branching, bounding and reduction.
    """

    r: np.ndarray
    s: np.ndarray
    birth_iteration: int = 0

    def __post_init__(self):
        r = _as_readonly_vector(self.r, "r")
        s = _as_readonly_vector(self.s, "s")
        if r.shape != s.shape:
            raise DimensionMismatch(f"corner dimensions differ: {r.shape} vs {s.shape}")
        if not (np.isfinite(r).all() and np.isfinite(s).all()):
            raise NonFiniteEntry("box corners must be finite")
        if np.any(r > s):
            bad = int(np.argmax(r > s))
            raise CornerOrderViolation(f"r[{bad}] = {r[bad]} exceeds s[{bad}] = {s[bad]}")
        if self.birth_iteration < 0:
            raise MMOptError("birth_iteration must be nonnegative")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)

    @property
    def dim(self) -> int:
        return self.r.size

    @property
    def diameter(self) -> float:
        """Longest edge length, max_i (s_i - r_i)."""
        return float(np.max(self.s - self.r))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.r - tol) and np.all(x <= self.s + tol))

    def __repr__(self):  # compact, for traces and test failures
        return f"BoxNd(r={self.r.tolist()}, s={self.s.tolist()}, birth={self.birth_iteration})"


def make_box(r, s) -> BoxNd:
    """Construct a box from its lower and upper corners (birth index 0)."""
    return BoxNd(r, s, 0)


class MMFunction:
    """Evaluable ``F(x, y)``, nondecreasing in ``x`` and nonincreasing in ``y``.

    Monotonicity is trusted from the constructors in :mod:`mmopt.calculus`
    and can be spot-checked with :func:`check_mm_property`; there is no
    symbolic verification.  Evaluations returning NaN raise
    :class:`~mmopt.errors.EvaluationError` -- NaN must never reach an
    ordering.  ``-inf`` is a legal value (e.g. a log-utility at a zero rate).
    """

    __slots__ = ("dim", "_fn", "name")

    def __init__(self, dim: int, fn: Callable[[np.ndarray, np.ndarray], float], name: str = "mm"):
        if dim < 1:
            raise DimensionMismatch(f"dimension must be >= 1, got {dim}")
        self.dim = int(dim)
        self._fn = fn
        self.name = name

    def eval(self, x, y) -> float:
        v = float(self._fn(x, y))
        if math.isnan(v):
            raise EvaluationError(f"{self.name}: evaluation produced NaN")
        return v

    def diagonal(self, x) -> float:
        """Objective value f(x) = F(x, x)."""
        return self.eval(x, x)

    def __repr__(self):
        return f"MMFunction({self.name}, dim={self.dim})"


@dataclass(frozen=True)
class MMConstraint:
    """Constraint ``G(x, x) <= 0`` with ``G`` mixed monotonic.

    ``monotone_split`` is the (0-based) index set I for constraints whose
    value depends only on the I-coordinates of ``x`` and the complementary
    coordinates of ``y``; it enables the conclusive feasibility test.
    """

    g: MMFunction
    monotone_split: frozenset[int] | None = None

    def __post_init__(self):
        if self.monotone_split is not None:
            split = frozenset(int(i) for i in self.monotone_split)
            if split and (min(split) < 0 or max(split) >= self.g.dim):
                raise DimensionMismatch("monotone_split indices out of range")
            object.__setattr__(self, "monotone_split", split)

    @property
    def dim(self) -> int:
        return self.g.dim


@dataclass(frozen=True)
class ProblemInstance:
    """A maximization problem over a box-enclosed feasible set.

    The initial box must enclose the feasible set.  ``feasibility_mode``
    selects how boxes are classified; ``custom-oracle`` requires
    ``feasibility_oracle`` (a ``box -> FeasibilityVerdict`` callable).
    ``incumbent_hook`` may supply feasible points for boxes the built-in
    tests cannot resolve.
    """

    objective: MMFunction
    constraints: tuple[MMConstraint, ...]
    initial_box: BoxNd
    feasibility_mode: str = "mm-sufficient-only"
    incumbent_hook: Callable[[BoxNd], np.ndarray | None] | None = None
    feasibility_oracle: Callable[[BoxNd], "object"] | None = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.feasibility_mode not in FEASIBILITY_MODES:
            raise MMOptError(f"unknown feasibility_mode {self.feasibility_mode!r}")
        n = self.objective.dim
        if self.initial_box.dim != n:
            raise DimensionMismatch(
                f"initial box dimension {self.initial_box.dim} != objective dimension {n}"
            )
        for c in self.constraints:
            if c.dim != n:
                raise DimensionMismatch("constraint dimension differs from objective")
        if self.feasibility_mode == "mm-conclusive":
            splits = {c.monotone_split for c in self.constraints}
            if None in splits or len(splits) > 1:
                raise MMOptError(
                    "mm-conclusive mode requires every constraint to carry the same monotone_split"
                )
        if self.feasibility_mode == "custom-oracle" and self.feasibility_oracle is None:
            raise MMOptError("custom-oracle mode requires a feasibility_oracle")

    @property
    def dim(self) -> int:
        return self.objective.dim


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the branch-reduce-and-bound loop.

    ``eta`` is the optimality tolerance, absolute by default or relative to
    the incumbent value (``tolerance_mode="relative"``; meaningful for
    positive optimal values).  ``epsilon_feasibility > 0`` admits incumbents
    whose constraints hold up to that slack.  ``rng_seed`` only feeds
    harness-side sampling such as the debug pruning check.
    """

    eta: float = 0.01
    tolerance_mode: str = "absolute"
    selection_rule: str = "best-first"
    reduction_enabled: bool = False
    reduction_bisection_steps: int = 10
    epsilon_feasibility: float = 0.0
    max_iterations: int | None = None
    max_wall_time: float | None = None
    rng_seed: int = 0
    trace_path: str | None = None
    debug_check_pruning: bool = False

    def __post_init__(self):
        if not self.eta > 0:
            raise MMOptError("eta must be positive")
        if self.tolerance_mode not in ("absolute", "relative"):
            raise MMOptError(f"unknown tolerance_mode {self.tolerance_mode!r}")
        if self.selection_rule not in ("best-first", "oldest-first"):
            raise MMOptError(f"unknown selection_rule {self.selection_rule!r}")
        if self.reduction_bisection_steps < 1:
            raise MMOptError("reduction_bisection_steps must be >= 1")
        if self.epsilon_feasibility < 0:
            raise MMOptError("epsilon_feasibility must be nonnegative")


@dataclass(frozen=True)
class SolverResult:
    incumbent: np.ndarray | None
    value: float
    status: str
    iterations: int
    peak_region_count: int
    wall_time: float


@dataclass(frozen=True)
class MMPropertyReport:
    violations: int
    worst_gap: float


def check_mm_property(
    f: MMFunction, box: BoxNd, samples: int, rng_seed: int = 0
) -> MMPropertyReport:
    """Sampled verification of the defining monotonicity inequalities.

    Draws ``samples`` ordered pairs ``x <= x'`` and ``y <= y'`` inside the
    box and counts violations of ``F(x, y) <= F(x', y)`` and
    ``F(x, y) >= F(x, y')`` beyond 1e-12.  Reporting only; never raises on
    a violation.
    """
    if samples < 1:
        raise MMOptError("samples must be >= 1")
    if f.dim != box.dim:
        raise DimensionMismatch("function and box dimensions differ")
    rng = np.random.default_rng(rng_seed)
    r, width = box.r, box.s - box.r
    violations = 0
    worst = 0.0
    for _ in range(samples):
        u = r + width * rng.random(box.dim)
        v = r + width * rng.random(box.dim)
        x, x_hi = np.minimum(u, v), np.maximum(u, v)
        u = r + width * rng.random(box.dim)
        v = r + width * rng.random(box.dim)
        y, y_hi = np.minimum(u, v), np.maximum(u, v)
        base = f.eval(x, y)
        gap_x = base - f.eval(x_hi, y)  # positive = nondecreasing-in-x violated
        gap_y = f.eval(x, y_hi) - base  # positive = nonincreasing-in-y violated
        if gap_x > 1e-12:
            violations += 1
            worst = max(worst, gap_x)
        if gap_y > 1e-12:
            violations += 1
            worst = max(worst, gap_y)
    return MMPropertyReport(violations=violations, worst_gap=worst)
