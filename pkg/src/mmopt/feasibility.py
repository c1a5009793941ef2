"""Box-level feasibility classification.

For a feasible set cut out by mixed monotonic constraints
``G_i(x, x) <= 0`` over a box ``[r, s]``:

* ``G_i(s, r) <= 0`` for all ``i`` certifies the whole box feasible, and
  ``G_i(r, s) > 0`` for some ``i`` certifies it empty -- one-sided tests.
* When every constraint depends only on the I-coordinates of ``x`` and the
  complementary coordinates of ``y`` (a shared ``monotone_split``), the test
  ``G_i(r, s) <= 0`` becomes conclusive and yields the witness mixing the
  lower corner on I with the upper corner elsewhere.
* Normal sets (sublevel sets of nondecreasing maps) reduce to a test at the
  lower corner, conormal sets (superlevel sets) to a test at the upper
  corner; both are special cases of the conclusive test.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import BoxNd, MMConstraint
from .errors import MissingMonotoneSplit

__all__ = [
    "Feasibility",
    "FeasibilityVerdict",
    "mm_sufficient_test",
    "mm_conclusive_test",
    "normal_set_test",
    "conormal_set_test",
]


class Feasibility(enum.Enum):
    FULLY_FEASIBLE = "fully-feasible"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"
    FEASIBLE_WITH_WITNESS = "feasible-with-witness"


@dataclass(frozen=True)
class FeasibilityVerdict:
    kind: Feasibility
    witness: np.ndarray | None = None

    @property
    def is_feasible(self) -> bool:
        return self.kind in (Feasibility.FULLY_FEASIBLE, Feasibility.FEASIBLE_WITH_WITNESS)


def mm_sufficient_test(
    box: BoxNd, constraints: Sequence[MMConstraint], _cache=None
) -> FeasibilityVerdict:
    """One-sided feasibility test from constraint values at opposite corners.

    Returns FULLY_FEASIBLE when every constraint is satisfied at the
    pessimistic corner pair (upper, lower), INFEASIBLE when some constraint
    is violated at the optimistic pair (lower, upper), and UNKNOWN for boxes
    straddling a constraint boundary.
    """
    r, s = box.r, box.s
    for i, c in enumerate(constraints):
        g_rs = _cache.g_rs(i) if _cache is not None else c.g.eval(r, s)
        if g_rs > 0.0:
            return FeasibilityVerdict(Feasibility.INFEASIBLE)
    for i, c in enumerate(constraints):
        g_sr = _cache.g_sr(i) if _cache is not None else c.g.eval(s, r)
        if g_sr > 0.0:
            return FeasibilityVerdict(Feasibility.UNKNOWN)
    return FeasibilityVerdict(Feasibility.FULLY_FEASIBLE, witness=r)


def mm_conclusive_test(
    box: BoxNd, constraints: Sequence[MMConstraint], _cache=None
) -> FeasibilityVerdict:
    """Conclusive test for constraints sharing a monotone split.

    Requires every constraint to carry the same index set I; the box meets
    the feasible set iff all ``G_i(r, s) <= 0``, in which case the point
    taking ``r`` on I and ``s`` elsewhere is feasible.  Never UNKNOWN.
    """
    constraints = tuple(constraints)
    if not constraints:
        return FeasibilityVerdict(Feasibility.FEASIBLE_WITH_WITNESS, witness=box.r)
    split = constraints[0].monotone_split
    if split is None:
        raise MissingMonotoneSplit("constraint carries no monotone_split")
    for c in constraints[1:]:
        if c.monotone_split != split:
            raise MissingMonotoneSplit("constraints disagree on the monotone split")
    r, s = box.r, box.s
    for i, c in enumerate(constraints):
        g_rs = _cache.g_rs(i) if _cache is not None else c.g.eval(r, s)
        if g_rs > 0.0:
            return FeasibilityVerdict(Feasibility.INFEASIBLE)
    witness = s.copy()
    idx = sorted(split)
    witness[idx] = r[idx]
    witness.flags.writeable = False
    return FeasibilityVerdict(Feasibility.FEASIBLE_WITH_WITNESS, witness=witness)


def normal_set_test(
    box: BoxNd, nondecreasing: Sequence[Callable[[np.ndarray], float]]
) -> FeasibilityVerdict:
    """Feasibility over a normal set ``{x | g_i(x) <= 0}``, g_i nondecreasing.

    The box meets the set iff every ``g_i`` is nonpositive at the lower
    corner, which is then the witness.
    """
    r = box.r
    for g in nondecreasing:
        if float(g(r)) > 0.0:
            return FeasibilityVerdict(Feasibility.INFEASIBLE)
    return FeasibilityVerdict(Feasibility.FEASIBLE_WITH_WITNESS, witness=r)


def conormal_set_test(
    box: BoxNd, nondecreasing: Sequence[Callable[[np.ndarray], float]]
) -> FeasibilityVerdict:
    """Feasibility over a conormal set ``{x | h_i(x) >= 0}``, h_i nondecreasing.

    The box meets the set iff every ``h_i`` is nonnegative at the upper
    corner, which is then the witness.  (Testing the lower corner instead
    would reject boxes that straddle the boundary yet contain feasible
    points.)
    """
    s = box.s
    for h in nondecreasing:
        if float(h(s)) < 0.0:
            return FeasibilityVerdict(Feasibility.INFEASIBLE)
    return FeasibilityVerdict(Feasibility.FEASIBLE_WITH_WITNESS, witness=s)
