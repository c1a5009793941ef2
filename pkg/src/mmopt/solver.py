"""Branch-reduce-and-bound over mixed monotonic representations.

The loop maintains a queue of boxes, each with the cached upper bound
``U([r, s]) = F(s, r)``.  Per iteration it selects a box (best-first on U or
oldest-first by creation index), bisects it at the midpoint of a longest
edge, optionally shrinks each child without losing any feasible point
better than the incumbent, updates the incumbent from per-child feasible
points, prunes children that are provably infeasible or whose bound cannot
beat the incumbent by more than the tolerance, and terminates when no
remaining box can.

With an exact (conclusive/normal/conormal/oracle) feasibility test the
returned point is eta-optimal.  With the one-sided test only
(``mm-sufficient-only``), pruning by infeasibility needs the optimistic
corner certificate and the search may not terminate on its own; iteration
or wall-time limits then return the best incumbent with a limit status.
Relative tolerance replaces every incumbent-plus-eta cutoff by
``(1 + eta) * incumbent`` and is meaningful for positive optimal values.
"""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import (
    STATUS_EPS_ETA_APPROXIMATE,
    STATUS_ETA_OPTIMAL,
    STATUS_INFEASIBLE,
    STATUS_ITERATION_LIMIT,
    STATUS_RELATIVE_ETA_OPTIMAL,
    STATUS_TIME_LIMIT,
    BoxNd,
    MMConstraint,
    MMFunction,
    ProblemInstance,
    SolverConfig,
    SolverResult,
)
from .errors import DimensionMismatch, ZeroDiameterBox
from .feasibility import (
    Feasibility,
    FeasibilityVerdict,
    conormal_set_test,
    mm_conclusive_test,
    mm_sufficient_test,
    normal_set_test,
)

__all__ = [
    "RegionQueue",
    "SolverState",
    "SolveStats",
    "bound",
    "bisect",
    "reduce_box",
    "find_incumbent",
    "solve",
]

# Boxes thinner than this are evaluated once as incumbent candidates and
# dropped instead of being split further.
_POINT_DIAMETER = 1e-12

_TRACE_HEADER = "k,box_id,upper_bound,gamma,queue_size"


def bound(objective: MMFunction, box: BoxNd) -> float:
    """Upper bound on the objective over the box: F at (upper, lower) corners."""
    if objective.dim != box.dim:
        raise DimensionMismatch("objective and box dimensions differ")
    return objective.eval(box.s, box.r)


def bisect(box: BoxNd, birth_iteration: int = 0) -> tuple[BoxNd, BoxNd]:
    """Split a box at the midpoint of a longest edge (lowest index on ties)."""
    width = box.s - box.r
    if float(np.max(width)) <= 0.0:
        raise ZeroDiameterBox("cannot bisect a zero-diameter box")
    axis = int(np.argmax(width))
    mid = 0.5 * (box.r[axis] + box.s[axis])
    lo_s = box.s.copy()
    lo_s[axis] = mid
    hi_r = box.r.copy()
    hi_r[axis] = mid
    return (
        BoxNd(box.r, lo_s, birth_iteration),
        BoxNd(hi_r, box.s, birth_iteration),
    )


class _CornerCache:
    """Memoized corner evaluations for one box within one iteration.

    Feasibility, reduction and pruning all consume the same values of the
    constraints at the (lower, upper) / (upper, lower) corner pairs and of
    the objective bound, so each is computed at most once per box.
    """

    __slots__ = ("_obj", "_cons", "_box", "_g_rs", "_g_sr", "_f_sr")

    def __init__(self, objective, constraints, box):
        self._obj = objective
        self._cons = constraints
        self._box = box
        self._g_rs = [None] * len(constraints)
        self._g_sr = [None] * len(constraints)
        self._f_sr = None

    def g_rs(self, i: int) -> float:
        v = self._g_rs[i]
        if v is None:
            v = self._g_rs[i] = self._cons[i].g.eval(self._box.r, self._box.s)
        return v

    def g_sr(self, i: int) -> float:
        v = self._g_sr[i]
        if v is None:
            v = self._g_sr[i] = self._cons[i].g.eval(self._box.s, self._box.r)
        return v

    def f_sr(self) -> float:
        if self._f_sr is None:
            self._f_sr = self._obj.eval(self._box.s, self._box.r)
        return self._f_sr


def _sup_step(pred, steps: int) -> float:
    """Largest t in [0, 1] with pred true, rounded up to the bracket top.

    ``pred`` must be monotone (true on an interval [0, t*]); the returned
    value never undershoots t*, which keeps the reduction conservative.
    pred(0) is assumed true and not evaluated.
    """
    if pred(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return hi


def reduce_box(
    box: BoxNd,
    objective: MMFunction,
    constraints: tuple[MMConstraint, ...] | list[MMConstraint],
    gamma: float,
    steps: int = 10,
    _cache: _CornerCache | None = None,
) -> BoxNd | None:
    """Shrink a box without losing any feasible point of value above gamma.

    Returns ``None`` when no such point can exist in the box: some
    constraint is violated at the optimistic corner pair, or the bound does
    not exceed gamma.  Otherwise each face is pulled in by a monotone line
    search; per-coordinate multipliers are found by ``steps`` halvings of
    [0, 1], rounding up so the surviving region is never undercut.
    ``gamma = -inf`` disables the objective cut.
    """
    constraints = tuple(constraints)
    cache = _cache if _cache is not None else _CornerCache(objective, constraints, box)
    for i in range(len(constraints)):
        if cache.g_rs(i) > 0.0:
            return None
    if cache.f_sr() <= gamma:
        return None

    r, s = box.r, box.s
    width = s - r
    n = box.dim

    r_new = np.array(r)
    changed = False
    for i in range(n):
        if width[i] <= 0.0:
            continue

        def shrink_ok(t, i=i):
            x = s.copy()
            x[i] = s[i] - t * width[i]
            if objective.eval(x, r) <= gamma:
                return False
            for c in constraints:
                if c.g.eval(r, x) > 0.0:
                    return False
            return True

        t_hat = _sup_step(shrink_ok, steps)
        if t_hat < 1.0:
            r_new[i] = s[i] - t_hat * width[i]
            changed = True
    if not changed:
        r_new = r
    else:
        np.clip(r_new, r, s, out=r_new)
        # the tightened lower corner may already certify emptiness
        for c in constraints:
            if c.g.eval(r_new, s) > 0.0:
                return None
        if objective.eval(s, r_new) <= gamma:
            return None

    s_new = np.array(s)
    s_changed = False
    for i in range(n):
        top_width = s[i] - r_new[i]
        if top_width <= 0.0:
            continue

        def grow_ok(t, i=i, top_width=top_width):
            y = np.array(r_new)
            y[i] = r_new[i] + t * top_width
            if objective.eval(s, y) <= gamma:
                return False
            for c in constraints:
                if c.g.eval(y, s) > 0.0:
                    return False
            return True

        t_hat = _sup_step(grow_ok, steps)
        if t_hat < 1.0:
            s_new[i] = r_new[i] + t_hat * top_width
            s_changed = True

    if not changed and not s_changed:
        return box
    if not s_changed:
        s_new = s
    else:
        np.clip(s_new, r_new, s, out=s_new)
    return BoxNd(r_new, s_new, box.birth_iteration)


def _diag_feasible(constraints, x, slack: float) -> bool:
    return all(c.g.eval(x, x) <= slack for c in constraints)


def _normal_funcs(constraints):
    return [lambda x, c=c: c.g.eval(x, x) for c in constraints]


def _conormal_funcs(constraints):
    return [lambda x, c=c: -c.g.eval(x, x) for c in constraints]


def _verdict_for(
    problem: ProblemInstance,
    box: BoxNd,
    cache: _CornerCache | None = None,
    normal_funcs=None,
    conormal_funcs=None,
) -> FeasibilityVerdict:
    mode = problem.feasibility_mode
    if mode == "mm-conclusive":
        return mm_conclusive_test(box, problem.constraints, _cache=cache)
    if mode == "normal":
        funcs = normal_funcs if normal_funcs is not None else _normal_funcs(problem.constraints)
        return normal_set_test(box, funcs)
    if mode == "conormal":
        funcs = (
            conormal_funcs if conormal_funcs is not None else _conormal_funcs(problem.constraints)
        )
        return conormal_set_test(box, funcs)
    if mode == "custom-oracle":
        return problem.feasibility_oracle(box)
    return mm_sufficient_test(box, problem.constraints, _cache=cache)


def _candidate_from_verdict(
    problem: ProblemInstance, box: BoxNd, verdict: FeasibilityVerdict, epsilon: float
) -> np.ndarray | None:
    x = None
    if verdict.kind is Feasibility.FEASIBLE_WITH_WITNESS:
        x = verdict.witness
    elif verdict.kind is Feasibility.FULLY_FEASIBLE:
        x = box.r
    elif (
        verdict.kind is Feasibility.UNKNOWN
        and epsilon > 0.0
        and problem.feasibility_mode == "mm-sufficient-only"
        and _diag_feasible(problem.constraints, box.r, epsilon)
    ):
        x = box.r
    if x is None and problem.incumbent_hook is not None:
        cand = problem.incumbent_hook(box)
        if cand is not None:
            cand = np.asarray(cand, dtype=float)
            slack = epsilon if epsilon > 0.0 else 1e-9
            if box.contains(cand, tol=1e-9) and _diag_feasible(problem.constraints, cand, slack):
                x = cand
    return x


def find_incumbent(box: BoxNd, problem: ProblemInstance, epsilon: float = 0.0):
    """A feasible point in the box, or None when none can be produced.

    Tries, in order: the conclusive witness when the problem's mode permits
    it, the normal/conormal corner witness, the user incumbent hook, and --
    in ``mm-sufficient-only`` mode -- the lower corner of a box certified
    fully feasible.  ``epsilon > 0`` additionally admits the lower corner of
    an undecided box whose constraints hold within that slack.
    """
    verdict = _verdict_for(problem, box)
    if verdict.kind is Feasibility.INFEASIBLE:
        return None
    return _candidate_from_verdict(problem, box, verdict, epsilon)


class RegionQueue:
    """Undecided boxes with cached bounds, under one selection discipline.

    best-first pops a box maximizing the cached bound (ties: earlier birth,
    then insertion order, which puts the lower bisection child first);
    oldest-first pops by minimal birth index, FIFO within equal birth.
    """

    __slots__ = ("discipline", "_heap", "_fifo", "_seq")

    def __init__(self, discipline: str = "best-first"):
        if discipline not in ("best-first", "oldest-first"):
            raise ValueError(f"unknown discipline {discipline!r}")
        self.discipline = discipline
        self._heap: list = []
        self._fifo: deque = deque()
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap) if self.discipline == "best-first" else len(self._fifo)

    def push(self, box: BoxNd, ubound: float, box_id: int):
        if self.discipline == "best-first":
            heapq.heappush(self._heap, (-ubound, box.birth_iteration, self._seq, box, box_id))
            self._seq += 1
        else:
            self._fifo.append((box, ubound, box_id))

    def pop(self) -> tuple[BoxNd, float, int]:
        if self.discipline == "best-first":
            neg_u, _, _, box, box_id = heapq.heappop(self._heap)
            return box, -neg_u, box_id
        return self._fifo.popleft()

    def max_bound(self) -> float:
        """Largest cached bound over stored boxes (-inf when empty).

        O(1) for best-first, O(n) for oldest-first.
        """
        if self.discipline == "best-first":
            return -self._heap[0][0] if self._heap else float("-inf")
        return max((u for _, u, _ in self._fifo), default=float("-inf"))


@dataclass
class SolveStats:
    boxes_created: int = 0
    boxes_pruned_infeasible: int = 0
    boxes_pruned_bound: int = 0
    boxes_reduced_empty: int = 0
    peak_region_count: int = 0


@dataclass
class SolverState:
    """Mutable loop state; gamma is nondecreasing over iterations."""

    queue: RegionQueue
    gamma: float = float("-inf")
    incumbent: np.ndarray | None = None
    iteration: int = 0
    stats: SolveStats = field(default_factory=SolveStats)


def _debug_check_prune(problem, box, gamma_cut, rng, reason: str):
    """Sample the pruned box; a feasible sample beating the cutoff is a bug."""
    if problem.feasibility_mode == "custom-oracle":
        return
    r, width = box.r, box.s - box.r
    f = problem.objective
    for _ in range(1000):
        x = r + width * rng.random(box.dim)
        if not _diag_feasible(problem.constraints, x, 0.0):
            continue
        if reason == "infeasible":
            raise AssertionError(f"box pruned as infeasible contains feasible point {x}")
        if f.eval(x, x) > gamma_cut:
            raise AssertionError(
                f"bound-pruned box contains feasible {x} with value above the cutoff"
            )


def solve(problem: ProblemInstance, config: SolverConfig | None = None) -> SolverResult:
    """Run the branch-reduce-and-bound loop on a problem instance."""
    if config is None:
        config = SolverConfig()
    t_start = time.perf_counter()

    objective = problem.objective
    constraints = problem.constraints
    eta = config.eta
    relative = config.tolerance_mode == "relative"
    eps = config.epsilon_feasibility
    best_first = config.selection_rule == "best-first"
    normal_funcs = _normal_funcs(constraints)
    conormal_funcs = _conormal_funcs(constraints)
    debug_rng = np.random.default_rng(config.rng_seed) if config.debug_check_pruning else None

    def cutoff(g: float) -> float:
        return (1.0 + eta) * g if relative else g + eta

    state = SolverState(queue=RegionQueue(config.selection_rule))
    queue = state.queue
    root = problem.initial_box

    x0 = find_incumbent(root, problem, eps)
    if x0 is not None:
        state.gamma = objective.eval(x0, x0)
        state.incumbent = x0

    next_box_id = 0
    if root.diameter >= _POINT_DIAMETER:
        queue.push(root, bound(objective, root), next_box_id)
        next_box_id += 1
    state.stats.boxes_created = 1
    state.stats.peak_region_count = len(queue)

    trace = None
    status = None
    try:
        if config.trace_path is not None:
            trace = open(config.trace_path, "w", encoding="utf-8")
            trace.write(_TRACE_HEADER + "\n")

        while True:
            if len(queue) == 0:
                break
            if best_first or state.iteration % 64 == 0:
                if queue.max_bound() <= cutoff(state.gamma):
                    break
            if config.max_iterations is not None and state.iteration >= config.max_iterations:
                status = STATUS_ITERATION_LIMIT
                break
            if (
                config.max_wall_time is not None
                and time.perf_counter() - t_start > config.max_wall_time
            ):
                status = STATUS_TIME_LIMIT
                break

            state.iteration += 1
            k = state.iteration
            box, selected_u, selected_id = queue.pop()
            gamma_before = state.gamma  # reduction cuts on the pre-update incumbent

            candidates = []
            survivors = []
            for child in bisect(box, birth_iteration=k):
                cache = _CornerCache(objective, constraints, child)
                if config.reduction_enabled:
                    reduced = reduce_box(
                        child,
                        objective,
                        constraints,
                        gamma_before,
                        config.reduction_bisection_steps,
                        _cache=cache,
                    )
                    if reduced is None:
                        state.stats.boxes_reduced_empty += 1
                        continue
                    if reduced is not child:
                        child = reduced
                        cache = _CornerCache(objective, constraints, child)
                state.stats.boxes_created += 1

                if child.diameter < _POINT_DIAMETER:
                    x = find_incumbent(child, problem, eps)
                    if x is not None:
                        candidates.append(x)
                    continue

                verdict = _verdict_for(problem, child, cache, normal_funcs, conormal_funcs)
                if verdict.kind is Feasibility.INFEASIBLE:
                    state.stats.boxes_pruned_infeasible += 1
                    if debug_rng is not None:
                        _debug_check_prune(problem, child, None, debug_rng, "infeasible")
                    continue
                x = _candidate_from_verdict(problem, child, verdict, eps)
                if x is not None:
                    candidates.append(x)
                survivors.append((child, cache.f_sr()))

            for x in candidates:
                value = objective.eval(x, x)
                if value > state.gamma:
                    state.gamma = value
                    state.incumbent = x

            gamma_cut = cutoff(state.gamma)
            for child, child_u in survivors:
                if child_u <= gamma_cut:
                    state.stats.boxes_pruned_bound += 1
                    if debug_rng is not None:
                        _debug_check_prune(problem, child, gamma_cut, debug_rng, "bound")
                    continue
                queue.push(child, child_u, next_box_id)
                next_box_id += 1

            if len(queue) > state.stats.peak_region_count:
                state.stats.peak_region_count = len(queue)
            if trace is not None:
                trace.write(
                    f"{k},{selected_id},{selected_u:.12g},{state.gamma:.12g},{len(queue)}\n"
                )
    finally:
        if trace is not None:
            trace.close()

    if status is None:
        if state.incumbent is None:
            status = STATUS_INFEASIBLE
        elif eps > 0.0:
            status = STATUS_EPS_ETA_APPROXIMATE
        elif relative:
            status = STATUS_RELATIVE_ETA_OPTIMAL
        else:
            status = STATUS_ETA_OPTIMAL

    return SolverResult(
        incumbent=state.incumbent,
        value=state.gamma,
        status=status,
        iterations=state.iteration,
        peak_region_count=state.stats.peak_region_count,
        wall_time=time.perf_counter() - t_start,
    )
