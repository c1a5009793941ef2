"""Ready-made problem families and seeded instance generators.

Covers power control in interference networks (weighted sum rate with
minimum-rate constraints, in two bound representations), energy-efficiency
ratios (global, weighted-sum and weighted-minimum variants, plus a
Dinkelbach-style baseline), and transmit-probability optimization for
slotted random access.  Constructors return immutable
:class:`~mmopt.core.ProblemInstance` values assembled from the combinator
calculus; rates are interference-treated-as-noise throughout.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .calculus import (
    mm_compose_nondecreasing,
    mm_compose_nonincreasing,
    mm_min,
    mm_ratio,
    mm_sum,
    mm_weighted_sum,
)
from .core import (
    STATUS_ETA_OPTIMAL,
    STATUS_RELATIVE_ETA_OPTIMAL,
    BoxNd,
    MMConstraint,
    MMFunction,
    ProblemInstance,
    SolverConfig,
    SolverResult,
)
from .errors import InnerSolveFailed, InvalidNetwork
from .solver import solve

__all__ = [
    "InterferenceNetwork",
    "EnergyModel",
    "AlohaNetwork",
    "wsr_problem",
    "bound_gap_mmp_vs_dm",
    "gee_problem",
    "wsee_problem",
    "wmee_problem",
    "dinkelbach_gee",
    "aloha_problem",
    "generate_channels",
    "generate_aloha",
    "aloha_feasibility_boundary",
]


def _frozen_vector(v, k: int, name: str, lo=None, strict_lo=None) -> np.ndarray:
    arr = np.array(v, dtype=float, copy=True)
    if arr.shape != (k,):
        raise InvalidNetwork(f"{name} must have shape ({k},), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidNetwork(f"{name} must be finite")
    if lo is not None and np.any(arr < lo):
        raise InvalidNetwork(f"{name} must be >= {lo}")
    if strict_lo is not None and np.any(arr <= strict_lo):
        raise InvalidNetwork(f"{name} must be > {strict_lo}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class InterferenceNetwork:
    """K-user interference network with per-user power caps.

    ``alpha`` holds the direct-channel gains, ``beta[k, j]`` the gain from
    transmitter j into receiver k (``beta[k, k]`` may be nonzero to model
    self-interference), ``sigma2`` the noise power, ``p_max`` the power
    caps, ``w`` the utility weights and ``r_min`` the per-user minimum
    rates.
    """

    alpha: np.ndarray
    beta: np.ndarray
    sigma2: float
    p_max: np.ndarray
    w: np.ndarray
    r_min: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.alpha).size
        object.__setattr__(self, "alpha", _frozen_vector(self.alpha, k, "alpha", strict_lo=0.0))
        beta = np.array(self.beta, dtype=float, copy=True)
        if beta.shape != (k, k):
            raise InvalidNetwork(f"beta must have shape ({k}, {k}), got {beta.shape}")
        if not np.isfinite(beta).all() or np.any(beta < 0):
            raise InvalidNetwork("beta must be finite and nonnegative")
        beta.flags.writeable = False
        object.__setattr__(self, "beta", beta)
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise InvalidNetwork("sigma2 must be positive")
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "p_max", _frozen_vector(self.p_max, k, "p_max", strict_lo=0.0))
        object.__setattr__(self, "w", _frozen_vector(self.w, k, "w", lo=0.0))
        object.__setattr__(self, "r_min", _frozen_vector(self.r_min, k, "r_min", lo=0.0))

    @property
    def K(self) -> int:
        return self.alpha.size


@dataclass(frozen=True)
class EnergyModel:
    """Power-consumption model: amplifier inefficiencies, circuit power, bandwidth.

    ``p_circuit`` is a scalar for the network-wide energy efficiency ratio
    and a per-user vector for the weighted-sum/-minimum variants.
    """

    phi: np.ndarray
    p_circuit: float | np.ndarray
    bandwidth: float = 1.0

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float, copy=True)
        if phi.ndim != 1 or not np.isfinite(phi).all() or np.any(phi < 0):
            raise InvalidNetwork("phi must be a finite nonnegative vector")
        phi.flags.writeable = False
        object.__setattr__(self, "phi", phi)
        pc = np.asarray(self.p_circuit, dtype=float)
        if pc.ndim == 0:
            if not (np.isfinite(pc) and pc > 0):
                raise InvalidNetwork("p_circuit must be positive")
            object.__setattr__(self, "p_circuit", float(pc))
        else:
            object.__setattr__(
                self, "p_circuit", _frozen_vector(pc, phi.size, "p_circuit", strict_lo=0.0)
            )
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise InvalidNetwork("bandwidth must be positive")
        object.__setattr__(self, "bandwidth", float(self.bandwidth))

    @property
    def per_user_circuit(self) -> bool:
        return isinstance(self.p_circuit, np.ndarray)


@dataclass(frozen=True)
class AlohaNetwork:
    """Slotted random access: success rates, interferer sets, rate floors."""

    c: np.ndarray
    interferers: tuple[tuple[int, ...], ...]
    r_min: np.ndarray
    utility: str = "proportional-fair"

    def __post_init__(self):
        k = np.asarray(self.c).size
        object.__setattr__(self, "c", _frozen_vector(self.c, k, "c", strict_lo=0.0))
        sets = []
        if len(self.interferers) != k:
            raise InvalidNetwork(f"interferers must list {k} index sets")
        for i, idx in enumerate(self.interferers):
            ids = tuple(sorted(int(j) for j in idx))
            if any(j < 0 or j >= k for j in ids):
                raise InvalidNetwork(f"interferers[{i}] indices out of range")
            if i in ids:
                raise InvalidNetwork(f"user {i} cannot interfere with itself")
            sets.append(ids)
        object.__setattr__(self, "interferers", tuple(sets))
        object.__setattr__(self, "r_min", _frozen_vector(self.r_min, k, "r_min", lo=0.0))
        if self.utility != "proportional-fair":
            raise InvalidNetwork(f"unsupported utility {self.utility!r}")

    @property
    def K(self) -> int:
        return self.c.size


# ---------------------------------------------------------------------------
# weighted sum rate


def _rate_mm(net: InterferenceNetwork, k: int) -> MMFunction:
    """Per-user rate with own power in the increasing slot and interference
    in the decreasing slot (self-interference stays with the own power)."""
    a = float(net.alpha[k])
    bkk = float(net.beta[k, k])
    cross = np.array(net.beta[k])
    cross[k] = 0.0
    s2 = net.sigma2

    def fn(x, y):
        den = s2 + bkk * x[k] + float(np.dot(cross, y))
        return math.log2(1.0 + a * x[k] / den)

    return MMFunction(net.K, fn, name=f"rate{k}")


def _rate_constraint(net: InterferenceNetwork, k: int) -> MMFunction:
    """Minimum-rate gap r_min - rate, with the argument roles swapped so the
    gap is again nondecreasing in the first slot."""
    a = float(net.alpha[k])
    bkk = float(net.beta[k, k])
    cross = np.array(net.beta[k])
    cross[k] = 0.0
    s2 = net.sigma2
    rmin = float(net.r_min[k])

    def fn(x, y):
        den = s2 + bkk * y[k] + float(np.dot(cross, x))
        return rmin - math.log2(1.0 + a * y[k] / den)

    return MMFunction(net.K, fn, name=f"rate_floor{k}")


def _dm_objective(net: InterferenceNetwork) -> MMFunction:
    """Weighted sum rate as a difference of two increasing log terms: every
    power in the signal-plus-interference log binds to the increasing slot,
    every power in the interference log to the decreasing slot."""
    alpha, beta, s2, w = net.alpha, net.beta, net.sigma2, net.w

    def fn(x, y):
        plus = np.log2(alpha * x + s2 + beta @ x)
        minus = np.log2(s2 + beta @ y)
        return float(np.dot(w, plus) - np.dot(w, minus))

    return MMFunction(net.K, fn, name="wsr_dm")


def _wsr_constraints(net: InterferenceNetwork) -> tuple[MMConstraint, ...]:
    # rate floors at zero are vacuous (rates are nonnegative); skip them
    return tuple(MMConstraint(_rate_constraint(net, k)) for k in range(net.K) if net.r_min[k] > 0)


def wsr_problem(net: InterferenceNetwork, representation: str = "mmp") -> ProblemInstance:
    """Weighted sum rate maximization over the power box [0, p_max].

    ``representation`` selects the bound: ``"mmp"`` keeps each rate's own
    power inside its fraction, ``"dm"`` uses the difference-of-logs split
    (always looser, never tighter).
    """
    if representation == "mmp":
        objective = mm_weighted_sum(net.w, [_rate_mm(net, k) for k in range(net.K)])
    elif representation == "dm":
        objective = _dm_objective(net)
    else:
        raise InvalidNetwork(f"unknown representation {representation!r}")
    constraints = _wsr_constraints(net)
    mode = "mm-sufficient-only" if constraints else "normal"
    box = BoxNd(np.zeros(net.K), net.p_max)
    return ProblemInstance(objective, constraints, box, feasibility_mode=mode)


def bound_gap_mmp_vs_dm(net: InterferenceNetwork, box: BoxNd) -> float:
    """Bound of the difference-of-logs split minus the per-rate bound on a
    box; nonnegative up to roundoff, zero on degenerate boxes."""
    u_dm = _dm_objective(net).eval(box.s, box.r)
    u_mmp = mm_weighted_sum(net.w, [_rate_mm(net, k) for k in range(net.K)]).eval(box.s, box.r)
    return u_dm - u_mmp


# ---------------------------------------------------------------------------
# energy efficiency


def gee_problem(net: InterferenceNetwork, energy: EnergyModel) -> ProblemInstance:
    """Network energy efficiency: total throughput over total power draw.

    The consumed power (amplifier draw plus static circuit power) enters the
    decreasing slot, so the ratio is optimized directly -- no outer
    fractional-programming loop.  Minimum-rate constraints are omitted.
    """
    if energy.phi.size != net.K:
        raise InvalidNetwork("phi dimension differs from the network")
    if energy.per_user_circuit:
        raise InvalidNetwork("network energy efficiency takes a scalar p_circuit")
    b = energy.bandwidth
    numerator = mm_weighted_sum(np.full(net.K, b), [_rate_mm(net, k) for k in range(net.K)])
    phi, pc = energy.phi, float(energy.p_circuit)

    def den_fn(x, y):
        return float(np.dot(phi, x)) + pc

    denominator = MMFunction(net.K, den_fn, name="power_draw")
    objective = mm_ratio(numerator, denominator)
    box = BoxNd(np.zeros(net.K), net.p_max)
    return ProblemInstance(objective, (), box, feasibility_mode="normal")


def _per_user_efficiency_terms(net: InterferenceNetwork, energy: EnergyModel) -> list[MMFunction]:
    if energy.phi.size != net.K:
        raise InvalidNetwork("phi dimension differs from the network")
    if not energy.per_user_circuit:
        raise InvalidNetwork("per-user efficiencies need a per-user p_circuit vector")
    b = energy.bandwidth
    terms = []
    for k in range(net.K):
        numerator = mm_weighted_sum([net.w[k] * b], [_rate_mm(net, k)])
        phik = float(energy.phi[k])
        pck = float(energy.p_circuit[k])

        def den_fn(x, y, k=k, phik=phik, pck=pck):
            return phik * x[k] + pck

        terms.append(mm_ratio(numerator, MMFunction(net.K, den_fn, name=f"draw{k}")))
    return terms


def wsee_problem(net: InterferenceNetwork, energy: EnergyModel) -> ProblemInstance:
    """Weighted sum of per-user energy efficiencies."""
    objective = mm_sum(_per_user_efficiency_terms(net, energy))
    box = BoxNd(np.zeros(net.K), net.p_max)
    return ProblemInstance(objective, (), box, feasibility_mode="normal")


def wmee_problem(net: InterferenceNetwork, energy: EnergyModel) -> ProblemInstance:
    """Weighted minimum of per-user energy efficiencies."""
    objective = mm_min(_per_user_efficiency_terms(net, energy))
    box = BoxNd(np.zeros(net.K), net.p_max)
    return ProblemInstance(objective, (), box, feasibility_mode="normal")


def _sum_rate(net: InterferenceNetwork, p: np.ndarray) -> float:
    den = net.sigma2 + net.beta @ p
    return float(np.sum(np.log2(1.0 + net.alpha * p / den)))


def _dinkelbach_aux_objective(
    net: InterferenceNetwork, energy: EnergyModel, lam: float
) -> MMFunction:
    """Throughput minus lam-scaled power draw, in the difference-of-logs
    representation; the linear power term binds to the decreasing slot."""
    alpha, beta, s2 = net.alpha, net.beta, net.sigma2
    phi, pc, b = energy.phi, float(energy.p_circuit), energy.bandwidth

    def fn(x, y):
        plus = float(np.sum(np.log2(alpha * x + s2 + beta @ x)))
        minus = float(np.sum(np.log2(s2 + beta @ y)))
        return b * (plus - minus) - lam * (float(np.dot(phi, y)) + pc)

    return MMFunction(net.K, fn, name=f"aux(lam={lam:.6g})")


def dinkelbach_gee(
    net: InterferenceNetwork,
    energy: EnergyModel,
    inner_config: SolverConfig,
    lambda_tol: float = 1e-6,
    max_outer: int = 50,
) -> SolverResult:
    """Fractional-programming baseline for the energy-efficiency ratio.

    Alternates between solving the parametric auxiliary problem (throughput
    minus a lam-weighted power draw, by branch-and-bound on the
    difference-of-logs bound) and updating lam to the achieved ratio; stops
    once the auxiliary optimum drops to ``lambda_tol``.  Inner tolerance
    errors can leak into the result, so this carries no end-to-end
    optimality guarantee; it serves as a cross-check baseline.
    """
    if lambda_tol <= 0:
        raise InnerSolveFailed("lambda_tol must be positive")
    if energy.per_user_circuit:
        raise InvalidNetwork("the ratio baseline takes a scalar p_circuit")
    t0 = time.perf_counter()
    box = BoxNd(np.zeros(net.K), net.p_max)
    lam = 0.0
    total_iterations = 0
    peak = 0
    ok_statuses = (STATUS_ETA_OPTIMAL, STATUS_RELATIVE_ETA_OPTIMAL)
    for _ in range(max_outer):
        aux = ProblemInstance(
            _dinkelbach_aux_objective(net, energy, lam), (), box, feasibility_mode="normal"
        )
        res = solve(aux, inner_config)
        total_iterations += res.iterations
        peak = max(peak, res.peak_region_count)
        if res.status not in ok_statuses or res.incumbent is None:
            raise InnerSolveFailed(f"auxiliary solve ended with status {res.status}")
        p = res.incumbent
        ratio = (
            energy.bandwidth
            * _sum_rate(net, p)
            / (float(np.dot(energy.phi, p)) + float(energy.p_circuit))
        )
        if res.value <= lambda_tol:
            return SolverResult(
                incumbent=p,
                value=ratio,
                status=res.status,
                iterations=total_iterations,
                peak_region_count=peak,
                wall_time=time.perf_counter() - t0,
            )
        lam = ratio
    raise InnerSolveFailed(f"no convergence within {max_outer} outer iterations")


# ---------------------------------------------------------------------------
# slotted random access

# lower corner of the probability box; keeps the log-utility finite
_ALOHA_FLOOR = 1e-9


def _ln(t: float) -> float:
    if t > 0.0:
        return math.log(t)
    return float("-inf") if t == 0.0 else float("nan")


def _aloha_rate(net: AlohaNetwork, k: int) -> MMFunction:
    """Throughput of user k: success rate times own transmit probability
    times the probability that no interferer transmits."""
    ck = float(net.c[k])
    idx = np.array(net.interferers[k], dtype=int)

    def fn(x, y):
        return ck * x[k] * float(np.prod(1.0 - y[idx])) if idx.size else ck * x[k]

    return MMFunction(net.K, fn, name=f"throughput{k}")


def aloha_problem(net: AlohaNetwork) -> ProblemInstance:
    """Proportional-fair transmit-probability optimization.

    The utility is the sum of log-throughputs; rate floors become
    swapped-argument gap constraints.  These constraints do not admit a
    shared monotone split, so the instance relies on the one-sided
    feasibility test (``mm-sufficient-only``); in practice the search
    converges quickly, but a limit should be configured.
    """
    k = net.K
    rates = [_aloha_rate(net, i) for i in range(k)]
    cmax = float(np.max(net.c))
    objective = mm_sum(
        [mm_compose_nondecreasing(_ln, rate, check_range=(1e-12, cmax)) for rate in rates]
    )
    constraints = tuple(
        MMConstraint(mm_compose_nonincreasing(lambda t, m=float(net.r_min[i]): m - t, rates[i]))
        for i in range(k)
        if net.r_min[i] > 0
    )
    box = BoxNd(np.full(k, _ALOHA_FLOOR), np.ones(k))
    return ProblemInstance(objective, constraints, box, feasibility_mode="mm-sufficient-only")


def aloha_feasibility_boundary(k: int) -> float:
    """Largest ratio rho such that every user can simultaneously reach a
    throughput of rho times its success rate under full interference;
    attained at equal transmit probabilities 1/K."""
    if k < 1:
        raise InvalidNetwork("need at least one user")
    if k == 1:
        return 1.0
    return (k - 1) ** (k - 1) / k**k


# ---------------------------------------------------------------------------
# seeded generators


def generate_channels(k: int, seed: int) -> InterferenceNetwork:
    """Random interference network: squared magnitudes of unit-variance
    complex normal gains, no self-interference, noise power 0.01, unit
    power caps and weights, no rate floors.  Deterministic per seed."""
    if k < 1:
        raise InvalidNetwork("need at least one user")
    rng = np.random.default_rng(seed)
    za = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2.0)
    alpha = np.abs(za) ** 2
    zb = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2.0)
    beta = np.abs(zb) ** 2
    np.fill_diagonal(beta, 0.0)
    return InterferenceNetwork(
        alpha=alpha,
        beta=beta,
        sigma2=0.01,
        p_max=np.ones(k),
        w=np.ones(k),
        r_min=np.zeros(k),
    )


def generate_aloha(k: int, seed: int) -> AlohaNetwork:
    """Random full-interference access network with rate floors near the
    feasibility boundary.

    Success rates come from squared complex-normal gains; each floor is the
    user's success rate times a normal draw centered on the symmetric
    feasibility boundary (std 0.05, clipped at zero), so some floors are
    active and draws straddle infeasibility.  Deterministic per seed.
    """
    if k < 1:
        raise InvalidNetwork("need at least one user")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2.0)
    c = np.log2(1.0 + np.abs(z) ** 2)
    chi = rng.normal(aloha_feasibility_boundary(k), 0.05, size=k)
    r_min = np.maximum(c * chi, 0.0)
    interferers = tuple(tuple(j for j in range(k) if j != i) for i in range(k))
    return AlohaNetwork(c=c, interferers=interferers, r_min=r_min)
