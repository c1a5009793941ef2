"""Benchmark harness: seeded instance batches, result rows, CSV/JSON output.

A batch is described by a :class:`BenchSpec`; :func:`run_bench` expands it
into one solver run per (realization, configuration) pair and records one
:class:`ResultRow` each.  Identical spec and seed reproduce identical rows
except for wall time.  Per-run failures become rows with an ``error``
status and never abort the batch.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import ProblemInstance, SolverConfig
from .errors import ParseError, SchemaVersionError, SpecError
from .problems import (
    AlohaNetwork,
    EnergyModel,
    InterferenceNetwork,
    aloha_problem,
    dinkelbach_gee,
    gee_problem,
    generate_aloha,
    generate_channels,
    wmee_problem,
    wsee_problem,
    wsr_problem,
)
from .solver import solve

__all__ = [
    "BenchSpec",
    "ResultRow",
    "run_bench",
    "write_csv",
    "write_json",
    "read_csv",
    "read_json",
    "load_instance",
    "CSV_HEADER",
]

EXPERIMENTS = ("wsr-compare", "gee-compare", "aloha", "single-solve")

CSV_HEADER = (
    "instance_id,algorithm,representation,selection,reduction,"
    "status,objective,iterations,peak_regions,wall_time_s,seed"
)

# aloha feasibility screening grids; finer than this is pointless at bench scale
_ALOHA_SCREEN_POINTS = {1: 4097, 2: 401, 3: 201, 4: 61}


@dataclass(frozen=True)
class BenchSpec:
    experiment: str
    k: int = 2
    realizations: int = 1
    eta: float = 0.01
    tolerance_mode: str = "absolute"
    selections: tuple[str, ...] = ("best-first",)
    reductions: tuple[bool, ...] = (False,)
    representations: tuple[str, ...] = ("mmp",)
    seed: int = 0
    max_iterations: int | None = None
    max_wall_time: float | None = None
    epsilon_feasibility: float = 0.0
    reduction_bisection_steps: int = 10
    instance_path: str | None = None
    trace_path: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise SpecError(f"unknown experiment {self.experiment!r}")
        if self.realizations < 1:
            raise SpecError("realizations must be >= 1")
        if self.k < 1:
            raise SpecError("k must be >= 1")
        if not self.selections or not self.reductions or not self.representations:
            raise SpecError("selections, reductions and representations must be nonempty")
        if self.experiment == "single-solve" and self.instance_path is None:
            raise SpecError("single-solve needs an instance file")


@dataclass(frozen=True)
class ResultRow:
    instance_id: str
    algorithm: str
    representation: str
    selection: str
    reduction: bool
    status: str
    objective: float | None
    iterations: int
    peak_regions: int
    wall_time_s: float
    seed: int


def _instance_seed(spec_seed: int, index: int) -> int:
    # stable per-instance derivation; independent of how many configs run
    seq = np.random.SeedSequence(entropy=spec_seed, spawn_key=(index,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _config_label(selection: str, reduction: bool) -> str:
    return f"{selection}{'+red' if reduction else ''}"


def _solver_config(spec: BenchSpec, selection: str, reduction: bool, trace: str | None):
    return SolverConfig(
        eta=spec.eta,
        tolerance_mode=spec.tolerance_mode,
        selection_rule=selection,
        reduction_enabled=reduction,
        reduction_bisection_steps=spec.reduction_bisection_steps,
        epsilon_feasibility=spec.epsilon_feasibility,
        max_iterations=spec.max_iterations,
        max_wall_time=spec.max_wall_time,
        trace_path=trace,
    )


def _error_row(instance_id, algorithm, representation, selection, reduction, seed) -> ResultRow:
    return ResultRow(
        instance_id=instance_id,
        algorithm=algorithm,
        representation=representation,
        selection=selection,
        reduction=reduction,
        status="error",
        objective=None,
        iterations=0,
        peak_regions=0,
        wall_time_s=0.0,
        seed=seed,
    )


def _run_one(problem, spec, instance_id, algorithm, representation, selection, reduction, seed, trace):
    try:
        res = solve(problem, _solver_config(spec, selection, reduction, trace))
    except Exception:
        return _error_row(instance_id, algorithm, representation, selection, reduction, seed)
    return ResultRow(
        instance_id=instance_id,
        algorithm=algorithm,
        representation=representation,
        selection=selection,
        reduction=reduction,
        status=res.status,
        objective=res.value,
        iterations=res.iterations,
        peak_regions=res.peak_region_count,
        wall_time_s=res.wall_time,
        seed=seed,
    )


def _trace_for(spec: BenchSpec, suffix: str, single: bool) -> str | None:
    if spec.trace_path is None:
        return None
    if single:
        return spec.trace_path
    p = Path(spec.trace_path)
    return str(p.with_name(f"{p.stem}-{suffix}{p.suffix or '.csv'}"))


def _aloha_grid_feasible(net: AlohaNetwork, points: int) -> bool:
    """True when some grid point meets every rate floor."""
    k = net.K
    axes = np.linspace(0.0, 1.0, points)
    feasible = np.ones((points,) * k, dtype=bool)
    for i in range(k):
        shape = [1] * k
        shape[i] = points
        rate = net.c[i] * axes.reshape(shape)
        for j in net.interferers[i]:
            shape_j = [1] * k
            shape_j[j] = points
            rate = rate * (1.0 - axes.reshape(shape_j))
        feasible &= rate >= net.r_min[i]
        if not feasible.any():
            return False
    return True


def _feasible_aloha_instances(spec: BenchSpec):
    """Draw networks until the requested number of feasible ones is found.

    Floors are drawn around the feasibility boundary, so roughly half the
    draws are discarded; a generous cap guards against misconfiguration.
    """
    if spec.k not in _ALOHA_SCREEN_POINTS:
        raise SpecError("aloha experiment supports k <= 4 (feasibility screening grid)")
    points = _ALOHA_SCREEN_POINTS[spec.k]
    kept = []
    draw = 0
    while len(kept) < spec.realizations:
        if draw >= 200 * spec.realizations:
            raise SpecError("aloha generator produced too many infeasible draws")
        seed = _instance_seed(spec.seed, draw)
        net = generate_aloha(spec.k, seed)
        draw += 1
        if _aloha_grid_feasible(net, points):
            kept.append((net, seed))
    return kept


def run_bench(spec: BenchSpec) -> list[ResultRow]:
    """Expand a spec into solver runs and collect one row per run."""
    rows: list[ResultRow] = []
    n_runs = 0

    def configs():
        for rep in spec.representations:
            for sel in spec.selections:
                for red in spec.reductions:
                    yield rep, sel, red

    total_configs = sum(1 for _ in configs())
    single = spec.realizations == 1 and total_configs == 1

    if spec.experiment == "wsr-compare":
        for i in range(spec.realizations):
            seed = _instance_seed(spec.seed, i)
            net = generate_channels(spec.k, seed)
            instance_id = f"wsr-k{spec.k}-{i:03d}"
            for rep, sel, red in configs():
                trace = _trace_for(spec, f"{instance_id}-{rep}-{_config_label(sel, red)}", single)
                try:
                    problem = wsr_problem(net, representation=rep)
                except Exception:
                    rows.append(_error_row(instance_id, "brb", rep, sel, red, seed))
                    continue
                rows.append(
                    _run_one(problem, spec, instance_id, "brb", rep, sel, red, seed, trace)
                )
    elif spec.experiment == "gee-compare":
        energy = EnergyModel(phi=np.full(spec.k, 5.0), p_circuit=1.0)
        for i in range(spec.realizations):
            seed = _instance_seed(spec.seed, i)
            net = generate_channels(spec.k, seed)
            instance_id = f"gee-k{spec.k}-{i:03d}"
            for sel in spec.selections:
                for red in spec.reductions:
                    trace = _trace_for(spec, f"{instance_id}-{_config_label(sel, red)}", single)
                    rows.append(
                        _run_one(
                            gee_problem(net, energy),
                            spec,
                            instance_id,
                            "brb",
                            "mmp",
                            sel,
                            red,
                            seed,
                            trace,
                        )
                    )
                    try:
                        res = dinkelbach_gee(
                            net, energy, _solver_config(spec, sel, red, None)
                        )
                        rows.append(
                            ResultRow(
                                instance_id=instance_id,
                                algorithm="dinkelbach",
                                representation="dm",
                                selection=sel,
                                reduction=red,
                                status=res.status,
                                objective=res.value,
                                iterations=res.iterations,
                                peak_regions=res.peak_region_count,
                                wall_time_s=res.wall_time,
                                seed=seed,
                            )
                        )
                    except Exception:
                        rows.append(_error_row(instance_id, "dinkelbach", "dm", sel, red, seed))
    elif spec.experiment == "aloha":
        for i, (net, seed) in enumerate(_feasible_aloha_instances(spec)):
            instance_id = f"aloha-k{spec.k}-{i:03d}"
            for sel in spec.selections:
                for red in spec.reductions:
                    trace = _trace_for(spec, f"{instance_id}-{_config_label(sel, red)}", single)
                    rows.append(
                        _run_one(
                            aloha_problem(net),
                            spec,
                            instance_id,
                            "brb",
                            "mmp",
                            sel,
                            red,
                            seed,
                            trace,
                        )
                    )
    else:  # single-solve
        for rep, sel, red in configs():
            problem = load_instance(spec.instance_path, representation=rep)
            instance_id = Path(spec.instance_path).stem
            trace = _trace_for(spec, f"{instance_id}-{rep}-{_config_label(sel, red)}", single)
            rows.append(
                _run_one(problem, spec, instance_id, "brb", rep, sel, red, spec.seed, trace)
            )

    return rows


# ---------------------------------------------------------------------------
# serialization


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv_fh(rows, fh):
    fh.write(CSV_HEADER + "\n")
    for row in rows:
        fh.write(
            ",".join(
                _fmt(v)
                for v in (
                    row.instance_id,
                    row.algorithm,
                    row.representation,
                    row.selection,
                    row.reduction,
                    row.status,
                    row.objective,
                    row.iterations,
                    row.peak_regions,
                    row.wall_time_s,
                    row.seed,
                )
            )
            + "\n"
        )


def write_csv(rows, path):
    if hasattr(path, "write"):
        _write_csv_fh(rows, path)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_csv_fh(rows, fh)


def _write_json_fh(rows, fh):
    payload = []
    for row in rows:
        d = asdict(row)
        d["wall_time_s"] = float(f"{row.wall_time_s:.12g}")
        if row.objective is not None:
            d["objective"] = float(f"{row.objective:.12g}")
        payload.append(d)
    json.dump(payload, fh, indent=1)
    fh.write("\n")


def write_json(rows, path):
    if hasattr(path, "write"):
        _write_json_fh(rows, path)
        return
    with open(path, "w", encoding="utf-8") as fh:
        _write_json_fh(rows, fh)


def read_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ParseError(f"unexpected CSV header: {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != 11:
                raise ParseError(f"expected 11 fields, got {len(parts)}")
            rows.append(
                ResultRow(
                    instance_id=parts[0],
                    algorithm=parts[1],
                    representation=parts[2],
                    selection=parts[3],
                    reduction=parts[4] == "on",
                    status=parts[5],
                    objective=float(parts[6]) if parts[6] else None,
                    iterations=int(parts[7]),
                    peak_regions=int(parts[8]),
                    wall_time_s=float(parts[9]),
                    seed=int(parts[10]),
                )
            )
    return rows


def read_json(path) -> list[ResultRow]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return [ResultRow(**entry) for entry in payload]


# ---------------------------------------------------------------------------
# instance files

_SCHEMA = "mmp-bench/1"
_TYPES = ("wsr", "gee", "wsee", "wmee", "aloha")


def _require(doc: dict, field: str):
    if field not in doc:
        raise ParseError(f"missing field {field!r}")
    return doc[field]


def _parse_vector(doc, field, k, default=None):
    if field not in doc:
        if default is None:
            raise ParseError(f"missing field {field!r}")
        return np.full(k, default, dtype=float)
    try:
        arr = np.asarray(doc[field], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {field!r} is not numeric") from exc
    if arr.shape != (k,):
        raise ParseError(f"field {field!r} must have length {k}")
    return arr


def load_instance(path, representation: str = "mmp") -> ProblemInstance:
    """Parse an ``mmp-bench/1`` JSON document into a problem instance."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("instance document must be a JSON object")
    schema = _require(doc, "schema")
    if schema != _SCHEMA:
        raise SchemaVersionError(f"unsupported schema {schema!r} (expected {_SCHEMA!r})")
    kind = _require(doc, "type")
    if kind not in _TYPES:
        raise ParseError(f"unknown problem type {kind!r}")
    try:
        k = int(_require(doc, "K"))
    except (TypeError, ValueError) as exc:
        raise ParseError("field 'K' must be an integer") from exc
    if k < 1:
        raise ParseError("field 'K' must be >= 1")

    if kind == "aloha":
        c = _parse_vector(doc, "c", k)
        r_min = _parse_vector(doc, "rmin", k, default=0.0)
        if "interferers" in doc:
            raw = doc["interferers"]
            if not isinstance(raw, list) or len(raw) != k:
                raise ParseError(f"field 'interferers' must list {k} index sets")
            interferers = tuple(tuple(int(j) for j in entry) for entry in raw)
        else:
            interferers = tuple(tuple(j for j in range(k) if j != i) for i in range(k))
        try:
            net = AlohaNetwork(c=c, interferers=interferers, r_min=r_min)
            return aloha_problem(net)
        except Exception as exc:
            raise ParseError(str(exc)) from exc

    alpha = _parse_vector(doc, "alpha", k)
    beta = np.asarray(_require(doc, "beta"), dtype=float)
    if beta.shape != (k, k):
        raise ParseError(f"field 'beta' must be a {k}x{k} matrix")
    sigma2 = float(_require(doc, "sigma2"))
    p_max = _parse_vector(doc, "P", k)
    w = _parse_vector(doc, "w", k, default=1.0)
    r_min = _parse_vector(doc, "rmin", k, default=0.0)
    try:
        net = InterferenceNetwork(
            alpha=alpha, beta=beta, sigma2=sigma2, p_max=p_max, w=w, r_min=r_min
        )
    except Exception as exc:
        raise ParseError(str(exc)) from exc

    if kind == "wsr":
        return wsr_problem(net, representation=representation)

    phi = _parse_vector(doc, "phi", k)
    bandwidth = float(doc.get("B", 1.0))
    try:
        if kind == "gee":
            pc = float(_require(doc, "Pc"))
            return gee_problem(net, EnergyModel(phi=phi, p_circuit=pc, bandwidth=bandwidth))
        pc = _parse_vector(doc, "Pc", k)
        energy = EnergyModel(phi=phi, p_circuit=pc, bandwidth=bandwidth)
        return wsee_problem(net, energy) if kind == "wsee" else wmee_problem(net, energy)
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(str(exc)) from exc
