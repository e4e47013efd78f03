"""Instance generation, experiment orchestration and report emission.

Named instance specs pin (agents, tasks) for the small/medium/large test
series; everything else about an instance is drawn from its seed. The suite
runner times every (instance, method) cell, evaluates both objective
conventions (relaxed coupling value and binary rounded value) and computes
gaps against the exact oracle whenever it proves optimality.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import SeedPolicy, SymCostMatrix
from .cqap import (
    CqapInstance,
    coupling_objective,
    cqap_objective,
    check_feasible,
    enum_node_estimate,
    gap_percent,
    round_coupling,
    solve_exact_enum,
)
from .errors import (
    GenerationFailed,
    Infeasible,
    NonEmptyRequired,
    UnknownFormat,
    ValidationError,
)
from .ga import GaConfig, solve_ga
from .gw import MultiInitConfig, solve_entropic_gw, solve_fgw, solve_gw, solve_gw_multi_init
from .cqap import to_fgw_problem, to_gw_problem

INSTANCE_SCHEMA = "cqap/1"
REPORT_SCHEMA = "cqap-report/1"

# named test sizes: id -> (agents, tasks)
NAMED_SPECS = {
    "S1": (3, 3),
    "S2": (4, 4),
    "S3": (5, 6),
    "S4": (6, 5),
    "M1": (10, 10),
    "M2": (12, 14),
    "M3": (15, 12),
    "M4": (20, 20),
    "L1": (30, 30),
    "L2": (40, 50),
    "L3": (50, 40),
    "L4": (60, 60),
    "L5": (100, 100),
}

CSV_COLUMNS = [
    "instance_id",
    "method",
    "params",
    "objective_relaxed",
    "objective_binary",
    "feasible",
    "gap_pct",
    "runtime_s",
    "iterations",
    "seed",
    "status",
]

_CAP_LOW, _CAP_HIGH = 1, 6  # inclusive integer range for capacities/demands
_FEASIBILITY_PRECHECK_CELLS = 20  # oracle pre-check limit (n*m)


@dataclass(frozen=True)
class InstanceSpec:
    test_id: str
    n_agents: int
    n_tasks: int
    seed: SeedPolicy

    def __post_init__(self):
        if self.n_agents < 1 or self.n_tasks < 1:
            raise ValidationError("need at least one agent and one task")
        if self.test_id in NAMED_SPECS:
            expect = NAMED_SPECS[self.test_id]
            if (self.n_agents, self.n_tasks) != expect:
                raise ValidationError(
                    f"{self.test_id} is pinned to {expect}, "
                    f"got ({self.n_agents}, {self.n_tasks})"
                )

    @classmethod
    def named(cls, test_id: str, seed: SeedPolicy) -> "InstanceSpec":
        n, m = NAMED_SPECS[test_id]
        return cls(test_id, n, m, seed)


@dataclass(frozen=True)
class MethodSpec:
    """A solver selection plus its parameters, as used by the suite runner."""

    name: str  # exact | gw | gw-multi | egw | fgw | ga
    params: dict = field(default_factory=dict)

    def label(self) -> str:
        if self.name == "exact":
            return "Exact"
        if self.name == "gw":
            return "GW_Default"
        if self.name == "gw-multi":
            return "GW_MultiInit"
        if self.name == "egw":
            return f"EGW({self.params.get('epsilon', 0.8)})"
        if self.name == "fgw":
            return f"FGW({self.params.get('alpha', 0.5)})"
        if self.name == "ga":
            return "GA"
        raise ValidationError(f"unknown method {self.name!r}")


@dataclass
class SolveReport:
    instance_id: str
    method: str
    params: dict
    objective_relaxed: float | None
    objective_binary: float | None
    feasible: bool | None
    gap_pct: float | None
    runtime_s: float
    iterations: int
    seed: int
    status: str = "ok"


def _pairwise(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def generate_instance(spec: InstanceSpec, max_attempts: int = 100) -> CqapInstance:
    """Draw a random CQAP instance fully determined by the spec seed.

    Positions are Uniform([0,10]^2); capacities and demands are uniform
    integers in {1..6}. Demands are redrawn (same stream) until the instance
    is feasible: verified by the exact oracle for small instances, by the
    total-capacity heuristic for large ones.
    """
    rng = spec.seed.generator()
    n, m = spec.n_agents, spec.n_tasks
    agent_pos = rng.uniform(0.0, 10.0, size=(n, 2))
    task_pos = rng.uniform(0.0, 10.0, size=(m, 2))
    capacity = rng.integers(_CAP_LOW, _CAP_HIGH + 1, size=n)

    F = SymCostMatrix(_pairwise(agent_pos))
    D_tasks = _pairwise(task_pos)
    C = np.sqrt(
        ((agent_pos[:, None, :] - task_pos[None, :, :]) ** 2).sum(axis=-1)
    )

    for _ in range(max_attempts):
        demand = rng.integers(_CAP_LOW, _CAP_HIGH + 1, size=m)
        inst = CqapInstance(
            agent_pos=agent_pos,
            task_pos=task_pos,
            capacity=capacity,
            demand=demand,
            flow=F,
            distance=SymCostMatrix(D_tasks),
            linear_cost=C,
        )
        if _instance_feasible(inst):
            return inst
    raise GenerationFailed(
        f"no feasible demand vector found in {max_attempts} attempts"
    )


def _instance_feasible(inst: CqapInstance) -> bool:
    if inst.capacity.sum() < inst.demand.sum():
        return False
    if inst.n * inst.m <= _FEASIBILITY_PRECHECK_CELLS:
        try:
            solve_exact_enum(inst, node_cap=1_000_000)
        except Infeasible:
            return False
    return True


def instance_to_json(inst: CqapInstance, test_id: str = "custom", seed: int = 0) -> str:
    doc = {
        "schema": INSTANCE_SCHEMA,
        "test_id": test_id,
        "agent_pos": inst.agent_pos.tolist(),
        "task_pos": inst.task_pos.tolist(),
        "capacity": inst.capacity.tolist(),
        "demand": inst.demand.tolist(),
        "flow": inst.flow.entries.tolist(),
        "distance": inst.distance.entries.tolist(),
        "linear_cost": inst.linear_cost.tolist(),
        "seed": seed,
    }
    return json.dumps(doc, indent=2)


def instance_from_json(text: str) -> tuple[CqapInstance, str, int]:
    doc = json.loads(text)
    if doc.get("schema") != INSTANCE_SCHEMA:
        raise ValidationError(f"unsupported instance schema {doc.get('schema')!r}")
    inst = CqapInstance(
        agent_pos=np.asarray(doc["agent_pos"], dtype=np.float64),
        task_pos=np.asarray(doc["task_pos"], dtype=np.float64),
        capacity=np.asarray(doc["capacity"], dtype=np.int64),
        demand=np.asarray(doc["demand"], dtype=np.int64),
        flow=SymCostMatrix(np.asarray(doc["flow"], dtype=np.float64)),
        distance=SymCostMatrix(np.asarray(doc["distance"], dtype=np.float64)),
        linear_cost=np.asarray(doc["linear_cost"], dtype=np.float64),
    )
    return inst, doc.get("test_id", "custom"), int(doc.get("seed", 0))


def solve_with_method(
    inst: CqapInstance,
    method: MethodSpec,
    seed: SeedPolicy,
    node_cap: int = 100_000_000,
):
    """Run one method on one instance.

    Returns (objective_relaxed, objective_binary, feasible, iterations,
    status, extra) where extra carries the solver coupling when one exists.
    """
    name = method.name
    p = method.params
    if name == "exact":
        if enum_node_estimate(inst) > node_cap:
            return None, None, None, 0, "SkippedTooLarge", None
        x, obj, proven = solve_exact_enum(inst, node_cap=node_cap)
        status = "ok" if proven else "NotProven"
        return obj, obj, True, 0, status, None

    if name == "ga":
        cfg = GaConfig(
            population=int(p.get("population", 100)),
            generations=int(p.get("generations", 200)),
            crossover_rate=float(p.get("crossover_rate", 0.9)),
            mutation_rate=float(p.get("mutation_rate", 0.2)),
            tournament_size=int(p.get("tournament_size", 3)),
            seed=seed,
        )
        x, obj, history = solve_ga(inst, cfg)
        ok, _ = check_feasible(inst, x)
        return obj, obj, ok, len(history) - 1, "ok", None

    problem = to_gw_problem(inst)
    if name == "gw":
        sol = solve_gw(problem)
    elif name == "gw-multi":
        sol = solve_gw_multi_init(
            problem,
            MultiInitConfig(trials=int(p.get("trials", 20)), seed=seed),
        )
    elif name == "egw":
        sol = solve_entropic_gw(problem, epsilon=float(p.get("epsilon", 0.8)))
    elif name == "fgw":
        fgw = to_fgw_problem(inst, alpha=float(p.get("alpha", 0.5)))
        sol = solve_fgw(fgw)
    else:
        raise ValidationError(f"unknown method {name!r}")

    relaxed = coupling_objective(inst, sol.coupling)
    rounded = round_coupling(inst, sol.coupling)
    ok, _ = check_feasible(inst, rounded)
    binary = cqap_objective(inst, rounded)
    status = "ok" if sol.converged else "NoConvergence"
    return relaxed, binary, ok, sol.iterations, status, sol.coupling


def _time_cell(fn, measure_time: bool):
    if not measure_time:
        return fn(), 0.0
    t0 = time.perf_counter()
    result = fn()
    elapsed = time.perf_counter() - t0
    if elapsed < 1.0:
        times = [elapsed]
        for _ in range(2):
            t0 = time.perf_counter()
            result = fn()
            times.append(time.perf_counter() - t0)
        elapsed = sorted(times)[1]
    return result, elapsed


def run_suite(
    specs: list[InstanceSpec],
    methods: list[MethodSpec],
    node_cap: int = 100_000_000,
    workers: int = 1,
    measure_time: bool = True,
) -> list[SolveReport]:
    """Solve every (instance, method) cell and collect reports.

    Cells are independent and may run on several worker threads; reports are
    reduced in (instance, method) order so output is identical for any
    worker count. Per-cell failures become status entries, never aborts.
    """
    if not specs or not methods:
        raise NonEmptyRequired("specs and methods must both be non-empty")

    instances = [(spec, generate_instance(spec)) for spec in specs]

    # one oracle run per instance, reused for every method's gap
    oracle: dict[int, float | None] = {}
    for idx, (spec, inst) in enumerate(instances):
        opt = None
        if enum_node_estimate(inst) <= node_cap:
            try:
                _, obj, proven = solve_exact_enum(inst, node_cap=node_cap)
                if proven:
                    opt = obj
            except Infeasible:
                opt = None
        oracle[idx] = opt

    cells = [
        (idx, spec, inst, method)
        for idx, (spec, inst) in enumerate(instances)
        for method in methods
    ]

    def run_cell(cell):
        idx, spec, inst, method = cell
        cell_seed = spec.seed.substream(_method_stream(method))
        try:
            out, elapsed = _time_cell(
                lambda: solve_with_method(inst, method, cell_seed, node_cap),
                measure_time,
            )
            relaxed, binary, feasible, iterations, status, _ = out
        except Infeasible as exc:
            return SolveReport(
                spec.test_id, method.label(), dict(method.params),
                None, None, None, None, 0.0, 0, spec.seed.master_seed,
                status=f"Infeasible: {exc}",
            )
        except Exception as exc:  # noqa: BLE001 - cell failures are recorded
            return SolveReport(
                spec.test_id, method.label(), dict(method.params),
                None, None, None, None, 0.0, 0, spec.seed.master_seed,
                status=f"error: {exc}",
            )
        gap = None
        exact_opt = oracle[idx]
        if exact_opt is not None and binary is not None and feasible:
            gap = gap_percent(binary, exact_opt)
        return SolveReport(
            spec.test_id, method.label(), dict(method.params),
            relaxed, binary, feasible, gap, elapsed, iterations,
            spec.seed.master_seed, status=status,
        )

    if workers <= 1:
        reports = [run_cell(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_cell, cells))
    return reports


def _method_stream(method: MethodSpec) -> int:
    # fixed per-method stream offsets keep cells order-independent
    order = ["exact", "gw", "gw-multi", "egw", "fgw", "ga"]
    base = order.index(method.name) if method.name in order else len(order)
    return 1000 * (base + 1)


def epsilon_sweep(
    spec: InstanceSpec,
    epsilons: list[float],
    node_cap: int = 100_000_000,
    measure_time: bool = True,
) -> list[SolveReport]:
    """Entropic-GW regularization sweep on one instance."""
    if not epsilons:
        raise NonEmptyRequired("epsilon grid must be non-empty")
    if any(e <= 0 for e in epsilons):
        raise ValidationError("all epsilon values must be positive")
    if len(set(epsilons)) != len(epsilons):
        raise ValidationError("duplicate epsilon values in grid")
    methods = [MethodSpec("egw", {"epsilon": e}) for e in epsilons]
    return run_suite([spec], methods, node_cap=node_cap, measure_time=measure_time)


def alpha_sweep(
    spec: InstanceSpec,
    alphas: list[float],
    node_cap: int = 100_000_000,
    measure_time: bool = True,
) -> list[SolveReport]:
    """Fused-GW trade-off sweep on one instance."""
    if not alphas:
        raise NonEmptyRequired("alpha grid must be non-empty")
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise ValidationError("all alpha values must lie in [0, 1]")
    if len(set(alphas)) != len(alphas):
        raise ValidationError("duplicate alpha values in grid")
    methods = [MethodSpec("fgw", {"alpha": a}) for a in alphas]
    return run_suite([spec], methods, node_cap=node_cap, measure_time=measure_time)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def emit_report(reports: list[SolveReport], format: str = "csv") -> bytes:
    """Serialize reports as csv, json or markdown."""
    if not reports:
        raise NonEmptyRequired("no reports to emit")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in reports:
            writer.writerow(
                [
                    r.instance_id,
                    r.method,
                    json.dumps(r.params, sort_keys=True),
                    _fmt(r.objective_relaxed),
                    _fmt(r.objective_binary),
                    _fmt(r.feasible),
                    _fmt(r.gap_pct),
                    _fmt(r.runtime_s),
                    r.iterations,
                    r.seed,
                    r.status,
                ]
            )
        return buf.getvalue().encode()
    if format == "json":
        doc = {
            "schema": REPORT_SCHEMA,
            "reports": [vars(r) for r in reports],
        }
        return json.dumps(doc, indent=2).encode()
    if format == "markdown":
        return _emit_markdown(reports).encode()
    raise UnknownFormat(f"unknown report format {format!r}")


def parse_reports(data: bytes) -> list[SolveReport]:
    doc = json.loads(data.decode())
    if doc.get("schema") != REPORT_SCHEMA:
        raise ValidationError(f"unsupported report schema {doc.get('schema')!r}")
    return [SolveReport(**r) for r in doc["reports"]]


def _emit_markdown(reports: list[SolveReport]) -> str:
    lines = [
        "| Instance | Method | Objective (relaxed) | Objective (binary) | Gap (%) | Runtime (s) | Status |",
        "|---|---|---|---|---|---|---|",
    ]
    # bold the best binary objective per instance
    best: dict[str, float] = {}
    for r in reports:
        if r.objective_binary is not None and r.feasible:
            cur = best.get(r.instance_id)
            if cur is None or r.objective_binary < cur:
                best[r.instance_id] = r.objective_binary
    for r in reports:
        obj_b = _fmt(r.objective_binary)
        if (
            r.objective_binary is not None
            and r.feasible
            and r.objective_binary == best.get(r.instance_id)
        ):
            obj_b = f"**{obj_b}**"
        lines.append(
            f"| {r.instance_id} | {r.method} | {_fmt(r.objective_relaxed)} "
            f"| {obj_b} | {_fmt(r.gap_pct)} | {_fmt(r.runtime_s)} | {r.status} |"
        )
    return "\n".join(lines) + "\n"
