"""Command-line interface: instance generation, solving, bench suites, sweeps.

Exit codes: 0 success, 2 validation error, 3 solver non-convergence
(best-effort output still written), 4 infeasible instance.
"""

from __future__ import annotations

import sys

import click

from .bench import (
    NAMED_SPECS,
    InstanceSpec,
    MethodSpec,
    alpha_sweep,
    emit_report,
    epsilon_sweep,
    generate_instance,
    instance_from_json,
    instance_to_json,
    run_suite,
    solve_with_method,
    SolveReport,
)
from .core import SeedPolicy
from .cqap import solve_exact_enum
from .errors import Infeasible, NoConvergence, ValidationError

EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INFEASIBLE = 4


@click.group()
def main():
    """Assignment problems as optimal transport: solvers and benchmarks."""


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@main.command()
@click.option("--spec", "spec_id", default="custom", help="Named spec S1..L5 or 'custom'.")
@click.option("--agents", type=int, default=None)
@click.option("--tasks", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def gen(spec_id, agents, tasks, seed, out):
    """Generate a random CQAP instance and write it as JSON."""
    try:
        policy = SeedPolicy(seed)
        if spec_id in NAMED_SPECS:
            spec = InstanceSpec.named(spec_id, policy)
        else:
            if agents is None or tasks is None:
                raise ValidationError("--agents and --tasks required for custom specs")
            spec = InstanceSpec(spec_id, agents, tasks, policy)
        inst = generate_instance(spec)
    except ValidationError as exc:
        _fail(EXIT_VALIDATION, exc)
    with open(out, "w") as fh:
        fh.write(instance_to_json(inst, test_id=spec.test_id, seed=seed))
    click.echo(f"wrote {spec.test_id} instance ({spec.n_agents}x{spec.n_tasks}) to {out}")


def _method_from_flags(method, trials, epsilon, alpha, ga_pop, ga_gens):
    params = {}
    if method == "gw-multi":
        params["trials"] = trials
    elif method == "egw":
        params["epsilon"] = epsilon
    elif method == "fgw":
        params["alpha"] = alpha
    elif method == "ga":
        params["population"] = ga_pop
        params["generations"] = ga_gens
    return MethodSpec(method, params)


@main.command()
@click.option("--inst", "inst_path", type=click.Path(exists=True), required=True)
@click.option(
    "--method",
    type=click.Choice(["exact", "gw", "gw-multi", "egw", "fgw", "ga"]),
    required=True,
)
@click.option("--trials", type=int, default=20)
@click.option("--epsilon", type=float, default=0.8)
@click.option("--alpha", type=float, default=0.5)
@click.option("--ga-pop", type=int, default=100)
@click.option("--ga-gens", type=int, default=200)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def solve(inst_path, method, trials, epsilon, alpha, ga_pop, ga_gens, seed, out):
    """Solve one instance with one method and write a JSON report."""
    with open(inst_path) as fh:
        inst, test_id, _ = instance_from_json(fh.read())
    spec = _method_from_flags(method, trials, epsilon, alpha, ga_pop, ga_gens)
    try:
        relaxed, binary, feasible, iterations, status, _ = solve_with_method(
            inst, spec, SeedPolicy(seed)
        )
    except ValidationError as exc:
        _fail(EXIT_VALIDATION, exc)
    except Infeasible as exc:
        _fail(EXIT_INFEASIBLE, exc)
    report = SolveReport(
        instance_id=test_id,
        method=spec.label(),
        params=dict(spec.params),
        objective_relaxed=relaxed,
        objective_binary=binary,
        feasible=feasible,
        gap_pct=None,
        runtime_s=0.0,
        iterations=iterations,
        seed=seed,
        status=status,
    )
    with open(out, "wb") as fh:
        fh.write(emit_report([report], "json"))
    click.echo(f"{spec.label()}: relaxed={relaxed} binary={binary} status={status}")
    if status == "NoConvergence":
        sys.exit(EXIT_NO_CONVERGENCE)


@main.command()
@click.option("--specs", required=True, help="Comma-separated named specs, e.g. S1,S2.")
@click.option("--methods", required=True, help="Comma-separated method names.")
@click.option("--seed", type=int, default=0)
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "markdown"]), default="csv")
@click.option("--workers", type=int, default=1)
@click.option("--no-timing", is_flag=True, help="Zero runtimes for byte-reproducible output.")
@click.option("--out", type=click.Path(), required=True)
def bench(specs, methods, seed, fmt, workers, no_timing, out):
    """Run the full suite over named specs and methods."""
    try:
        spec_list = [
            InstanceSpec.named(s.strip(), SeedPolicy(seed, stream_id=i))
            for i, s in enumerate(specs.split(","))
        ]
        method_list = [MethodSpec(m.strip()) for m in methods.split(",")]
        reports = run_suite(
            spec_list, method_list, workers=workers, measure_time=not no_timing
        )
    except (ValidationError, KeyError) as exc:
        _fail(EXIT_VALIDATION, exc)
    with open(out, "wb") as fh:
        fh.write(emit_report(reports, fmt))
    click.echo(f"wrote {len(reports)} reports to {out}")


@main.command()
@click.option("--kind", type=click.Choice(["epsilon", "alpha"]), required=True)
@click.option("--inst", "inst_path", type=click.Path(exists=True), required=True)
@click.option("--grid", required=True, help="Comma-separated values, e.g. 0.3,0.5,0.8.")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def sweep(kind, inst_path, grid, seed, out):
    """Parameter sweep (EGW epsilon or FGW alpha) on one instance."""
    with open(inst_path) as fh:
        _, test_id, inst_seed = instance_from_json(fh.read())
    values = [float(v) for v in grid.split(",")]
    # re-derive the spec so the sweep regenerates the same instance
    try:
        with open(inst_path) as fh:
            inst, _, _ = instance_from_json(fh.read())
        spec = InstanceSpec(test_id, inst.n, inst.m, SeedPolicy(inst_seed))
        if kind == "epsilon":
            reports = epsilon_sweep(spec, values)
        else:
            reports = alpha_sweep(spec, values)
    except ValidationError as exc:
        _fail(EXIT_VALIDATION, exc)
    with open(out, "wb") as fh:
        fh.write(emit_report(reports, "csv"))
    click.echo(f"wrote {len(reports)} sweep rows to {out}")


@main.command()
@click.option("--inst", "inst_path", type=click.Path(exists=True), required=True)
@click.option("--node-cap", type=int, default=100_000_000)
def oracle(inst_path, node_cap):
    """Exact enumeration oracle for one instance."""
    with open(inst_path) as fh:
        inst, _, _ = instance_from_json(fh.read())
    try:
        x, obj, proven = solve_exact_enum(inst, node_cap=node_cap)
    except Infeasible as exc:
        _fail(EXIT_INFEASIBLE, exc)
    except ValueError as exc:
        _fail(EXIT_VALIDATION, exc)
    click.echo(f"objective={obj!r} proven={proven}")
    for row in x.x:
        click.echo(" ".join(str(int(v)) for v in row))
    if not proven:
        sys.exit(EXIT_NO_CONVERGENCE)


if __name__ == "__main__":
    main()
