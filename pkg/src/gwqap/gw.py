"""Gromov-Wasserstein family: loss, gradient, conditional-gradient solver,
multi-initialization wrapper, entropic and fused variants.

The squared-loss objective over couplings pi is

    L(pi) = sum_{i,j,k,l} (C1[i,j] - C2[k,l])^2 pi[i,k] pi[j,l]

evaluated through the contraction decomposition (never the 4-D tensor), so
each loss/gradient costs O(n^2 m + n m^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    Coupling,
    MmSpace,
    SeedPolicy,
    marginal_violation,
    product_coupling,
)
from .errors import (
    AlphaOutOfRange,
    DimensionMismatch,
    InvalidInit,
    NumericalUnderflow,
)
from .linear_ot import sinkhorn, sinkhorn_project, solve_exact_ot


@dataclass(frozen=True)
class GwProblem:
    source: MmSpace
    target: MmSpace
    loss_exponent: int = 2

    def __post_init__(self):
        if self.loss_exponent != 2:
            raise ValueError("only squared loss (exponent 2) is supported")

    @property
    def shape(self):
        return self.source.n, self.target.n

    def default_init(self) -> Coupling:
        return product_coupling(self.source.mass, self.target.mass)


@dataclass(frozen=True)
class FgwProblem:
    gw: GwProblem
    feature_cost: np.ndarray
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise AlphaOutOfRange(f"alpha={self.alpha} outside [0, 1]")
        if self.feature_cost.shape != self.gw.shape:
            raise DimensionMismatch(
                f"feature cost is {self.feature_cost.shape}, "
                f"problem is {self.gw.shape}"
            )


@dataclass(frozen=True)
class MultiInitConfig:
    trials: int = 20
    delta: float = 1e-12
    jitter: float = 1e-6
    seed: SeedPolicy = field(default_factory=lambda: SeedPolicy(0))

    def __post_init__(self):
        if self.trials < 0 or self.delta <= 0 or self.jitter <= 0:
            raise ValueError("trials >= 0, delta > 0 and jitter > 0 required")


@dataclass(frozen=True)
class GwSolution:
    coupling: Coupling
    objective: float
    converged: bool
    iterations: int
    trial_of_origin: int = -1
    objective_history: tuple[float, ...] = ()


def _check_plan(problem: GwProblem, plan) -> np.ndarray:
    p = plan.plan if isinstance(plan, Coupling) else np.asarray(plan, float)
    if p.shape != problem.shape:
        raise DimensionMismatch(
            f"plan is {p.shape}, problem is {problem.shape}"
        )
    return p


def _cross_term(C1, C2, X):
    # E(X)[i,k] = sum_{j,l} (C1[i,j] - C2[k,l])^2 X[j,l]
    rX = X.sum(axis=1)
    cX = X.sum(axis=0)
    return (
        (C1**2) @ rX[:, None]
        + (cX @ (C2**2).T)[None, :]
        - 2.0 * C1 @ X @ C2.T
    )


def _bilinear(C1, C2, X, Y):
    # B(X, Y) = sum (C1[i,j] - C2[k,l])^2 X[i,k] Y[j,l]
    return float((_cross_term(C1, C2, Y) * X).sum())


def gw_loss(problem: GwProblem, plan) -> float:
    """Quadratic GW objective of a plan, via the contraction decomposition."""
    p = _check_plan(problem, plan)
    C1 = problem.source.structure.entries
    C2 = problem.target.structure.entries
    return _bilinear(C1, C2, p, p)


def gw_gradient(problem: GwProblem, plan) -> np.ndarray:
    """Euclidean gradient of gw_loss at the plan (symmetric structures)."""
    p = _check_plan(problem, plan)
    C1 = problem.source.structure.entries
    C2 = problem.target.structure.entries
    return 2.0 * _cross_term(C1, C2, p)


def _fw_solve(
    problem: GwProblem,
    linear_cost,
    alpha: float,
    init: Coupling,
    max_iter: int,
    tol: float,
) -> tuple[Coupling, list[float], bool, int]:
    """Conditional gradient on alpha*GW + (1-alpha)*<M, pi>.

    Each iteration linearizes at the current plan, finds the optimal polytope
    vertex by exact OT, and takes the closed-form quadratic line-search step
    clamped to [0, 1].
    """
    C1 = problem.source.structure.entries
    C2 = problem.target.structure.entries
    h = problem.source.mass
    g = problem.target.mass
    M = linear_cost

    def objective(p):
        val = alpha * _bilinear(C1, C2, p, p)
        if alpha < 1.0:
            val += (1.0 - alpha) * float((M * p).sum())
        return val

    pi = init.plan.copy()
    history = [objective(pi)]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        grad = alpha * 2.0 * _cross_term(C1, C2, pi)
        if alpha < 1.0:
            grad = grad + (1.0 - alpha) * M
        vertex, _ = solve_exact_ot(grad, h, g)
        delta = vertex.plan - pi
        # 1-D restriction: a t^2 + b t with the quadratic from the GW part
        a = alpha * _bilinear(C1, C2, delta, delta)
        b = alpha * 2.0 * _bilinear(C1, C2, pi, delta)
        if alpha < 1.0:
            b += (1.0 - alpha) * float((M * delta).sum())
        if a > 0:
            t = min(1.0, max(0.0, -b / (2.0 * a)))
        else:
            t = 1.0 if b <= 0 else 0.0
        pi = pi + t * delta
        f_new = objective(pi)
        history.append(f_new)
        f_prev = history[-2]
        denom = max(abs(f_prev), 1.0)
        if abs(f_prev - f_new) / denom < tol:
            converged = True
            break
    return Coupling(pi, h, g), history, converged, iterations


def solve_gw(
    problem: GwProblem,
    init: Coupling | None = None,
    max_iter: int = 1000,
    tol: float = 1e-9,
) -> GwSolution:
    """Conditional-gradient GW solver; returns a stationary point.

    The default initialization is the product coupling of the marginals.
    """
    if init is None:
        init = problem.default_init()
    else:
        if init.shape != problem.shape:
            raise InvalidInit(f"init shape {init.shape} != {problem.shape}")
        row_err, col_err = marginal_violation(
            Coupling(init.plan, problem.source.mass, problem.target.mass)
        )
        if max(row_err, col_err) > 1e-9:
            raise InvalidInit(
                f"init marginals off by ({row_err:.2e}, {col_err:.2e})"
            )
    coupling, history, converged, iters = _fw_solve(
        problem, None, 1.0, init, max_iter, tol
    )
    return GwSolution(
        coupling=coupling,
        objective=history[-1],
        converged=converged,
        iterations=iters,
        objective_history=tuple(history),
    )


def solve_fgw(
    problem: FgwProblem,
    init: Coupling | None = None,
    max_iter: int = 1000,
    tol: float = 1e-9,
) -> GwSolution:
    """Fused GW: conditional gradient on the alpha-blended objective."""
    gwp = problem.gw
    if init is None:
        init = gwp.default_init()
    coupling, history, converged, iters = _fw_solve(
        gwp, problem.feature_cost, problem.alpha, init, max_iter, tol
    )
    return GwSolution(
        coupling=coupling,
        objective=history[-1],
        converged=converged,
        iterations=iters,
        objective_history=tuple(history),
    )


def solve_gw_multi_init(
    problem: GwProblem,
    config: MultiInitConfig,
    max_iter: int = 1000,
    tol: float = 1e-9,
) -> GwSolution:
    """Multi-start GW: default init plus T projected random couplings.

    Random trial t draws Uniform(0,1) + jitter from its own derived RNG
    stream, projects onto the coupling polytope by alternating rescaling
    (tolerance delta), solves, and the lowest-objective solution wins.
    Ties break on the earliest trial (default init first).
    """
    n, m = problem.shape
    h, g = problem.source.mass, problem.target.mass

    best = solve_gw(problem, None, max_iter, tol)
    for t in range(1, config.trials + 1):
        rng = config.seed.substream(t).generator()
        raw = rng.uniform(0.0, 1.0, size=(n, m)) + config.jitter
        try:
            init = sinkhorn_project(raw, h, g, delta=config.delta)
            sol = solve_gw(problem, init, max_iter, tol)
        except Exception:  # noqa: BLE001 - a failed trial never aborts the sweep
            continue
        if sol.objective < best.objective:
            best = GwSolution(
                coupling=sol.coupling,
                objective=sol.objective,
                converged=sol.converged,
                iterations=sol.iterations,
                trial_of_origin=t,
                objective_history=sol.objective_history,
            )
    return best


def solve_entropic_gw(
    problem: GwProblem,
    epsilon: float,
    max_outer: int = 200,
    max_sinkhorn: int = 1000,
    tol: float = 1e-7,
) -> GwSolution:
    """Entropic GW: alternate GW gradient with a Sinkhorn subproblem.

    Each outer step treats the current gradient as a linear cost and solves
    entropic OT with regularization epsilon; stops when the coupling's
    inf-norm change drops below tol. Reported objective is the unregularized
    GW loss of the returned coupling.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    h, g = problem.source.mass, problem.target.mass
    pi = problem.default_init().plan
    converged = False
    iterations = 0
    for iterations in range(1, max_outer + 1):
        grad = gw_gradient(problem, pi)
        try:
            coupling, _, _, _ = sinkhorn(
                grad, h, g, epsilon, max_iter=max_sinkhorn, tol=1e-9
            )
        except NumericalUnderflow:
            raise
        new_pi = coupling.plan
        change = float(np.abs(new_pi - pi).max())
        pi = new_pi
        if change < tol:
            converged = True
            break
    coupling = Coupling(pi, h, g)
    return GwSolution(
        coupling=coupling,
        objective=gw_loss(problem, coupling),
        converged=converged,
        iterations=iterations,
    )
