"""Exact and entropic linear OT solvers plus the Gaussian W2 closed form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog

from .core import Coupling, Histogram
from .errors import (
    DimensionMismatch,
    NoConvergence,
    NonSquare,
    NotPSD,
    NumericalUnderflow,
)

# switch to log-domain scaling once exp(-C/eps) risks underflow
_LOG_DOMAIN_RATIO = 500.0


@dataclass(frozen=True)
class Assignment:
    """Permutation sigma mapping source index i to target index sigma[i]."""

    perm: np.ndarray


def solve_lap(cost) -> tuple[Assignment, float]:
    """Minimum-cost bijection for a square cost matrix, O(n^3)."""
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise NonSquare(f"LAP needs a square matrix, got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise DimensionMismatch("LAP cost must be finite")
    rows, cols = linear_sum_assignment(c)
    perm = np.empty(c.shape[0], dtype=np.intp)
    perm[rows] = cols
    return Assignment(perm), float(c[rows, cols].sum())


def solve_exact_ot(cost, h: Histogram, g: Histogram) -> tuple[Coupling, float]:
    """Exact vertex solution of the discrete Kantorovich problem.

    Solves min <C, T> over the transportation polytope with the given
    marginals and returns a basic optimal solution (at most n+m-1 support
    entries), as required by the conditional-gradient callers.
    """
    c = np.asarray(cost, dtype=np.float64)
    n, m = h.n, g.n
    if c.shape != (n, m):
        raise DimensionMismatch(
            f"cost is {c.shape}, marginals need ({n}, {m})"
        )

    # zero-mass atoms get zero rows/columns; solve on the positive support
    ri = np.flatnonzero(h.weights > 0)
    cj = np.flatnonzero(g.weights > 0)
    sub = c[np.ix_(ri, cj)]
    hs, gs = h.weights[ri], g.weights[cj]

    plan_sub = _transportation_lp(sub, hs, gs)
    plan = np.zeros((n, m))
    plan[np.ix_(ri, cj)] = plan_sub
    objective = float((c * plan).sum())
    return Coupling(plan, h, g), objective


def _transportation_lp(c, h, g):
    n, m = c.shape
    if n == 1:
        return g[None, :].copy()
    if m == 1:
        return h[:, None].copy()
    A = sparse.vstack(
        [
            sparse.kron(sparse.eye(n), np.ones((1, m)), format="csr"),
            sparse.kron(np.ones((1, n)), sparse.eye(m), format="csr"),
        ],
        format="csr",
    )
    b = np.concatenate([h, g])
    res = linprog(c.ravel(), A_eq=A, b_eq=b, method="highs-ds")
    if res.status != 0:
        raise NoConvergence(f"transportation LP failed: {res.message}")
    plan = res.x.reshape(n, m)
    np.clip(plan, 0.0, None, out=plan)
    return plan


def sinkhorn(
    cost,
    h: Histogram,
    g: Histogram,
    epsilon: float,
    max_iter: int = 10_000,
    tol: float = 1e-9,
) -> tuple[Coupling, float, int, bool]:
    """Entropic OT via Sinkhorn scaling.

    Returns (coupling, objective, iterations, converged) where the objective
    is the unregularized transport cost <C, pi> of the returned plan. Runs in
    log-domain when max|C|/epsilon is large enough to underflow the kernel.
    """
    c = np.asarray(cost, dtype=np.float64)
    n, m = h.n, g.n
    if c.shape != (n, m):
        raise DimensionMismatch(f"cost is {c.shape}, marginals need ({n}, {m})")
    if epsilon <= 0 or tol <= 0:
        raise ValueError("epsilon and tol must be positive")

    hw, gw = h.weights, g.weights
    log_domain = np.abs(c).max(initial=0.0) / epsilon > _LOG_DOMAIN_RATIO
    if log_domain:
        plan, iters, converged = _sinkhorn_log(c, hw, gw, epsilon, max_iter, tol)
    else:
        plan, iters, converged = _sinkhorn_scaling(c, hw, gw, epsilon, max_iter, tol)

    objective = float((c * plan).sum())
    return Coupling(plan, h, g), objective, iters, converged


def _sinkhorn_scaling(c, h, g, epsilon, max_iter, tol):
    K = np.exp(-c / epsilon)
    pos_r = h > 0
    pos_c = g > 0
    if K[np.ix_(pos_r, pos_c)].max(initial=0.0) == 0.0:
        raise NumericalUnderflow(
            "Gibbs kernel underflowed to zero; increase epsilon"
        )
    u = np.ones_like(h)
    v = np.ones_like(g)
    for it in range(1, max_iter + 1):
        Kv = K @ v
        u = np.divide(h, Kv, out=np.zeros_like(h), where=Kv > 0)
        Ktu = K.T @ u
        v = np.divide(g, Ktu, out=np.zeros_like(g), where=Ktu > 0)
        plan = u[:, None] * K * v[None, :]
        row_err = np.abs(plan.sum(axis=1) - h).max()
        col_err = np.abs(plan.sum(axis=0) - g).max()
        if max(row_err, col_err) < tol:
            return plan, it, True
        if not np.all(np.isfinite(plan)):
            raise NumericalUnderflow("Sinkhorn scaling diverged; increase epsilon")
    return plan, max_iter, False


def _sinkhorn_log(c, h, g, epsilon, max_iter, tol):
    with np.errstate(divide="ignore"):
        log_h = np.log(h)
        log_g = np.log(g)
    f = np.zeros_like(h)
    gg = np.zeros_like(g)
    M = -c / epsilon
    for it in range(1, max_iter + 1):
        f = epsilon * log_h - epsilon * _logsumexp_rows(M + gg[None, :] / epsilon)
        gg = epsilon * log_g - epsilon * _logsumexp_rows(
            (M + f[:, None] / epsilon).T
        )
        log_plan = M + f[:, None] / epsilon + gg[None, :] / epsilon
        plan = np.exp(log_plan)
        plan[h <= 0, :] = 0.0
        plan[:, g <= 0] = 0.0
        row_err = np.abs(plan.sum(axis=1) - h).max()
        col_err = np.abs(plan.sum(axis=0) - g).max()
        if max(row_err, col_err) < tol:
            return plan, it, True
    return plan, max_iter, False


def _logsumexp_rows(M):
    mx = M.max(axis=1, keepdims=True)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    return (mx + np.log(np.exp(M - mx).sum(axis=1, keepdims=True)))[:, 0]


def sinkhorn_project(
    raw,
    h: Histogram,
    g: Histogram,
    delta: float = 1e-12,
    max_sweeps: int = 10_000,
) -> Coupling:
    """Project a strictly positive matrix onto the coupling polytope.

    Alternates row then column rescaling until both marginal inf-errors drop
    below delta. Used to turn Uniform(0,1)+jitter samples into valid random
    initial couplings.
    """
    G = np.asarray(raw, dtype=np.float64).copy()
    if G.shape != (h.n, g.n):
        raise DimensionMismatch(f"raw is {G.shape}, marginals need ({h.n}, {g.n})")
    if np.any(G <= 0):
        raise ValueError("all entries of raw must be strictly positive")
    hw, gw = h.weights, g.weights
    for _ in range(max_sweeps):
        G *= (hw / G.sum(axis=1))[:, None]
        G *= (gw / G.sum(axis=0))[None, :]
        row_err = np.abs(G.sum(axis=1) - hw).max()
        col_err = np.abs(G.sum(axis=0) - gw).max()
        if row_err < delta and col_err < delta:
            return Coupling(G, h, g)
    raise NoConvergence(
        f"projection did not reach delta={delta} in {max_sweeps} sweeps",
        best=Coupling(G, h, g),
    )


def _sqrtm_psd(a):
    vals, vecs = np.linalg.eigh(a)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def w2_gaussian(a, b) -> float:
    """Squared 2-Wasserstein distance between Gaussian measures.

    ||m_a - m_b||^2 plus the squared Bures distance between the covariances,
    computed via symmetric eigendecompositions with eigenvalue clamping.
    """
    for meas in (a, b):
        if np.linalg.eigvalsh(meas.covariance).min() < -1e-12:
            raise NotPSD("covariance has a negative eigenvalue")
    mean_term = float(np.sum((a.mean - b.mean) ** 2))
    ra = _sqrtm_psd(a.covariance)
    cross = _sqrtm_psd(ra @ b.covariance @ ra)
    bures_sq = float(np.trace(a.covariance) + np.trace(b.covariance) - 2.0 * np.trace(cross))
    return mean_term + max(bures_sq, 0.0)
