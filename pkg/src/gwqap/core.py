"""Shared domain types, validation and the deterministic RNG policy.

All arithmetic is float64. Tolerances are fixed module-wide:
histogram mass 1e-12, coupling marginals 1e-9 (post-solve),
matrix symmetry 1e-12, polytope projection delta 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZero,
    DimensionMismatch,
    NegativeWeight,
    NonSquare,
    NotPSD,
    SumNotOne,
)

HIST_TOL = 1e-12
MARGINAL_TOL = 1e-9
SYMMETRY_TOL = 1e-12
PROJECTION_DELTA = 1e-12


def _as_float_array(x, ndim):
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != ndim:
        raise DimensionMismatch(f"expected {ndim}-d array, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Histogram:
    """Nonnegative weight vector summing to 1."""

    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        return isinstance(other, Histogram) and np.array_equal(
            self.weights, other.weights
        )


def validate_histogram(weights) -> Histogram:
    """Check nonnegativity and unit mass; never renormalizes.

    Raises NegativeWeight or SumNotOne on violation.
    """
    w = _as_float_array(weights, 1)
    if w.shape[0] < 1:
        raise DimensionMismatch("histogram needs at least one entry")
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight at index {int(np.argmin(w))}")
    s = float(w.sum())
    if abs(s - 1.0) > HIST_TOL:
        raise SumNotOne(f"weights sum to {s!r}, expected 1 within {HIST_TOL}")
    return Histogram(w.copy())


def normalize_masses(raw) -> Histogram:
    """Turn a nonnegative mass vector (e.g. capacities) into a Histogram."""
    r = _as_float_array(raw, 1)
    if np.any(r < 0):
        raise NegativeWeight("masses must be nonnegative")
    s = float(r.sum())
    if s <= 0:
        raise AllZero("cannot normalize an all-zero mass vector")
    w = r / s
    # kill residual roundoff so downstream validation passes exactly
    w = w / w.sum()
    return Histogram(w)


@dataclass(frozen=True)
class Coupling:
    """Transport plan with its declared marginals."""

    plan: np.ndarray
    row_marginal: Histogram
    col_marginal: Histogram

    @property
    def shape(self):
        return self.plan.shape

    def __post_init__(self):
        n, m = self.plan.shape
        if self.row_marginal.n != n or self.col_marginal.n != m:
            raise DimensionMismatch(
                f"plan {self.plan.shape} vs marginals "
                f"({self.row_marginal.n}, {self.col_marginal.n})"
            )


def marginal_violation(coupling: Coupling) -> tuple[float, float]:
    """Inf-norm deviation of the plan's row/column sums from its marginals."""
    row_err = float(
        np.abs(coupling.plan.sum(axis=1) - coupling.row_marginal.weights).max()
    )
    col_err = float(
        np.abs(coupling.plan.sum(axis=0) - coupling.col_marginal.weights).max()
    )
    return row_err, col_err


@dataclass(frozen=True)
class SymCostMatrix:
    """Square symmetric structure matrix (pairwise dissimilarities)."""

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def validate_sym_cost(entries) -> SymCostMatrix:
    e = _as_float_array(entries, 2)
    if e.shape[0] != e.shape[1]:
        raise NonSquare(f"structure matrix must be square, got {e.shape}")
    if np.abs(e - e.T).max(initial=0.0) > SYMMETRY_TOL:
        raise DimensionMismatch("structure matrix is not symmetric")
    return SymCostMatrix(e.copy())


@dataclass(frozen=True)
class MmSpace:
    """Metric-measure space: structure matrix, mass histogram, optional features."""

    structure: SymCostMatrix
    mass: Histogram
    features: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.mass.n

    def __post_init__(self):
        if self.structure.n != self.mass.n:
            raise DimensionMismatch(
                f"structure is {self.structure.n}x{self.structure.n} "
                f"but mass has {self.mass.n} atoms"
            )
        if self.features is not None and self.features.shape[0] != self.mass.n:
            raise DimensionMismatch("feature row count must match mass length")


@dataclass(frozen=True)
class GaussianMeasure:
    """Gaussian measure given by mean vector and PSD covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        cov = self.covariance
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise NonSquare("covariance must be square")
        if cov.shape[0] != self.mean.shape[0]:
            raise DimensionMismatch("mean / covariance dimension mismatch")
        if np.abs(cov - cov.T).max(initial=0.0) > SYMMETRY_TOL:
            raise NotPSD("covariance is not symmetric")
        if np.linalg.eigvalsh(cov).min() < -1e-12:
            raise NotPSD("covariance has a negative eigenvalue")


def gaussian_measure(mean, covariance) -> GaussianMeasure:
    return GaussianMeasure(
        _as_float_array(mean, 1), _as_float_array(covariance, 2)
    )


@dataclass(frozen=True)
class SeedPolicy:
    """Deterministic per-stream RNG derivation.

    The same (master_seed, stream_id) pair yields an identical stream in any
    process or thread; derived streams for trial t use stream_id offset by t.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_id,)
        )
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, offset: int) -> "SeedPolicy":
        return SeedPolicy(self.master_seed, self.stream_id + offset)


def product_coupling(h: Histogram, g: Histogram) -> Coupling:
    """Independence coupling h (x) g, the default solver initialization."""
    return Coupling(np.outer(h.weights, g.weights), h, g)
