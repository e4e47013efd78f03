import itertools

import numpy as np
import pytest

from gwqap import (
    gaussian_measure,
    normalize_masses,
    marginal_violation,
    sinkhorn,
    sinkhorn_project,
    solve_exact_ot,
    solve_lap,
    validate_histogram,
    w2_gaussian,
)
from gwqap.errors import DimensionMismatch, NoConvergence, NonSquare, NotPSD

UNIF2 = validate_histogram([0.5, 0.5])


def brute_force_lap(cost):
    """Factorial enumeration oracle for the assignment problem."""
    c = np.asarray(cost, dtype=float)
    n = c.shape[0]
    return min(
        sum(c[i, p[i]] for i in range(n))
        for p in itertools.permutations(range(n))
    )


class TestSolveLap:
    def test_zero_diagonal_identity(self):
        c = np.ones((4, 4)) + 1.0
        np.fill_diagonal(c, 0.0)
        a, obj = solve_lap(c)
        assert obj == 0.0
        assert np.array_equal(a.perm, np.arange(4))

    def test_two_by_two(self):
        a, obj = solve_lap([[4, 1], [2, 3]])
        assert obj == 3.0
        assert list(a.perm) == [1, 0]

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        c = rng.integers(0, 20, size=(3, 3)).astype(float)
        _, obj = solve_lap(c)
        assert obj == brute_force_lap(c)

    def test_non_square(self):
        with pytest.raises(NonSquare):
            solve_lap(np.zeros((2, 3)))


class TestSolveExactOt:
    def test_zero_cost(self):
        _, obj = solve_exact_ot(np.zeros((3, 2)), normalize_masses([1, 1, 1]), UNIF2)
        assert obj == 0.0

    def test_zero_cost_diagonal(self):
        coupling, obj = solve_exact_ot([[0, 1], [1, 0]], UNIF2, UNIF2)
        assert obj == 0.0
        assert np.allclose(coupling.plan, np.diag([0.5, 0.5]))

    def test_antidiagonal_optimum(self):
        # both permutation vertices enumerated: 0.5*(1+2)=1.5 < 0.5*(4+3)=3.5
        coupling, obj = solve_exact_ot([[4, 1], [2, 3]], UNIF2, UNIF2)
        assert obj == pytest.approx(1.5, abs=1e-12)
        assert abs(obj - float((np.asarray([[4, 1], [2, 3]]) * coupling.plan).sum())) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve_exact_ot(np.zeros((3, 3)), UNIF2, UNIF2)

    @pytest.mark.parametrize("seed", range(5))
    def test_uniform_marginals_vertex_is_scaled_permutation(self, seed):
        rng = np.random.default_rng(seed)
        n = 5
        c = rng.random((n, n))
        h = normalize_masses(np.ones(n))
        coupling, obj = solve_exact_ot(c, h, h)
        scaled = coupling.plan * n
        assert np.allclose(np.sort(scaled.ravel()), [0.0] * (n * n - n) + [1.0] * n)
        _, lap_obj = solve_lap(c)
        assert obj == pytest.approx(lap_obj / n, rel=1e-12)

    def test_zero_mass_atoms_forced_to_zero(self):
        h = validate_histogram([0.0, 1.0])
        g = validate_histogram([0.5, 0.5])
        coupling, _ = solve_exact_ot(np.ones((2, 2)), h, g)
        assert np.all(coupling.plan[0] == 0.0)
        assert marginal_violation(coupling) == (0.0, 0.0)


class TestSinkhorn:
    def test_zero_cost_gives_product(self):
        h = normalize_masses([1, 2, 3])
        g = normalize_masses([2, 1])
        coupling, obj, _, converged = sinkhorn(np.zeros((3, 2)), h, g, 1.0)
        assert converged
        assert np.allclose(coupling.plan, np.outer(h.weights, g.weights), atol=1e-12)
        assert obj == 0.0

    def test_one_by_one(self):
        h = validate_histogram([1.0])
        coupling, obj, _, _ = sinkhorn(np.array([[3.5]]), h, h, 0.5)
        assert np.allclose(coupling.plan, [[1.0]])
        assert obj == pytest.approx(3.5)

    def test_small_epsilon_approaches_exact(self):
        _, obj, _, converged = sinkhorn(
            np.array([[4.0, 1.0], [2.0, 3.0]]), UNIF2, UNIF2, epsilon=0.01
        )
        assert converged
        assert obj == pytest.approx(1.5, abs=1e-3)

    def test_log_domain_path(self):
        # max|C|/eps = 2000 forces the log-domain branch
        c = np.array([[4.0, 1.0], [2.0, 3.0]]) * 5.0
        coupling, obj, _, converged = sinkhorn(c, UNIF2, UNIF2, epsilon=0.01)
        assert converged
        row, col = marginal_violation(coupling)
        assert max(row, col) < 1e-9
        assert obj == pytest.approx(7.5, abs=1e-3)

    def test_epsilon_consistency_on_random_instances(self):
        rng = np.random.default_rng(0)
        for _ in range(3):
            c = rng.random((10, 10)) * 2.0
            h = normalize_masses(rng.random(10) + 0.1)
            g = normalize_masses(rng.random(10) + 0.1)
            _, exact = solve_exact_ot(c, h, g)
            objs = [sinkhorn(c, h, g, e)[1] for e in (1.0, 0.5, 0.1, 0.01)]
            assert all(b <= a + 1e-9 for a, b in zip(objs, objs[1:]))
            assert objs[-1] == pytest.approx(exact, rel=1e-3)


class TestSinkhornProject:
    def test_product_is_fixed_point(self):
        h = normalize_masses([1, 3])
        g = normalize_masses([2, 2])
        raw = np.outer(h.weights, g.weights)
        coupling = sinkhorn_project(raw, h, g, delta=1e-12)
        assert np.allclose(coupling.plan, raw, atol=1e-15)

    def test_all_ones_symmetry(self):
        coupling = sinkhorn_project(np.ones((2, 2)), UNIF2, UNIF2)
        assert np.allclose(coupling.plan, 0.25)

    def test_random_raw_reaches_delta(self):
        rng = np.random.default_rng(7)
        raw = rng.uniform(0, 1, size=(6, 5)) + 1e-6
        h = normalize_masses(rng.random(6) + 0.2)
        g = normalize_masses(rng.random(5) + 0.2)
        coupling = sinkhorn_project(raw, h, g, delta=1e-12)
        row, col = marginal_violation(coupling)
        assert max(row, col) <= 1e-12

    def test_sweep_cap(self):
        rng = np.random.default_rng(0)
        raw = rng.uniform(0, 1, size=(4, 4)) + 1e-6
        h = normalize_masses(rng.random(4) + 0.2)
        with pytest.raises(NoConvergence):
            sinkhorn_project(raw, h, h, delta=1e-12, max_sweeps=1)


class TestW2Gaussian:
    def test_identity_case(self):
        a = gaussian_measure([1.0, 2.0], [[2.0, 0.3], [0.3, 1.0]])
        assert w2_gaussian(a, a) == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_commuting_frobenius(self):
        # trace(4 + 1 - 2*2) = 1 = (2 - 1)^2
        a = gaussian_measure([0.0], [[4.0]])
        b = gaussian_measure([0.0], [[1.0]])
        assert w2_gaussian(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_pure_mean_shift(self):
        cov = [[1.0, 0.0], [0.0, 1.0]]
        a = gaussian_measure([0.0, 0.0], cov)
        b = gaussian_measure([3.0, 0.0], cov)
        assert w2_gaussian(a, b) == pytest.approx(9.0, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        m = rng.random((3, 3))
        a = gaussian_measure(rng.random(3), m @ m.T)
        m2 = rng.random((3, 3))
        b = gaussian_measure(rng.random(3), m2 @ m2.T)
        assert w2_gaussian(a, b) == pytest.approx(w2_gaussian(b, a), abs=1e-10)

    def test_not_psd(self):
        with pytest.raises(NotPSD):
            gaussian_measure([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
