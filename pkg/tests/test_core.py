import numpy as np
import pytest
from hypothesis import given, strategies as st

from gwqap import (
    Coupling,
    Histogram,
    SeedPolicy,
    marginal_violation,
    normalize_masses,
    product_coupling,
    validate_histogram,
)
from gwqap.errors import AllZero, NegativeWeight, SumNotOne


class TestValidateHistogram:
    def test_uniform_ok(self):
        h = validate_histogram([0.5, 0.5])
        assert np.array_equal(h.weights, [0.5, 0.5])

    def test_single_atom_ok(self):
        assert validate_histogram([1.0]).n == 1

    def test_sum_not_one(self):
        with pytest.raises(SumNotOne):
            validate_histogram([0.6, 0.6])

    def test_negative_weight(self):
        with pytest.raises(NegativeWeight):
            validate_histogram([1.5, -0.5])

    def test_never_renormalizes(self):
        with pytest.raises(SumNotOne):
            validate_histogram([0.3, 0.3])

    @given(st.lists(st.floats(0.01, 10.0), min_size=1, max_size=20))
    def test_idempotent_on_valid(self, raw):
        h = normalize_masses(np.array(raw))
        again = validate_histogram(h.weights)
        assert again == h


class TestNormalizeMasses:
    def test_equal_masses(self):
        assert np.array_equal(normalize_masses([2, 2]).weights, [0.5, 0.5])

    def test_arithmetic(self):
        h = normalize_masses([1, 2, 3])
        assert np.allclose(h.weights, [1 / 6, 2 / 6, 3 / 6])
        assert h.weights.sum() == 1.0

    def test_all_zero(self):
        with pytest.raises(AllZero):
            normalize_masses([0, 0])


class TestMarginalViolation:
    def test_product_coupling_exact(self):
        h = normalize_masses([1, 2, 3])
        g = normalize_masses([4, 1])
        assert marginal_violation(product_coupling(h, g)) == (0.0, 0.0)

    def test_single_entry_perturbation(self):
        h = validate_histogram([0.5, 0.5])
        plan = np.outer(h.weights, h.weights)
        plan[0, 0] += 1e-3
        row, col = marginal_violation(Coupling(plan, h, h))
        assert row == pytest.approx(1e-3)
        assert col == pytest.approx(1e-3)

    def test_one_by_one(self):
        h = validate_histogram([1.0])
        assert marginal_violation(Coupling(np.array([[1.0]]), h, h)) == (0.0, 0.0)


class TestSeedPolicy:
    def test_identical_streams(self):
        a = SeedPolicy(123, 7).generator().random(100)
        b = SeedPolicy(123, 7).generator().random(100)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = SeedPolicy(123, 0).generator().random(10)
        b = SeedPolicy(123, 1).generator().random(10)
        assert not np.array_equal(a, b)

    def test_substream_matches_direct_construction(self):
        assert SeedPolicy(5, 2).substream(3) == SeedPolicy(5, 5)
