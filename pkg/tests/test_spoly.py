"""Polynomial symbolic sets: exact ring algebra, sound interval bounding.

Ring operations must be EXACT (pointwise equal to the concrete polynomial
combination); only bounding and monomial reduction may over-approximate.
"""

import numpy as np
import pytest

from symreach import Interval, SPolynotope, SymbolProvider
from symreach import spoly as sp
from symreach import szono as sz
from symreach.errors import DimensionError

from conftest import sample_sigma


def poly(c, G, ids, E):
    return SPolynotope(np.asarray(c, float), np.asarray(G, float), ids, np.asarray(E, int))


def grid_range(P, m=200_001):
    """Dense oracle for 1-symbol, 1-D polynotopes."""
    assert P.ids.size <= 1 and P.dim == 1
    s = np.linspace(-1.0, 1.0, m).reshape(1, -1)
    vals = sp.evaluate(P, s if P.ids.size else np.zeros((0, m)))
    return float(vals.min()), float(vals.max())


class TestCanonicalForm:
    def test_duplicate_monomials_summed(self):
        P = poly([0.0], [[1.0, 2.0]], [1], [[1, 1]])
        assert P.n_monomials == 1
        np.testing.assert_allclose(P.G, [[3.0]])

    def test_constant_column_folds_into_center(self):
        P = poly([1.0], [[2.0, 0.5]], [1], [[1, 0]])
        np.testing.assert_allclose(P.c, [1.5])
        assert P.n_monomials == 1

    def test_zero_coefficient_column_dropped(self):
        P = poly([0.0], [[1.0, 0.0]], [1], [[1, 2]])
        assert P.n_monomials == 1

    def test_unused_symbol_row_dropped(self):
        P = poly([0.0], [[1.0]], [1, 2], [[1], [0]])
        assert P.ids.tolist() == [1]

    def test_duplicate_symbol_rows_merge_exponents(self):
        P = poly([0.0], [[1.0]], [3, 3], [[1], [1]])
        assert P.ids.tolist() == [3]
        assert P.E.tolist() == [[2]]

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            q, p = int(rng.integers(1, 4)), int(rng.integers(1, 6))
            P = poly(
                rng.normal(size=2),
                rng.normal(size=(2, p)),
                rng.choice(20, size=q, replace=False),
                rng.integers(0, 3, size=(q, p)),
            )
            Q = poly(P.c, P.G, P.ids, P.E)
            np.testing.assert_array_equal(P.E, Q.E)
            np.testing.assert_allclose(P.G, Q.G)
            assert P.ids.tolist() == Q.ids.tolist()


class TestFromToSZonotope:
    def test_point(self):
        P = sp.from_szonotope(sz.SZonotope([2.0]))
        assert P.n_monomials == 0 and P.ids.size == 0

    def test_single_symbol(self):
        P = sp.from_szonotope(sz.SZonotope([0.0], [[1.0]], [1]))
        assert P.E.tolist() == [[1]]

    def test_round_trip_degree_one(self):
        X = sz.SZonotope([1.0, -1.0], [[0.5, 0.0], [0.2, 0.3]], [4, 9])
        back = sp.to_szonotope(sp.from_szonotope(X))
        np.testing.assert_allclose(back.c, X.c)
        for sid in (4, 9):
            np.testing.assert_allclose(back.column(sid), X.column(sid))

    def test_degree_two_refuses_round_trip(self):
        P = poly([0.0], [[1.0]], [1], [[2]])
        with pytest.raises(ValueError):
            sp.to_szonotope(P)


class TestRingOps:
    def test_monomial_cancellation(self):
        A = poly([0.0], [[1.0, 1.0]], [1], [[1, 2]])
        B = poly([0.0], [[-1.0]], [1], [[2]])
        C = sp.add(A, B)
        assert C.n_monomials == 1
        assert C.E.tolist() == [[1]]

    def test_disjoint_add_concatenates(self):
        A = poly([0.0], [[1.0]], [1], [[1]])
        B = poly([0.0], [[2.0]], [2], [[1]])
        C = sp.add(A, B)
        assert C.n_monomials == 2
        assert sorted(C.ids.tolist()) == [1, 2]

    def test_square_of_example_input(self):
        """(0.5 - 0.5 s1 + s1 s2)^2 expands exactly."""
        Z = poly([0.5], [[-0.5, 1.0]], [1, 2], [[1, 1], [0, 1]])
        S = sp.multiply(Z, Z)
        assert S.coefficient({}) == pytest.approx(0.25)
        assert S.coefficient({1: 1}) == pytest.approx(-0.5)
        assert S.coefficient({1: 2}) == pytest.approx(0.25)
        assert S.coefficient({1: 1, 2: 1}) == pytest.approx(1.0)
        assert S.coefficient({1: 2, 2: 1}) == pytest.approx(-1.0)
        assert S.coefficient({1: 2, 2: 2}) == pytest.approx(1.0)
        assert S.n_monomials == 5

    def test_multiply_by_one(self):
        P = poly([0.3], [[1.0, -2.0]], [1, 2], [[1, 0], [0, 3]])
        Q = sp.multiply(P, SPolynotope([1.0]))
        np.testing.assert_allclose(sp.evaluate(Q, {1: 0.3, 2: -0.7}), sp.evaluate(P, {1: 0.3, 2: -0.7}))

    def test_product_of_symbols(self):
        C = sp.multiply(sp.symbol(1), sp.symbol(2))
        assert C.E.T.tolist() == [[1, 1]]

    def test_binomial_cube(self):
        P = poly([1.0], [[1.0]], [1], [[1]])
        Q = sp.power(P, 3)
        assert Q.coefficient({}) == pytest.approx(1.0)
        assert Q.coefficient({1: 1}) == pytest.approx(3.0)
        assert Q.coefficient({1: 2}) == pytest.approx(3.0)
        assert Q.coefficient({1: 3}) == pytest.approx(1.0)

    def test_power_one_is_identity(self):
        P = poly([0.5], [[2.0]], [1], [[2]])
        Q = sp.power(P, 1)
        np.testing.assert_allclose(Q.G, P.G)
        assert Q.E.tolist() == P.E.tolist()

    def test_ring_exactness_sweep(self):
        """add/multiply/pow agree pointwise with concrete arithmetic."""
        rng = np.random.default_rng(17)
        for _ in range(30):
            ids = rng.choice(10, size=2, replace=False)
            A = poly(
                rng.normal(size=1), rng.normal(size=(1, 3)), ids, rng.integers(0, 3, size=(2, 3))
            )
            B = poly(
                rng.normal(size=1), rng.normal(size=(1, 2)), ids, rng.integers(0, 3, size=(2, 2))
            )
            sigma = sample_sigma(rng, ids, m=35)
            a = sp.evaluate(A, sigma)
            b = sp.evaluate(B, sigma)
            np.testing.assert_allclose(sp.evaluate(sp.add(A, B), sigma), a + b, atol=1e-9)
            np.testing.assert_allclose(sp.evaluate(sp.multiply(A, B), sigma), a * b, atol=1e-9)
            np.testing.assert_allclose(sp.evaluate(sp.power(A, 2), sigma), a * a, atol=1e-9)

    def test_vcat_shares_monomials(self):
        A = poly([0.0], [[1.0]], [1], [[1]])
        B = poly([1.0], [[2.0]], [1], [[1]])
        C = sp.vcat(A, B)
        assert C.dim == 2
        assert C.n_monomials == 1
        np.testing.assert_allclose(C.G, [[1.0], [2.0]])


class TestIntervalBound:
    def test_even_power(self):
        assert sp.interval_bound(poly([0.0], [[1.0]], [1], [[2]])) == Interval(0.0, 1.0)

    def test_example_preactivation(self):
        Z = poly([0.5], [[-0.5, 1.0]], [1, 2], [[1, 1], [0, 1]])
        assert sp.interval_bound(Z) == Interval(-1.0, 2.0)

    def test_cancelled_symbol(self):
        P = poly([0.0], [[1.0, -1.0]], [1], [[1, 1]])
        assert sp.interval_bound(P) == Interval(0.0, 0.0)

    def test_contains_sampled_range(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            ids = rng.choice(8, size=3, replace=False)
            P = poly(
                rng.normal(size=1), rng.normal(size=(1, 4)), ids, rng.integers(0, 4, size=(3, 4))
            )
            iv = sp.interval_bound(P)
            vals = sp.evaluate(P, sample_sigma(rng, ids, m=500))
            assert vals.min() >= iv.lo - 1e-9 and vals.max() <= iv.hi + 1e-9


class TestRefineBound:
    def test_depth_zero_is_natural_extension(self):
        P = poly([0.0], [[0.25, -0.5]], [1], [[2, 1]])
        assert sp.refine_bound(P, 0) == sp.interval_bound(P)

    def test_even_power_already_tight(self):
        P = poly([0.0], [[1.0]], [1], [[2]])
        assert sp.refine_bound(P, 1) == Interval(0.0, 1.0)

    def test_tightens_toward_exact(self):
        """0.25 s^2 - 0.5 s has exact range [-0.25, 0.75]; depth 3 gets close."""
        P = poly([0.0], [[0.25, -0.5]], [1], [[2, 1]])
        lo_exact, hi_exact = grid_range(P)
        assert (lo_exact, hi_exact) == pytest.approx((-0.25, 0.75), abs=1e-8)
        iv0 = sp.refine_bound(P, 0)
        iv3 = sp.refine_bound(P, 3)
        assert iv3.lo >= iv0.lo and iv3.hi <= iv0.hi
        assert iv3.lo <= lo_exact + 1e-12 and iv3.hi >= hi_exact - 1e-12
        assert iv3.lo > iv0.lo  # strictly tighter on the slack side
        assert iv3.lo == pytest.approx(-0.25, abs=0.1)

    def test_nested_and_sound(self):
        rng = np.random.default_rng(23)
        for _ in range(15):
            ids = rng.choice(6, size=2, replace=False)
            P = poly(
                rng.normal(size=1), rng.normal(size=(1, 3)), ids, rng.integers(0, 3, size=(2, 3))
            )
            vals = sp.evaluate(P, sample_sigma(rng, ids, m=400))
            prev = sp.refine_bound(P, 0)
            for depth in (1, 2, 3):
                cur = sp.refine_bound(P, depth)
                assert cur.lo >= prev.lo - 1e-12 and cur.hi <= prev.hi + 1e-12
                assert vals.min() >= cur.lo - 1e-9 and vals.max() <= cur.hi + 1e-9
                prev = cur


class TestReduceMonomials:
    def test_budget_large_enough_is_identity(self, provider):
        P = poly([0.0], [[1.0, 0.5]], [1, 2], [[1, 0], [0, 1]])
        assert sp.reduce_monomials(P, 2, provider=provider) is P

    def test_drop_odd_monomial(self, provider):
        """Odd monomials range over [-1,1]: no recentring, radius = |coeff|."""
        P = poly([0.0], [[1.0, 0.2]], [1, 2], [[1, 1], [0, 1]])
        Q = sp.reduce_monomials(P, 1, provider=provider)
        np.testing.assert_allclose(Q.c, [0.0])
        fresh_ids = sorted(set(Q.ids.tolist()) - {1, 2})
        assert len(fresh_ids) == 1
        assert Q.coefficient({fresh_ids[0]: 1}) == pytest.approx(0.2)

    def test_drop_even_monomial_recentres(self, provider):
        P = poly([0.0], [[1.0, 0.4]], [1, 2], [[1, 0], [0, 2]])
        Q = sp.reduce_monomials(P, 1, provider=provider)
        np.testing.assert_allclose(Q.c, [0.2])
        assert Q.coefficient({1: 1}) == pytest.approx(1.0)
        # replacement symbol carries half the even-monomial range
        fresh_ids = sorted(set(Q.ids.tolist()) - {1, 2})
        assert len(fresh_ids) == 1
        assert Q.coefficient({fresh_ids[0]: 1}) == pytest.approx(0.2)

    def test_degree_cap_prefers_dropping_high_degree(self, provider):
        P = poly([0.0], [[1.0, 0.9, 0.8]], [1, 2], [[1, 3, 0], [0, 1, 1]])
        Q = sp.reduce_monomials(P, 2, max_degree=2, provider=provider)
        assert Q.degree <= 2

    def test_support_dominance_after_reduction(self, provider):
        rng = np.random.default_rng(29)
        for _ in range(20):
            ids = rng.choice(12, size=3, replace=False)
            P = poly(
                rng.normal(size=2),
                rng.normal(size=(2, 6)),
                ids,
                rng.integers(0, 3, size=(3, 6)),
            )
            Q = sp.reduce_monomials(P, 3, provider=provider)
            assert Q.n_monomials <= 3 + P.dim  # kept block plus the box block
            vals = sp.evaluate(P, sample_sigma(rng, ids, m=300))
            hull = sp.hull_array(Q)
            assert (vals >= hull[:, [0]] - 1e-9).all()
            assert (vals <= hull[:, [1]] + 1e-9).all()


class TestProjection:
    def test_row_extraction(self):
        P = poly([1.0, 2.0], [[1.0], [3.0]], [1], [[1]])
        row = P.project(1)
        np.testing.assert_allclose(row.c, [2.0])
        np.testing.assert_allclose(row.G, [[3.0]])

    def test_out_of_range(self):
        P = poly([1.0], [[1.0]], [1], [[1]])
        with pytest.raises(DimensionError):
            P.project(3)
