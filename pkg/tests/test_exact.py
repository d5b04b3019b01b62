"""Exact-arithmetic kernel: polynomials, rational functions, rref."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from octic.exact import (ExactMatrix, Poly, RationalFunction, fraction_str,
                         matrix_rank, parse_fraction, poly_gcd,
                         rational_roots, rref, squarefree_factors)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=12)
small_polys = st.lists(fractions, max_size=5).map(Poly)


@given(small_polys, small_polys, fractions)
def test_poly_ring_laws(p, q, v):
    assert (p + q).evaluate(v) == p.evaluate(v) + q.evaluate(v)
    assert (p * q).evaluate(v) == p.evaluate(v) * q.evaluate(v)
    assert (p - q) + q == p


@given(small_polys, small_polys)
def test_poly_divmod(p, q):
    if q.is_zero():
        with pytest.raises(Exception):
            p.divmod(q)
        return
    quo, rem = p.divmod(q)
    assert quo * q + rem == p
    assert rem.degree < q.degree or rem.is_zero()


def test_poly_normalization():
    assert Poly([0, 0]).is_zero()
    assert Poly([1, 2, 0]).coeffs == (Fraction(1), Fraction(2))
    assert Poly([3]).degree == 0
    assert Poly().degree == -1


def test_poly_str_ascending():
    p = Poly([1, -2, 1])
    s = str(p)
    assert "w" in s


@given(small_polys, small_polys)
def test_gcd_divides_both(p, q):
    if p.is_zero() and q.is_zero():
        return
    g = poly_gcd(p, q)
    assert not g.is_zero()
    for f in (p, q):
        if not f.is_zero():
            assert (f % g).is_zero()


def test_squarefree_and_roots():
    # (w - 1)^2 (w + 2) (2w - 1)
    p = (Poly([-1, 1]) ** 2) * Poly([2, 1]) * Poly([-1, 2])
    roots, leftovers = rational_roots(p)
    assert dict(roots) == {Fraction(1): 2, Fraction(-2): 1, Fraction(1, 2): 1}
    assert leftovers == []
    factors = squarefree_factors(p)
    assert sorted(mult for _, mult in factors) == [1, 2]


def test_rational_roots_irreducible_leftover():
    p = Poly([1, 0, 1]) * Poly([-3, 1])  # (w^2 + 1)(w - 3)
    roots, leftovers = rational_roots(p)
    assert dict(roots) == {Fraction(3): 1}
    assert len(leftovers) == 1
    assert leftovers[0].monic() == Poly([1, 0, 1])


@given(small_polys, small_polys, fractions)
def test_rational_function_field_laws(p, q, v):
    if q.is_zero():
        return
    f = RationalFunction(p, q)
    if q.evaluate(v) == 0:
        return
    assert f.evaluate(v) == (p.evaluate(v) / q.evaluate(v)
                             if not p.is_zero() else 0)
    g = f - f
    assert g.is_zero()
    if not f.is_zero():
        assert (f / f) == RationalFunction(Poly([1]))


def test_fraction_str_round_trip():
    for x in (Fraction(0), Fraction(3), Fraction(-3), Fraction(1, 2),
              Fraction(-22, 7)):
        assert parse_fraction(fraction_str(x)) == x
    assert fraction_str(Fraction(4, 2)) == "2"
    assert fraction_str(Fraction(1, 2)) == "1/2"


def _random_matrix(rng, rows, cols):
    return ExactMatrix([[Fraction(rng.randint(-5, 5), rng.randint(1, 3))
                         for _ in range(cols)] for _ in range(rows)])


def test_rref_kernel_500_random():
    rng = random.Random(20260822)
    for _ in range(500):
        rows = rng.randint(1, 6)
        cols = rng.randint(1, 6)
        m = _random_matrix(rng, rows, cols)
        rank, kernel, pivots = rref(m)
        assert rank + len(kernel) == cols
        assert rank == len(pivots)
        for v in kernel:
            assert all(x == 0 for x in m.matvec(v))
        # canonical: each kernel vector has a 1 in a distinct free column
        # and zeros in the other free columns
        free = [j for j in range(cols) if j not in pivots]
        assert len(free) == len(kernel)
        for v, j in zip(kernel, free):
            assert v[j] == 1
            for other in free:
                if other != j:
                    assert v[other] == 0


def test_rref_rank_matches_scaling():
    rng = random.Random(7)
    for _ in range(50):
        m = _random_matrix(rng, 4, 4)
        scaled = ExactMatrix([[3 * x for x in row] for row in m.entries])
        assert rref(m)[0] == rref(scaled)[0]


def test_matrix_rank_identity():
    eye = [[Fraction(int(i == j)) for j in range(4)] for i in range(4)]
    assert matrix_rank(eye) == 4
    assert matrix_rank([[Fraction(0)] * 3]) == 0


def test_rref_over_rational_functions():
    w = Poly.x()
    m = ExactMatrix([
        [RationalFunction(w), RationalFunction(w * w)],
        [RationalFunction(Poly([1])), RationalFunction(w)],
    ])
    rank, kernel, _ = rref(m)
    assert rank == 1
    assert len(kernel) == 1
    v = kernel[0]
    assert all(x.is_zero() for x in m.matvec(v))


def test_matvec_shape_guard():
    m = ExactMatrix([[Fraction(1), Fraction(2)]])
    with pytest.raises(Exception):
        m.matvec([Fraction(1)])
