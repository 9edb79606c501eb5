from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ncjet import linalg as la
from ncjet.linalg import Subspace


def small_matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c),
                               min_size=r, max_size=r)))


def test_scalar_parsing():
    assert la.scalar("-3/4") == la.scalar(Fraction(-3, 4))
    assert la.format_scalar(la.scalar("6/4")) == "3/2"
    assert la.format_scalar(7) == "7"
    with pytest.raises(ValueError):
        la.scalar("1/0")
    with pytest.raises(TypeError):
        la.scalar(0.5)


@settings(max_examples=60)
@given(small_matrices())
def test_rank_matches_fraction_oracle(rows):
    m = la.from_rows(rows)
    assert la.rank(m) == oracles.rank(oracles.to_rows(rows))


@settings(max_examples=60)
@given(small_matrices())
def test_rank_nullity_and_kernel(rows):
    m = la.from_rows(rows)
    ker = la.kernel(m)
    assert ker.dim + la.rank(m) == m.ncols()
    if ker.dim:
        assert la.is_zero(m * ker.matrix())
    assert la.image(m).dim == la.rank(m)


@settings(max_examples=60)
@given(small_matrices(4, 4), small_matrices(4, 4))
def test_sum_and_intersection_dimensions(a, b):
    n = 4
    u = Subspace.row_span(la.from_rows([r + [0] * (n - len(r)) for r in a]))
    v = Subspace.row_span(la.from_rows([r + [0] * (n - len(r)) for r in b]))
    assert (u + v).dim + (u & v).dim == u.dim + v.dim
    assert (u + v).contains_space(u) and u.contains_space(u & v)
    assert u + v == v + u and (u & v) == (v & u)


@settings(max_examples=60)
@given(small_matrices(5, 4))
def test_quotient_section_and_projection(rows):
    sub = Subspace.row_span(la.from_rows([r + [0] * (4 - len(r)) for r in rows]))
    q = la.quotient(4, sub)
    assert q.dim == 4 - sub.dim
    assert q.proj * q.sect == la.eye(q.dim)
    if sub.dim:
        assert la.is_zero(q.proj * sub.matrix())


@settings(max_examples=60)
@given(small_matrices(4, 4), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_solve_affine(rows, x):
    m = la.from_rows([r + [0] * (4 - len(r)) for r in rows])
    target = m * la.column(x)
    sol, ker = la.solve_affine(m, target)
    assert sol is not None and m * sol == target
    assert ker == la.kernel(m)


def test_solve_affine_inconsistent():
    m = la.from_rows([[1, 0], [1, 0]])
    sol, _ = la.solve_affine(m, la.column([1, 2]))
    assert sol is None


def test_subspace_canonical_form():
    a = Subspace.span(la.from_rows([[1, 2], [2, 4]]), 2)
    b = Subspace.span(la.from_rows([[3], [6]]), 2)
    assert a == b and a.dim == 1
    assert Subspace.zero(3).dim == 0 and Subspace.full(3).dim == 3


def test_coords_round_trip():
    v = Subspace.span(la.from_rows([[1, 0], [1, 1], [0, 2]]), 3)
    w = la.column([2, 3, 2])
    assert v.contains(w)
    assert v.matrix() * v.coords(w) == w


def test_kron_index_convention():
    a = la.from_rows([[1, 2], [3, 4]])
    b = la.from_rows([[0, 1], [1, 0]])
    k = la.kron(a, b)
    # (a (x) b)(e_p (x) e_q) sits at index p * dim + q
    for p in range(2):
        for q in range(2):
            lhs = k * la.unit_vector(4, p * 2 + q)
            assert lhs == la.kron(a * la.unit_vector(2, p), b * la.unit_vector(2, q))


def test_carrier_cap(monkeypatch):
    monkeypatch.setenv("NCJET_MAX_DIM", "10")
    assert la.max_dim() == 10
    with pytest.raises(la.CarrierTooLarge):
        la.check_carrier(11)
    monkeypatch.delenv("NCJET_MAX_DIM")
    assert la.max_dim() == la.DEFAULT_MAX_DIM == 4096
    monkeypatch.setenv("NCJET_MAX_DIM", "many")
    with pytest.raises(la.DimensionError):
        la.max_dim()
