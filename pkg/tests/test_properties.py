"""Randomized property suites over quotient calculi on H, k[t]/(t^2) and the
2x2 upper triangular algebra.  Each drawn calculus is checked exhaustively on
basis elements; hypothesis only chooses which calculus (and which modules)."""
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ncjet import diffops as do
from ncjet import exterior as ex
from ncjet import homology as hom
from ncjet import jets as jt
from ncjet import linalg as la
from ncjet.algebra import (Module, check_left_linear, dual_numbers, free_module, quaternions,
                           upper_triangular)
from ncjet.calculus import quotient_calculus, universal_forms

ALGEBRAS = {"H": quaternions(), "dual": dual_numbers(), "upper": upper_triangular()}
UNIVERSAL = {k: universal_forms(A).matrix() for k, A in ALGEBRAS.items()}


def _scalar_module(A, values, name):
    """One-dimensional bimodule on which basis element x acts by values[x] on both sides."""
    acts = [la.from_rows([[v]]) for v in values]
    return Module(A, 1, acts, acts, name)


EXTRA_MODULES = {
    "H": lambda A: [],
    "dual": lambda A: [_scalar_module(A, [1, 0], "k[0]")],
    "upper": lambda A: [_scalar_module(A, [1, 0, 0], "S1"), _scalar_module(A, [0, 0, 1], "S2")],
}


# Jets up to order 3 and D~ only involve forms of degree <= 2.
EXTERIOR_GRADE = 2


@lru_cache(maxsize=None)
def calculus_for(key, gens):
    """Quotient calculus (and its maximal exterior algebra) by the bimodule generated by gens.

    ``gens`` is a tuple of integer coefficient tuples over a basis of the universal forms.
    """
    A, U = ALGEBRAS[key], UNIVERSAL[key]
    cols = [U * la.column(list(g)) for g in gens]
    if cols:
        c = quotient_calculus(A, la.hstack(cols, nrows=A.dim ** 2), name=f"{key}{gens}")
    else:
        c = quotient_calculus(A, la.zeros(A.dim ** 2, 0), name=f"{key}-universal")
    modules = [c.A_module, free_module(A, 2), c.omega1] + EXTRA_MODULES[key](A)
    return c, ex.maximal_exterior(c, EXTERIOR_GRADE), modules


@st.composite
def calculi(draw, keys=("H", "dual", "upper")):
    key = draw(st.sampled_from(keys))
    width = UNIVERSAL[key].ncols()
    vec = st.tuples(*[st.integers(-2, 2)] * width).filter(any)
    # the universal calculus on H (dim 12) is covered by the degeneration tests
    gens = tuple(draw(st.lists(vec, min_size=int(key == "H"), max_size=2)))
    return (key,) + calculus_for(key, gens)


def jet_order(key):
    """Nonholonomic carriers grow like dim(J^1)^n; keep the quaternion runs at order 2."""
    return 2 if key == "H" else 3


# (a) the one-jet sequence 0 -> Omega^1(E) -> J^1E -> E -> 0 is exact for every module
@settings(max_examples=12)
@given(calculi())
def test_one_jet_sequence_exact_for_every_module(data):
    key, c, ext, modules = data
    for E in modules:
        J = jt.jet1_module(c, E)
        assert all(J.extras["exactness"].values()), (key, E.name)
        assert J.extras["N_agree"], (key, E.name)


# (b) j^1 Leibniz rule and the rho splitting identities
@settings(max_examples=12)
@given(calculi())
def test_jet_prolongation_leibniz_and_splitting(data):
    key, c, ext, modules = data
    A = c.algebra
    for E in modules:
        if E.left is None:
            continue
        j, pi = jt.j1_map(c, E), jt.pi10_map(c, E)
        iota, rho = jt.iota1_map(c, E), jt.rho_map(c, E)
        J, O = c.J1_of(E), c.Omega1(E)
        assert rho * iota == la.eye(O.dim)
        assert pi * j == la.eye(E.dim)
        assert la.is_zero(pi * iota)
        assert la.is_zero(rho * j)
        assert iota * rho + j * pi == la.eye(J.dim)
        for a in range(A.dim):
            da = la.col(c.d, a)
            for e in range(E.dim):
                ev = la.unit_vector(E.dim, e)
                lhs = j * (E.left[a] * ev) - J.left[a] * (j * ev)
                assert lhs == iota * O.pure(da, ev), (key, E.name, A.basis[a], e)


# (c) J^(n)E = E + sum_m Omega^1(J^(m-1)E) through rho and the iterated prolongations
@settings(max_examples=10)
@given(calculi())
def test_nonholonomic_decomposition_round_trip(data):
    key, c, ext, modules = data
    E = c.A_module
    for n in range(1, jet_order(key) + 1):
        NH = jt.nonholonomic(c, E, n)
        pieces = E.dim + sum(c.Omega1(jt.nonholonomic(c, E, m - 1).carrier).dim
                             for m in range(1, n + 1))
        assert NH.dim == pieces
        for k in range(NH.dim):
            xi = la.unit_vector(NH.dim, k)
            assert jt.nh_recompose(c, E, n, jt.nh_decompose(c, E, n, xi)) == xi


# (d) semiholonomic jets: equalizer of the projections = intersection of D~^I kernels
@settings(max_examples=10)
@given(calculi())
def test_semiholonomic_equalizer_equals_dtilde_kernels(data):
    key, c, ext, modules = data
    for E in modules[:2]:
        for n in range(2, jet_order(key) + 1):
            assert jt.semiholonomic_equalizer(c, E, n) == jt.semiholonomic_by_dtilde(c, E, n)


def _right_flat(M):
    return hom.is_flat(M, "right", probe=False)["flat"]


# (e) j^(n) lands in J^n, J^n in J^[n] and J^[n] in J^(n)
@settings(max_examples=10)
@given(calculi())
def test_jet_memberships(data):
    key, c, ext, modules = data
    E = c.A_module
    flat = _right_flat(c.omega1) and _right_flat(ext.omega[2])
    for n in range(1, jet_order(key) + 1):
        NH = jt.nonholonomic(c, E, n)
        SH = jt.semiholonomic(c, E, n)
        H = jt.holonomic(c, ext, E, n)
        assert SH.embed * SH.prolongation == NH.prolongation
        assert H.embed * H.prolongation == NH.prolongation
        assert la.image(SH.embed).contains(NH.prolongation)
        if flat:
            assert la.image(SH.embed).contains_space(la.image(H.embed)), (key, n)


# (f) first-order operators: the N_d criterion agrees with the lift solve
@settings(max_examples=12)
@given(calculi(), st.lists(st.integers(-2, 2), min_size=16, max_size=16))
def test_first_order_criterion_matches_lift(data, coeffs):
    key, c, ext, modules = data
    A = c.A_module
    n = A.dim
    candidates = [la.from_rows([[int(r == p and s == q) for s in range(n)] for r in range(n)])
                  for p in range(n) for q in range(n)]
    candidates.append(la.from_rows([coeffs[r * n:(r + 1) * n] for r in range(n)]))
    for delta in candidates:
        crit = do.first_order_criterion(c, delta, A, A)
        lift = do.order_at_most(c, None, delta, A, A, 1, "nonholonomic")
        assert crit == (lift is not None), (key, la.to_list(delta))


# (g) connections <-> left-linear splittings of the one-jet sequence
@settings(max_examples=12)
@given(calculi())
def test_connection_splitting_round_trip(data):
    key, c, ext, modules = data
    for E in modules:
        res = do.connections(c, E)
        if not res["exists"]:
            continue
        nabla = res["sample"].nabla
        assert do.is_connection(c, E, nabla)
        s = do.splitting_from_connection(c, E, nabla)
        assert s * jt.iota1_map(c, E) == la.eye(c.Omega1(E).dim)
        assert check_left_linear(s, c.J1_of(E), c.Omega1(E))
        assert do.connection_from_splitting(c, E, s) == nabla


# (h) composites of certified operators have certified order <= m + n
@settings(max_examples=8)
@given(calculi(("dual", "upper")), st.data())
def test_composition_certificates(data, draw):
    key, c, ext, modules = data
    A = c.A_module
    ops = {m: do.operator_space(c, ext, A, A, m)["basis"] for m in (0, 1)}
    for flavor in ("holonomic", "nonholonomic"):
        for m, n in ((0, 1), (1, 1)):
            if not ops[m] or not ops[n]:
                continue
            i = draw.draw(st.integers(0, len(ops[m]) - 1))
            k = draw.draw(st.integers(0, len(ops[n]) - 1))
            op2 = do.classify(c, ext, do.DiffOp(A, A, ops[m][i]), m, flavor)
            op1 = do.classify(c, ext, do.DiffOp(A, A, ops[n][k]), n, flavor)
            comp = do.compose(c, ext, op2, op1)
            cert = comp.certificate
            assert cert.order <= op2.certificate.order + op1.certificate.order
            assert cert.lift * cert.jet.prolongation == comp.matrix
            assert check_left_linear(cert.lift, cert.jet.carrier, A)


def test_composition_certificates_quaternions(quat):
    c, ext = quat
    A = c.A_module
    ops = do.quaternion_operators(c)
    pairs = [("di", "dj"), ("dj", "Ri"), ("Rk", "di"), ("Li", "Lj")]
    for second, first in pairs:
        op2 = do.classify(c, ext, do.DiffOp(A, A, ops[second], second), 3)
        op1 = do.classify(c, ext, do.DiffOp(A, A, ops[first], first), 3)
        comp = do.compose(c, ext, op2, op1)
        assert comp.certificate.order == op2.certificate.order + op1.certificate.order
        assert comp.certificate.lift * comp.certificate.jet.prolongation == comp.matrix
        assert do.order(c, ext, comp.matrix, A, A, 3) <= comp.certificate.order


# (i) Tor does not depend on the resolution
@settings(max_examples=8)
@given(calculi())
def test_tor_resolution_independence(data):
    key, c, ext, modules = data
    # free modules have no higher Tor; pair Omega^1 and the small modules with each other
    interesting = [modules[0]] + modules[2:]
    for M in interesting[1:]:
        for N in interesting:
            # the all-basis-vectors resolution has large ranks, so compare it in low degree
            basis = hom.tor_dims(M, N, 1, "basis")
            greedy = hom.tor_dims(M, N, 2, "greedy")
            balanced = oracles.tor_by_resolving_second(M, hom.free_resolution(N, 3, "greedy"))
            assert basis == greedy[:2], (key, M.name, N.name)
            assert greedy == balanced[:3], (key, M.name, N.name)


@pytest.mark.parametrize("key", ["dual", "upper"])
def test_universal_calculus_is_in_the_family(key):
    c, ext, modules = calculus_for(key, ())
    assert c.N.dim == 0
    assert c.dim == ALGEBRAS[key].dim ** 2 - ALGEBRAS[key].dim
