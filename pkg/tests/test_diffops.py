import pytest

import oracles
from ncjet import diffops as do
from ncjet import jets as jt
from ncjet import linalg as la
from ncjet.algebra import check_left_linear, residue_module


def _laplacian(c):
    ops = do.quaternion_operators(c)
    return 2 * (ops["dj"] * ops["di"])


# ---------------------------------------------------------------- operator spaces

def test_quaternion_operator_dims(quat):
    c, ext = quat
    A = c.A_module
    assert do.operator_dims(c, ext, A, A, 3) == [4, 12, 16, 16]      # [DERIVED] frozen


def test_first_order_operators_against_oracle(quat):
    c, _ = quat
    table = oracles.mult_table(c.algebra)
    N_cols = oracles.to_rows(c.N.matrix().transpose())
    assert oracles.first_order_operator_dim(table, N_cols) == 12
    assert do.operator_space(c, None, c.A_module, c.A_module, 1, "nonholonomic")["dim"] == 12


def test_operator_basis_spans_all_operators(quat):
    c, ext = quat
    basis = do.quaternion_operator_basis(c)
    assert len(basis) == 16
    span = do.span_of(basis, 4, 4)
    assert span.dim == 16
    assert span == do.operator_space(c, ext, c.A_module, c.A_module, 2)["space"]


def test_partial_derivatives_reconstruct_d(quat):
    """da = del_i(a) di + del_j(a) dj, checked element by element."""
    c, _ = quat
    A = c.A_module
    parts = do.partial_derivatives(c, ["i", "j"])
    H = c.algebra
    O = c.Omega1(A)
    di = c.d_of(H.basis_vector(1))
    dj = c.d_of(H.basis_vector(2))
    for a in range(4):
        ea = la.unit_vector(4, a)
        pi = parts["i"] * ea
        pj = parts["j"] * ea
        rebuilt = sum((la.to_list(pi)[q] * (c.omega1.left[q] * di) for q in range(4)),
                      la.zeros(c.dim, 1))
        rebuilt += sum((la.to_list(pj)[q] * (c.omega1.left[q] * dj) for q in range(4)),
                       la.zeros(c.dim, 1))
        assert rebuilt == la.col(c.d, a)
    assert O.dim == c.dim


def test_operator_relations(quat):
    c, _ = quat
    rel = do.verify_relations(c)
    assert all(rel.values()), rel


@pytest.mark.parametrize("name,expected", [("Li", 1), ("Lj", 1), ("Lk", 2), ("Ri", 0),
                                           ("Rk", 0), ("di", 1), ("dj", 1)])
def test_operator_orders(quat, name, expected):
    c, ext = quat
    op = do.quaternion_operators(c)[name]
    assert do.order(c, ext, op, c.A_module, c.A_module, 3) == expected


def test_laplacian_order_and_identity(quat):
    c, ext = quat
    lap = _laplacian(c)
    ops = do.quaternion_operators(c)
    assert lap == do.commutator(ops["dj"], ops["di"])
    assert do.order(c, ext, lap, c.A_module, c.A_module, 3) == 2
    inv = do.metric_inverse(ext, do.quaternion_metric(ext))
    assert inv["exists"] and inv["solution_dim"] == 0
    assert do.laplacian_check(ext, inv["inner_product"], lap)["holds"]


def test_laplacian_identity_negative_control(quat):
    c, ext = quat
    inv = do.metric_inverse(ext, do.quaternion_metric(ext))
    bad = do.laplacian_check(ext, -inv["inner_product"], _laplacian(c))
    assert not bad["holds"] and bad["failures"]


# ---------------------------------------------------------------- certificates

def test_certificate_is_left_linear_lift(quat):
    c, ext = quat
    lap = _laplacian(c)
    cert = do.order_at_most(c, ext, lap, c.A_module, c.A_module, 2)
    assert cert.lift * cert.jet.prolongation == lap
    assert check_left_linear(cert.lift, cert.jet.carrier, c.A_module)
    assert do.order_at_most(c, ext, lap, c.A_module, c.A_module, 1) is None


def test_restricting_certificates_down_the_jet_flavours(quat):
    c, ext = quat
    A = c.A_module
    lap = _laplacian(c)
    nh = do.order_at_most(c, ext, lap, A, A, 2, "nonholonomic")
    sh = do.restrict_certificate(c, ext, nh, lap, A, "semiholonomic")
    assert sh is not None and sh.flavor == "semiholonomic"
    h = do.restrict_certificate(c, ext, sh, lap, A, "holonomic")
    assert h is not None and h.lift * h.jet.prolongation == lap
    with pytest.raises(ValueError):
        do.restrict_certificate(c, ext, h, lap, A, "nonholonomic")


@pytest.mark.parametrize("flavor", ["holonomic", "nonholonomic"])
def test_composition_of_certified_operators(quat, flavor):
    c, ext = quat
    A = c.A_module
    ops = do.quaternion_operators(c)
    di = do.classify(c, ext, do.DiffOp(A, A, ops["di"], "di"), 1, flavor)
    dj = do.classify(c, ext, do.DiffOp(A, A, ops["dj"], "dj"), 1, flavor)
    comp = do.compose(c, ext, dj, di)
    assert comp.certificate.order == 2
    assert comp.matrix == ops["dj"] * ops["di"]


def test_universal_lift_of_first_order_operator(quat):
    c, _ = quat
    A = c.A_module
    Li = do.quaternion_operators(c)["Li"]
    T = do.universal_lift(c, Li, A, A)
    assert T * jt.j1_map(c, A) == Li


# ---------------------------------------------------------------- connections

def test_connections_on_the_regular_module(quat):
    c, _ = quat
    A = c.A_module
    res = do.connections(c, A)
    assert res["exists"] and res["affine_dim"] == 8
    con = res["sample"]
    assert do.is_connection(c, A, con.nabla)
    s = do.splitting_from_connection(c, A, con.nabla)
    assert s == con.splitting
    assert do.connection_from_splitting(c, A, s) == con.nabla


def test_residue_module_has_no_connection(infin):
    c, _ = infin
    assert not do.connections(c, residue_module(c.algebra))["exists"]


# ---------------------------------------------------------------- universal calculus

def test_every_linear_map_is_first_order_for_the_universal_calculus(universal_dual):
    c, _ = universal_dual
    A = c.A_module
    n = c.algebra.dim
    for r in range(n):
        for s in range(n):
            delta = la.zeros(n, n)
            delta[r, s] = 1
            assert do.order_at_most(c, None, delta, A, A, 1, "nonholonomic") is not None
    assert do.operator_space(c, None, A, A, 1, "nonholonomic")["dim"] == n * n
