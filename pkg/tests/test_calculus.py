import pytest

import oracles
from ncjet import diffops as do
from ncjet import linalg as la
from ncjet.algebra import dual_numbers, quaternions, upper_triangular
from ncjet.calculus import (CalculusError, CalculusSpecError, N_f, calculus_from_json,
                            calculus_morphism, commutation_sign, find_free_basis,
                            infinitesimal_calculus, quotient_calculus, structure_relations,
                            terminal_calculus, universal_calculus, validate_calculus)


# ---------------------------------------------------------------- quaternions

def test_universal_forms_dimension(quat):
    c, _ = quat
    assert c.universal.dim == 12                        # [PAPER]
    assert universal_calculus(c.algebra).dim == 12


def test_N_dimensions_against_oracle(quat):
    c, _ = quat
    H = c.algebra
    table = oracles.mult_table(H)
    i = oracles.basis_vec(4, 1)
    j = oracles.basis_vec(4, 2)
    assert N_f(H, H.basis_vector(1)).dim == oracles.N_f_dim(table, i) == 8
    assert N_f(H, H.basis_vector(2)).dim == oracles.N_f_dim(table, j) == 8
    assert c.N.dim == oracles.N_intersection_dim(table, [i, j]) == 4
    assert c.dim == 8


def test_Omega1_tensor_square_by_brute_force(quat):
    c, ext = quat
    assert oracles.tensor_over_algebra_dim(c.omega1, c.omega1) == 16
    assert ext.pair(1, 1).dim == 16


def test_left_free_on_di_dj(quat):
    c, _ = quat
    assert [c.algebra.basis[i] for i in find_free_basis(c)] == ["i", "j"]


def test_structure_equation_for_dk(quat):
    c, _ = quat
    rel = structure_relations(c, ["i", "j"])
    assert rel["differentials"]["k"]["text"] == "dk = −j di + i dj"
    assert rel["differentials"]["k"]["coefficients"] == {"di": ["0", "0", "-1", "0"],
                                                         "dj": ["0", "1", "0", "0"]}
    assert rel["differentials"]["1"]["text"] == "d1 = 0"


@pytest.mark.parametrize("a,x,sign", [("i", "i", -1), ("i", "j", -1), ("j", "i", -1),
                                      ("j", "j", -1), ("k", "i", 1), ("k", "j", 1)])
def test_six_bimodule_relations(quat, a, x, sign):
    c, _ = quat
    assert commutation_sign(c, a, x) == sign


def test_calculus_axioms(quat):
    c, _ = quat
    report = validate_calculus(c)
    assert report["valid"] and report["leibniz_ok"]
    assert report["surjectivity_rank"] == c.dim


def test_terminal_calculus_makes_left_multiplication_first_order(quat):
    c, _ = quat
    ops = do.quaternion_operators(c)
    A = c.A_module
    assert do.first_order_criterion(c, ops["Li"], A, A)
    assert do.first_order_criterion(c, ops["Lj"], A, A)
    assert not do.first_order_criterion(c, ops["Lk"], A, A)


def test_terminal_calculus_is_largest(quat):
    """L_i and L_j are first order for a quotient calculus exactly when its N lies in N_{i,j}."""
    c, _ = quat
    H = c.algebra
    U = la.hstack([c.universal.matrix(), c.N.matrix()])    # generic forms, then forms in N
    ops = do.quaternion_operators(c)
    seen = set()
    for k in range(U.ncols()):
        for extra in (None, (k + 5) % U.ncols()):
            gens = la.col(U, k) if extra is None else la.hstack([la.col(U, k), la.col(U, extra)])
            c2 = quotient_calculus(H, gens)
            A2 = c2.A_module
            first = (do.first_order_criterion(c2, ops["Li"], A2, A2)
                     and do.first_order_criterion(c2, ops["Lj"], A2, A2))
            assert first == c.N.contains_space(c2.N)
            seen.add(first)
    assert seen == {True, False}
    assert calculus_morphism(universal_calculus(H), c) is not None
    assert calculus_morphism(c, universal_calculus(H)) is None


# ---------------------------------------------------------------- infinitesimal

def test_infinitesimal_calculus_dims(infin):
    c, _ = infin
    assert c.dim == 1                                   # [PAPER]
    assert c.J1.dim == 3                                # [PAPER]
    assert c.N.dim == 1
    assert validate_calculus(c)["valid"]


def test_infinitesimal_dt_is_killed_by_t(infin):
    c, _ = infin
    dt = c.d_of([0, 1])
    assert not la.is_zero(dt)
    assert la.is_zero(c.omega1.left[1] * dt) and la.is_zero(c.omega1.right[1] * dt)


# ---------------------------------------------------------------- general

@pytest.mark.parametrize("make", [quaternions, dual_numbers, upper_triangular])
def test_universal_calculus(make):
    A = make()
    c = universal_calculus(A)
    assert c.N.dim == 0 and c.dim == A.dim ** 2 - A.dim
    assert validate_calculus(c)["valid"]
    assert c.rho * c.iota1 == la.eye(c.dim)


def test_quotient_rejects_non_forms():
    A = dual_numbers()
    with pytest.raises(CalculusError):
        quotient_calculus(A, [[1, 0, 0, 0]])            # 1 (x) 1 is not a universal form


def test_calculus_from_json_accepts_names_and_coordinates():
    H = quaternions()
    by_name = calculus_from_json(H, {"type": "terminal", "elements": ["i", "j"]})
    by_coords = calculus_from_json(H, {"type": "terminal",
                                       "elements": [["0", "1", "0", "0"], [0, 0, 1, 0]]})
    assert by_name.N == by_coords.N == terminal_calculus(H, ["i", "j"]).N
    D = dual_numbers()
    inf = calculus_from_json(D, {"type": "quotient", "N_generators": [["0", "0", "0", "1"]]})
    assert inf.N == infinitesimal_calculus().N


@pytest.mark.parametrize("spec", [{"type": "nope"}, {"type": "terminal", "elements": ["q"]},
                                  {"type": "terminal", "elements": []},
                                  {"type": "quotient", "N_generators": [["1"]]}])
def test_calculus_spec_errors(spec):
    with pytest.raises(CalculusSpecError):
        calculus_from_json(quaternions(), spec)
