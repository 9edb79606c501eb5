"""Golden reports for the two worked examples: the {i,j}-terminal calculus on the
quaternions and the infinitesimal calculus on k[t]/(t^2).

Every quantity is recomputed from scratch; reports contain only JSON-native
values (rationals as strings) so they can be diffed against committed files.
"""
from __future__ import annotations

from . import diffops as do
from . import exterior as ex
from . import homology as hom
from . import jets as jt
from . import linalg as la
from .algebra import residue_module, validate_algebra
from .calculus import (Calculus, N_f, commutation_sign, find_free_basis, infinitesimal_calculus,
                       quaternion_calculus, structure_relations, universal_calculus,
                       validate_calculus)

JET_ORDERS = 3


def matrix_json(m) -> list[list[str]]:
    return [[la.format_scalar(x) for x in row] for row in m.tolist()]


def calculus_summary(c: Calculus) -> dict:
    A = c.algebra
    v = validate_calculus(c)
    free = find_free_basis(c)
    return {
        "algebra": A.name,
        "algebra_dim": A.dim,
        "algebra_valid": not validate_algebra(A)["failures"],
        "dim_universal_forms": c.universal.dim,
        "dim_N": c.N.dim,
        "dim_Omega1": c.dim,
        "dim_J1": c.J1.dim,
        "calculus_valid": v["valid"],
        "left_free_basis": None if free is None else [f"d{A.basis[i]}" for i in free],
    }


def jet_table(c: Calculus, ext: ex.ExteriorAlgebra, E, orders: int = JET_ORDERS) -> dict:
    dims, exact = {}, {}
    for flavor in jt.FLAVORS:
        dims[flavor] = [jt.jet_space(flavor, c, ext, E, n).dim for n in range(orders + 1)]
        rows = []
        for n in range(1, orders + 1):
            r = jt.exactness_report(flavor, c, ext, E, n)
            row = {k: r[k] for k in ("left_exact", "mid_exact", "right_exact", "exact")}
            row["order"] = n
            row["dims"] = r["dims"]
            if "obstruction" in r:
                row["obstruction"] = r["obstruction"]
            rows.append(row)
        exact[flavor] = rows
    return {"dims": dims, "sequences": exact}


def symmetric_dims(ext: ex.ExteriorAlgebra, top: int) -> list[int]:
    return [ex.symmetric_forms(ext, n).dim for n in range(top + 1)]


# ---------------------------------------------------------------- quaternions

SIX_RELATIONS = [("i", "i"), ("i", "j"), ("j", "i"), ("j", "j"), ("k", "i"), ("k", "j")]


def quaternion_report(c: Calculus | None = None, ext: ex.ExteriorAlgebra | None = None) -> dict:
    c = c or quaternion_calculus()
    ext = ext or ex.maximal_exterior(c, 3)
    A, H = c.A_module, c.algebra
    summary = calculus_summary(c)
    summary["dim_N_i"] = N_f(H, H.basis_vector(1)).dim
    summary["dim_N_j"] = N_f(H, H.basis_vector(2)).dim
    summary["dim_N_ij"] = c.N.dim
    relations = structure_relations(c, ["i", "j"])
    signs = {}
    for a, x in SIX_RELATIONS:
        s = commutation_sign(c, a, x)
        signs[f"{a}.d{x}"] = None if s is None else ("+" if s > 0 else "-") + f"(d{x}).{a}"

    ext_valid = ext.validate()
    spencer = ex.spencer_report(ext, ext.N)
    exterior = {
        "truncation": ext.N,
        "dims": ext.dims(),
        "valid": ext_valid["valid"],
        "symmetric_dims": symmetric_dims(ext, ext.N),
        "S2_generator": ex.antisymmetric_generator(ext, "i", "j"),
        "minimal_symmetric_square_dim": ex.minimal_symmetric_square(ext)["dim"],
        "spencer": spencer,
        "spencer_H_h2": {str(h): ex.spencer_cohomology(ext, h, 2)["H"] for h in (1, 2, 3)},
        "spencer_is_complex": ex.spencer_is_complex(ext, ext.N),
    }

    jets = jet_table(c, ext, A)
    jets["semiholonomic_order2_by_kernels"] = jt.semiholonomic_by_dtilde(c, A, 2).dim
    jets["semiholonomic_order2_by_equalizer"] = jt.semiholonomic_equalizer(c, A, 2).dim

    ops = do.quaternion_operators(c)
    lap = 2 * (ops["dj"] * ops["di"])                       # Laplacian 2 dj o di
    inverse = do.metric_inverse(ext, do.quaternion_metric(ext))
    orders = {name: do.order(c, ext, ops[name], A, A, JET_ORDERS)
              for name in ("di", "dj", "Li", "Lj", "Lk", "R1", "Ri", "Rj", "Rk")}
    orders["laplacian"] = do.order(c, ext, lap, A, A, JET_ORDERS)
    lap_check = do.laplacian_check(ext, inverse["inner_product"], lap) if inverse["exists"] \
        else {"holds": False}
    operators = {
        "dims": do.operator_dims(c, ext, A, A, JET_ORDERS),
        "basis_size": len(do.quaternion_operator_basis(c)),
        "basis_span_dim": do.span_of(do.quaternion_operator_basis(c), H.dim, H.dim).dim,
        "relations": do.verify_relations(c),
        "orders": orders,
        "laplacian_is_commutator": lap == do.commutator(ops["dj"], ops["di"]),
        "laplacian_matrix": matrix_json(lap),
        "inner_product_from_metric": {
            "exists": inverse["exists"],
            "solution_dim": inverse.get("solution_dim"),
            "matrix": matrix_json(inverse["inner_product"]) if inverse["exists"] else None,
        },
        "laplacian_identity": {"holds": lap_check["holds"],
                               "pairs_checked": lap_check.get("pairs_checked", 0)},
    }
    conn = do.connections(c, A)
    return {
        "example": "quaternion",
        "calculus": summary,
        "structure_relations": relations,
        "bimodule_relations": signs,
        "exterior": exterior,
        "jets": jets,
        "operators": operators,
        "connections_on_A": {"exists": conn["exists"], "affine_dim": conn["affine_dim"]},
        "flatness": {"Omega1_right": hom.is_flat(c.omega1, "right")["flat"],
                     "Omega1_left": hom.is_flat(c.omega1, "left")["flat"]},
    }


# ---------------------------------------------------------------- dual numbers

TOR_DEPTH = 5


def infinitesimal_report(c: Calculus | None = None, ext: ex.ExteriorAlgebra | None = None) -> dict:
    c = c or infinitesimal_calculus()
    ext = ext or ex.maximal_exterior(c, 3)
    D = c.algebra
    K = residue_module(D)
    summary = calculus_summary(c)
    summary["N_generator"] = "t (x) t"
    dt = c.d_of(D.basis_vector(1))
    relations = {"dt_nonzero": not la.is_zero(dt),
                 "t.dt = 0": la.is_zero(c.omega1.left[1] * dt),
                 "(dt).t = 0": la.is_zero(c.omega1.right[1] * dt)}

    j1K = jt.jet1_module(c, K)
    X = c.omega1
    J1_iota = jt.J1_functor(c, c.Omega1(X), c.J1_of(X), jt.iota1_map(c, X))
    residue = {
        "dim_J1": j1K.dim,
        "one_jet_sequence": j1K.extras["exactness"],
        "dim_N_tensor_E": j1K.extras["N_tensor_E_dim"],
        "dim_N_image_in_A_tensor_E": j1K.extras["N_image"].dim,
        "dim_kernel_N_tensor_E_to_A_tensor_E": (j1K.extras["N_tensor_E_dim"]
                                                - j1K.extras["N_image"].dim),
        "dim_N_d_of_E": j1K.extras["N_kernel"].dim,
        "tor_J1A_E": hom.tor_dims(c.J1, K, 1)[1],
        "connection_exists": do.connections(c, K)["exists"],
    }
    tor = {
        "depth": TOR_DEPTH,
        "dims": hom.tor_dims(K, K, TOR_DEPTH),
        "dims_greedy": hom.tor_dims(K, K, TOR_DEPTH, "greedy"),
        "resolution_ranks": hom.free_resolution(K, TOR_DEPTH).ranks,
    }
    flat = hom.is_flat(c.omega1, "right")
    left_exactness = {
        "J1_of_iota_Omega1_kernel_dim": la.kernel(J1_iota).dim,
        "iota_Omega1_injective": la.rank(jt.iota1_map(c, X)) == c.Omega1(X).dim,
        "Omega1_right_flat": flat["flat"],
        "tor1_probe": flat["tor1_probe"],
    }
    universal = universal_calculus(D)
    ext_u = ex.maximal_exterior(universal, 3)
    return {
        "example": "infinitesimal",
        "calculus": summary,
        "structure_relations": relations,
        "exterior": {"truncation": ext.N, "dims": ext.dims(), "valid": ext.validate()["valid"],
                     "symmetric_dims": symmetric_dims(ext, ext.N),
                     "spencer": ex.spencer_report(ext, ext.N)},
        "residue_module": residue,
        "tor_residue_residue": tor,
        "left_exactness": left_exactness,
        "jets": jet_table(c, ext, c.A_module),
        "universal_calculus": {"dim_Omega1": universal.dim,
                               "exterior_dims": ext_u.dims(),
                               "symmetric_dims": symmetric_dims(ext_u, 3)},
    }


REPORTS = {"quaternion": quaternion_report, "infinitesimal": infinitesimal_report}
