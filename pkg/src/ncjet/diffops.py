"""Differential operators: order certificates, connections, composition and operator spaces.

A k-linear map Delta: E -> F has order at most n (of a given jet flavour)
when Delta = T o j for a left A-linear T on the n-jets; the lift T is
stored as the certificate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from flint import fmpq_mat

from . import linalg as la
from .algebra import Module, check_left_linear, hom_A, unvec
from .calculus import Calculus, free_basis_map
from .exterior import ExteriorAlgebra
from . import jets as jt


@dataclass
class Certificate:
    order: int
    flavor: str
    lift: fmpq_mat                 # left-linear T: jets -> F
    jet: jt.JetSpace
    solution_dim: int              # dimension of the space of lifts of this operator


@dataclass
class DiffOp:
    domain: Module
    codomain: Module
    matrix: fmpq_mat
    name: str = ""
    certificate: Certificate | None = field(default=None, repr=False)

    def __matmul__(self, other: "DiffOp") -> fmpq_mat:
        return self.matrix * other.matrix


def _vec_rows(T_rows: int, J: jt.JetSpace, F: Module) -> tuple[fmpq_mat, int]:
    """Equations for left linearity of a row-major vectorized T: J.carrier -> F."""
    C = J.carrier
    eqs = [la.kron(la.eye(F.dim), C.left[g].transpose()) - la.kron(F.left[g], la.eye(C.dim))
           for g in C.algebra.generators()]
    return la.vstack(eqs, ncols=F.dim * C.dim), F.dim * C.dim


def order_at_most(c: Calculus, ext: ExteriorAlgebra | None, delta: fmpq_mat, E: Module,
                  F: Module, n: int, flavor: str = "holonomic") -> Certificate | None:
    """A left-linear lift T with T o j^n = delta, or None if delta has no such lift."""
    if (delta.nrows(), delta.ncols()) != (F.dim, E.dim):
        raise ValueError("operator matrix has the wrong shape")
    J = jt.jet_space(flavor, c, ext, E, n)
    hom, m = _vec_rows(F.dim, J, F)
    prolong = la.kron(la.eye(F.dim), J.prolongation.transpose())
    system = la.vstack([hom, prolong], ncols=m)
    rhs = la.vstack([la.zeros(hom.nrows(), 1), la.column(delta.entries())], ncols=1)
    sol, ker = la.solve_affine(system, rhs)
    if sol is None:
        return None
    T = unvec(sol, F.dim, J.dim)
    assert T * J.prolongation == delta
    return Certificate(n, flavor, T, J, ker.dim)


def order(c: Calculus, ext: ExteriorAlgebra | None, delta: fmpq_mat, E: Module, F: Module,
          max_n: int, flavor: str = "holonomic") -> int | None:
    """Minimal order <= max_n by bisection (Diff^n increases with n), or None."""
    if order_at_most(c, ext, delta, E, F, max_n, flavor) is None:
        return None
    lo, hi = -1, max_n            # order_at_most fails at lo (or lo = -1), succeeds at hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if order_at_most(c, ext, delta, E, F, mid, flavor) is None:
            lo = mid
        else:
            hi = mid
    return hi


def classify(c: Calculus, ext: ExteriorAlgebra | None, op: DiffOp, max_n: int,
             flavor: str = "holonomic") -> DiffOp:
    n = order(c, ext, op.matrix, op.domain, op.codomain, max_n, flavor)
    if n is not None:
        op.certificate = order_at_most(c, ext, op.matrix, op.domain, op.codomain, n, flavor)
    return op


def first_order_criterion(c: Calculus, delta: fmpq_mat, E: Module, F: Module) -> bool:
    """sum n_i Delta(e_i) = 0 for every sum n_i (x) e_i in N_d(E) (inside A (x) E)."""
    A = c.algebra
    NE = jt.jet1_module(c, E).extras["N_kernel"]
    if NE.dim == 0:
        return True
    cols = [la.col(F.left[a] * delta, e) for a in range(A.dim) for e in range(E.dim)]
    lift_u = la.hstack(cols, nrows=F.dim)
    return la.is_zero(lift_u * NE.matrix())


def universal_lift(c: Calculus, delta: fmpq_mat, E: Module, F: Module) -> fmpq_mat:
    """[a (x) b] (x) e |-> a Delta(b e) on J^1E (well defined when N_d(E) is killed)."""
    A = c.algebra
    J = c.J1_of(E)
    cols = []
    for a in range(A.dim):
        for b in range(A.dim):
            for e in range(E.dim):
                cols.append(F.left[a] * delta * la.col(E.left[b], e))
    plain = la.hstack(cols, nrows=F.dim)
    return plain * la.kron(c.J1.sect, la.eye(E.dim)) * J.sect


# ---------------------------------------------------------------- transforming certificates

def restrict_certificate(c: Calculus, ext: ExteriorAlgebra | None, cert: Certificate,
                         delta: fmpq_mat, F: Module, to: str) -> Certificate | None:
    """nonholonomic -> semiholonomic (along the inclusion) -> holonomic (along h^n)."""
    E = cert.jet.base
    n = cert.order
    if cert.flavor == "nonholonomic" and to == "semiholonomic":
        J = jt.semiholonomic(c, E, n)
        T = cert.lift * J.embed
    elif cert.flavor == "semiholonomic" and to == "holonomic":
        h = jt.semiholonomic_factorization(c, ext, E, n)
        if h is None:
            return None
        J = jt.holonomic(c, ext, E, n)
        T = cert.lift * h
    else:
        raise ValueError(f"cannot restrict a {cert.flavor} certificate to {to}")
    if T * J.prolongation != delta or not check_left_linear(T, J.carrier, F):
        return None
    return Certificate(n, to, T, J, -1)


# ---------------------------------------------------------------- connections

@dataclass
class Connection:
    E: Module
    nabla: fmpq_mat
    splitting: fmpq_mat


def connections(c: Calculus, E: Module) -> dict:
    """Left-linear left splittings s of 0 -> Omega^1(E) -> J^1E (s o iota = id), i.e. connections."""
    J = c.J1_of(E)
    O = c.Omega1(E)
    iota = jt.iota1_map(c, E)
    f, m = O.dim, J.dim
    eqs = [la.kron(la.eye(f), J.left[g].transpose()) - la.kron(O.left[g], la.eye(m))
           for g in c.algebra.generators()]
    hom = la.vstack(eqs, ncols=f * m)
    split = la.kron(la.eye(f), iota.transpose())
    system = la.vstack([hom, split], ncols=f * m)
    rhs = la.vstack([la.zeros(hom.nrows(), 1), la.column(la.eye(f).entries())], ncols=1)
    sol, ker = la.solve_affine(system, rhs)
    if sol is None:
        return {"exists": False, "affine_dim": None, "sample": None}
    s = unvec(sol, f, m)
    nabla = s * jt.j1_map(c, E)
    return {"exists": True, "affine_dim": ker.dim, "sample": Connection(E, nabla, s)}


def splitting_from_connection(c: Calculus, E: Module, nabla: fmpq_mat) -> fmpq_mat:
    """s = rho_E + nabla o pi^{1,0}_E."""
    return jt.rho_map(c, E) + nabla * jt.pi10_map(c, E)


def connection_from_splitting(c: Calculus, E: Module, s: fmpq_mat) -> fmpq_mat:
    return s * jt.j1_map(c, E)


def is_connection(c: Calculus, E: Module, nabla: fmpq_mat) -> bool:
    from .exterior import connection_leibniz_failures
    return not connection_leibniz_failures(c, E, nabla)


# ---------------------------------------------------------------- composition

def compose(c: Calculus, ext: ExteriorAlgebra | None, op2: DiffOp, op1: DiffOp) -> DiffOp:
    """op2 o op1 with lift T2 o J^m(T1) o l^{m,n} (holonomic) or T2 o J^(m)(T1) (nonholonomic)."""
    if op1.codomain is not op2.domain:
        raise ValueError("composition: codomain of the first operator is not the domain of the second")
    c1, c2 = op1.certificate, op2.certificate
    if c1 is None or c2 is None:
        raise ValueError("composition needs certified operators")
    if c1.flavor != c2.flavor:
        raise ValueError("certificates of different flavours")
    E, F, G = op1.domain, op1.codomain, op2.codomain
    m, n = c2.order, c1.order
    if c1.flavor == "holonomic":
        X = jt.holonomic(c, ext, E, n).carrier
        JmT1 = jt.holonomic_functor(c, ext, X, F, c1.lift, m)
        lift = c2.lift * JmT1 * jt.l_mn(c, ext, E, m, n)
    elif c1.flavor == "nonholonomic":
        X = jt.nonholonomic(c, E, n).carrier
        lift = c2.lift * jt.Jk_functor(c, X, F, c1.lift, m)
    else:
        raise ValueError("composition is implemented for holonomic and nonholonomic lifts")
    J = jt.jet_space(c1.flavor, c, ext, E, m + n)
    matrix = op2.matrix * op1.matrix
    if lift * J.prolongation != matrix:
        raise jt.JetError("composite lift does not reproduce the composite operator")
    if not check_left_linear(lift, J.carrier, G):
        raise jt.JetError("composite lift is not left linear")
    cert = Certificate(m + n, c1.flavor, lift, J, -1)
    return DiffOp(E, G, matrix, f"{op2.name}o{op1.name}", cert)


# ---------------------------------------------------------------- operator spaces

def operator_space(c: Calculus, ext: ExteriorAlgebra | None, E: Module, F: Module, n: int,
                   flavor: str = "holonomic") -> dict:
    """Diff^n(E, F) as the image of hom_A(J^nE, F) under T |-> T o j^n."""
    J = jt.jet_space(flavor, c, ext, E, n)
    hom = hom_A(J.carrier, F)
    ev = la.kron(la.eye(F.dim), J.prolongation.transpose())      # vec(T) |-> vec(T o j)
    images = ev * hom.matrix() if hom.dim else la.zeros(F.dim * E.dim, 0)
    span = la.image(images) if images.ncols() else la.Subspace.zero(F.dim * E.dim)
    basis = [unvec(la.col(span.matrix(), k), F.dim, E.dim) for k in range(span.dim)]
    return {"order": n, "flavor": flavor, "dim": span.dim, "hom_dim": hom.dim,
            "space": span, "basis": basis}


def operator_dims(c: Calculus, ext: ExteriorAlgebra | None, E: Module, F: Module,
                  max_n: int, flavor: str = "holonomic") -> list[int]:
    return [operator_space(c, ext, E, F, n, flavor)["dim"] for n in range(max_n + 1)]


def span_of(ops: Sequence[fmpq_mat], rows: int, cols: int) -> la.Subspace:
    return la.Subspace.span(la.hstack([la.column(m.entries()) for m in ops], nrows=rows * cols),
                            rows * cols)


# ---------------------------------------------------------------- partial derivatives

def partial_derivatives(c: Calculus, free_basis: Sequence[str]) -> dict[str, fmpq_mat]:
    """d a = sum_l del_l(a) dx_l for a left basis {dx_l} of Omega^1; del_l as matrices on A."""
    A = c.algebra
    elems = [A.basis_vector(A.basis.index(x)) for x in free_basis]
    Fm = free_basis_map(c, elems)
    if Fm.nrows() != Fm.ncols() or la.rank(Fm) != Fm.ncols():
        raise ValueError(f"Omega^1 is not left free on d{list(free_basis)}")
    coords = Fm.inv() * c.d
    n = A.dim
    out = {}
    for l, x in enumerate(free_basis):
        out[x] = la.submatrix(coords, rows=range(l * n, (l + 1) * n))
    return out


def commutator(a: fmpq_mat, b: fmpq_mat) -> fmpq_mat:
    return a * b - b * a


def anticommutator(a: fmpq_mat, b: fmpq_mat) -> fmpq_mat:
    return a * b + b * a


def quaternion_operators(c: Calculus) -> dict[str, fmpq_mat]:
    A = c.algebra
    d = partial_derivatives(c, ["i", "j"])
    ops = {"di": d["i"], "dj": d["j"]}
    for q in A.basis:
        ops[f"R{q}"] = A.R[A.basis.index(q)]
        ops[f"L{q}"] = A.L[A.basis.index(q)]
    return ops


def verify_relations(c: Calculus) -> dict[str, bool]:
    """The relations of the quaternion operator algebra, one flag per relation."""
    o = quaternion_operators(c)
    I, Z = la.eye(4), la.zeros(4, 4)
    di, dj = o["di"], o["dj"]
    return {
        "di^2 = 0": di * di == Z,
        "dj^2 = 0": dj * dj == Z,
        "{di,dj} = 0": anticommutator(di, dj) == Z,
        "{di,Ri} = 1": anticommutator(di, o["Ri"]) == I,
        "{dj,Rj} = 1": anticommutator(dj, o["Rj"]) == I,
        "{di,Rj} = 0": anticommutator(di, o["Rj"]) == Z,
        "{dj,Ri} = 0": anticommutator(dj, o["Ri"]) == Z,
        "[dj,Rk] = Ri": commutator(dj, o["Rk"]) == o["Ri"],
        "[di,Rk] = -Rj": commutator(di, o["Rk"]) == -o["Rj"],
        "2 dj di = [dj,di]": 2 * (dj * di) == commutator(dj, di),
    }


def quaternion_operator_basis(c: Calculus) -> list[fmpq_mat]:
    """R_q, del_p o R_q, del_i o del_j o R_q for q in 1,i,j,k and p in i,j."""
    o = quaternion_operators(c)
    out = []
    for q in c.algebra.basis:
        out.append(o[f"R{q}"])
    for p in ("di", "dj"):
        for q in c.algebra.basis:
            out.append(o[p] * o[f"R{q}"])
    for q in c.algebra.basis:
        out.append(o["di"] * o["dj"] * o[f"R{q}"])
    return out


# ---------------------------------------------------------------- metric and Laplacian

def metric_inverse(ext: ExteriorAlgebra, metric: fmpq_mat) -> dict:
    """Bimodule maps (,): Omega^1 (x)_A Omega^1 -> A with (alpha, g1) g2 = alpha = g1 (g2, alpha).

    Returns the affine solution space (a particular solution and its dimension).
    """
    c = ext.calculus
    A, n = c.algebra, c.algebra.dim
    O = ext.omega[1]
    P = ext.pair(1, 1)
    p = P.dim
    g = la.to_list(P.sect * metric)                    # plain coefficients c_{ab}
    terms = [(a, b, g[a * O.dim + b]) for a in range(O.dim) for b in range(O.dim)
             if g[a * O.dim + b] != 0]
    rows, rhs = [], []
    # unknowns: B[r, s], index r*p + s
    for al in range(O.dim):
        alpha = la.unit_vector(O.dim, al)
        left_pairs = [(P.pure(alpha, la.unit_vector(O.dim, a)), O.left, b, cab)
                      for a, b, cab in terms]
        right_pairs = [(P.pure(la.unit_vector(O.dim, b), alpha), O.right, a, cab)
                       for a, b, cab in terms]
        for pairs in (left_pairs, right_pairs):
            eq = [[la.scalar(0)] * (n * p) for _ in range(O.dim)]
            for vec_s, acts, other, cab in pairs:
                vs = la.to_list(vec_s)
                for r in range(n):
                    img = la.to_list(acts[r] * la.unit_vector(O.dim, other))
                    for s in range(p):
                        if vs[s] == 0:
                            continue
                        for t in range(O.dim):
                            if img[t] != 0:
                                eq[t][r * p + s] += cab * vs[s] * img[t]
            rows += eq
            rhs += la.to_list(alpha)
    bimod = []
    for gi in A.generators():
        bimod.append(la.kron(la.eye(n), P.left[gi].transpose()) - la.kron(A.L[gi], la.eye(p)))
        bimod.append(la.kron(la.eye(n), P.right[gi].transpose()) - la.kron(A.R[gi], la.eye(p)))
    system = la.vstack([la.from_rows(rows, n * p)] + bimod, ncols=n * p)
    target = la.vstack([la.column(rhs), la.zeros(sum(m.nrows() for m in bimod), 1)], ncols=1)
    sol, ker = la.solve_affine(system, target)
    if sol is None:
        return {"exists": False}
    return {"exists": True, "inner_product": unvec(sol, n, p), "solution_dim": ker.dim}


def quaternion_metric(ext: ExteriorAlgebra) -> fmpq_mat:
    """di (x) dj - dj (x) di in Omega^1 (x)_A Omega^1."""
    c = ext.calculus
    A = c.algebra
    P = ext.pair(1, 1)
    di = c.d_of(A.basis_vector(A.basis.index("i")))
    dj = c.d_of(A.basis_vector(A.basis.index("j")))
    return P.pure(di, dj) - P.pure(dj, di)


def laplacian_check(ext: ExteriorAlgebra, inner: fmpq_mat, laplacian: fmpq_mat) -> dict:
    """Delta(ab) = Delta(a) b + a Delta(b) + 2 (da, db) on all pairs of basis elements."""
    c = ext.calculus
    A, n = c.algebra, c.algebra.dim
    P = ext.pair(1, 1)
    fails = []
    for a in range(n):
        for b in range(n):
            ea, eb = A.basis_vector(a), A.basis_vector(b)
            lhs = laplacian * la.column(A.mult[a][b])
            La = la.to_list(laplacian * la.column(ea))
            Lb = la.to_list(laplacian * la.column(eb))
            pair = inner * P.pure(la.col(c.d, a), la.col(c.d, b))
            rhs = la.column(A.mul_vec(La, eb)) + la.column(A.mul_vec(ea, Lb)) + 2 * pair
            if lhs != rhs:
                fails.append([A.basis[a], A.basis[b]])
    return {"holds": not fails, "failures": fails, "pairs_checked": n * n}
