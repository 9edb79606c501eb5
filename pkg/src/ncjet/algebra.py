"""Finite-dimensional algebras, their modules, and tensor products over A.

An algebra is given by structure constants ``mult[i][j]`` = coordinates of
``e_i e_j``.  A module stores one action matrix per algebra basis element:
``left[i] @ v`` is ``e_i . v`` and ``right[i] @ v`` is ``v . e_i``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from flint import fmpq, fmpq_mat

from . import linalg as la
from .linalg import Subspace, format_scalar, scalar


class AlgebraError(ValueError):
    pass


class Algebra:
    def __init__(self, name: str, basis: Sequence[str], unit: Sequence, mult: Sequence):
        self.name = name
        self.basis = list(basis)
        self.dim = n = len(self.basis)
        self.unit = [scalar(x) for x in unit]
        if len(self.unit) != n or len(mult) != n or any(len(r) != n for r in mult):
            raise AlgebraError("structure constant table has the wrong shape")
        self.mult = [[[scalar(x) for x in mult[i][j]] for j in range(n)] for i in range(n)]
        if any(len(v) != n for r in self.mult for v in r):
            raise AlgebraError("structure constant vectors have the wrong length")
        # left regular action L_i e_j = e_i e_j, right regular R_i e_j = e_j e_i
        self.L = [la.from_columns([self.mult[i][j] for j in range(n)], n) for i in range(n)]
        self.R = [la.from_columns([self.mult[j][i] for j in range(n)], n) for i in range(n)]
        self._gens = None

    def __repr__(self):
        return f"Algebra({self.name!r}, dim={self.dim})"

    # -- elements
    def element(self, x) -> "AlgebraElement":
        if isinstance(x, AlgebraElement):
            return x
        if isinstance(x, str):
            return AlgebraElement(self, self.basis_vector(self.basis.index(x)))
        return AlgebraElement(self, tuple(scalar(v) for v in x))

    def basis_vector(self, i: int) -> tuple:
        return tuple(fmpq(1) if k == i else fmpq(0) for k in range(self.dim))

    def one(self) -> "AlgebraElement":
        return AlgebraElement(self, tuple(self.unit))

    def mul_vec(self, a: Sequence, b: Sequence) -> list:
        out = [fmpq(0)] * self.dim
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                if y == 0:
                    continue
                c = x * y
                for k, z in enumerate(self.mult[i][j]):
                    if z != 0:
                        out[k] += c * z
        return out

    def left_matrix(self, a: Sequence) -> fmpq_mat:
        return combine(self.L, a, self.dim)

    def right_matrix(self, a: Sequence) -> fmpq_mat:
        return combine(self.R, a, self.dim)

    def unit_column(self) -> fmpq_mat:
        return la.column(self.unit)

    def generators(self) -> list[int]:
        """Indices of basis elements generating A as a unital algebra (greedy)."""
        if self._gens is None:
            n = self.dim
            gens: list[int] = []
            span = Subspace.span(self.unit_column())
            for i in range(n):
                if span.dim == n:
                    break
                if span.contains(la.unit_vector(n, i)):
                    continue
                gens.append(i)
                # close under left multiplication by the chosen generators
                while True:
                    vecs = [span.matrix()] + [self.L[g] * span.matrix() for g in gens]
                    new = Subspace.span(la.hstack(vecs))
                    if new.dim == span.dim:
                        break
                    span = new
            self._gens = gens
        return self._gens

    def opposite(self) -> "Algebra":
        n = self.dim
        return Algebra(self.name + "^op", self.basis, self.unit,
                       [[self.mult[j][i] for j in range(n)] for i in range(n)])

    # -- serialization
    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "basis": self.basis,
            "unit": [format_scalar(x) for x in self.unit],
            "mult": [[[format_scalar(x) for x in v] for v in row] for row in self.mult],
        }

    @staticmethod
    def from_json(data: dict) -> "Algebra":
        try:
            alg = Algebra(data.get("name", "A"), data["basis"], data["unit"], data["mult"])
        except (KeyError, TypeError) as exc:
            raise AlgebraError(f"malformed algebra spec: {exc}") from exc
        if "dim" in data and data["dim"] != alg.dim:
            raise AlgebraError("declared dim does not match basis")
        return alg


def combine(mats: Sequence[fmpq_mat], coeffs: Sequence, n: int) -> fmpq_mat:
    out = fmpq_mat(mats[0].nrows(), mats[0].ncols()) if mats else fmpq_mat(n, n)
    for m, c in zip(mats, coeffs):
        if c != 0:
            out += scalar(c) * m
    return out


@dataclass(frozen=True)
class AlgebraElement:
    algebra: Algebra
    coords: tuple

    def _check(self, other):
        if not isinstance(other, AlgebraElement) or other.algebra is not self.algebra:
            raise AlgebraError("elements of different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.coords))

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        c = scalar(other)
        return AlgebraElement(self.algebra, tuple(c * a for a in self.coords))

    __rmul__ = lambda self, other: self * other  # scalar * element

    def __eq__(self, other):
        return isinstance(other, AlgebraElement) and other.algebra is self.algebra \
            and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def column(self) -> fmpq_mat:
        return la.column(self.coords)

    def __repr__(self):
        terms = [f"{format_scalar(c)}*{b}" for c, b in zip(self.coords, self.algebra.basis) if c != 0]
        return " + ".join(terms) or "0"


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    a._check(b)
    return AlgebraElement(a.algebra, tuple(a.algebra.mul_vec(a.coords, b.coords)))


def commutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return mul(a, b) - mul(b, a)


def anticommutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return mul(a, b) + mul(b, a)


def validate_algebra(alg: Algebra) -> dict:
    """Exhaustive associativity and unit check on basis elements."""
    n = alg.dim
    failures = []
    e = [alg.basis_vector(i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            ij = alg.mul_vec(e[i], e[j])
            for k in range(n):
                left = alg.mul_vec(ij, e[k])
                right = alg.mul_vec(e[i], alg.mul_vec(e[j], e[k]))
                if left != right:
                    failures.append({"kind": "associativity",
                                     "witness": [alg.basis[i], alg.basis[j], alg.basis[k]]})
    unital = True
    for i in range(n):
        if alg.mul_vec(alg.unit, e[i]) != list(e[i]) or alg.mul_vec(e[i], alg.unit) != list(e[i]):
            unital = False
            failures.append({"kind": "unit", "witness": [alg.basis[i]]})
    associative = not any(f["kind"] == "associativity" for f in failures)
    return {"associative": associative, "unital": unital, "failures": failures}


# ---------------------------------------------------------------- modules

class Module:
    """A finite-dimensional module with optional left and right A-actions."""

    def __init__(self, algebra: Algebra, dim: int, left=None, right=None, name: str = ""):
        self.algebra = algebra
        self.dim = dim
        self.left = None if left is None else list(left)
        self.right = None if right is None else list(right)
        self.name = name
        for acts in (self.left, self.right):
            if acts is None:
                continue
            if len(acts) != algebra.dim:
                raise AlgebraError("need one action matrix per algebra basis element")
            if any((m.nrows(), m.ncols()) != (dim, dim) for m in acts):
                raise AlgebraError("action matrix has the wrong shape")

    def __repr__(self):
        kind = "Bimodule" if self.is_bimodule else ("LeftModule" if self.left else "RightModule")
        return f"{kind}({self.name or '?'}, dim={self.dim})"

    @property
    def is_bimodule(self) -> bool:
        return self.left is not None and self.right is not None

    def left_matrix(self, a: Sequence) -> fmpq_mat:
        return combine(self.left, a, self.dim)

    def right_matrix(self, a: Sequence) -> fmpq_mat:
        return combine(self.right, a, self.dim)

    def validate(self) -> list[str]:
        """Check the module axioms on all pairs of basis elements."""
        A, n = self.algebra, self.algebra.dim
        fails = []
        one = la.eye(self.dim)
        if self.left is not None:
            if self.left_matrix(A.unit) != one:
                fails.append("left unit")
            for i in range(n):
                for j in range(n):
                    if self.left[i] * self.left[j] != self.left_matrix(A.mult[i][j]):
                        fails.append(f"left action {A.basis[i]},{A.basis[j]}")
        if self.right is not None:
            if self.right_matrix(A.unit) != one:
                fails.append("right unit")
            for i in range(n):
                for j in range(n):
                    if self.right[j] * self.right[i] != self.right_matrix(A.mult[i][j]):
                        fails.append(f"right action {A.basis[i]},{A.basis[j]}")
        if self.is_bimodule:
            for i in range(n):
                for j in range(n):
                    if self.left[i] * self.right[j] != self.right[j] * self.left[i]:
                        fails.append(f"bimodule compatibility {A.basis[i]},{A.basis[j]}")
        return fails

    def forget_right(self) -> "Module":
        return Module(self.algebra, self.dim, self.left, None, self.name)

    def as_left_over_opposite(self) -> "Module":
        """A right A-module viewed as a left module over opposite(A)."""
        if self.right is None:
            raise AlgebraError("module has no right action")
        return Module(self.algebra.opposite(), self.dim, self.right, None, self.name + "^op")

    def to_json(self) -> dict:
        def enc(ms):
            return [[[format_scalar(x) for x in row] for row in m.tolist()] for m in ms]
        out = {"dim": self.dim}
        if self.left is not None:
            out["left_action"] = enc(self.left)
        if self.right is not None:
            out["right_action"] = enc(self.right)
        return out

    @staticmethod
    def from_json(algebra: Algebra, data: dict, name: str = "E") -> "Module":
        try:
            dim = int(data["dim"])

            def dec(ms):
                return None if ms is None else [la.from_rows(m, dim) if m else la.zeros(dim, dim)
                                                for m in ms]
            left, right = dec(data.get("left_action")), dec(data.get("right_action"))
            if left is None and right is None:
                raise KeyError("left_action or right_action")
        except (KeyError, TypeError, ValueError) as exc:
            raise AlgebraError(f"malformed module spec: {exc}") from exc
        return Module(algebra, dim, left, right, name)


def regular_bimodule(A: Algebra) -> Module:
    return Module(A, A.dim, A.L, A.R, name="A")


def free_module(A: Algebra, rank: int) -> Module:
    """A^rank with coordinate-wise actions; index (copy l, basis i) -> l*dim + i."""
    reg = regular_bimodule(A)
    out = reg
    for _ in range(rank - 1):
        out = direct_sum(out, reg)
    if rank == 0:
        z = la.zeros(0, 0)
        return Module(A, 0, [z] * A.dim, [z] * A.dim, name="0")
    out.name = f"A^{rank}"
    return out


def direct_sum(M: Module, N: Module) -> Module:
    if M.algebra is not N.algebra:
        raise AlgebraError("direct sum over different algebras")
    left = right = None
    if M.left is not None and N.left is not None:
        left = [la.direct_sum_matrix(a, b) for a, b in zip(M.left, N.left)]
    if M.right is not None and N.right is not None:
        right = [la.direct_sum_matrix(a, b) for a, b in zip(M.right, N.right)]
    return Module(M.algebra, M.dim + N.dim, left, right, name=f"{M.name}+{N.name}")


def restrict_actions(acts, incl: fmpq_mat, space: Subspace):
    if acts is None:
        return None
    out = []
    for m in acts:
        img = m * incl
        if not space.contains(img):
            return None
        out.append(space.coords(img))
    return out


class SubModule(Module):
    """The module structure on an invariant subspace of ``ambient``."""

    def __init__(self, ambient: Module, space: Subspace, name: str = "", require_left=True):
        if space.ambient != ambient.dim:
            raise AlgebraError("subspace lives in a different module")
        incl = space.matrix()
        left = restrict_actions(ambient.left, incl, space)
        if require_left and ambient.left is not None and left is None:
            raise AlgebraError("subspace is not a left submodule")
        right = restrict_actions(ambient.right, incl, space)
        super().__init__(ambient.algebra, space.dim, left, right, name or f"sub({ambient.name})")
        self.ambient = ambient
        self.space = space
        self.incl = incl

    def coords(self, v: fmpq_mat) -> fmpq_mat:
        return self.space.coords(v)


class QuotientModule(Module):
    """ambient / sub with canonical projection and section."""

    def __init__(self, ambient: Module, sub: Subspace, name: str = ""):
        q = la.quotient(ambient.dim, sub)
        left = None if ambient.left is None else [q.proj * m * q.sect for m in ambient.left]
        right = None if ambient.right is None else [q.proj * m * q.sect for m in ambient.right]
        for acts in (ambient.left, ambient.right):
            if acts is not None:
                for m in acts:
                    if not sub.contains(m * sub.matrix()):
                        raise AlgebraError("quotient by a non-invariant subspace")
        super().__init__(ambient.algebra, q.dim, left, right, name or f"{ambient.name}/N")
        self.ambient = ambient
        self.sub = sub
        self.proj = q.proj
        self.sect = q.sect


class TensorSpace(Module):
    """M (x)_A N as a quotient of the plain tensor product M (x) N.

    ``proj`` maps the plain carrier (index p*dim N + q) onto the quotient and
    ``sect`` lifts back to a representative.  Only algebra generators are
    needed for the relations since m.(ab) (x) n - m (x) ab.n telescopes.
    """

    def __init__(self, M: Module, N: Module, name: str = ""):
        if M.algebra is not N.algebra:
            raise AlgebraError("tensor over different algebras")
        if M.right is None or N.left is None:
            raise AlgebraError("tensor over A needs a right action on M and a left action on N")
        A = M.algebra
        m, n = M.dim, N.dim
        la.check_carrier(m * n, f"{M.name} (x) {N.name}")
        Im, In = la.eye(m), la.eye(n)
        rels = [(la.kron(M.right[g], In) - la.kron(Im, N.left[g])).transpose()
                for g in A.generators()]
        rel = Subspace.row_span(la.vstack(rels, ncols=m * n)) if rels else Subspace.zero(m * n)
        q = la.quotient(m * n, rel)
        left = None if M.left is None else [q.proj * la.kron(x, In) * q.sect for x in M.left]
        right = None if N.right is None else [q.proj * la.kron(Im, x) * q.sect for x in N.right]
        super().__init__(A, q.dim, left, right, name or f"({M.name}x{N.name})")
        self.first, self.second = M, N
        self.relations = rel
        self.proj, self.sect = q.proj, q.sect

    def pure(self, u: fmpq_mat, v: fmpq_mat) -> fmpq_mat:
        """Class of u (x) v for column vectors u in M, v in N."""
        return self.proj * la.kron(u, v)


def tensor_over_A(M: Module, N: Module, name: str = "") -> TensorSpace:
    return TensorSpace(M, N, name)


def check_right_linear(f: fmpq_mat, M: Module, M2: Module) -> bool:
    return all(f * a == b * f for a, b in zip(M.right, M2.right))


def check_left_linear(f: fmpq_mat, M: Module, M2: Module) -> bool:
    return all(f * a == b * f for a, b in zip(M.left, M2.left))


def tensor_map(src: TensorSpace, dst: TensorSpace, f: fmpq_mat, g: fmpq_mat,
               check: bool = False) -> fmpq_mat:
    """f (x)_A g from src = M (x)_A N to dst = M' (x)_A N'.

    f must be right A-linear and g left A-linear for this to be well defined.
    """
    plain = la.kron(f, g)
    if check and not src.relations.dim == 0:
        rel_img = dst.proj * plain * src.relations.matrix()
        if not la.is_zero(rel_img):
            raise AlgebraError("tensor_map is not well defined on the relations")
    return dst.proj * plain * src.sect


def nested_map(outer: TensorSpace, target: TensorSpace, phi: fmpq_mat,
               pair: TensorSpace) -> fmpq_mat:
    """B1 (x)_A (B2 (x)_A X) -> B3 (x)_A X induced by a bimodule map phi.

    ``pair`` is B1 (x)_A B2 (where phi is defined, phi: pair -> B3),
    ``outer`` is B1 (x)_A inner with inner = B2 (x)_A X, and ``target`` is
    B3 (x)_A X.
    """
    inner = outer.second
    if not isinstance(inner, TensorSpace):
        raise AlgebraError("nested_map needs an inner tensor space")
    if pair.first is not outer.first or pair.second is not inner.first:
        raise AlgebraError("nested_map: factor mismatch")
    if target.second is not inner.second:
        raise AlgebraError("nested_map: target has a different base module")
    d1 = outer.first.dim
    X = inner.second
    Phi = phi * pair.proj                                   # plain B1 (x) B2 -> B3
    plain = target.proj * la.kron(Phi, la.eye(X.dim)) * la.kron(la.eye(d1), inner.sect)
    return plain * outer.sect


def contract(T: TensorSpace, phi: fmpq_mat) -> fmpq_mat:
    """B (x)_A X -> X, b (x) x |-> phi(b).x for a right-linear phi: B -> A."""
    B, X = T.first, T.second
    blocks = [X.left_matrix(la.to_list(la.col(phi, k))) for k in range(B.dim)]
    return la.hstack(blocks, nrows=X.dim) * T.sect


def hom_space(M: Module, N: Module, left: bool = True, right: bool = False) -> Subspace:
    """A-linear maps M -> N as a subspace of row-major vectorized dim N x dim M matrices."""
    if M.algebra is not N.algebra:
        raise AlgebraError("hom between modules over different algebras")
    m, n = M.dim, N.dim
    eqs = []
    gens = M.algebra.generators()
    if left:
        for g in gens:
            eqs.append(la.kron(la.eye(n), M.left[g].transpose()) - la.kron(N.left[g], la.eye(m)))
    if right:
        for g in gens:
            eqs.append(la.kron(la.eye(n), M.right[g].transpose()) - la.kron(N.right[g], la.eye(m)))
    if not eqs:
        return Subspace.full(m * n)
    return la.kernel(la.vstack(eqs, ncols=m * n))


def unvec(v: fmpq_mat, rows: int, cols: int) -> fmpq_mat:
    return fmpq_mat(rows, cols, la.to_list(v))


def vec(x: fmpq_mat) -> fmpq_mat:
    return la.column(x.entries())


def hom_A(M: Module, N: Module) -> Subspace:
    return hom_space(M, N, left=True)


def sub_bimodule_closure(M: Module, generators: fmpq_mat, left: bool = True,
                         right: bool = True) -> Subspace:
    """Smallest subspace containing the generator columns and closed under the actions."""
    gens = M.algebra.generators()
    acts = []
    if left and M.left is not None:
        acts += [M.left[g] for g in gens]
    if right and M.right is not None:
        acts += [M.right[g] for g in gens]
    span = Subspace.span(generators, M.dim)
    while True:
        B = span.matrix()
        new = Subspace.span(la.hstack([B] + [a * B for a in acts], nrows=M.dim), M.dim)
        if new.dim == span.dim:
            return span
        span = new


@dataclass
class ModuleMap:
    domain: Module
    codomain: Module
    matrix: fmpq_mat
    bilinear: bool = False
    name: str = field(default="")

    def __post_init__(self):
        if (self.matrix.nrows(), self.matrix.ncols()) != (self.codomain.dim, self.domain.dim):
            raise AlgebraError("ModuleMap: matrix shape mismatch")
        if self.domain.left is not None and self.codomain.left is not None:
            if not check_left_linear(self.matrix, self.domain, self.codomain):
                raise AlgebraError(f"ModuleMap {self.name}: not left A-linear")
        if self.bilinear and not check_right_linear(self.matrix, self.domain, self.codomain):
            raise AlgebraError(f"ModuleMap {self.name}: not right A-linear")

    def __call__(self, v):
        return self.matrix * v

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(other.domain, self.codomain, self.matrix * other.matrix,
                         self.bilinear and other.bilinear)


# ---------------------------------------------------------------- examples

def quaternions() -> Algebra:
    """Real quaternions over Q with basis 1, i, j, k."""
    table = {("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
             ("i", "j"): (1, "k"), ("j", "i"): (-1, "k"),
             ("j", "k"): (1, "i"), ("k", "j"): (-1, "i"),
             ("k", "i"): (1, "j"), ("i", "k"): (-1, "j")}
    names = ["1", "i", "j", "k"]
    mult = []
    for a in names:
        row = []
        for b in names:
            v = [0] * 4
            if a == "1":
                v[names.index(b)] = 1
            elif b == "1":
                v[names.index(a)] = 1
            else:
                s, c = table[(a, b)]
                v[names.index(c)] = s
            row.append(v)
        mult.append(row)
    return Algebra("quaternions", names, [1, 0, 0, 0], mult)


def dual_numbers() -> Algebra:
    """k[t]/(t^2) with basis 1, t."""
    return Algebra("dual_numbers", ["1", "t"], [1, 0],
                   [[[1, 0], [0, 1]], [[0, 1], [0, 0]]])


def upper_triangular() -> Algebra:
    """2x2 upper triangular matrices with basis e11, e12, e22."""
    names = ["e11", "e12", "e22"]
    prod = {("e11", "e11"): "e11", ("e11", "e12"): "e12", ("e12", "e22"): "e12",
            ("e22", "e22"): "e22"}
    mult = []
    for a in names:
        row = []
        for b in names:
            v = [0] * 3
            if (a, b) in prod:
                v[names.index(prod[(a, b)])] = 1
            row.append(v)
        mult.append(row)
    return Algebra("upper_triangular", names, [1, 0, 1], mult)


def residue_module(A: Algebra) -> Module:
    """The one-dimensional module k[0] over k[t]/(t^2): t acts by zero."""
    if A.dim != 2:
        raise AlgebraError("residue_module expects k[t]/(t^2)")
    one, zero = la.eye(1), la.zeros(1, 1)
    return Module(A, 1, [one, zero], [one, zero], name="k[0]")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
