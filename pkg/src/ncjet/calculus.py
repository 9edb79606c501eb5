"""First-order differential calculi as quotients of the universal calculus.

Everything is kept relative to the plain tensor square A (x) A (index
a*dim + b for e_a (x) e_b).  A calculus is determined by a sub-bimodule
N of the universal forms ker(A (x) A -> A); the one-jet bimodule is
(A (x) A)/N and the forms are the image of the universal forms in it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from flint import fmpq_mat

from . import linalg as la
from .algebra import (Algebra, AlgebraError, Module, QuotientModule, SubModule, TensorSpace,
                      regular_bimodule, sub_bimodule_closure)
from .linalg import Subspace, format_scalar


class CalculusError(ValueError):
    pass


class CalculusSpecError(CalculusError):
    """A calculus description that does not parse (as opposed to one violating the axioms)."""


def tensor_square(A: Algebra) -> Module:
    """A (x) A over the ground field, the free bimodule on one generator 1 (x) 1."""
    I = la.eye(A.dim)
    return Module(A, A.dim ** 2, [la.kron(x, I) for x in A.L], [la.kron(I, x) for x in A.R],
                  name="A(x)A")


def multiplication(A: Algebra) -> fmpq_mat:
    n = A.dim
    return la.from_columns([A.mult[a][b] for a in range(n) for b in range(n)], n)


def universal_d(A: Algebra) -> fmpq_mat:
    """d_u(f) = 1 (x) f - f (x) 1 as a map A -> A (x) A."""
    u, I = A.unit_column(), la.eye(A.dim)
    return la.kron(u, I) - la.kron(I, u)


def universal_forms(A: Algebra) -> Subspace:
    return la.kernel(multiplication(A))


class Calculus:
    """A first order calculus Omega^1 = Omega^1_u / N on A."""

    def __init__(self, A: Algebra, N: Subspace, name: str = ""):
        self.algebra = A
        self.name = name
        self.AA = tensor_square(A)
        self.universal = universal_forms(A)
        if not self.universal.contains_space(N):
            raise CalculusError("N is not contained in the universal forms")
        self.N = N
        self.J1 = QuotientModule(self.AA, N, name="J1A")
        omega_space = Subspace.span(self.J1.proj * self.universal.matrix(), self.J1.dim)
        self.omega1 = SubModule(self.J1, omega_space, name="Omega1")
        n, u = A.dim, A.unit_column()
        I = la.eye(n)
        # maps of the one-jet sequence, all on the carrier J1 = (A (x) A)/N
        self.d = self.omega1.coords(self.J1.proj * universal_d(A))
        self.p = self.omega1.coords(self.J1.proj * self.universal.matrix())
        self.pi10 = multiplication(A) * self.J1.sect
        self.j1 = self.J1.proj * la.kron(u, I)
        self.iota1 = self.omega1.incl
        idJ = la.eye(self.J1.dim)
        self.rho = self.omega1.coords(idJ - self.j1 * self.pi10)
        self.dtilde = self.omega1.coords(idJ - self.J1.proj * la.kron(I, u) * self.pi10)
        self.A_module = regular_bimodule(A)
        self._cache: dict = {}

    def __repr__(self):
        return f"Calculus({self.name or '?'}, dim Omega1={self.omega1.dim})"

    @property
    def dim(self) -> int:
        return self.omega1.dim

    def d_of(self, a: Sequence) -> fmpq_mat:
        return self.d * la.column(a)

    def form(self, coeffs: Sequence[Sequence], elems: Sequence[Sequence]) -> fmpq_mat:
        """sum_l coeffs[l] d(elems[l]) as a column in Omega^1."""
        out = la.zeros(self.dim, 1)
        for c, x in zip(coeffs, elems):
            out += self.omega1.left_matrix(c) * self.d_of(x)
        return out

    def cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def on(self, tag: str, X: Module, build):
        """Memoize a functor value on the module object X (identity, not equality)."""
        key = (tag, id(X))
        if key not in self._cache:
            self._cache[key] = (X, build())
        return self._cache[key][1]

    def tensor_with(self, B: Module, X: Module, tag: str) -> TensorSpace:
        return self.on(tag, X, lambda: TensorSpace(B, X, name=f"{tag}({X.name})"))

    def Omega1(self, X: Module) -> TensorSpace:
        """Omega^1 (x)_A X."""
        return self.tensor_with(self.omega1, X, "Omega1")

    def J1_of(self, X: Module) -> TensorSpace:
        """J^1 X = J^1 A (x)_A X."""
        return self.tensor_with(self.J1, X, "J1")


def universal_calculus(A: Algebra) -> Calculus:
    return Calculus(A, Subspace.zero(A.dim ** 2), name="universal")


def quotient_calculus(A: Algebra | Calculus, generators: fmpq_mat | Sequence[Sequence],
                      name: str = "quotient") -> Calculus:
    """Quotient of the universal calculus by the sub-bimodule generated by ``generators``.

    ``generators`` are elements of A (x) A given as columns (or a list of
    coordinate vectors of length dim(A)^2).
    """
    if isinstance(A, Calculus):
        A = A.algebra
    AA = tensor_square(A)
    if not isinstance(generators, fmpq_mat):
        generators = la.from_columns(list(generators), A.dim ** 2)
    if generators.nrows() != A.dim ** 2:
        raise CalculusError("generators must live in A (x) A")
    if not universal_forms(A).contains(generators):
        raise CalculusError("generators are not universal one-forms")
    N = sub_bimodule_closure(AA, generators)
    return Calculus(A, N, name)


def evaluation(A: Algebra, f: Sequence) -> fmpq_mat:
    """n (x) m |-> n f m as a map A (x) A -> A."""
    n = A.dim
    cols = []
    for a in range(n):
        af = A.mul_vec(A.basis_vector(a), f)
        for b in range(n):
            cols.append(A.mul_vec(af, A.basis_vector(b)))
    return la.from_columns(cols, n)


def N_f(A: Algebra, f: Sequence) -> Subspace:
    return la.intersect(universal_forms(A), la.kernel(evaluation(A, f)))


def terminal_calculus(A: Algebra, S: Iterable[Sequence], name: str = "") -> Calculus:
    """Largest calculus in which left multiplication by every f in S has order one."""
    S = [list(A.element(f).coords) for f in S]
    if not S:
        raise CalculusError("terminal calculus needs a nonempty set")
    N = la.intersect_all((N_f(A, f) for f in S), A.dim ** 2)
    c = Calculus(A, N, name or "terminal")
    c.terminal_set = S
    return c


def ideal_representation(A: Algebra, f: Sequence) -> tuple[Subspace, fmpq_mat]:
    """Image of the universal forms under n (x) m |-> n f m, with d_f = [f, .]."""
    ev = evaluation(A, f)
    img = la.image(ev * universal_forms(A).matrix())
    df = img.coords(ev * universal_d(A))
    return img, df


# ---------------------------------------------------------------- validation

def validate_calculus(c: Calculus) -> dict:
    A, n = c.algebra, c.algebra.dim
    W = c.omega1
    failures = []
    for a in range(n):
        for b in range(n):
            ab = A.mult[a][b]
            lhs = c.d_of(ab)
            rhs = W.left[a] * c.d_of(A.basis_vector(b)) + W.right[b] * c.d_of(A.basis_vector(a))
            if lhs != rhs:
                failures.append({"kind": "leibniz", "witness": [A.basis[a], A.basis[b]]})
    spans = [W.left[a] * c.d for a in range(n)]
    surj_rank = la.rank(la.hstack(spans, nrows=W.dim)) if W.dim else 0
    if surj_rank != W.dim:
        failures.append({"kind": "surjectivity", "rank": surj_rank, "dim": W.dim})
    if c.p * c.universal.coords(universal_d(A)) != c.d:
        failures.append({"kind": "p_d o d_u != d"})
    fails = W.validate()
    failures += [{"kind": "bimodule", "witness": f} for f in fails]
    return {"valid": not failures, "leibniz_ok": not any(f["kind"] == "leibniz" for f in failures),
            "surjectivity_rank": surj_rank, "dim": W.dim, "failures": failures}


def free_basis_map(c: Calculus, elems: Sequence[Sequence]) -> fmpq_mat:
    """A^r -> Omega^1, (a_1..a_r) |-> sum a_l d(x_l); index (l, basis i) -> l*n + i."""
    W = c.omega1
    cols = []
    for x in elems:
        dx = c.d_of(x)
        for i in range(c.algebra.dim):
            cols.append(la.to_list(W.left[i] * dx))
    return la.from_columns(cols, W.dim)


def is_left_free_on(c: Calculus, elems: Sequence[Sequence]) -> bool:
    F = free_basis_map(c, elems)
    return F.nrows() == F.ncols() and la.rank(F) == F.ncols()


def find_free_basis(c: Calculus) -> list[int] | None:
    """Basis indices x with {dx} a left basis of Omega^1, if one exists (greedy)."""
    A = c.algebra
    if c.dim % A.dim:
        return None
    chosen: list[int] = []
    for x in range(A.dim):
        trial = chosen + [x]
        F = free_basis_map(c, [A.basis_vector(i) for i in trial])
        if la.rank(F) == F.ncols():
            chosen = trial
            if F.ncols() == c.dim:
                return chosen
    return None


def format_element(A: Algebra, v: Sequence) -> str:
    """Readable form of an algebra element, e.g. 'j', '-j', '(1+2i)'."""
    terms = []
    for c, name in zip(v, A.basis):
        if c == 0:
            continue
        is_unit = list(A.basis_vector(A.basis.index(name))) == list(A.unit)
        mag = format_scalar(abs(c))
        body = mag if is_unit else (name if mag == "1" else f"{mag}{name}")
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    s = "".join(f"{sgn}{b}" for sgn, b in terms).lstrip("+")
    return s if len(terms) == 1 else f"({s})"


def _combination(A: Algebra, coeffs: list, names: list[str]) -> str:
    parts = []
    for cvec, nm in zip(coeffs, names):
        if all(x == 0 for x in cvec):
            continue
        coef = format_element(A, cvec)
        if coef == "1":
            parts.append(("+", nm))
        elif coef == "-1":
            parts.append(("−", nm))
        elif coef.startswith("-") and not coef.startswith("("):
            parts.append(("−", f"{coef[1:]} {nm}"))
        else:
            parts.append(("+", f"{coef} {nm}"))
    if not parts:
        return "0"
    out = parts[0][1] if parts[0][0] == "+" else "−" + parts[0][1]
    for sgn, body in parts[1:]:
        out += f" {sgn} {body}"
    return out


def structure_relations(c: Calculus, free_basis: Sequence[str]) -> dict:
    """Express dx (x in the algebra basis) and (dx_l).a in the left basis {dx_l}."""
    A = c.algebra
    elems = [A.basis_vector(A.basis.index(x)) for x in free_basis]
    F = free_basis_map(c, elems)
    if not (F.nrows() == F.ncols() and la.rank(F) == F.ncols()):
        raise CalculusError(f"Omega^1 is not left free on d{list(free_basis)}")
    Finv = F.inv()
    n, r = A.dim, len(elems)
    names = [f"d{x}" for x in free_basis]

    def left_coords(v):
        w = la.to_list(Finv * v)
        return [w[l * n:(l + 1) * n] for l in range(r)]

    differentials = {}
    for x in range(n):
        co = left_coords(c.d_of(A.basis_vector(x)))
        differentials[A.basis[x]] = {
            "coefficients": {names[l]: [format_scalar(v) for v in co[l]] for l in range(r)},
            "text": f"d{A.basis[x]} = {_combination(A, co, names)}",
        }
    right = {}
    for l, x in enumerate(elems):
        dx = c.d_of(x)
        for a in range(n):
            co = left_coords(c.omega1.right[a] * dx)
            right[f"({names[l]}){A.basis[a]}"] = {
                "coefficients": {names[m]: [format_scalar(v) for v in co[m]] for m in range(r)},
                "text": f"({names[l]}){A.basis[a]} = {_combination(A, co, names)}",
            }
    return {"free_basis": names, "differentials": differentials, "right_products": right}


def commutation_sign(c: Calculus, a: str, x: str) -> int | None:
    """s with a.dx = s (dx).a, or None."""
    A = c.algebra
    ia = A.basis.index(a)
    dx = c.d_of(A.basis_vector(A.basis.index(x)))
    lhs, rhs = c.omega1.left[ia] * dx, c.omega1.right[ia] * dx
    for s in (1, -1):
        if lhs == s * rhs:
            return s
    return None


@dataclass
class CalculusMorphism:
    source: Calculus
    target: Calculus
    matrix: fmpq_mat


def calculus_morphism(src: Calculus, tgt: Calculus) -> CalculusMorphism | None:
    """The unique morphism of calculi src -> tgt, if N_src is inside N_tgt."""
    if src.algebra is not tgt.algebra:
        raise CalculusError("calculi over different algebras")
    if not tgt.N.contains_space(src.N):
        return None
    m = tgt.omega1.coords(tgt.J1.proj * src.J1.sect * src.omega1.incl)
    assert m * src.d == tgt.d
    assert la.rank(m) == tgt.dim
    for a, b in zip(src.omega1.left, tgt.omega1.left):
        assert m * a == b * m
    for a, b in zip(src.omega1.right, tgt.omega1.right):
        assert m * a == b * m
    return CalculusMorphism(src, tgt, m)


def quaternion_calculus() -> Calculus:
    """The {i, j}-terminal calculus on the quaternions."""
    from .algebra import quaternions
    H = quaternions()
    return terminal_calculus(H, ["i", "j"], name="terminal{i,j}")


def infinitesimal_calculus() -> Calculus:
    """k[t]/(t^2) with N generated by t d_u t = t (x) t."""
    from .algebra import dual_numbers
    A = dual_numbers()
    gen = [0, 0, 0, 1]  # t (x) t
    return quotient_calculus(A, [gen], name="infinitesimal")


def _element_coords(A: Algebra, x) -> list:
    """An algebra element given by basis name or by a coordinate list."""
    if isinstance(x, str):
        if x not in A.basis:
            raise CalculusSpecError(f"unknown basis element {x!r}")
        return list(A.basis_vector(A.basis.index(x)))
    if len(x) != A.dim:
        raise CalculusSpecError("element has the wrong number of coordinates")
    return [la.scalar(v) for v in x]


def calculus_from_json(A: Algebra, data: dict) -> Calculus:
    """{"type": "universal"} | {"type": "quotient", "N_generators": [...]} |
    {"type": "terminal", "elements": [...]}; elements by basis name or coordinates."""
    if not isinstance(data, dict):
        raise CalculusSpecError("calculus spec must be a JSON object")
    kind = data.get("type")
    name = data.get("name", "")
    if kind == "universal":
        return universal_calculus(A)
    if kind == "quotient":
        gens = data.get("N_generators", [])
        if any(len(g) != A.dim ** 2 for g in gens):
            raise CalculusSpecError("N generators must have dim(A)^2 coordinates")
        if not gens:
            return universal_calculus(A)
        return quotient_calculus(A, [[la.scalar(x) for x in g] for g in gens],
                                 name=name or "quotient")
    if kind == "terminal":
        if not data.get("elements"):
            raise CalculusSpecError("terminal calculus needs a nonempty 'elements' list")
        return terminal_calculus(A, [_element_coords(A, e) for e in data["elements"]], name=name)
    raise CalculusSpecError(f"unknown calculus type {kind!r}")
