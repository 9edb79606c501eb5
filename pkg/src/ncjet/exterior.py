"""Truncated maximal exterior algebras, quantum symmetric forms and the Spencer complex.

Grade k >= 2 of the exterior algebra is stored as a quotient of
P_k = Omega^1 (x)_A Omega^{k-1}; the relations are the images of the
degree-two relations (d (x) d)(N) tensored with lower grades.  Wedge
products are computed recursively on representatives in the plain
carrier Omega^1 (x) Omega^{k-1}.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from flint import fmpq_mat

from . import linalg as la
from .algebra import (Module, QuotientModule, SubModule, TensorSpace, check_left_linear,
                      check_right_linear, nested_map, sub_bimodule_closure,
                      tensor_map)
from .calculus import Calculus
from .linalg import Subspace


class ExteriorError(ValueError):
    pass


def right_action_map(X: Module, T: TensorSpace) -> fmpq_mat:
    """X (x)_A A -> X, x (x) a |-> x.a."""
    n = X.algebra.dim
    cols = [la.col(X.right[a], x) for x in range(X.dim) for a in range(n)]
    return la.hstack(cols, nrows=X.dim) * T.sect


def left_action_map(X: Module, T: TensorSpace) -> fmpq_mat:
    """A (x)_A X -> X, a (x) x |-> a.x."""
    n = X.algebra.dim
    cols = [la.col(X.left[a], x) for a in range(n) for x in range(X.dim)]
    return la.hstack(cols, nrows=X.dim) * T.sect


class ExteriorAlgebra:
    """Omega^0 .. Omega^N of the maximal exterior algebra (optionally with extra relations).

    ``extra`` maps a grade j >= 2 to columns in P_j = Omega^1 (x)_A Omega^{j-1}
    (computed without the extra relations of grade j) that are added to the
    ideal; the result is validated, in particular the ideal must be closed
    under d for the differential to exist.
    """

    def __init__(self, calculus: Calculus, N: int = 3, extra: dict | None = None):
        if N < 1:
            raise ExteriorError("max grade must be at least 1")
        self.calculus = c = calculus
        self.algebra = c.algebra
        self.N = N
        self.omega: list[Module] = [c.A_module, c.omega1]
        self._pairs: dict = {}
        self._wedge: dict = {}
        self._over: dict = {}
        self.ideal_generators: dict[int, Subspace] = {}
        self.ideals: dict[int, Subspace] = {}
        extra = extra or {}
        for k in range(2, N + 1):
            P = self.pair(1, k - 1)
            if k == 2:
                Q = P.proj * la.kron(c.d, c.d) * c.N.matrix()
            else:
                Q = la.zeros(P.dim, 0)
            if k in extra:
                Q = la.hstack([Q, extra[k]], nrows=P.dim)
            self.ideal_generators[k] = sub_bimodule_closure(P, Q)
            spaces = [self.ideal_generators[k]]
            for j in range(2, k):
                spaces.append(self._ideal_image(j, k))
            ideal = spaces[0]
            for s in spaces[1:]:
                ideal = ideal + s
            self.ideals[k] = ideal
            self.omega.append(QuotientModule(P, ideal, name=f"Omega{k}"))
        self.d = [c.d]
        if N >= 2:
            P2 = self.pair(1, 1)
            self.d.append(self.wedge(1, 1) * P2.proj * la.kron(c.d, c.d) * c.J1.sect * c.iota1)
        for k in range(2, N):
            self.d.append(self._leibniz_plain(k) * self.rep(k))
        self.tensor_powers = [self.omega[0], self.omega[1]]
        self.quotient_maps = [la.eye(self.omega[0].dim), la.eye(self.omega[1].dim)]
        for k in range(2, N + 1):
            T = TensorSpace(c.omega1, self.tensor_powers[k - 1], name=f"T{k}")
            self.tensor_powers.append(T)
            P = self.pair(1, k - 1)
            self.quotient_maps.append(
                self.omega[k].proj * tensor_map(T, P, la.eye(c.omega1.dim),
                                                self.quotient_maps[k - 1]))

    # ------------------------------------------------------------ structure

    def dims(self) -> list[int]:
        return [m.dim for m in self.omega]

    def pair(self, k: int, h: int) -> TensorSpace:
        """Omega^k (x)_A Omega^h."""
        key = (k, h)
        if key not in self._pairs:
            self._pairs[key] = TensorSpace(self.omega[k], self.omega[h], name=f"O{k}xO{h}")
        return self._pairs[key]

    def rep(self, k: int) -> fmpq_mat:
        """Omega^k -> plain Omega^1 (x) Omega^{k-1}, a representative of each class (k >= 2)."""
        P = self.pair(1, k - 1)
        return P.sect * self.omega[k].sect

    def wedge(self, k: int, h: int) -> fmpq_mat:
        """The product Omega^k (x)_A Omega^h -> Omega^{k+h} on the carrier of pair(k, h)."""
        if k + h > self.N:
            raise ExteriorError(f"grade {k + h} exceeds the truncation {self.N}")
        key = (k, h)
        if key in self._wedge:
            return self._wedge[key]
        T = self.pair(k, h)
        if k == 0:
            out = left_action_map(self.omega[h], T)
        elif h == 0:
            out = right_action_map(self.omega[k], T)
        elif k == 1:
            out = self.omega[1 + h].proj
        else:
            inner = self.wedge(k - 1, h) * self.pair(k - 1, h).proj
            outer = self.omega[k + h].proj * self.pair(1, k + h - 1).proj
            plain = outer * la.kron(la.eye(self.omega[1].dim), inner)
            out = plain * la.kron(self.rep(k), la.eye(self.omega[h].dim)) * T.sect
        self._wedge[key] = out
        return out

    def wedge_plain(self, k: int, h: int) -> fmpq_mat:
        """The product as a map on the plain carrier Omega^k (x) Omega^h."""
        return self.wedge(k, h) * self.pair(k, h).proj

    def product(self, k: int, x: fmpq_mat, h: int, y: fmpq_mat) -> fmpq_mat:
        return self.wedge(k, h) * self.pair(k, h).pure(x, y)

    def _leibniz_plain(self, k: int) -> fmpq_mat:
        """alpha (x) eta |-> d alpha ^ eta - alpha ^ d eta on plain Omega^1 (x) Omega^{k-1}."""
        n1, nk = self.omega[1].dim, self.omega[k - 1].dim
        t1 = self.wedge_plain(2, k - 1) * la.kron(self.d[1], la.eye(nk))
        t2 = self.wedge_plain(1, k) * la.kron(la.eye(n1), self.d[k - 1])
        return t1 - t2

    def _ideal_image(self, j: int, k: int) -> Subspace:
        """Image in P_k of (ideal generators of grade j) (x)_A Omega^{k-j}."""
        Pj, Pk = self.pair(1, j - 1), self.pair(1, k - 1)
        inner = self.wedge_plain(j - 1, k - j)
        plain = Pk.proj * la.kron(la.eye(self.omega[1].dim), inner)
        gens = Pj.sect * self.ideal_generators[j].matrix()
        return Subspace.span(plain * la.kron(gens, la.eye(self.omega[k - j].dim)), Pk.dim)

    def over(self, k: int, X: Module) -> TensorSpace:
        """Omega^k (x)_A X, shared with the calculus' own Omega^1 (x)_A X when k = 1."""
        if k == 1:
            return self.calculus.Omega1(X)
        key = (k, id(X))
        if key not in self._over:
            self._over[key] = (X, TensorSpace(self.omega[k], X, name=f"Omega{k}({X.name})"))
        return self._over[key][1]

    def wedge_over(self, k: int, X: Module) -> fmpq_mat:
        """Omega^k (x)_A (Omega^1 (x)_A X) -> Omega^{k+1} (x)_A X."""
        return nested_map(self.over(k, self.over(1, X)), self.over(k + 1, X),
                          self.wedge(k, 1), self.pair(k, 1))

    # ------------------------------------------------------------ validation

    def validate(self) -> dict:
        failures = []
        N = self.N
        for k in range(N - 1):
            if not la.is_zero(self.d[k + 1] * self.d[k]):
                failures.append({"kind": "d^2", "grade": k})
        for k in range(N):
            for h in range(N - k):
                if k + h + 1 > N:
                    continue
                lhs = self.d[k + h] * self.wedge_plain(k, h)
                sign = -1 if k % 2 else 1
                r1 = self.wedge_plain(k + 1, h) * la.kron(self.d[k], la.eye(self.omega[h].dim))
                r2 = self.wedge_plain(k, h + 1) * la.kron(la.eye(self.omega[k].dim), self.d[h])
                if lhs != r1 + sign * r2:
                    failures.append({"kind": "leibniz", "grades": [k, h]})
        for k in range(1, N + 1):
            for h in range(1, N + 1 - k):
                for l in range(1, N + 1 - k - h):
                    nk, nh, nl = (self.omega[g].dim for g in (k, h, l))
                    lhs = self.wedge_plain(k + h, l) * la.kron(self.wedge_plain(k, h), la.eye(nl))
                    rhs = self.wedge_plain(k, h + l) * la.kron(la.eye(nk), self.wedge_plain(h, l))
                    if lhs != rhs:
                        failures.append({"kind": "associativity", "grades": [k, h, l]})
        for k in range(2, N):
            P = self.pair(1, k - 1)
            L = self._leibniz_plain(k)
            if not la.is_zero(L * P.relations.matrix()):
                failures.append({"kind": "d not balanced", "grade": k})
            if not la.is_zero(L * P.sect * self.ideals[k].matrix()):
                failures.append({"kind": "ideal not closed under d", "grade": k})
        for k, q in enumerate(self.quotient_maps):
            if la.rank(q) != self.omega[k].dim:
                failures.append({"kind": "wedge not surjective", "grade": k})
        for k, m in enumerate(self.omega):
            for f in m.validate():
                failures.append({"kind": "bimodule", "grade": k, "witness": f})
        return {"valid": not failures, "failures": failures, "dims": self.dims()}


def tensor_power(c: Calculus, n: int) -> Module:
    """T^n = Omega^1 (x)_A ... (x)_A Omega^1 (n factors), T^0 = A."""
    if n < 0:
        raise ExteriorError("tensor power needs n >= 0")
    if n == 0:
        return c.A_module
    out: Module = c.omega1
    for k in range(2, n + 1):
        out = TensorSpace(c.omega1, out, name=f"T{k}")
    return out


def maximal_exterior(c: Calculus, N: int = 3) -> ExteriorAlgebra:
    ext = c.cached(("maximal_exterior", N), lambda: ExteriorAlgebra(c, N))
    return ext


# ---------------------------------------------------------------- symmetric forms

@dataclass
class SymmetricForms:
    """S^n(E) inside Omega^1 (x)_A S^{n-1}(E) with its inclusions."""
    ext: ExteriorAlgebra
    n: int
    base: Module
    carrier: Module
    iota_wedge: fmpq_mat          # S^n -> Omega^1 (x)_A S^{n-1}
    iota_T: fmpq_mat              # S^n -> T^n(E)
    tensor: Module                # T^n(E)
    defining_map: fmpq_mat | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.carrier.dim


def tensor_power_of(c: Calculus, n: int, E: Module) -> Module:
    """T^n(E) = Omega^1 (x)_A T^{n-1}(E), T^0(E) = E; shared objects via the calculus memo."""
    out = E
    for _ in range(n):
        out = c.Omega1(out)
    return out


def symmetric_forms(ext: ExteriorAlgebra, n: int, E: Module | None = None) -> SymmetricForms:
    """S^n(E) = ker( wedge_{S^{n-2}} o Omega^1(iota^{n-1}) ) in Omega^1 (x)_A S^{n-1}(E)."""
    c = ext.calculus
    if E is None:
        E = ext.omega[0]
    if n < 0:
        raise ExteriorError("n must be non-negative")
    if n >= 2 and ext.N < 2:
        raise ExteriorError("symmetric forms of degree >= 2 need Omega^2")
    return c.on(("S", n, id(ext)), E, lambda: _build_symmetric(ext, n, E))


def _build_symmetric(ext: ExteriorAlgebra, n: int, E: Module) -> SymmetricForms:
    c = ext.calculus
    if n == 0:
        return SymmetricForms(ext, 0, E, E, la.zeros(0, E.dim), la.eye(E.dim), E)
    if n == 1:
        U = c.Omega1(E)
        return SymmetricForms(ext, 1, E, U, la.eye(U.dim), la.eye(U.dim), U)
    prev = symmetric_forms(ext, n - 1, E)
    prev2 = symmetric_forms(ext, n - 2, E)
    U = c.Omega1(prev.carrier)
    V = c.Omega1(c.Omega1(prev2.carrier))
    omega_iota = tensor_map(U, V, la.eye(c.omega1.dim), prev.iota_wedge)
    wedge = ext.wedge_over(1, prev2.carrier)
    defining = wedge * omega_iota
    S = SubModule(U, la.kernel(defining), name=f"S{n}({E.name})")
    T = tensor_power_of(c, n, E)
    iota_T = tensor_map(U, T, la.eye(c.omega1.dim), prev.iota_T) * S.incl
    return SymmetricForms(ext, n, E, S, S.incl, iota_T, T, defining)


def minimal_symmetric_square(ext: ExteriorAlgebra) -> dict:
    """span{(d (x) d)(N)} in Omega^1 (x)_A Omega^1 and the comparison map into S^2."""
    c = ext.calculus
    P2 = ext.pair(1, 1)
    smin = Subspace.span(P2.proj * la.kron(c.d, c.d) * c.N.matrix(), P2.dim)
    S2 = symmetric_forms(ext, 2)
    # Omega^1 (x) Omega^1 -> Omega^1 (x) (Omega^1 (x) A), alpha (x) beta |-> alpha (x) (beta (x) 1)
    inner = c.Omega1(ext.omega[0])
    unit = c.algebra.unit_column()
    to_inner = inner.proj * la.kron(la.eye(c.omega1.dim), unit)
    iso = tensor_map(P2, S2.tensor, la.eye(c.omega1.dim), to_inner)
    nu_plain = iso * smin.matrix()
    S2_space = Subspace.span(S2.iota_T, S2.tensor.dim)
    if not S2_space.contains(nu_plain):
        raise ExteriorError("minimal symmetric forms are not contained in S^2")
    nu = S2.carrier.coords(nu_plain) if isinstance(S2.carrier, SubModule) else nu_plain
    rank = la.rank(nu) if nu.ncols() else 0
    return {"space": smin, "dim": smin.dim, "nu": nu, "nu_injective": rank == smin.dim,
            "nu_surjective": rank == S2.dim}


def antisymmetric_generator(ext: ExteriorAlgebra, a: str, b: str) -> dict:
    """Whether da (x) db - db (x) da lies in S^2 and generates it as a left module."""
    c = ext.calculus
    A = c.algebra
    da = c.d_of(A.basis_vector(A.basis.index(a)))
    db = c.d_of(A.basis_vector(A.basis.index(b)))
    P2 = ext.pair(1, 1)
    g = P2.pure(da, db) - P2.pure(db, da)
    S2 = symmetric_forms(ext, 2)
    inner = c.Omega1(ext.omega[0])
    to_inner = inner.proj * la.kron(la.eye(c.omega1.dim), A.unit_column())
    iso = tensor_map(P2, S2.tensor, la.eye(c.omega1.dim), to_inner)
    g_T = iso * g
    S2_space = Subspace.span(S2.iota_T, S2.tensor.dim)
    left_span = sub_bimodule_closure(S2.tensor, g_T, left=True, right=False)
    return {"element": f"d{a}(x)d{b} - d{b}(x)d{a}", "nonzero": not la.is_zero(g_T),
            "in_S2": S2_space.contains(g_T), "generates_S2_left": left_span == S2_space}


def tau_dimensions(ext: ExteriorAlgebra, n: int, E: Module) -> dict:
    """Compare dim S^n(E) with dim S^n (x)_A E (equal for free E)."""
    S_A = symmetric_forms(ext, n)
    S_E = symmetric_forms(ext, n, E)
    TE = TensorSpace(S_A.carrier, E)
    return {"dim_S_E": S_E.dim, "dim_S_tensor_E": TE.dim}


def schar_subspaces(ext: ExteriorAlgebra, n: int) -> dict:
    """S^n and the intersection of the kernels of T^k(wedge)_{T^{n-k-2}} inside T^n."""
    c = ext.calculus
    S = symmetric_forms(ext, n)
    T = S.tensor
    A = ext.omega[0]
    kernels = []
    for k in range(0, n - 1):
        X = tensor_power_of(c, n - k - 2, A)
        f = ext.wedge_over(1, X)
        src, dst = c.Omega1(c.Omega1(X)), ext.over(2, X)
        for _ in range(k):
            src2, dst2 = c.Omega1(src), c.Omega1(dst)
            f = tensor_map(src2, dst2, la.eye(c.omega1.dim), f)
            src, dst = src2, dst2
        kernels.append(la.kernel(f))
    inter = la.intersect_all(kernels, T.dim)
    image = Subspace.span(S.iota_T, T.dim)
    return {"symmetric": image, "kernel_intersection": inter, "equal": image == inter}


# ---------------------------------------------------------------- Spencer complex

def spencer_delta(ext: ExteriorAlgebra, h: int, k: int, E: Module | None = None) -> fmpq_mat:
    """delta^{h,k}: Omega^k (x)_A S^h -> Omega^{k+1} (x)_A S^{h-1}."""
    if k + 1 > ext.N:
        raise ExteriorError(f"delta^{{{h},{k}}} needs grade {k + 1} > truncation {ext.N}")
    if h < 0 or k < 0:
        raise ExteriorError("negative degree")
    c = ext.calculus
    S = symmetric_forms(ext, h, E)
    dom = ext.over(k, S.carrier)
    if h == 0:
        return la.zeros(0, dom.dim)
    Sm = symmetric_forms(ext, h - 1, E)
    U = c.Omega1(Sm.carrier)
    mid = ext.over(k, U)
    first = tensor_map(dom, mid, la.eye(ext.omega[k].dim), S.iota_wedge)
    second = ext.wedge_over(k, Sm.carrier)
    sign = -1 if k % 2 else 1
    return sign * (second * first)


def spencer_cohomology(ext: ExteriorAlgebra, h: int, k: int, E: Module | None = None) -> dict:
    """Dimension and representatives of H^{h,k} = ker delta^{h,k} / im delta^{h+1,k-1}."""
    if k + 1 > ext.N:
        return {"known": False, "reason": f"unknown beyond grade {ext.N}"}
    out_map = spencer_delta(ext, h, k, E)
    ker = la.kernel(out_map)
    if k == 0:
        im = Subspace.zero(ker.ambient)
    else:
        im = la.image(spencer_delta(ext, h + 1, k - 1, E))
    if not ker.contains_space(im):
        raise ExteriorError("Spencer maps do not form a complex")
    q = la.quotient(ker.dim, Subspace.span(_coords_all(ker, im), ker.dim))
    reps = ker.matrix() * q.sect
    return {"known": True, "ker": ker.dim, "im": im.dim, "H": ker.dim - im.dim,
            "representatives": reps}


def _coords_all(ker: Subspace, im: Subspace) -> fmpq_mat:
    if im.dim == 0:
        return la.zeros(ker.dim, 0)
    return ker.coords(im.matrix())


def spencer_report(ext: ExteriorAlgebra, top: int | None = None, E: Module | None = None) -> dict:
    """Dims of ker, im and H at every node Omega^k (x) S^h with h + k <= top."""
    top = ext.N if top is None else top
    out = {}
    for h in range(top + 1):
        for k in range(top + 1 - h):
            key = f"{h},{k}"
            res = spencer_cohomology(ext, h, k, E)
            if res["known"]:
                out[key] = {"ker": res["ker"], "im": res["im"], "H": res["H"]}
            else:
                out[key] = {"unknown": res["reason"]}
    return out


def spencer_is_complex(ext: ExteriorAlgebra, top: int, E: Module | None = None) -> bool:
    for h in range(1, top + 1):
        for k in range(0, ext.N - 1):
            if not la.is_zero(spencer_delta(ext, h - 1, k + 1, E) * spencer_delta(ext, h, k, E)):
                return False
    return True


# ---------------------------------------------------------------- covariant derivatives

def connection_leibniz_failures(c: Calculus, E: Module, nabla: fmpq_mat) -> list[str]:
    """Witnesses of nabla(a e) != da (x) e + a nabla(e)."""
    A = c.algebra
    O = c.Omega1(E)
    fails = []
    for a in range(A.dim):
        da = la.col(c.d, a)
        lhs = nabla * E.left[a]
        rhs = O.proj * la.kron(da, la.eye(E.dim)) + O.left[a] * nabla
        if lhs != rhs:
            fails.append(A.basis[a])
    return fails


@dataclass
class CovariantDerivative:
    ext: ExteriorAlgebra
    E: Module
    nabla: fmpq_mat
    maps: list[fmpq_mat]           # d_nabla^k: Omega^k (x)_A E -> Omega^{k+1} (x)_A E

    def embed(self) -> fmpq_mat:
        """E -> A (x)_A E, e |-> 1 (x) e."""
        T = self.ext.over(0, self.E)
        return T.proj * la.kron(self.ext.algebra.unit_column(), la.eye(self.E.dim))

    def curvature(self) -> fmpq_mat:
        """R = d_nabla o nabla as a map E -> Omega^2 (x)_A E (left A-linear)."""
        if len(self.maps) < 2:
            raise ExteriorError("curvature needs Omega^2")
        R = self.maps[1] * self.maps[0] * self.embed()
        O2 = self.ext.over(2, self.E)
        if not check_left_linear(R, self.E, O2):
            raise ExteriorError("curvature is not left linear")
        return R


def covariant_derivative(ext: ExteriorAlgebra, E: Module, nabla: fmpq_mat,
                         top: int | None = None) -> CovariantDerivative:
    c = ext.calculus
    fails = connection_leibniz_failures(c, E, nabla)
    if fails:
        raise ExteriorError(f"not a connection: Leibniz fails for {fails}")
    top = ext.N - 1 if top is None else min(top, ext.N - 1)
    OE = c.Omega1(E)
    maps = []
    for k in range(top + 1):
        src, dst = ext.over(k, E), ext.over(k + 1, E)
        nk = ext.omega[k].dim
        t1 = dst.proj * la.kron(ext.d[k], la.eye(E.dim))
        mid = ext.over(k, OE)
        t2 = ext.wedge_over(k, E) * mid.proj * la.kron(la.eye(nk), nabla)
        sign = -1 if k % 2 else 1
        plain = t1 + sign * t2
        if src.relations.dim and not la.is_zero(plain * src.relations.matrix()):
            raise ExteriorError("exterior covariant derivative is not balanced")
        maps.append(plain * src.sect)
    return CovariantDerivative(ext, E, nabla, maps)


def is_bimodule_map(f: fmpq_mat, M: Module, N: Module) -> bool:
    return check_left_linear(f, M, N) and check_right_linear(f, M, N)
