"""Jet modules of all flavours: nonholonomic, semiholonomic, sesquiholonomic, holonomic.

Everything lives inside the nonholonomic carrier J^(n)E = J^1A (x)_A ... (x)_A E,
built by iterating TensorSpace and memoized per module object so that
J^1(J^1 X) is always the same object.  Maps between iterated jets are
induced with ``tensor_map`` (functoriality) and ``nested_map`` (natural
transformations acting on the two outer factors).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from flint import fmpq_mat

from . import linalg as la
from .algebra import (Module, SubModule, TensorSpace, check_left_linear, check_right_linear,
                      contract, nested_map, tensor_map)
from .calculus import Calculus
from .exterior import ExteriorAlgebra, spencer_delta, symmetric_forms, tensor_power_of
from .linalg import Subspace

FLAVORS = ("nonholonomic", "semiholonomic", "sesquiholonomic", "holonomic")


class JetError(RuntimeError):
    """Raised when two constructions that must agree do not (an internal bug signal)."""


@dataclass
class JetSpace:
    flavor: str
    order: int
    base: Module
    carrier: Module
    embed: fmpq_mat                      # carrier -> J^(n)E
    prolongation: fmpq_mat               # E -> carrier (k-linear)
    projections: list[fmpq_mat]          # carrier -> order n-1 carrier of the same flavour
    extras: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.carrier.dim

    @property
    def projection(self) -> fmpq_mat:
        """The canonical projection (the outermost one for nonholonomic jets)."""
        return self.projections[-1]


# ---------------------------------------------------------------- one-jets of modules

def unit_jet(c: Calculus) -> fmpq_mat:
    """The class [1 (x) 1] in J^1A."""
    u = c.algebra.unit_column()
    return c.J1.proj * la.kron(u, u)


def j1_map(c: Calculus, X: Module) -> fmpq_mat:
    """x |-> [1 (x) 1] (x) x, the (k-linear) one-jet prolongation of X."""
    return c.J1_of(X).proj * la.kron(unit_jet(c), la.eye(X.dim))


def pi10_map(c: Calculus, X: Module) -> fmpq_mat:
    return contract(c.J1_of(X), c.pi10)


def iota1_map(c: Calculus, X: Module) -> fmpq_mat:
    return tensor_map(c.Omega1(X), c.J1_of(X), c.iota1, la.eye(X.dim))


def rho_map(c: Calculus, X: Module) -> fmpq_mat:
    return tensor_map(c.J1_of(X), c.Omega1(X), c.rho, la.eye(X.dim))


def J1_functor(c: Calculus, X: Module, Y: Module, f: fmpq_mat) -> fmpq_mat:
    """J^1(f): J^1X -> J^1Y for a left-linear f: X -> Y."""
    return tensor_map(c.J1_of(X), c.J1_of(Y), la.eye(c.J1.dim), f)


def Omega1_functor(c: Calculus, X: Module, Y: Module, f: fmpq_mat) -> fmpq_mat:
    return tensor_map(c.Omega1(X), c.Omega1(Y), la.eye(c.omega1.dim), f)


def iterate_J1(c: Calculus, X: Module, k: int) -> Module:
    for _ in range(k):
        X = c.J1_of(X)
    return X


def Jk_functor(c: Calculus, X: Module, Y: Module, f: fmpq_mat, k: int) -> fmpq_mat:
    """J^(k)(f): J^(k)X -> J^(k)Y."""
    for _ in range(k):
        f = J1_functor(c, X, Y, f)
        X, Y = c.J1_of(X), c.J1_of(Y)
    return f


def jet1(c: Calculus) -> JetSpace:
    """J^1A with pi^{1,0}, iota^1, j^1, rho and d~; the splitting identities are verified."""
    idJ = la.eye(c.J1.dim)
    checks = {
        "rho_iota": c.rho * c.iota1 == la.eye(c.omega1.dim),
        "rho_j": la.is_zero(c.rho * c.j1),
        "split": c.j1 * c.pi10 + c.iota1 * c.rho == idJ,
        "pi_iota": la.is_zero(c.pi10 * c.iota1),
        "pi_j": c.pi10 * c.j1 == la.eye(c.algebra.dim),
    }
    if not all(checks.values()):
        raise JetError(f"one-jet splitting identities fail: {checks}")
    return JetSpace("nonholonomic", 1, c.A_module, c.J1, idJ, c.j1, [c.pi10],
                    {"iota": c.iota1, "rho": c.rho, "dtilde": c.dtilde, "checks": checks})


def jet1_module(c: Calculus, E: Module) -> JetSpace:
    """J^1E = J^1A (x)_A E with its sequence 0 -> Omega^1(E) -> J^1E -> E -> 0.

    N_d(E) is computed as the kernel of A (x) E -> J^1E, a (x) e |-> [a (x) 1] (x) e
    and compared with the image of N (x)_A E.
    """
    A = c.algebra
    J = c.J1_of(E)
    iota, pi, j, rho = iota1_map(c, E), pi10_map(c, E), j1_map(c, E), rho_map(c, E)
    u = A.unit_column()
    p = J.proj * la.kron(c.J1.proj * la.kron(la.eye(A.dim), u), la.eye(E.dim))
    ker_p = la.kernel(p)
    act = la.hstack([la.col(E.left[b], e) for b in range(A.dim) for e in range(E.dim)],
                    nrows=E.dim)
    img = Subspace.span(la.kron(la.eye(A.dim), act) * la.kron(c.N.matrix(), la.eye(E.dim)),
                        A.dim * E.dim)
    N_mod = SubModule(c.AA, c.N, name="N")
    N_tensor_E = TensorSpace(N_mod, E).dim if c.N.dim else 0
    exact = {
        "left_exact": la.rank(iota) == iota.ncols(),
        "mid_exact": la.kernel(pi) == la.image(iota),
        "right_exact": la.rank(pi) == E.dim,
    }
    extras = {"iota": iota, "rho": rho, "exactness": exact,
              "N_kernel": ker_p, "N_image": img, "N_tensor_E_dim": N_tensor_E,
              "N_agree": ker_p == img}
    return JetSpace("nonholonomic", 1, E, J, la.eye(J.dim), j, [pi], extras)


# ---------------------------------------------------------------- nonholonomic

def nonholonomic(c: Calculus, E: Module, n: int) -> JetSpace:
    if n < 0:
        raise ValueError("jet order must be non-negative")
    return c.on(("nonholonomic", n), E, lambda: _build_nonholonomic(c, E, n))


def _build_nonholonomic(c: Calculus, E: Module, n: int) -> JetSpace:
    if n == 0:
        return JetSpace("nonholonomic", 0, E, E, la.eye(E.dim), la.eye(E.dim), [])
    prev = nonholonomic(c, E, n - 1)
    carrier = c.J1_of(prev.carrier)
    projections = []
    for m in range(1, n + 1):
        X = iterate_J1(c, E, m - 1)
        projections.append(Jk_functor(c, c.J1_of(X), X, pi10_map(c, X), n - m))
    prolong = j1_map(c, prev.carrier) * prev.prolongation
    return JetSpace("nonholonomic", n, E, carrier, la.eye(carrier.dim), prolong, projections)


def nh_projection(c: Calculus, E: Module, n: int, m: int) -> fmpq_mat:
    """pi^{(n,m)}: J^(n)E -> J^(m)E through the outermost projections."""
    out = la.eye(nonholonomic(c, E, n).dim)
    for k in range(n, m, -1):
        out = nonholonomic(c, E, k).projections[-1] * out
    return out


def nh_prolong_over(c: Calculus, X: Module, k: int) -> fmpq_mat:
    """j^(k) of the module X, landing in J^(k)X."""
    return nonholonomic(c, X, k).prolongation


def nh_decompose(c: Calculus, E: Module, n: int, xi: fmpq_mat) -> list[fmpq_mat]:
    """[xi^0, c_1, ..., c_n] with xi^0 in E and c_m = rho(pi^{(n,m)} xi) in Omega^1(J^(m-1)E)."""
    parts = [nh_projection(c, E, n, 0) * xi]
    for m in range(1, n + 1):
        X = nonholonomic(c, E, m - 1).carrier
        parts.append(rho_map(c, X) * (nh_projection(c, E, n, m) * xi))
    return parts


def nh_recompose(c: Calculus, E: Module, n: int, parts: list[fmpq_mat]) -> fmpq_mat:
    """Inverse of nh_decompose: j^(n)(xi^0) + sum_m j^(n-m)_{J^(m)}(iota^1 c_m)."""
    xi = nonholonomic(c, E, n).prolongation * parts[0]
    for m in range(1, n + 1):
        X = nonholonomic(c, E, m - 1).carrier
        top = iota1_map(c, X) * parts[m]
        Jm = nonholonomic(c, E, m).carrier
        xi += nh_prolong_over(c, Jm, n - m) * top
    return xi


# ---------------------------------------------------------------- semidirect sum and D~

@dataclass
class SemidirectSum:
    """Omega^1 (+) Omega^2 with f*(alpha + w) = f alpha + df ^ alpha + f w."""
    ext: ExteriorAlgebra
    module: Module
    section: fmpq_mat                # alpha |-> alpha + d alpha
    n1: int
    n2: int

    def component_I(self) -> fmpq_mat:
        return la.hstack([la.eye(self.n1), la.zeros(self.n1, self.n2)], nrows=self.n1)

    def component_II(self) -> fmpq_mat:
        return la.hstack([la.zeros(self.n2, self.n1), la.eye(self.n2)], nrows=self.n2)


def semidirect(ext: ExteriorAlgebra) -> SemidirectSum:
    c = ext.calculus
    return c.cached(("semidirect", id(ext)), lambda: _build_semidirect(ext))


def _build_semidirect(ext: ExteriorAlgebra) -> SemidirectSum:
    if ext.N < 2:
        raise ValueError("the semidirect sum needs Omega^2")
    c, A = ext.calculus, ext.algebra
    O1, O2 = ext.omega[1], ext.omega[2]
    n1, n2 = O1.dim, O2.dim
    P = ext.pair(1, 1)
    left, right = [], []
    for a in range(A.dim):
        twist = ext.wedge(1, 1) * P.proj * la.kron(la.col(c.d, a), la.eye(n1))
        top = la.hstack([O1.left[a], la.zeros(n1, n2)], nrows=n1)
        bottom = la.hstack([twist, O2.left[a]], nrows=n2)
        left.append(la.vstack([top, bottom], ncols=n1 + n2))
        right.append(la.direct_sum_matrix(O1.right[a], O2.right[a]))
    M = Module(A, n1 + n2, left, right, name="Omega1|xOmega2")
    fails = M.validate()
    if fails:
        raise JetError(f"semidirect sum is not a bimodule: {fails}")
    section = la.vstack([la.eye(n1), ext.d[1]], ncols=n1)
    if not check_left_linear(section, O1, M):
        raise JetError("alpha |-> alpha + d alpha is not left linear")
    return SemidirectSum(ext, M, section, n1, n2)


@dataclass
class EthOperator:
    """D~_X: J^1(J^1 X) -> (Omega^1 |x Omega^2)(X) with components D~^I, D~^II."""
    X: Module
    domain: Module
    codomain: Module
    matrix: fmpq_mat
    DI: fmpq_mat
    DII: fmpq_mat


def _eth_pair_maps(ext: ExteriorAlgebra) -> dict:
    """D~ on J^1A (x)_A J^1A from the formulas on representatives in A^(x)4."""
    c = ext.calculus

    def build():
        A, n = c.algebra, c.algebra.dim
        O1, O2 = ext.omega[1], ext.omega[2]
        JJ = c.J1_of(c.J1)
        d_prod = [[c.d * la.column(A.mult[b][cc]) for cc in range(n)] for b in range(n)]
        w11 = ext.wedge_plain(1, 1)
        cols_I, cols_II = [], []
        for a in range(n):
            da = la.col(c.d, a)
            for b in range(n):
                for cc in range(n):
                    dbc = d_prod[b][cc]
                    left_I = O1.left[a] * dbc
                    left_II = w11 * la.kron(da, dbc)
                    for e in range(n):
                        cols_I.append(O1.right[e] * left_I)
                        cols_II.append(O2.right[e] * left_II)
        plain_I = la.hstack(cols_I, nrows=O1.dim)
        plain_II = la.hstack(cols_II, nrows=O2.dim)
        lift = la.kron(c.J1.sect, c.J1.sect) * JJ.sect
        down = JJ.proj * la.kron(c.J1.proj, c.J1.proj)
        DI, DII = plain_I * lift, plain_II * lift
        if DI * down != plain_I or DII * down != plain_II:
            raise JetError("D~ formulas are not well defined on J^1A (x)_A J^1A")
        SD = semidirect(ext)
        D = la.vstack([DI, DII], ncols=JJ.dim)
        if not check_left_linear(D, JJ, SD.module) or not check_right_linear(D, JJ, SD.module):
            raise JetError("D~ is not a bimodule map for the twisted action")
        return {"pair": JJ, "DI": DI, "DII": DII, "D": D}

    return c.cached(("eth_pair", id(ext)), build)


def eth(c: Calculus, ext: ExteriorAlgebra, X: Module) -> EthOperator:
    def build():
        maps = _eth_pair_maps(ext)
        SD = semidirect(ext)
        JJX = c.J1_of(c.J1_of(X))
        target = c.tensor_with(SD.module, X, f"SD{id(ext)}")
        D = nested_map(JJX, target, maps["D"], maps["pair"])
        DI = nested_map(JJX, c.Omega1(X), maps["DI"], maps["pair"])
        DII = nested_map(JJX, ext.over(2, X), maps["DII"], maps["pair"])
        return EthOperator(X, JJX, target, D, DI, DII)
    return c.on(("eth", id(ext)), X, build)


def eth_I_by_projections(c: Calculus, X: Module) -> fmpq_mat:
    """D~^I_X = rho_X o (J^1(pi^{1,0}_X) - pi^{1,0}_{J^1X}), independent of the formula route."""
    J2 = nonholonomic(c, X, 2)
    return rho_map(c, X) * (J2.projections[0] - J2.projections[1])


def W_map(ext: ExteriorAlgebra) -> dict:
    """W: Omega^1 (x)_A J^1A -> Omega^1 |x Omega^2 from its formulas, and D~ o iota^1_{J^1A}."""
    c = ext.calculus
    A, n = c.algebra, c.algebra.dim
    O1, O2 = ext.omega[1], ext.omega[2]
    OJ = c.Omega1(c.J1)
    w11 = ext.wedge_plain(1, 1)
    cols_I, cols_II = [], []
    for al in range(O1.dim):
        alpha = la.unit_vector(O1.dim, al)
        dalpha = ext.d[1] * alpha
        for x in range(n):
            adx = w11 * la.kron(alpha, la.col(c.d, x))
            for e in range(n):
                xe = A.mult[x][e]
                cols_I.append(O1.right_matrix(xe) * alpha)
                cols_II.append(O2.right_matrix(xe) * dalpha - O2.right[e] * adx)
    plain = la.vstack([la.hstack(cols_I, nrows=O1.dim), la.hstack(cols_II, nrows=O2.dim)],
                      ncols=O1.dim * n * n)
    W = plain * la.kron(la.eye(O1.dim), c.J1.sect) * OJ.sect
    if W * OJ.proj * la.kron(la.eye(O1.dim), c.J1.proj) != plain:
        raise JetError("W is not well defined")
    maps = _eth_pair_maps(ext)
    via_D = maps["D"] * tensor_map(OJ, maps["pair"], c.iota1, la.eye(c.J1.dim))
    return {"W": W, "D_iota": via_D, "agree": W == via_D}


# ---------------------------------------------------------------- semiholonomic

def semiholonomic(c: Calculus, E: Module, n: int) -> JetSpace:
    if n < 0:
        raise ValueError("jet order must be non-negative")
    return c.on(("semiholonomic", n), E, lambda: _build_semiholonomic(c, E, n))


def _in_carrier(J: JetSpace, v: fmpq_mat, what: str) -> fmpq_mat:
    """Coordinates in a sub-carrier of J^(n)E of vectors v given in J^(n)E."""
    if isinstance(J.carrier, SubModule) and J.embed is J.carrier.incl:
        if not J.carrier.space.contains(v):
            raise JetError(f"{what} does not land in the {J.flavor} {J.order}-jets")
        return J.carrier.coords(v)
    return v


def semiholonomic_equalizer(c: Calculus, E: Module, n: int) -> Subspace:
    NH = nonholonomic(c, E, n)
    if n <= 1:
        return Subspace.full(NH.dim)
    first = NH.projections[0]
    return la.intersect_all((la.kernel(p - first) for p in NH.projections[1:]), NH.dim)


def semiholonomic_by_dtilde(c: Calculus, E: Module, n: int) -> Subspace:
    """Intersection over m of ker J^(n-m-1)(D~^I_{J^(m-1)E}) (D~^I via the projections)."""
    NH = nonholonomic(c, E, n)
    kernels = []
    for m in range(1, n):
        X = iterate_J1(c, E, m - 1)
        DI = eth_I_by_projections(c, X)
        f = Jk_functor(c, iterate_J1(c, X, 2), c.Omega1(X), DI, n - m - 1)
        kernels.append(la.kernel(f))
    return la.intersect_all(kernels, NH.dim)


def _build_semiholonomic(c: Calculus, E: Module, n: int) -> JetSpace:
    NH = nonholonomic(c, E, n)
    T = tensor_power_of(c, n, E)
    iota_T = _iota_T_nonholonomic(c, E, n)
    if n <= 1:
        return JetSpace("semiholonomic", n, E, NH.carrier, NH.embed, NH.prolongation,
                        NH.projections[-1:], {"iota_T": iota_T, "tensor": T})
    eq = semiholonomic_equalizer(c, E, n)
    dt = semiholonomic_by_dtilde(c, E, n)
    if eq != dt:
        raise JetError("equalizer and D~^I characterizations of semiholonomic jets differ")
    carrier = SubModule(NH.carrier, eq, name=f"J[{n}]({E.name})")
    J = JetSpace("semiholonomic", n, E, carrier, carrier.incl, la.zeros(0, 0), [],
                 {"tensor": T})
    J.prolongation = _in_carrier(J, NH.prolongation, "j^(n)")
    prev = semiholonomic(c, E, n - 1)
    J.projections = [_in_carrier(prev, NH.projections[-1] * carrier.incl, "pi^{(n,n-1)}")]
    J.extras["iota_T"] = _in_carrier(J, iota_T, "T^n")
    return J


def _iota_T_nonholonomic(c: Calculus, E: Module, n: int) -> fmpq_mat:
    """T^n(E) -> J^(n)E by iterating iota^1: J^1(iota_{T^{n-1}}) o iota^1_{T^{n-1}E}."""
    if n == 0:
        return la.eye(E.dim)
    Tprev = tensor_power_of(c, n - 1, E)
    prev = _iota_T_nonholonomic(c, E, n - 1)
    NHprev = nonholonomic(c, E, n - 1).carrier
    return J1_functor(c, Tprev, NHprev, prev) * iota1_map(c, Tprev)


def semiholonomic_intersection(c: Calculus, E: Module, n: int, h: int, m: int) -> Subspace:
    """(J^[h] o J^(n-h))E meet (J^(n-m) o J^[m])E inside J^(n)E."""
    NH = nonholonomic(c, E, n)
    X = nonholonomic(c, E, n - h).carrier
    first = semiholonomic(c, X, h)
    img1 = la.image(first.embed) if first.embed.ncols() else Subspace.zero(NH.dim)
    inner = semiholonomic(c, E, m)
    f = Jk_functor(c, inner.carrier, nonholonomic(c, E, m).carrier, inner.embed, n - m)
    img2 = la.image(f)
    return la.intersect(img1, img2)


# ---------------------------------------------------------------- holonomic and sesquiholonomic

def holonomic(c: Calculus, ext: ExteriorAlgebra, E: Module, n: int) -> JetSpace:
    if n < 0:
        raise ValueError("jet order must be non-negative")
    return c.on(("holonomic", n, id(ext)), E, lambda: _build_kernel_tower(c, ext, E, n, False))


def sesquiholonomic(c: Calculus, ext: ExteriorAlgebra, E: Module, n: int) -> JetSpace:
    if n < 0:
        raise ValueError("jet order must be non-negative")
    if n <= 1:
        return holonomic(c, ext, E, n)
    return c.on(("sesquiholonomic", n, id(ext)), E,
                lambda: _build_kernel_tower(c, ext, E, n, True))


def _build_kernel_tower(c: Calculus, ext: ExteriorAlgebra, E: Module, n: int,
                        sesqui: bool) -> JetSpace:
    flavor = "sesquiholonomic" if sesqui else "holonomic"
    if n == 0:
        return JetSpace(flavor, 0, E, E, la.eye(E.dim), la.eye(E.dim), [],
                        {"l": None, "iota_S": la.eye(E.dim)})
    if n == 1:
        J = c.J1_of(E)
        return JetSpace(flavor, 1, E, J, la.eye(J.dim), j1_map(c, E), [pi10_map(c, E)],
                        {"l": la.eye(J.dim), "iota_S": iota1_map(c, E)})
    prev = holonomic(c, ext, E, n - 1)
    prev2 = holonomic(c, ext, E, n - 2)
    amb = c.J1_of(prev.carrier)
    J1l = J1_functor(c, prev.carrier, c.J1_of(prev2.carrier), prev.extras["l"])
    D = eth(c, ext, prev2.carrier)
    defining = (D.DI if sesqui else D.matrix) * J1l
    carrier = SubModule(amb, la.kernel(defining), name=f"J{n}({E.name})")
    l = carrier.incl
    embed = J1_functor(c, prev.carrier, nonholonomic(c, E, n - 1).carrier, prev.embed) * l
    projection = pi10_map(c, prev.carrier) * l
    top = j1_map(c, prev.carrier) * prev.prolongation
    if not carrier.space.contains(top):
        raise JetError(f"j^{n} does not land in the {flavor} jets")
    prolong = carrier.coords(top)
    # iota: Omega^1(S^{n-1}) (sesquiholonomic) or S^n (holonomic) -> carrier
    S_prev = symmetric_forms(ext, n - 1, E)
    om = Omega1_functor(c, S_prev.carrier, prev.carrier, prev.extras["iota_S"])
    into = iota1_map(c, prev.carrier) * om
    if not sesqui:
        into = into * symmetric_forms(ext, n, E).iota_wedge
    if not carrier.space.contains(into):
        raise JetError("symmetric forms do not land in the jets")
    extras = {"l": l, "defining": defining, "ambient": amb}
    extras["iota_Omega_S" if sesqui else "iota_S"] = carrier.coords(into)
    return JetSpace(flavor, n, E, carrier, embed, prolong, [projection], extras)


def holonomic_functor(c: Calculus, ext: ExteriorAlgebra, X: Module, Y: Module,
                      f: fmpq_mat, m: int) -> fmpq_mat:
    """J^m(f): J^m X -> J^m Y, the restriction of J^1(J^{m-1}(f))."""
    if m == 0:
        return f
    if m == 1:
        return J1_functor(c, X, Y, f)
    JX, JY = holonomic(c, ext, X, m), holonomic(c, ext, Y, m)
    inner = holonomic_functor(c, ext, X, Y, f, m - 1)
    big = J1_functor(c, holonomic(c, ext, X, m - 1).carrier,
                     holonomic(c, ext, Y, m - 1).carrier, inner) * JX.extras["l"]
    if not JY.carrier.space.contains(big):
        raise JetError("J^m(f) does not preserve holonomic jets")
    return JY.carrier.coords(big)


def semiholonomic_factorization(c: Calculus, ext: ExteriorAlgebra, E: Module, n: int):
    """h^n: J^nE -> J^[n]E, or None when the image is not inside J^[n] (non-flat case)."""
    H, S = holonomic(c, ext, E, n), semiholonomic(c, E, n)
    if n <= 1:
        return la.eye(H.dim)
    if not S.carrier.space.contains(H.embed):
        return None
    return S.carrier.coords(H.embed)


def holonomic_characterizations(c: Calculus, ext: ExteriorAlgebra, E: Module, n: int,
                                h: int, k: int) -> dict:
    """Three descriptions of J^nE inside J^(n)E (they agree when Omega^1, Omega^2 are flat)."""
    NH = nonholonomic(c, E, n)
    H = holonomic(c, ext, E, n)
    image = la.image(H.embed)
    kernels = []
    for i in range(0, n - 1):
        X = iterate_J1(c, E, n - i - 2)
        D = eth(c, ext, X)
        tgt = c.tensor_with(semidirect(ext).module, X, f"SD{id(ext)}")
        kernels.append(la.kernel(Jk_functor(c, D.domain, tgt, D.matrix, i)))
    by_kernels = la.intersect_all(kernels, NH.dim)
    X = nonholonomic(c, E, n - h).carrier
    first = la.image(holonomic(c, ext, X, h).embed)
    inner = holonomic(c, ext, E, k)
    second = la.image(Jk_functor(c, inner.carrier, nonholonomic(c, E, k).carrier,
                                 inner.embed, n - k))
    return {"image": image, "kernels": by_kernels, "intersection": la.intersect(first, second)}


def l_mn(c: Calculus, ext: ExteriorAlgebra, E: Module, m: int, n: int) -> fmpq_mat:
    """l^{m,n}: J^{m+n}E -> J^m(J^nE), defined by l^m o l^{m,n} = J^1(l^{m-1,n}) o l^{m+n}."""
    X = holonomic(c, ext, E, n).carrier
    src = holonomic(c, ext, E, m + n)
    if m == 0:
        return la.eye(src.dim)
    prev = l_mn(c, ext, E, m - 1, n)
    big = J1_functor(c, holonomic(c, ext, E, m + n - 1).carrier,
                     holonomic(c, ext, X, m - 1).carrier, prev) * src.extras["l"]
    tgt = holonomic(c, ext, X, m)
    if m == 1:
        return big
    if not tgt.carrier.space.contains(big):
        raise JetError("l^{m,n} does not land in J^m(J^n)")
    return tgt.carrier.coords(big)


def jet_space(flavor: str, c: Calculus, ext: ExteriorAlgebra | None, E: Module,
              n: int) -> JetSpace:
    if flavor == "nonholonomic":
        return nonholonomic(c, E, n)
    if flavor == "semiholonomic":
        return semiholonomic(c, E, n)
    if ext is None:
        raise ValueError(f"{flavor} jets need an exterior algebra")
    if flavor == "sesquiholonomic":
        return sesquiholonomic(c, ext, E, n)
    if flavor == "holonomic":
        return holonomic(c, ext, E, n)
    raise ValueError(f"unknown jet flavor {flavor!r}")


# ---------------------------------------------------------------- exactness

def _sequence_flags(inc: fmpq_mat, proj: fmpq_mat, target_dim: int) -> dict:
    left = la.rank(inc) == inc.ncols() if inc.ncols() else True
    mid = la.kernel(proj) == (la.image(inc) if inc.ncols() else Subspace.zero(proj.ncols()))
    rk = la.rank(proj) if proj.nrows() and proj.ncols() else 0
    right = rk == target_dim
    return {"left_exact": left, "mid_exact": mid, "right_exact": right,
            "complex": la.is_zero(proj * inc) if inc.ncols() else True,
            "coker_dim": target_dim - rk, "kernel_dim": proj.ncols() - rk,
            "image_dim": la.rank(inc) if inc.ncols() else 0}


def exactness_report(flavor: str, c: Calculus, ext: ExteriorAlgebra | None, E: Module,
                     n: int) -> dict:
    """Exactness of the n-jet sequence of the given flavour (a report, never an error)."""
    if n < 1:
        raise ValueError("jet sequences start at order 1")
    J = jet_space(flavor, c, ext, E, n)
    lower = jet_space(flavor if flavor != "sesquiholonomic" else "holonomic", c, ext, E, n - 1)
    if flavor == "nonholonomic":
        X = nonholonomic(c, E, n - 1).carrier
        inc, left_name = iota1_map(c, X), "Omega1(J^(n-1))"
    elif flavor == "semiholonomic":
        inc, left_name = J.extras["iota_T"], "T^n"
    elif flavor == "sesquiholonomic":
        key = "iota_Omega_S" if "iota_Omega_S" in J.extras else "iota_S"
        inc, left_name = J.extras[key], "Omega1(S^(n-1))"
    else:
        inc, left_name = J.extras["iota_S"], "S^n"
    out = _sequence_flags(inc, J.projection, lower.dim)
    out.update({"flavor": flavor, "order": n, "dims": {left_name: inc.ncols(),
                                                       "jets": J.dim, "lower": lower.dim}})
    out["exact"] = out["left_exact"] and out["mid_exact"] and out["right_exact"]
    if flavor == "holonomic" and n == 3 and E is c.A_module and ext is not None and ext.N >= 3:
        out["obstruction"] = second_obstruction(c, ext)
    return out


def second_obstruction(c: Calculus, ext: ExteriorAlgebra) -> dict:
    """Class in H^{1,2} of sum dx2 ^ dx1 (x) dx0 for S^2 elements sum dx2 (x) dx1 (x) x0."""
    A = c.A_module
    n = c.algebra.dim
    S2 = symmetric_forms(ext, 2)
    S1 = symmetric_forms(ext, 1)
    T2 = S2.tensor
    O1A = c.Omega1(A)
    to_O1A = O1A.proj * la.kron(c.d, la.eye(n))                    # x1 (x) x0 |-> dx1 (x) x0
    psi = T2.proj * la.kron(c.d, to_O1A)                             # (x2, x1, x0) -> T^2(A)
    target = ext.over(2, S1.carrier)
    dd = ext.wedge_plain(1, 1) * la.kron(c.d, c.d)
    dx0 = O1A.proj * la.kron(c.d, c.algebra.unit_column())
    phi = target.proj * la.kron(dd, dx0)
    sol, ker = la.solve_affine(psi, S2.iota_T)
    if sol is None:
        raise JetError("S^2 elements are not of the form sum dx (x) dx (x) x")
    classes = phi * sol
    delta12 = spencer_delta(ext, 1, 2)
    im21 = la.image(spencer_delta(ext, 2, 1))
    in_kernel = la.is_zero(delta12 * classes) if classes.ncols() else True
    span = Subspace.span(classes, target.dim) + im21
    ambiguity = phi * ker.matrix() if ker.dim else la.zeros(target.dim, 0)
    independent = im21.contains(ambiguity) if ambiguity.ncols() else True
    return {"in_kernel_of_delta12": in_kernel,
            "class_rank": span.dim - im21.dim,
            "representation_independent": independent,
            "H12": la.kernel(delta12).dim - im21.dim}
