"""Free resolutions, Tor, projectivity and flatness over finite-dimensional algebras."""
from __future__ import annotations

from dataclasses import dataclass

from flint import fmpq_mat

from . import linalg as la
from .algebra import (Algebra, AlgebraError, Module, ModuleMap, QuotientModule,
                      sub_bimodule_closure)
from .linalg import Subspace

STRATEGIES = ("basis", "greedy")


def free_left_module(B: Algebra, rank: int) -> Module:
    """B^rank with left (and right) multiplication copy-wise; index copy*dim + basis."""
    I = la.eye(rank)
    return Module(B, rank * B.dim, [la.kron(I, x) for x in B.L], [la.kron(I, x) for x in B.R],
                  name=f"{B.name}^{rank}")


def cover_map(M: Module, gens: fmpq_mat) -> fmpq_mat:
    """B^r -> M sending the l-th free generator to the l-th column of gens."""
    B = M.algebra
    cols = []
    for l in range(gens.ncols()):
        g = la.col(gens, l)
        cols += [M.left[i] * g for i in range(B.dim)]
    return la.hstack(cols, nrows=M.dim)


def module_generators(M: Module, space: Subspace | None = None,
                      strategy: str = "basis") -> fmpq_mat:
    """Generators of a left submodule (default: all of M) as columns."""
    space = Subspace.full(M.dim) if space is None else space
    basis = space.matrix()
    if strategy == "basis":
        return basis
    if strategy != "greedy":
        raise ValueError(f"unknown generator strategy {strategy!r}")
    chosen: list[fmpq_mat] = []
    span = Subspace.zero(M.dim)
    for k in range(basis.ncols()):
        v = la.col(basis, k)
        if span.contains(v):
            continue
        chosen.append(v)
        span = sub_bimodule_closure(M, la.hstack(chosen, nrows=M.dim), left=True, right=False)
        if span.dim == space.dim:
            break
    return la.hstack(chosen, nrows=M.dim)


@dataclass
class FreeResolution:
    """... -> F_1 -> F_0 -> M -> 0 with F_k = B^{ranks[k]}.

    ``boundaries[k]`` is delta_{k+1}: F_{k+1} -> F_k as a k-matrix and
    ``coefficients[k][l][m]`` the B-coordinates of delta_{k+1}(e_m) in copy l.
    """
    module: Module
    ranks: list[int]
    augmentation: fmpq_mat
    boundaries: list[fmpq_mat]
    coefficients: list[list[list[list]]]
    free: list[Module]
    strategy: str

    @property
    def depth(self) -> int:
        return len(self.ranks) - 1

    def validate(self) -> dict:
        fails = []
        if la.rank(self.augmentation) != self.module.dim:
            fails.append("augmentation not surjective")
        maps = [self.augmentation] + self.boundaries
        for k in range(len(maps) - 1):
            f, g = maps[k], maps[k + 1]
            if g.ncols() and not la.is_zero(f * g):
                fails.append(f"not a complex at F_{k}")
            ker = la.kernel(f)
            img = la.image(g) if g.ncols() else Subspace.zero(f.ncols())
            if ker != img:
                fails.append(f"not exact at F_{k}")
        return {"exact": not fails, "failures": fails}


def _coefficients(B: Algebra, gens: fmpq_mat, rank: int) -> list:
    n = B.dim
    out = [[None] * gens.ncols() for _ in range(rank)]
    for m in range(gens.ncols()):
        v = la.to_list(la.col(gens, m))
        for l in range(rank):
            out[l][m] = v[l * n:(l + 1) * n]
    return out


def free_resolution(M: Module, depth: int, strategy: str = "basis") -> FreeResolution:
    """Resolve the left module M to ``depth`` (F_0 .. F_depth)."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if M.left is None:
        raise AlgebraError("free_resolution needs a left module")
    B = M.algebra
    gens = module_generators(M, strategy=strategy) if M.dim else la.zeros(0, 0)
    ranks = [gens.ncols()]
    F = [free_left_module(B, ranks[0])]
    eps = cover_map(M, gens) if ranks[0] else la.zeros(M.dim, 0)
    boundaries, coeffs = [], []
    prev_map, prev_free = eps, F[0]
    for _ in range(depth):
        ker = la.kernel(prev_map) if prev_free.dim else Subspace.zero(0)
        g = module_generators(prev_free, ker, strategy) if ker.dim else la.zeros(prev_free.dim, 0)
        r = g.ncols()
        Fk = free_left_module(B, r)
        delta = cover_map(prev_free, g) if r else la.zeros(prev_free.dim, 0)
        boundaries.append(delta)
        coeffs.append(_coefficients(B, g, ranks[-1]))
        ranks.append(r)
        F.append(Fk)
        prev_map, prev_free = delta, Fk
    return FreeResolution(M, ranks, eps, boundaries, coeffs, F, strategy)


def _tensored_boundary(res: FreeResolution, N: Module, k: int) -> fmpq_mat:
    """delta_k (x)_A N: N^{r_k} -> N^{r_{k-1}}; block (l, m) is left multiplication by a_{lm}."""
    rk, rprev = res.ranks[k], res.ranks[k - 1]
    if rk == 0 or rprev == 0:
        return la.zeros(rprev * N.dim, rk * N.dim)
    coeffs = res.coefficients[k - 1]
    rows = []
    for l in range(rprev):
        rows.append(la.hstack([N.left_matrix(coeffs[l][m]) for m in range(rk)], nrows=N.dim))
    return la.vstack(rows, ncols=rk * N.dim)


def tor(M: Module, N: Module, n: int, strategy: str = "basis",
        resolution: FreeResolution | None = None) -> dict:
    """Tor_n(M, N) for a right module M and a left module N (same algebra)."""
    if n < 0:
        raise ValueError("Tor degree must be non-negative")
    if M.right is None or N.left is None:
        raise AlgebraError("tor needs a right module M and a left module N")
    if resolution is None:
        resolution = free_resolution(M.as_left_over_opposite(), n + 1, strategy)
    if resolution.depth < n + 1:
        raise ValueError(f"resolution depth {resolution.depth} is too small for Tor_{n}")
    out_map = (_tensored_boundary(resolution, N, n) if n > 0
               else la.zeros(0, resolution.ranks[0] * N.dim))
    in_map = _tensored_boundary(resolution, N, n + 1)
    ker = la.kernel(out_map)
    im = la.image(in_map) if in_map.ncols() else Subspace.zero(ker.ambient)
    if not ker.contains_space(im):
        raise AlgebraError("tensored resolution is not a complex")
    im_coords = ker.coords(im.matrix()) if im.dim else la.zeros(ker.dim, 0)
    q = la.quotient(ker.dim, Subspace.span(im_coords, ker.dim))
    return {"degree": n, "dim": ker.dim - im.dim, "representatives": ker.matrix() * q.sect,
            "ranks": resolution.ranks}


def tor_dims(M: Module, N: Module, depth: int, strategy: str = "basis") -> list[int]:
    res = free_resolution(M.as_left_over_opposite(), depth + 1, strategy)
    return [tor(M, N, k, resolution=res)["dim"] for k in range(depth + 1)]


def is_projective(M: Module) -> dict:
    """Decide projectivity of a left module by solving for a left-linear section of a free cover."""
    if M.dim == 0:
        return {"projective": True, "splitting": la.zeros(0, 0), "cover_rank": 0}
    gens = module_generators(M, strategy="greedy")
    F = free_left_module(M.algebra, gens.ncols())
    eps = cover_map(M, gens)
    f, m = F.dim, M.dim
    eqs = [la.kron(la.eye(f), M.left[g].transpose()) - la.kron(F.left[g], la.eye(m))
           for g in M.algebra.generators()]
    hom = la.vstack(eqs, ncols=f * m)
    system = la.vstack([hom, la.kron(eps, la.eye(m))], ncols=f * m)
    rhs = la.vstack([la.zeros(hom.nrows(), 1), la.column(la.eye(m).entries())], ncols=1)
    sol, _ = la.solve_affine(system, rhs)
    if sol is None:
        return {"projective": False, "splitting": None, "cover_rank": gens.ncols()}
    s = fmpq_mat(f, m, la.to_list(sol))
    return {"projective": True, "splitting": s, "cover_rank": gens.ncols()}


def cyclic_test_modules(A: Algebra, side: str = "left") -> list[Module]:
    """A and the cyclic modules A/Ax (left) or A/xA (right) for every basis element x."""
    if side == "left":
        reg = Module(A, A.dim, A.L, None, name="A")
        ideals = [Subspace.span(A.R[x], A.dim) for x in range(A.dim)]
    else:
        reg = Module(A, A.dim, None, A.R, name="A")
        ideals = [Subspace.span(A.L[x], A.dim) for x in range(A.dim)]
    out = [reg]
    for x, ideal in enumerate(ideals):
        out.append(QuotientModule(reg, ideal, name=f"A/{A.basis[x]}"))
    return out


def is_flat(M: Module, side: str = "right", probe: bool = True) -> dict:
    """Flatness of M (f.d. over a f.d. algebra: flat <=> projective), cross-checked with Tor_1."""
    if side == "right":
        if M.right is None:
            raise AlgebraError("module has no right action")
        proj = is_projective(M.as_left_over_opposite())["projective"]
    elif side == "left":
        proj = is_projective(M)["projective"]
    else:
        raise ValueError("side must be 'left' or 'right'")
    out = {"flat": proj, "projective": proj}
    if probe:
        if side == "right":
            tor1 = [tor(M, T, 1)["dim"] for T in cyclic_test_modules(M.algebra, "left")]
        else:
            tor1 = [tor(T, M, 1)["dim"] for T in cyclic_test_modules(M.algebra, "right")]
        out["tor1_probe"] = tor1
        out["probe_agrees"] = all(t == 0 for t in tor1) == proj
    return out


def ses_exact(f, g) -> dict:
    """Exactness flags for 0 -> X --f--> Y --g--> Z -> 0."""
    fm = f.matrix if isinstance(f, ModuleMap) else f
    gm = g.matrix if isinstance(g, ModuleMap) else g
    if fm.nrows() != gm.ncols():
        raise la.DimensionError("codomain of f differs from domain of g")
    rf = la.rank(fm) if fm.ncols() and fm.nrows() else 0
    rg = la.rank(gm) if gm.ncols() and gm.nrows() else 0
    img = la.image(fm) if fm.ncols() else Subspace.zero(fm.nrows())
    flags = {"injective": rf == fm.ncols(), "middle": la.kernel(gm) == img,
             "surjective": rg == gm.nrows()}
    flags["exact"] = all(flags.values())
    flags["failing"] = [k for k in ("injective", "middle", "surjective") if not flags[k]]
    return flags
