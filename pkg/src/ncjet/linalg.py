"""Exact rational linear algebra.

Matrices are ``flint.fmpq_mat``.  Linear maps use the column convention:
a map from a space of dimension ``m`` to one of dimension ``n`` is an
``n x m`` matrix acting on column vectors.  Subspaces are stored by the
rows of their reduced echelon basis, so two subspaces are equal exactly
when their bases are equal.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from flint import fmpq, fmpq_mat

Scalar = fmpq
Matrix = fmpq_mat


class DimensionError(ValueError):
    pass


class CarrierTooLarge(RuntimeError):
    """A construction would exceed the carrier dimension cap."""


DEFAULT_MAX_DIM = 4096


def max_dim() -> int:
    """Carrier dimension cap, read from NCJET_MAX_DIM on every call."""
    raw = os.environ.get("NCJET_MAX_DIM")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise DimensionError(f"NCJET_MAX_DIM must be an integer, got {raw!r}") from None
    if value <= 0:
        raise DimensionError("NCJET_MAX_DIM must be positive")
    return value


def check_carrier(dim: int, what: str = "carrier") -> None:
    cap = max_dim()
    if dim > cap:
        raise CarrierTooLarge(f"{what} has dimension {dim} > NCJET_MAX_DIM={cap}")


# ---------------------------------------------------------------- scalars

def scalar(x) -> fmpq:
    """Coerce ints, Fractions, fmpq and strings like "-3/4" to fmpq."""
    if isinstance(x, fmpq):
        return x
    if isinstance(x, int):
        return fmpq(x)
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            p, q = s.split("/")
            if int(q) == 0:
                raise ValueError(f"zero denominator in {x!r}")
            return fmpq(int(p), int(q))
        return fmpq(int(s))
    raise TypeError(f"cannot read {x!r} as a rational")


def format_scalar(x) -> str:
    x = scalar(x)
    return str(x.p) if x.q == 1 else f"{x.p}/{x.q}"


# ---------------------------------------------------------------- matrices

def zeros(n: int, m: int) -> fmpq_mat:
    return fmpq_mat(n, m)


def eye(n: int) -> fmpq_mat:
    out = fmpq_mat(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def from_rows(rows: Sequence[Sequence], ncols: int | None = None) -> fmpq_mat:
    rows = list(rows)
    if not rows:
        return fmpq_mat(0, ncols or 0)
    m = len(rows[0]) if ncols is None else ncols
    flat = []
    for r in rows:
        if len(r) != m:
            raise DimensionError("ragged rows")
        flat.extend(scalar(v) for v in r)
    return fmpq_mat(len(rows), m, flat)


def from_columns(cols: Sequence[Sequence], nrows: int) -> fmpq_mat:
    cols = list(cols)
    if not cols:
        return fmpq_mat(nrows, 0)
    return from_rows(cols, nrows).transpose()


def column(v: Sequence) -> fmpq_mat:
    return fmpq_mat(len(v), 1, [scalar(x) for x in v])


def unit_vector(n: int, i: int) -> fmpq_mat:
    out = fmpq_mat(n, 1)
    out[i, 0] = 1
    return out


def to_list(v: fmpq_mat) -> list[fmpq]:
    """Flatten a column (or row) vector to a list."""
    return list(v.entries())


def col(m: fmpq_mat, j: int) -> fmpq_mat:
    out = fmpq_mat(m.nrows(), 1)
    for i in range(m.nrows()):
        out[i, 0] = m[i, j]
    return out


def submatrix(m: fmpq_mat, rows: Sequence[int] | None = None,
              cols: Sequence[int] | None = None) -> fmpq_mat:
    rows = range(m.nrows()) if rows is None else rows
    cols = range(m.ncols()) if cols is None else cols
    rows, cols = list(rows), list(cols)
    src = m.tolist()
    flat = [src[i][j] for i in rows for j in cols]
    return fmpq_mat(len(rows), len(cols), flat)


def hstack(mats: Sequence[fmpq_mat], nrows: int | None = None) -> fmpq_mat:
    mats = list(mats)
    if not mats:
        return fmpq_mat(nrows or 0, 0)
    n = mats[0].nrows()
    if any(x.nrows() != n for x in mats):
        raise DimensionError("hstack: row counts differ")
    return vstack([x.transpose() for x in mats], ncols=n).transpose()


def vstack(mats: Sequence[fmpq_mat], ncols: int | None = None) -> fmpq_mat:
    mats = list(mats)
    if not mats:
        return fmpq_mat(0, ncols or 0)
    m = mats[0].ncols()
    if any(x.ncols() != m for x in mats):
        raise DimensionError("vstack: column counts differ")
    flat = []
    for x in mats:
        flat.extend(x.entries())
    return fmpq_mat(sum(x.nrows() for x in mats), m, flat)


def kron(a: fmpq_mat, b: fmpq_mat) -> fmpq_mat:
    """Kronecker product; index (i, j) of a with (k, l) of b -> (i*bn + k, j*bm + l)."""
    an, am, bn, bm = a.nrows(), a.ncols(), b.nrows(), b.ncols()
    out = fmpq_mat(an * bn, am * bm)
    # products are mostly sparse: fill only the nonzero entries of an empty matrix
    al, bl = a.tolist(), b.tolist()
    bnz = [(k, l, y) for k, row in enumerate(bl) for l, y in enumerate(row) if y != 0]
    for i, row in enumerate(al):
        r0 = i * bn
        for j, x in enumerate(row):
            if x == 0:
                continue
            c0 = j * bm
            for k, l, y in bnz:
                out[r0 + k, c0 + l] = x * y
    return out


def direct_sum_matrix(a: fmpq_mat, b: fmpq_mat) -> fmpq_mat:
    out = fmpq_mat(a.nrows() + b.nrows(), a.ncols() + b.ncols())
    for i in range(a.nrows()):
        for j in range(a.ncols()):
            out[i, j] = a[i, j]
    for i in range(b.nrows()):
        for j in range(b.ncols()):
            out[a.nrows() + i, a.ncols() + j] = b[i, j]
    return out


def is_zero(m: fmpq_mat) -> bool:
    return m == fmpq_mat(m.nrows(), m.ncols())


def rank(m: fmpq_mat) -> int:
    if m.nrows() == 0 or m.ncols() == 0:
        return 0
    return m.rref()[1]


def rref(m: fmpq_mat) -> tuple[fmpq_mat, list[int]]:
    """Reduced row echelon form and pivot columns."""
    if m.nrows() == 0 or m.ncols() == 0:
        return fmpq_mat(m.nrows(), m.ncols()), []
    r, rk = m.rref()
    rows = r.tolist()
    pivots = []
    j = 0
    for i in range(rk):
        while rows[i][j] == 0:
            j += 1
        pivots.append(j)
    return r, pivots


# ---------------------------------------------------------------- subspaces

@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of Q^ambient with canonical reduced echelon basis (as rows)."""

    ambient: int
    basis: fmpq_mat
    pivots: tuple[int, ...]

    @staticmethod
    def span(vectors: fmpq_mat, ambient: int | None = None) -> "Subspace":
        """Span of the columns of ``vectors``."""
        amb = vectors.nrows() if ambient is None else ambient
        if vectors.ncols() == 0:
            return Subspace.zero(amb)
        if vectors.nrows() != amb:
            raise DimensionError("span: vector length differs from ambient")
        return Subspace.row_span(vectors.transpose())

    @staticmethod
    def row_span(rows: fmpq_mat) -> "Subspace":
        r, piv = rref(rows)
        basis = submatrix(r, range(len(piv))) if piv else fmpq_mat(0, rows.ncols())
        return Subspace(rows.ncols(), basis, tuple(piv))

    @staticmethod
    def zero(ambient: int) -> "Subspace":
        return Subspace(ambient, fmpq_mat(0, ambient), ())

    @staticmethod
    def full(ambient: int) -> "Subspace":
        return Subspace(ambient, eye(ambient), tuple(range(ambient)))

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def matrix(self) -> fmpq_mat:
        """Basis vectors as columns (ambient x dim): the inclusion map."""
        return self.basis.transpose()

    def coords(self, v: fmpq_mat) -> fmpq_mat:
        """Coordinates of column vectors ``v`` (assumed inside) in the basis."""
        return submatrix(v, self.pivots)

    def contains(self, v: fmpq_mat) -> bool:
        """True if every column of v lies in the subspace."""
        if v.ncols() == 0:
            return True
        return self.matrix() * self.coords(v) == v

    def contains_space(self, other: "Subspace") -> bool:
        return self.contains(other.matrix())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient == other.ambient and self.pivots == other.pivots \
            and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient, self.pivots))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return intersect(self, other)


def kernel(f: fmpq_mat) -> Subspace:
    n = f.ncols()
    if f.nrows() == 0:
        return Subspace.full(n)
    r, piv = rref(f)
    free = [c for c in range(n) if c not in set(piv)]
    if not free:
        return Subspace.zero(n)
    rows = r.tolist()
    vecs = []
    for c in free:
        v = [fmpq(0)] * n
        v[c] = fmpq(1)
        for k, p in enumerate(piv):
            v[p] = -rows[k][c]
        vecs.append(v)
    return Subspace.row_span(from_rows(vecs, n))


def image(f: fmpq_mat) -> Subspace:
    return Subspace.span(f, f.nrows())


def annihilator(u: Subspace) -> Subspace:
    return kernel(u.basis)


def subspace_sum(u: Subspace, v: Subspace) -> Subspace:
    if u.ambient != v.ambient:
        raise DimensionError("sum: ambient dimensions differ")
    return Subspace.row_span(vstack([u.basis, v.basis], ncols=u.ambient))


def intersect(u: Subspace, v: Subspace) -> Subspace:
    if u.ambient != v.ambient:
        raise DimensionError("intersect: ambient dimensions differ")
    if u.dim == 0 or v.dim == 0:
        return Subspace.zero(u.ambient)
    return annihilator(subspace_sum(annihilator(u), annihilator(v)))


def intersect_all(spaces: Iterable[Subspace], ambient: int) -> Subspace:
    out = Subspace.full(ambient)
    for s in spaces:
        out = intersect(out, s)
    return out


@dataclass(frozen=True, eq=False)
class Quotient:
    """Q^ambient / U with projection (q x ambient) and section (ambient x q).

    The complement used by the section is spanned by the non-pivot
    coordinate vectors of U's echelon basis, so both maps are canonical.
    """

    ambient: int
    sub: Subspace
    proj: fmpq_mat
    sect: fmpq_mat

    @property
    def dim(self) -> int:
        return self.ambient - self.sub.dim


def quotient(ambient: int, u: Subspace) -> Quotient:
    if u.ambient != ambient:
        raise DimensionError("quotient: ambient dimensions differ")
    piv = set(u.pivots)
    free = [c for c in range(ambient) if c not in piv]
    q = len(free)
    idx = {c: i for i, c in enumerate(free)}
    proj = fmpq_mat(q, ambient)
    sect = fmpq_mat(ambient, q)
    for c, i in idx.items():
        proj[i, c] = 1
        sect[c, i] = 1
    rows = u.basis.tolist()
    for k, p in enumerate(u.pivots):
        for c, i in idx.items():
            x = rows[k][c]
            if x != 0:
                proj[i, p] = -x
    return Quotient(ambient, u, proj, sect)


def preimage(f: fmpq_mat, u: Subspace) -> Subspace:
    if u.ambient != f.nrows():
        raise DimensionError("preimage: codomain mismatch")
    return kernel(quotient(u.ambient, u).proj * f)


def solve_affine(f: fmpq_mat, target: fmpq_mat) -> tuple[fmpq_mat | None, Subspace]:
    """Solve f x = target (target may have several columns).

    Returns a particular solution (or None) and the kernel of f.
    """
    if target.nrows() != f.nrows():
        raise DimensionError("solve_affine: target length differs")
    ker = kernel(f)
    n, m = f.ncols(), target.ncols()
    if f.nrows() == 0:
        return fmpq_mat(n, m), ker
    aug = hstack([f, target])
    r, piv = rref(aug)
    if piv and piv[-1] >= n:
        return None, ker
    x = fmpq_mat(n, m)
    for k, p in enumerate(piv):
        for j in range(m):
            x[p, j] = r[k, n + j]
    return x, ker


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear map Q^domain -> Q^codomain stored as a codomain x domain matrix."""

    domain_dim: int
    codomain_dim: int
    matrix: fmpq_mat

    def __post_init__(self):
        if (self.matrix.nrows(), self.matrix.ncols()) != (self.codomain_dim, self.domain_dim):
            raise DimensionError("LinearMap: matrix shape does not match dims")

    @staticmethod
    def of(m: fmpq_mat) -> "LinearMap":
        return LinearMap(m.ncols(), m.nrows(), m)

    def __call__(self, v: fmpq_mat) -> fmpq_mat:
        return self.matrix * v

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        if other.codomain_dim != self.domain_dim:
            raise DimensionError("composition: dims do not chain")
        return LinearMap(other.domain_dim, self.codomain_dim, self.matrix * other.matrix)

    def __eq__(self, other):
        return isinstance(other, LinearMap) and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.domain_dim, self.codomain_dim))

    def kernel(self) -> Subspace:
        return kernel(self.matrix)

    def image(self) -> Subspace:
        return image(self.matrix)

    @property
    def rank(self) -> int:
        return rank(self.matrix)
