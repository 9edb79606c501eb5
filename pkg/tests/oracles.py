"""Independent reference computations over fractions.Fraction.

Nothing here calls the package's linear algebra: matrices coming out of the
package are converted to Fraction lists and reduced with a separate Gaussian
elimination, so agreement is a genuine second route.
"""
from fractions import Fraction
from itertools import product


def frac(x):
    return Fraction(int(x.p), int(x.q)) if hasattr(x, "p") else Fraction(x)


def to_rows(m):
    """fmpq_mat (or nested lists) -> list of Fraction rows."""
    rows = m.tolist() if hasattr(m, "tolist") else m
    return [[frac(x) for x in r] for r in rows]


def rank(rows):
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [x / p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
            for i in range(len(a))]


def mult_table(A):
    """Structure constants c[i][j][k] as Fractions."""
    return [[[frac(x) for x in v] for v in row] for row in A.mult]


def multiply(table, a, b):
    n = len(table)
    out = [Fraction(0)] * n
    for i, j in product(range(n), range(n)):
        if a[i] and b[j]:
            for k in range(n):
                out[k] += a[i] * b[j] * table[i][j][k]
    return out


def basis_vec(n, i):
    return [Fraction(int(k == i)) for k in range(n)]


def left_action_rows(M):
    return [to_rows(x) for x in M.left]


def right_action_rows(M):
    return [to_rows(x) for x in M.right]


def tensor_over_algebra_dim(M, N):
    """dim M (x)_A N = dim M*dim N - rank{ m.a (x) n - m (x) a.n } over ALL basis a, m, n."""
    m, n = M.dim, N.dim
    R, L = right_action_rows(M), left_action_rows(N)
    rels = []
    for a in range(len(R)):
        for p, q in product(range(m), range(n)):
            v = [Fraction(0)] * (m * n)
            for p2 in range(m):                      # (m_p . a) (x) n_q
                if R[a][p2][p]:
                    v[p2 * n + q] += R[a][p2][p]
            for q2 in range(n):                      # m_p (x) (a . n_q)
                if L[a][q2][q]:
                    v[p * n + q2] -= L[a][q2][q]
            rels.append(v)
    return m * n - rank(rels)


def universal_forms_rows(table):
    """Equations (rows) cutting out ker(mult: A (x) A -> A) in the plain coordinates."""
    n = len(table)
    return [[table[a][b][k] for a in range(n) for b in range(n)] for k in range(n)]


def N_f_dim(table, f):
    """dim{ sum x (x) y in ker mult : sum x [f, y] = 0 }."""
    n = len(table)
    eqs = universal_forms_rows(table)
    for k in range(n):
        row = []
        for a, b in product(range(n), range(n)):
            fb = multiply(table, f, basis_vec(n, b))
            bf = multiply(table, basis_vec(n, b), f)
            comm = [x - y for x, y in zip(fb, bf)]
            row.append(multiply(table, basis_vec(n, a), comm)[k])
        eqs.append(row)
    return n * n - rank(eqs)


def N_intersection_dim(table, fs):
    n = len(table)
    eqs = universal_forms_rows(table)
    for f in fs:
        for k in range(n):
            row = []
            for a, b in product(range(n), range(n)):
                fb = multiply(table, f, basis_vec(n, b))
                bf = multiply(table, basis_vec(n, b), f)
                comm = [x - y for x, y in zip(fb, bf)]
                row.append(multiply(table, basis_vec(n, a), comm)[k])
            eqs.append(row)
    return n * n - rank(eqs)


def first_order_operator_dim(table, N_basis_cols):
    """dim{ Delta in End_k(A) : sum a Delta(b) = 0 for every sum a (x) b in N }.

    Delta is unknown (n*n entries, Delta[r][s] = coefficient of e_r in Delta(e_s)).
    """
    n = len(table)
    eqs = []
    for v in N_basis_cols:
        for k in range(n):
            row = [Fraction(0)] * (n * n)
            for a, b in product(range(n), range(n)):
                coeff = v[a * n + b]
                if not coeff:
                    continue
                # a . Delta(e_b) = sum_r Delta[r][b] a e_r
                for r in range(n):
                    row[r * n + b] += coeff * table[a][r][k]
            eqs.append(row)
    return n * n - rank(eqs)


def tor_by_resolving_second(M, res_N):
    """Tor_k(M, N) computed from a free resolution of the LEFT module N.

    ``res_N`` is a FreeResolution of N; M (x)_A A^r = M^r and the tensored
    boundary has block (l, m) = right multiplication by a_lm on M.
    """
    R = right_action_rows(M)
    dimM = M.dim

    def right_mult(coeffs):
        out = [[Fraction(0)] * dimM for _ in range(dimM)]
        for a, c in enumerate(coeffs):
            c = frac(c)
            if c:
                for i, j in product(range(dimM), range(dimM)):
                    out[i][j] += c * R[a][i][j]
        return out

    def boundary(k):
        rk, rprev = res_N.ranks[k], res_N.ranks[k - 1]
        coeffs = res_N.coefficients[k - 1]
        big = [[Fraction(0)] * (rk * dimM) for _ in range(rprev * dimM)]
        for l, m in product(range(rprev), range(rk)):
            blk = right_mult(coeffs[l][m])
            for i, j in product(range(dimM), range(dimM)):
                big[l * dimM + i][m * dimM + j] = blk[i][j]
        return big

    def rk_of(mat):
        return rank(mat) if mat and mat[0] else 0

    dims = []
    for k in range(res_N.depth):
        size = res_N.ranks[k] * dimM
        out_rank = rk_of(boundary(k)) if k > 0 else 0
        in_rank = rk_of(boundary(k + 1))
        dims.append(size - out_rank - in_rank)
    return dims
