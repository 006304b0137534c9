"""Exact linear algebra helpers over Q, Z and small number fields."""

from math import gcd

import flint
from flint import fmpq, fmpq_mat, fmpz_mat

from .numfield import qq


def qmat(rows, ncols=None):
    r = len(rows)
    c = len(rows[0]) if r else (ncols or 0)
    return fmpq_mat(r, c, [qq(x) for row in rows for x in row])


def zmat(rows, ncols=None):
    r = len(rows)
    c = len(rows[0]) if r else (ncols or 0)
    return fmpz_mat(r, c, [int(x) for row in rows for x in row])


def rows_of(M):
    return [[M[i, j] for j in range(M.ncols())] for i in range(M.nrows())]


def identity(n):
    return fmpq_mat(n, n, [fmpq(int(i == j)) for i in range(n) for j in range(n)])


def zero(n, m=None):
    return fmpq_mat(n, n if m is None else m)


def scalar(n, c):
    c = qq(c)
    return fmpq_mat(n, n, [c if i == j else fmpq(0) for i in range(n) for j in range(n)])


def lcm_den(rows):
    d = 1
    for row in rows:
        for x in row:
            q = int(qq(x).q)
            d = d * q // gcd(d, q)
    return d


def vstack(mats):
    mats = [m for m in mats if m.nrows()]
    if not mats:
        raise ValueError("empty stack")
    rows = []
    for m in mats:
        rows.extend(rows_of(m))
    return qmat(rows)


def hstack(mats):
    n = mats[0].nrows()
    rows = [[] for _ in range(n)]
    for m in mats:
        for i in range(n):
            rows[i].extend(m[i, j] for j in range(m.ncols()))
    return qmat(rows)


def rational_kernel(M):
    """Basis (as rows of an fmpq_mat) of {x : M x = 0}."""
    n = M.ncols()
    if M.nrows() == 0:
        return identity(n)
    R, rank = M.rref()
    piv = []
    for i in range(rank):
        for j in range(n):
            if R[i, j] != 0:
                piv.append(j)
                break
    free = [j for j in range(n) if j not in piv]
    out = []
    for f in free:
        v = [fmpq(0)] * n
        v[f] = fmpq(1)
        for i, pj in enumerate(piv):
            v[pj] = -R[i, f]
        out.append(v)
    return qmat(out, n) if out else fmpq_mat(0, n)


def row_space(M):
    """Echelon basis of the row space of M (rows)."""
    if M.nrows() == 0:
        return M
    R, rank = M.rref()
    return qmat([[R[i, j] for j in range(M.ncols())] for i in range(rank)], M.ncols())


def integer_kernel(A):
    """Saturated Z-basis (rows) of {x in Z^n : A x = 0} for a rational matrix A."""
    n = A.ncols()
    m = A.nrows()
    if m == 0:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    d = lcm_den(rows_of(A))
    Ai = [[int(A[i, j] * d) for j in range(n)] for i in range(m)]
    aug = [[Ai[i][j] for i in range(m)] + [int(j == t) for t in range(n)] for j in range(n)]
    H = zmat(aug).hnf()
    out = []
    for r in range(n):
        row = [int(H[r, c]) for c in range(m + n)]
        if all(x == 0 for x in row[:m]) and any(row[m:]):
            out.append(row[m:])
    return out


def saturate(rows):
    """Saturation in Z^n of the Q-span of the given rational rows."""
    if not rows:
        return []
    M = qmat(rows)
    # the orthogonal complement, then its integral kernel
    C = rational_kernel(M)
    n = M.ncols()
    if C.nrows() == 0:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    return integer_kernel(C)


def hnf_rows(rows):
    """Nonzero rows of the HNF of an integer matrix."""
    if not rows:
        return []
    H = zmat(rows).hnf()
    out = []
    for r in range(H.nrows()):
        row = [int(H[r, c]) for c in range(H.ncols())]
        if any(row):
            out.append(row)
    return out


def complete_to_unimodular(K, m):
    """Extend the saturated rows K of Z^m to a basis of Z^m (first rows are K)."""
    basis = [list(x) for x in K]
    for e in range(m):
        if len(basis) == m:
            break
        cand = basis + [[int(t == e) for t in range(m)]]
        sn = zmat(cand).snf()
        if all(abs(int(sn[i, i])) == 1 for i in range(len(cand))):
            basis = cand
    if len(basis) != m:
        raise ArithmeticError("lattice is not saturated")
    return basis


def solve_in_span(B, Y):
    """C with B^T C = Y, where B has independent rows spanning the columns of Y."""
    r = B.nrows()
    n = B.ncols()
    Bt = B.transpose()
    sel = []
    for i in range(n):
        cand = sel + [i]
        sub = qmat([[Bt[t, j] for j in range(r)] for t in cand])
        if sub.rank() == len(cand):
            sel = cand
        if len(sel) == r:
            break
    if len(sel) < r:
        raise ArithmeticError("basis rows are dependent")
    Bs = qmat([[Bt[t, j] for j in range(r)] for t in sel])
    Ys = qmat([[Y[t, j] for j in range(Y.ncols())] for t in sel])
    C = Bs.solve(Ys)
    if Bt * C != Y:
        raise ArithmeticError("image not contained in the span")
    return C


def restrict(B, T):
    """Matrix of T (acting on columns) on the row span of B, in that basis."""
    return solve_in_span(B, T * B.transpose())


def poly_eval_mat(poly, T):
    """Evaluate a rational polynomial at a square matrix (Horner)."""
    n = T.nrows()
    coeffs = list(poly.coeffs())
    R = zero(n)
    for c in reversed(coeffs):
        R = R * T + scalar(n, c)
    return R


def is_scalar(M):
    n = M.nrows()
    c = M[0, 0] if n else fmpq(0)
    return all(M[i, j] == (c if i == j else 0) for i in range(n) for j in range(n)), c


# ---------------------------------------------------------------------------
# generic dense elimination over a field whose elements support + - * /

def generic_rref(rows, ncols, is_zero):
    rows = [list(r) for r in rows]
    piv = []
    r = 0
    for c in range(ncols):
        p = None
        for i in range(r, len(rows)):
            if not is_zero(rows[i][c]):
                p = i
                break
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not is_zero(rows[i][c]):
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], piv


def generic_kernel(rows, ncols, zero, one, is_zero):
    R, piv = generic_rref(rows, ncols, is_zero)
    free = [j for j in range(ncols) if j not in piv]
    out = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for i, pj in enumerate(piv):
            v[pj] = -R[i][f]
        out.append(v)
    return out


def generic_rank(rows, ncols, is_zero):
    return len(generic_rref(rows, ncols, is_zero)[1])
