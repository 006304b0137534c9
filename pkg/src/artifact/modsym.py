"""Weight-k modular symbols for Gamma0(N) with character.

Conventions (fixed once):
  * polynomials P(X, Y) of degree w = k - 2 in the basis e_i = X^i Y^(w-i);
  * right action (P|g)(X, Y) = P(aX + bY, cX + dY);
  * Manin symbol [P, (c:d)] = (P|g^-1){g(0), g(oo)} for g in SL2(Z) with bottom row (c, d);
  * [P, (lc:ld)] = psi(l) [P, (c:d)];
  * star involution [P(X,Y), (c:d)] -> -[P(-X,Y), (-c:d)].
"""

from fractions import Fraction
from functools import lru_cache
from math import comb, gcd, ceil
import cmath

import flint
from flint import fmpq, fmpq_mat, fmpz_poly

from . import _linalg as la
from .numfield import (QQ, DirichletCharacter, trivial_character, character_from_label,
                       characters, prime_divisors, factor_int, qq, qstr, euler_phi)


SIGMA = (0, -1, 1, 0)
TAU = (0, -1, 1, -1)
T_UP = (1, 1, 0, 1)
T_DOWN = (1, -1, 0, 1)


def xgcd(a, b):
    """(x, y, g) with a x + b y = g = gcd(a, b) >= 0."""
    if b == 0:
        return (1 if a >= 0 else -1), 0, abs(a)
    q, r = divmod(a, b)
    x, y, g = xgcd(b, r)
    return y, x - y * q, g


def mat_mul(g, h):
    a, b, c, d = g
    e, f, gg, hh = h
    return (a * e + b * gg, a * f + b * hh, c * e + d * gg, c * f + d * hh)


def mat_inv(g):
    a, b, c, d = g
    return (d, -b, -c, a)


@lru_cache(maxsize=200000)
def poly_action(g, w):
    """M with M[j][i] = coefficient of e_j in e_i|g."""
    a, b, c, d = g
    M = [[0] * (w + 1) for _ in range(w + 1)]
    for i in range(w + 1):
        p1 = [comb(i, s) * a ** s * b ** (i - s) for s in range(i + 1)]
        p2 = [comb(w - i, s) * c ** s * d ** (w - i - s) for s in range(w - i + 1)]
        for s, u in enumerate(p1):
            if u:
                for t, v in enumerate(p2):
                    if v:
                        M[s + t][i] += u * v
    return tuple(tuple(r) for r in M)


def poly_column(g, i, w):
    """Coefficients of (aX+bY)^i (cX+dY)^(w-i) in the basis X^t Y^(w-t)."""
    a, b, c, d = g
    f = fmpz_poly([b, a]) ** i * fmpz_poly([d, c]) ** (w - i)
    col = [int(x) for x in f.coeffs()]
    return col + [0] * (w + 1 - len(col))


def act_poly(P, g, w):
    M = poly_action(tuple(g), w)
    return [sum(M[j][i] * P[i] for i in range(w + 1) if P[i]) for j in range(w + 1)]


def lift_to_sl2(c, d, N):
    """A matrix (a, b, c', d') in SL2(Z) with (c', d') = (c, d) mod N."""
    if N == 1:
        return (1, 0, 0, 1)
    c %= N
    d %= N
    if c == 0 and d == 0:
        raise ValueError("(0, 0) is not in P1(Z/N)")
    if c == 0:
        c = N
    t = 0
    while gcd(c, d + t * N) != 1:
        t += 1
    d += t * N
    x, y, _ = xgcd(d, c)
    return (x, -y, c, d)


def merel(n):
    """Heilbronn-Merel matrices of determinant n: a > b >= 0, d > c >= 0."""
    out = []
    for a in range(1, n + 1):
        for d in range(-(-n // a), n + 2 - a):
            bc = a * d - n
            if bc == 0:
                for b in range(a):
                    out.append((a, b, 0, d))
                for c in range(1, d):
                    out.append((a, 0, c, d))
            else:
                for b in range(1, a):
                    if bc % b == 0 and bc // b < d:
                        out.append((a, b, bc // b, d))
    return out


class P1List:
    """P^1(Z/N): representatives and the scalar relating each pair to its representative."""

    def __init__(self, N):
        self.N = N
        self.reps = []
        self.lookup = {}
        if N == 1:
            self.reps = [(0, 0)]
            self.lookup = {(0, 0): (0, 1)}
            return
        units = [u for u in range(1, N) if gcd(u, N) == 1]
        for c in range(N):
            for d in range(N):
                if gcd(gcd(c, d), N) != 1 or (c, d) in self.lookup:
                    continue
                idx = len(self.reps)
                self.reps.append((c, d))
                for u in units:
                    self.lookup[(u * c % N, u * d % N)] = (idx, u)

    def __len__(self):
        return len(self.reps)

    def find(self, c, d):
        """(index, l) with (c, d) = l * rep mod N, or None."""
        if self.N == 1:
            return (0, 1)
        return self.lookup.get((c % self.N, d % self.N))


# ---------------------------------------------------------------------------

class ManinSymbolSpace:
    """Quotient of the free module on Manin symbols by the twisted 2- and 3-term relations."""

    def __init__(self, N, k, psi=None):
        if N < 1 or k < 2:
            raise ValueError("need N >= 1 and k >= 2")
        psi = psi or trivial_character(N)
        if N % psi.modulus:
            raise ValueError("character modulus must divide the level")
        self.N = N
        self.k = k
        self.w = k - 2
        self.psi = psi
        self.field = psi.value_field()
        self.rational = self.field.degree == 1
        if self.rational:
            self.zero, self.one = fmpq(0), fmpq(1)
        else:
            self.zero, self.one = self.field.zero(), self.field.one()
        self.p1 = P1List(N)
        self.ngens = len(self.p1) * (self.w + 1)
        self._chi_cache = {}
        self._build()
        self._cache = {}

    # -- scalars -----------------------------------------------------------
    def chi(self, l):
        """psi(l) as a scalar of the base field (l a unit mod N)."""
        if self.N == 1:
            return self.one
        l %= self.N
        v = self._chi_cache.get(l)
        if v is None:
            v = self.psi.value(l, self.field)
            if self.rational:
                v = v.to_rational()
            self._chi_cache[l] = v
        return v

    def is_zero_scalar(self, x):
        return x == 0

    # -- generators --------------------------------------------------------
    def gen(self, i, j):
        return j * (self.w + 1) + i

    def gen_label(self, g):
        j, i = divmod(g, self.w + 1)
        c, d = self.p1.reps[j]
        return "[X^%dY^%d,(%d:%d)]" % (i, self.w - i, c, d)

    def act_gen(self, i, j, g, out, scale=None):
        """Accumulate [e_i, rep_j] * g into the dict out."""
        a_, b_, c_, d_ = g
        c, d = self.p1.reps[j]
        f = self.p1.find(c * a_ + d * c_, c * b_ + d * d_)
        if f is None:
            return out
        jj, lam = f
        s = self.chi(lam)
        if scale is not None:
            s = s * scale
        col = poly_column(g, i, self.w)
        base = jj * (self.w + 1)
        for t in range(self.w + 1):
            m = col[t]
            if m:
                key = base + t
                out[key] = out.get(key, self.zero) + s * m
        return out

    def _build(self):
        rels = []
        for j in range(len(self.p1)):
            for i in range(self.w + 1):
                x = self.gen(i, j)
                r = {x: self.one}
                self.act_gen(i, j, SIGMA, r)
                rels.append(r)
                r = {x: self.one}
                self.act_gen(i, j, TAU, r)
                self.act_gen(i, j, mat_mul(TAU, TAU), r)
                rels.append(r)
        self._solve(rels)

    def _solve(self, rels):
        pivots = {}
        for r in sorted(rels, key=len):
            r = {k: v for k, v in r.items() if v != 0}
            while True:
                ks = [k for k in r if k in pivots]
                if not ks:
                    break
                k0 = ks[0]
                cf = r[k0]
                for kk, vv in pivots[k0].items():
                    nv = r.get(kk, self.zero) - cf * vv
                    if nv != 0:
                        r[kk] = nv
                    else:
                        r.pop(kk, None)
            if not r:
                continue
            p = min(r)
            inv = 1 / r[p]
            r = {k: v * inv for k, v in r.items()}
            for q, row in pivots.items():
                if p in row:
                    c2 = row[p]
                    for kk, vv in r.items():
                        nv = row.get(kk, self.zero) - c2 * vv
                        if nv != 0:
                            row[kk] = nv
                        else:
                            row.pop(kk, None)
            pivots[p] = r
        self.free = [c for c in range(self.ngens) if c not in pivots]
        fidx = {c: i for i, c in enumerate(self.free)}
        self.dim = len(self.free)
        self.genvec = []
        for c in range(self.ngens):
            if c in fidx:
                self.genvec.append({fidx[c]: self.one})
            else:
                v = {}
                for kk, vv in pivots[c].items():
                    if kk != c:
                        v[fidx[kk]] = v.get(fidx[kk], self.zero) - vv
                self.genvec.append({a: b for a, b in v.items() if b != 0})

    # -- vectors -----------------------------------------------------------
    def symvec(self, d):
        v = [self.zero] * self.dim
        for g, c in d.items():
            if c == 0:
                continue
            for t, x in self.genvec[g].items():
                v[t] = v[t] + c * x
        return v

    def manin(self, P, g, out=None, scale=None):
        """Accumulate [P, g] (g in SL2(Z)) into a dict over generators."""
        out = {} if out is None else out
        f = self.p1.find(g[2], g[3])
        if f is None:
            return out
        j, lam = f
        s = self.chi(lam)
        if scale is not None:
            s = s * scale
        for i in range(self.w + 1):
            if P[i]:
                key = self.gen(i, j)
                out[key] = out.get(key, self.zero) + s * P[i]
        return out

    def zero_to(self, P, cusp, out=None, sign=1):
        """P{0, a/b} as a dict over generators, by continued fractions."""
        out = {} if out is None else out
        a, b = cusp

        def add(g):
            Q = act_poly(P, g, self.w)
            self.manin(Q, g, out, scale=sign if sign != 1 else None)

        if b == 0:
            add((1, 0, 0, 1))
            return out
        if a == 0:
            return out
        if b < 0:
            a, b = -a, -b
        g_ = gcd(a, b)
        a, b = a // g_, b // g_
        pm2, qm2, pm1, qm1 = 0, 1, 1, 0
        add((1, 0, 0, 1))
        x, y = a, b
        j = 0
        while y != 0:
            q = x // y
            x, y = y, x - q * y
            p, qq_ = q * pm1 + pm2, q * qm1 + qm2
            s = -1 if j % 2 == 0 else 1
            add((s * p, pm1, s * qq_, qm1))
            pm2, qm2, pm1, qm1 = pm1, qm1, p, qq_
            j += 1
        return out

    def modsym(self, P, alpha, beta):
        """P{alpha, beta} as a vector in the free basis; cusps as (num, den)."""
        out = {}
        self.zero_to(P, beta, out)
        self.zero_to(P, alpha, out, sign=-1)
        return self.symvec(out)

    def free_symbol(self, f):
        """(i, j, g): the free generator f is [e_i, rep_j] and g lifts rep_j."""
        j, i = divmod(self.free[f], self.w + 1)
        c, d = self.p1.reps[j]
        return i, j, lift_to_sl2(c, d, self.N)

    # -- matrices ----------------------------------------------------------
    def _to_matrix(self, cols):
        n = len(cols)
        rows = [[cols[j][i] for j in range(n)] for i in range(self.dim)]
        if self.rational:
            return la.qmat(rows, n) if rows else fmpq_mat(0, n)
        return rows

    def hecke_matrix(self, n):
        """T_n on the whole space (columns are images of the free basis)."""
        key = ("T", n)
        if key in self._cache:
            return self._cache[key]
        acc = [dict() for _ in self.free]
        gens = [divmod(g, self.w + 1) for g in self.free]
        for h in merel(n):
            for f, (j, i) in enumerate(gens):
                self.act_gen(i, j, h, acc[f])
        cols = [self.symvec(d) for d in acc]
        M = self._to_matrix(cols)
        self._cache[key] = M
        return M

    def hecke_on_gen(self, g, n):
        """T_n applied to one Manin generator, as a vector."""
        j, i = divmod(g, self.w + 1)
        acc = {}
        for h in merel(n):
            self.act_gen(i, j, h, acc)
        return self.symvec(acc)

    def star_matrix(self):
        if "star" in self._cache:
            return self._cache["star"]
        cols = []
        for g in self.free:
            j, i = divmod(g, self.w + 1)
            c, d = self.p1.reps[j]
            f = self.p1.find(-c, d)
            jj, lam = f
            s = -self.chi(lam) if i % 2 == 0 else self.chi(lam)
            cols.append(self.symvec({self.gen(i, jj): s}))
        M = self._to_matrix(cols)
        self._cache["star"] = M
        return M

    def relation_check(self):
        """Verify x + x.sigma = 0 and x + x.tau + x.tau^2 = 0 for every generator."""
        for j in range(len(self.p1)):
            for i in range(self.w + 1):
                x = self.gen(i, j)
                r = {x: self.one}
                self.act_gen(i, j, SIGMA, r)
                if any(v != 0 for v in self.symvec(r)):
                    return False
                r = {x: self.one}
                self.act_gen(i, j, TAU, r)
                self.act_gen(i, j, mat_mul(TAU, TAU), r)
                if any(v != 0 for v in self.symvec(r)):
                    return False
        return True

    # -- boundary ----------------------------------------------------------
    def boundary_matrix(self):
        """Boundary map to cusp symbols; rows = regular cusp classes, cols = free basis."""
        if "bd" in self._cache:
            return self._cache["bd"]
        classes = []      # (rep vector, regular)
        memo = {}

        def reduce(x):
            if x in memo:
                return memo[x]
            res = None
            for t, (r, reg) in enumerate(classes):
                s = self._cusp_relate(r, x)
                if s is not None:
                    res = (t, s) if reg else (None, None)
                    break
            if res is None:
                reg = self._cusp_regular(x)
                classes.append((x, reg))
                res = (len(classes) - 1, self.one) if reg else (None, None)
            memo[x] = res
            return res

        cols = []
        for f in range(self.dim):
            i, j, g = self.free_symbol(f)
            a, b, c, d = g
            col = {}
            if i == self.w:
                t, s = reduce(_prim(a, c))
                if t is not None:
                    col[t] = col.get(t, self.zero) + s
            if i == 0:
                t, s = reduce(_prim(b, d))
                if t is not None:
                    col[t] = col.get(t, self.zero) - s
            cols.append(col)
        regular = [t for t, (_, reg) in enumerate(classes) if reg]
        rows = [[cols[f].get(t, self.zero) for f in range(self.dim)] for t in regular]
        self._cache["bd"] = (rows, [classes[t][0] for t in regular])
        return self._cache["bd"]

    def _cusp_relate(self, r, x):
        """Scalar s with [x] = s [r] if x is Gamma0(N)-equivalent to +-r, else None."""
        N = self.N
        for sgn in (1, -1):
            xx = (sgn * x[0], sgn * x[1])
            dg = _gamma_between(r, xx, N)
            if dg is not None:
                s = self.chi(dg)
                if sgn == -1 and self.k % 2 == 1:
                    s = -s
                return s
        return None

    def _cusp_regular(self, r):
        u, v = r
        N = self.N
        if N == 1:
            return True
        h0 = N // gcd(N, v * v)
        return self.chi((1 + h0 * u * v) % N) == 1 if gcd(1 + h0 * u * v, N) == 1 else True

    # -- cuspidal part -----------------------------------------------------
    def cuspidal_basis(self):
        """Basis (rows over the base field) of the kernel of the boundary map."""
        rows, _ = self.boundary_matrix()
        if self.rational:
            if not rows:
                return la.identity(self.dim)
            return la.rational_kernel(la.qmat(rows, self.dim))
        return la.generic_kernel(rows, self.dim, self.zero, self.one, lambda z: z == 0)

    def to_json(self):
        return {
            "level": self.N,
            "weight": self.k,
            "character": self.psi.label,
            "base_field": [str(c) for c in self.field.coeffs_of_poly()],
            "ngens": self.ngens,
            "dimension": self.dim,
            "basis": [self.gen_label(g) for g in self.free],
        }


def _prim(u, v):
    g = gcd(u, v)
    return (u // g, v // g)


def _sl2_with_first_column(u, v):
    x, y, g = xgcd(u, v)
    # u*x + v*y = 1 -> [[u, -y], [v, x]]
    return (u, -y, v, x)


def _gamma_between(r, x, N):
    """d mod N of some gamma in Gamma0(N) with gamma r = x exactly, or None."""
    if N == 1:
        return 1
    u, b, v, d = _sl2_with_first_column(*r)
    u2, b2, v2, d2 = _sl2_with_first_column(*x)
    # gamma = g_x T^h g_r^-1; lower-left = v2*d - v*d2 - h*v*v2
    A = (v * v2) % N
    B = (v2 * d - v * d2) % N
    g = gcd(A, N)
    if B % g:
        return None
    if g == N:
        h = 0
    else:
        h = (B // g) * pow(A // g, -1, N // g) % (N // g)
    dg = (-v2 * b + u * (v2 * h + d2)) % N
    return dg


# ---------------------------------------------------------------------------
# Integral structure, cuspidal lattice and the pairing (rational spaces)

class CuspidalLattice:
    """Saturated cuspidal sublattice of the integral Manin-symbol lattice.

    basis: rows in free coordinates; mz: basis of the integral lattice (rows);
    coords: rows of integer coordinates of basis w.r.t. mz.
    """

    def __init__(self, space, basis, mz, coords):
        self.space = space
        self.basis = basis
        self.mz = mz
        self.coords = coords
        self.rank = basis.nrows()

    def restrict(self, T):
        """Matrix (acting on coordinate columns) of T on the lattice."""
        if self.rank == 0:
            return fmpq_mat(0, 0)
        return la.restrict(self.basis, T)

    def is_saturated(self):
        if not self.coords:
            return True
        sn = la.zmat(self.coords).snf()
        return all(abs(int(sn[i, i])) == 1 for i in range(len(self.coords)))


def integral_lattice(space):
    if "mz" in space._cache:
        return space._cache["mz"]
    if not space.rational:
        raise NotImplementedError("integral structure requires a rational base field")
    rows = [[v.get(t, fmpq(0)) for t in range(space.dim)] for v in space.genvec]
    d = la.lcm_den(rows)
    H = la.hnf_rows([[int(x * d) for x in r] for r in rows])
    mz = la.qmat([[fmpq(x, d) for x in r] for r in H], space.dim) if H else fmpq_mat(0, space.dim)
    space._cache["mz"] = mz
    return mz


def build_space(N, k, psi=None):
    """The space of weight-k modular symbols for Gamma0(N) with character psi."""
    if isinstance(psi, str):
        psi = character_from_label(psi)
    return ManinSymbolSpace(N, k, psi)


def cuspidal_subspace(space):
    """The cuspidal sublattice (rational base field) or subspace basis rows (otherwise)."""
    if "cusp" in space._cache:
        return space._cache["cusp"]
    if not space.rational:
        res = space.cuspidal_basis()
        space._cache["cusp"] = res
        return res
    mz = integral_lattice(space)
    m = mz.nrows()
    rows, _ = space.boundary_matrix()
    if rows and m:
        B = la.qmat(rows, space.dim) * mz.transpose()
        K = la.integer_kernel(B)
    else:
        K = [[int(i == j) for j in range(m)] for i in range(m)]
    if K:
        basis = la.qmat(K, m) * mz
    else:
        basis = fmpq_mat(0, space.dim)
    res = CuspidalLattice(space, basis, mz, K)
    space._cache["cusp"] = res
    return res


def star_decomposition(space, restrict_to_cusp=True):
    """(plus, minus) bases (rows) of the star eigenspaces."""
    S = space.star_matrix()
    n = space.dim
    if space.rational:
        I = la.identity(n)
        plus = la.rational_kernel((S - I).transpose().transpose())
        minus = la.rational_kernel(S + I)
        if restrict_to_cusp:
            L = cuspidal_subspace(space)
            if L.rank == 0:
                return fmpq_mat(0, n), fmpq_mat(0, n)
            Sl = L.restrict(S)
            r = L.rank
            Ir = la.identity(r)
            pk = la.rational_kernel(Sl - Ir)
            mk = la.rational_kernel(Sl + Ir)
            plus = pk * L.basis if pk.nrows() else fmpq_mat(0, n)
            minus = mk * L.basis if mk.nrows() else fmpq_mat(0, n)
        return plus, minus
    rows = S
    one, zero = space.one, space.zero
    splus = [[rows[i][j] - (one if i == j else zero) for j in range(n)] for i in range(n)]
    sminus = [[rows[i][j] + (one if i == j else zero) for j in range(n)] for i in range(n)]
    plus = la.generic_kernel(splus, n, zero, one, lambda z: z == 0)
    minus = la.generic_kernel(sminus, n, zero, one, lambda z: z == 0)
    if restrict_to_cusp:
        C = cuspidal_subspace(space)
        plus = _intersect_generic(plus, C, n, space)
        minus = _intersect_generic(minus, C, n, space)
    return plus, minus


def _intersect_generic(A, B, n, space):
    """Intersection of two row spaces over a generic field."""
    if not A or not B:
        return []
    zero, one = space.zero, space.one
    # solve x A = y B  <=> [A; -B]^T (x, y) = 0
    M = [[A[i][t] for i in range(len(A))] + [-B[i][t] for i in range(len(B))] for t in range(n)]
    ker = la.generic_kernel(M, len(A) + len(B), zero, one, lambda z: z == 0)
    out = []
    for v in ker:
        out.append([sum((v[i] * A[i][t] for i in range(len(A))), zero) for t in range(n)])
    R, _ = la.generic_rref(out, n, lambda z: z == 0)
    return R


def atkin_lehner_matrix(space):
    """W_N on the whole space: P{a, b} -> P(Y, -N X){-1/(N a), -1/(N b)}."""
    if "W" in space._cache:
        return space._cache["W"]
    if not space.psi.is_trivial():
        raise NotImplementedError("Atkin-Lehner is implemented for the trivial character only")
    N, w = space.N, space.w
    cols = []
    for f in range(space.dim):
        i, j, g = space.free_symbol(f)
        a, b, c, d = g
        P = [int(t == i) for t in range(w + 1)]
        Q = act_poly(P, mat_inv(g), w)
        WQ = [0] * (w + 1)
        for m in range(w + 1):
            WQ[w - m] += (-N) ** (w - m) * Q[m]
        cols.append(space.modsym(WQ, (-d, N * b), (-c, N * a)))
    M = space._to_matrix(cols)
    space._cache["W"] = M
    return M


def pushforward_matrix(high, low, m):
    """A_m: M(high) -> M(low), P{a, b} -> P(X, mY){ma, mb}; needs m * low.N | high.N."""
    if high.N % (m * low.N):
        raise ValueError("pushforward needs m * N_low | N_high")
    if high.k != low.k:
        raise ValueError("weights differ")
    w = high.w
    cols = []
    for f in range(high.dim):
        i, j, g = high.free_symbol(f)
        a, b, c, d = g
        P = [int(t == i) for t in range(w + 1)]
        Q = act_poly(P, mat_inv(g), w)
        Q2 = [Q[t] * m ** (w - t) for t in range(w + 1)]
        cols.append(low.modsym(Q2, (m * b, d), (m * a, c)))
    n = len(cols)
    rows = [[cols[j][i] for j in range(n)] for i in range(low.dim)]
    if high.rational:
        return la.qmat(rows, n) if rows else fmpq_mat(0, n)
    return rows


# -- the cup product on period functionals ----------------------------------

def _binom_pairing(P, Q, w):
    # <P, Q> = sum_i (-1)^i p_i q_{w-i} / C(w, i), p_i the coefficient of X^(w-i) Y^i
    return sum(Fraction((-1) ** i, comb(w, i)) * P[w - i] * Q[i] for i in range(w + 1))


def _cup_gram(space, functionals):
    """Matrix of the cup product (scaled by 6) on functionals given as columns.

    Each functional phi on the free basis gives rho_phi(A) with coefficient
    C(w, i)(-1)^i phi([X^i Y^(w-i), A]) on X^(w-i) Y^i, and
    {phi1, phi2} = sum_A < (rho1||T - rho1||T^-1)(A), rho2(A) >,
    where (rho||g)(A) = rho(A g)|g^-1 and T = [[1, 1], [0, 1]].
    """
    w = space.w
    n1 = len(space.p1)
    r = functionals.ncols()
    # values on all generators: ngens x r
    vals = [[fmpq(0)] * r for _ in range(space.ngens)]
    for g, vec in enumerate(space.genvec):
        row = vals[g]
        for t, x in vec.items():
            for a in range(r):
                y = functionals[t, a]
                if y != 0:
                    row[a] += x * y
    binoms = [comb(w, i) * (-1) ** i for i in range(w + 1)]

    def rho(a, j):
        P = [fmpq(0)] * (w + 1)
        for i in range(w + 1):
            P[w - i] = binoms[i] * vals[space.gen(i, j)][a]
        return P

    shift_up = []
    shift_dn = []
    for j in range(n1):
        c, d = space.p1.reps[j] if space.N > 1 else (0, 1)
        shift_up.append(space.p1.find(c, c + d)[0])
        shift_dn.append(space.p1.find(c, d - c)[0])
    Mup = poly_action(T_DOWN, w)   # acting by T^-1 after shifting by T
    Mdn = poly_action(T_UP, w)
    width = n1 * (w + 1)
    left = []
    right = []
    weights = [fmpq((-1) ** (w - m), comb(w, m)) for m in range(w + 1)]
    for a in range(r):
        rhos = [rho(a, j) for j in range(n1)]
        lrow = []
        rrow = []
        for j in range(n1):
            P1_ = rhos[shift_up[j]]
            P2_ = rhos[shift_dn[j]]
            D = [sum(Mup[t][i] * P1_[i] for i in range(w + 1)) -
                 sum(Mdn[t][i] * P2_[i] for i in range(w + 1)) for t in range(w + 1)]
            for m in range(w + 1):
                lrow.append(D[m] * weights[m])
            Rj = rhos[j]
            for m in range(w + 1):
                rrow.append(Rj[w - m])
        left.append(lrow)
        right.append(rrow)
    Lm = fmpq_mat(r, width, [x for row in left for x in row])
    Rm = fmpq_mat(r, width, [x for row in right for x in row])
    return Lm * Rm.transpose()


CUP_NORMALIZATION = fmpq(1, 6)


class GramMatrix:
    """Alternating pairing on the cuspidal lattice.

    matrix: Gram matrix G with <x, y> = x^T G y in lattice coordinates, where
    G = I * W^-1: I = -(cup/6)^-1 is the intersection form on the lattice and W the
    Atkin-Lehner operator (W^2 = N^(k-2)). normalization records the scale applied
    to the cup sum.
    """

    def __init__(self, space, lattice, matrix, intersection, cup, normalization):
        self.space = space
        self.lattice = lattice
        self.matrix = matrix
        self.intersection = intersection
        self.cup = cup
        self.normalization = normalization

    def is_antisymmetric(self):
        return self.matrix.transpose() == -self.matrix

    def to_json(self):
        G = self.matrix
        return {"level": self.space.N, "weight": self.space.k,
                "rank": G.nrows(),
                "normalization": qstr(self.normalization),
                "gram": [[qstr(G[i, j]) for j in range(G.ncols())] for i in range(G.nrows())]}


def pairing_gram(space):
    """The alternating Gram matrix on the cuspidal lattice (trivial character)."""
    if "gram" in space._cache:
        return space._cache["gram"]
    if not space.psi.is_trivial():
        raise NotImplementedError("the pairing is implemented for the trivial character only")
    L = cuspidal_subspace(space)
    r = L.rank
    if r == 0:
        g = GramMatrix(space, L, fmpq_mat(0, 0), fmpq_mat(0, 0), fmpq_mat(0, 0), CUP_NORMALIZATION)
        space._cache["gram"] = g
        return g
    m = L.mz.nrows()
    basis = la.complete_to_unimodular(L.coords, m)
    Bm = la.qmat(basis, m) * L.mz
    D = Bm.inv()
    Phi = la.qmat([[D[t, j] for j in range(r)] for t in range(space.dim)], r)
    cup = _cup_gram(space, Phi) * CUP_NORMALIZATION
    inter = -cup.inv()
    W = L.restrict(atkin_lehner_matrix(space))
    G = inter * W * fmpq(1, space.N ** space.w)
    g = GramMatrix(space, L, G, inter, cup, CUP_NORMALIZATION)
    space._cache["gram"] = g
    return g


# ---------------------------------------------------------------------------
# Dimension formulas and q-expansion oracles

def gamma0_index(N):
    r = N
    for p in prime_divisors(N):
        r = r * (p + 1) // p
    return r


def sturm_bound(N, k):
    return ceil(Fraction(k * gamma0_index(N), 12))


def _lambda(r, s, p):
    if 2 * s <= r:
        if r % 2 == 0:
            rp = r // 2
            return p ** rp + p ** (rp - 1)
        return 2 * p ** ((r - 1) // 2)
    return 2 * p ** (r - s)


def _char_sum(psi, N, poly):
    tot = 0j
    for x in range(N):
        if poly(x) % N == 0:
            ang = psi.angle(x)
            if ang is not None:
                tot += cmath.exp(2j * cmath.pi * float(ang))
    return tot


def dim_cusp_forms(N, k, psi=None):
    """dim S_k(Gamma0(N), psi) by the Cohen-Oesterle formula (k >= 2)."""
    psi = psi or trivial_character(N)
    if psi.parity != k % 2:
        return 0
    fac = factor_int(N) if N > 1 else []
    cond = psi.conductor
    val = Fraction((k - 1) * gamma0_index(N), 12)
    lam = 1
    for p, r in fac:
        s = 0
        c = cond
        while c % p == 0:
            c //= p
            s += 1
        lam *= _lambda(r, s, p)
    g4 = {0: Fraction(1, 4), 2: Fraction(-1, 4)}.get(k % 4, Fraction(0))
    g3 = {0: Fraction(1, 3), 1: Fraction(0), 2: Fraction(-1, 3)}[k % 3]
    s4 = _char_sum(psi, N, lambda x: x * x + 1)
    s3 = _char_sum(psi, N, lambda x: x * x + x + 1)
    tot = float(val) - lam / 2 + float(g4) * s4.real + float(g3) * s3.real
    if k == 2 and psi.is_trivial():
        tot += 1
    d = round(tot)
    if abs(tot - d) > 1e-6:
        raise ArithmeticError("non-integral dimension %r" % tot)
    return int(d)


def _angles_conductor(ang, N):
    for d in sorted(x for x in range(1, N + 1) if N % x == 0):
        if all(v == 0 for a, v in ang.items() if a % d == 1 % d):
            return d
    return N


def dim_eisenstein(N, k, psi=None):
    """Dimension of the Eisenstein subspace of M_k(Gamma0(N), psi), k >= 2."""
    psi = psi or trivial_character(N)
    if psi.parity != k % 2:
        return 0
    units = [a for a in range(N) if gcd(a, N) == 1] if N > 1 else [0]
    tot = 0
    for chi1 in characters(N):
        a1 = {a: chi1.angle(a) for a in units}
        a2 = {a: (psi.angle(a) - a1[a]) % 1 for a in units}
        f1 = chi1.conductor
        f2 = _angles_conductor(a2, N)
        if N % (f1 * f2) == 0:
            tot += len([t for t in range(1, N + 1) if (N // (f1 * f2)) % t == 0])
    if k == 2 and psi.is_trivial():
        tot -= 1
    return tot


def dim_modular_symbols(N, k, psi=None):
    return 2 * dim_cusp_forms(N, k, psi) + dim_eisenstein(N, k, psi)


def _series_mul(a, b, B):
    out = [0] * (B + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(min(len(b), B + 1 - i)):
                out[i + j] += x * b[j]
    return out


def _eta_power(m, e, B):
    """prod_n (1 - q^(m n))^e up to q^B."""
    s = [0] * (B + 1)
    s[0] = 1
    for n in range(1, B // m + 1):
        f = [0] * (B + 1)
        f[0] = 1
        f[m * n] = -1
        for _ in range(e):
            s = _series_mul(s, f, B)
    return s


def _eisenstein(k, B):
    """Normalized E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n with integer scaling."""
    c = {4: 240, 6: -504}[k]
    out = [1] + [0] * B
    for n in range(1, B + 1):
        out[n] = c * sum(d ** (k - 1) for d in range(1, n + 1) if n % d == 0)
    return out


QEXP_CATALOG = {
    ("eta-product", "1.12"): "q prod (1 - q^n)^24",
    ("eta-product", "11.2"): "q prod (1 - q^n)^2 (1 - q^(11n))^2",
    ("eisenstein-product", "1.12"): "(E4^3 - E6^2)/1728",
    ("eisenstein-product", "1.16"): "E4 (E4^3 - E6^2)/1728",
}


def qexpansion_oracle(kind, label, B):
    """Integer coefficients a_1..a_B of a cataloged newform by power-series multiplication."""
    if (kind, label) not in QEXP_CATALOG:
        raise KeyError("unknown catalog entry %s %s" % (kind, label))
    if kind == "eta-product":
        if label == "1.12":
            s = _eta_power(1, 24, B)
        else:
            s = _series_mul(_eta_power(1, 2, B), _eta_power(11, 2, B), B)
        return [s[n - 1] for n in range(1, B + 1)]
    E4 = _eisenstein(4, B + 1)
    E6 = _eisenstein(6, B + 1)
    cube = _series_mul(_series_mul(E4, E4, B + 1), E4, B + 1)
    sq = _series_mul(E6, E6, B + 1)
    delta = [(x - y) // 1728 for x, y in zip(cube, sq)]
    if label == "1.16":
        delta = _series_mul(delta, E4, B + 1)
    return [delta[n] for n in range(1, B + 1)]
