"""Double cosets of GL2 over the p-adic integers at one prime.

V_i is the subgroup of GL2(Z_p) with lower-left entry divisible by p^i. Matrices are
integer 2x2 tuples (a, b, c, d) = [[a, b], [c, d]] with determinant p^t times a unit;
they are reduced modulo a working power of p wherever that does not change the coset.

A left coset h V_j is identified by the pair of lattices h Z_p^2 and h diag(1, p^j) Z_p^2
(V_j is exactly the stabilizer of that pair), each stored by its Hermite form.
"""

import random
from collections import deque

from .numfield import vp


def _mul(g, h):
    a, b, c, d = g
    e, f, x, y = h
    return (a * e + b * x, a * f + b * y, c * e + d * x, c * f + d * y)


def _det(g):
    return g[0] * g[3] - g[1] * g[2]


def _adj(g):
    a, b, c, d = g
    return (d, -b, -c, a)


def _vdet(g, p):
    D = _det(g)
    if D == 0:
        raise ValueError("singular matrix")
    return vp(abs(D), p)


def _v(x, p, cap):
    if x % p ** cap == 0:
        return cap
    return vp(abs(x), p)


def _lattice_key(h, p, t):
    """Hermite form (a, b, x) of h Z_p^2 = <(p^a, 0), (x, p^b)>, x mod p^a, with t = v(det h)."""
    T = t + 1
    a11, a12, a21, a22 = (x % p ** T for x in h)
    v1, v2 = _v(a21, p, T), _v(a22, p, T)
    if v1 <= v2:
        b, top, bot = v1, a11, a21
    else:
        b, top, bot = v2, a12, a22
    ae = t - b
    if ae == 0:
        return (0, b, 0)
    m = p ** ae
    unit = (bot // p ** b) % m
    return (ae, b, top * pow(unit, -1, m) % m)


def coset_key(h, p, j):
    """Key of the left coset h V_j."""
    t = _vdet(h, p)
    return (_lattice_key(h, p, t), _lattice_key(_mul(h, (1, 0, 0, p ** j)), p, t + j))


def _reduce(h, p, T):
    m = p ** T
    return tuple(x % m for x in h)


class LocalSubgroup:
    """V_i inside GL2(Z_p)."""

    def __init__(self, p, i):
        if i < 0:
            raise ValueError("level exponent must be >= 0")
        self.p = p
        self.i = i

    def __repr__(self):
        return "V_%d" % self.i

    def __eq__(self, other):
        return isinstance(other, LocalSubgroup) and (self.p, self.i) == (other.p, other.i)

    def __hash__(self):
        return hash((self.p, self.i))

    def contains(self, u):
        return _det(u) % self.p != 0 and u[2] % self.p ** self.i == 0

    def generators(self):
        """Integer matrices whose images generate V_i modulo every power of p."""
        p = self.p
        gens = [(1, 1, 0, 1), (1, 0, p ** self.i, 1)]
        units = [-1, 5] if p == 2 else [_primitive_root_sq(p)]
        for r in units:
            gens.append((r, 0, 0, 1))
            gens.append((1, 0, 0, r))
        return gens


def _primitive_root_sq(p):
    """A primitive root modulo p^2 (hence modulo every p^M)."""
    for g in range(2, p * p):
        if g % p == 0:
            continue
        order = p * (p - 1)
        if all(pow(g, order // q, p * p) != 1 for q in _prime_factors(order)):
            return g
    raise ValueError("no primitive root")


def _prime_factors(n):
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def _orbit(group, h, j, T):
    """Left cosets in group * h V_j: {key: representative}, by breadth-first search."""
    p = group.p
    gens = group.generators()
    h = _reduce(h, p, T)
    start = coset_key(h, p, j)
    seen = {start: h}
    todo = deque([h])
    while todo:
        x = todo.popleft()
        for s in gens:
            y = _reduce(_mul(s, x), p, T)
            k = coset_key(y, p, j)
            if k not in seen:
                seen[k] = y
                todo.append(y)
    return seen


def _pair_orbit(group, h1, j1, h2, j2, T):
    """Orbit of the pair (h1 V_j1, h2 V_j2) under simultaneous left multiplication.

    Returns {pair key: group element} with each element reduced modulo p^T."""
    p = group.p
    gens = group.generators()
    one = (1, 0, 0, 1)
    start = (coset_key(h1, p, j1), coset_key(h2, p, j2))
    seen = {start: one}
    todo = deque([one])
    while todo:
        u = todo.popleft()
        for s in gens:
            w = _reduce(_mul(s, u), p, T)
            k = (coset_key(_mul(w, h1), p, j1), coset_key(_mul(w, h2), p, j2))
            if k not in seen:
                seen[k] = w
                todo.append(w)
    return seen


def _candidates(p, t, M):
    """Simple representatives of determinant exponent t, in preference order."""
    out = []
    for a in range(t + 1):
        out.append((p ** a, 0, 0, p ** (t - a)))
    for a in range(t + 1):
        for c in range(M + 1):
            out.append((p ** a, 0, p ** c, p ** (t - a)))
    for a in range(t + 1):
        out.append((0, p ** a, p ** (t - a), 0))
    return out


class DoubleCoset:
    """V_i g V_j with a canonical representative."""

    def __init__(self, p, left, g, right):
        g = tuple(int(x) for x in g)
        self.p = p
        self.left = LocalSubgroup(p, left) if isinstance(left, int) else left
        self.right = LocalSubgroup(p, right) if isinstance(right, int) else right
        self.t = _vdet(g, p)   # the determinant is p^t times a p-adic unit
        self.M = max(self.left.i, self.right.i) + self.t + 1
        self._cosets = _orbit(self.left, g, self.right.i, self.M)
        self.key = min(self._cosets)
        self.g = self._canonical(g)

    def _canonical(self, g):
        p = self.p
        for h in _candidates(p, self.t, self.M):
            if coset_key(h, p, self.right.i) in self._cosets:
                return h
        return self._cosets[self.key]

    def __repr__(self):
        return "[V_%d %s V_%d]" % (self.left.i, _fmt(self.g), self.right.i)

    def __eq__(self, other):
        return (isinstance(other, DoubleCoset) and self.p == other.p
                and self.left == other.left and self.right == other.right
                and self.t == other.t and self.key == other.key)

    def __hash__(self):
        return hash((self.p, self.left.i, self.right.i, self.t, self.key))

    def sort_key(self):
        return (self.left.i, self.right.i, self.t, self.g)

    def count(self):
        return len(self._cosets)

    def to_json(self):
        return {"p": self.p, "left": self.left.i, "right": self.right.i, "rep": list(self.g)}


def _fmt(g):
    return "[[%d,%d],[%d,%d]]" % g


def coset_decompose(dc, M=None):
    """Representatives g_r with dc = disjoint union of g_r V_j, checked pairwise distinct.

    M: optional working modulus exponent; an error names the required one if too small."""
    need = dc.M
    if M is not None and M < need:
        raise ValueError("working modulus p^%d too small; need exponent >= %d" % (M, need))
    reps = [dc._cosets[k] for k in sorted(dc._cosets)]
    p, j = dc.p, dc.right.i
    keys = {coset_key(h, p, j) for h in reps}
    if len(keys) != len(reps):
        raise AssertionError("coset representatives are not distinct")
    return reps


class CosetSum:
    """Finite integer combination of double cosets with common outer subgroups."""

    def __init__(self, terms=None):
        acc = {}
        for c, dc in terms or []:
            acc[dc] = acc.get(dc, 0) + c
        self.terms = sorted(((c, dc) for dc, c in acc.items() if c),
                            key=lambda t: t[1].sort_key())

    def __eq__(self, other):
        return isinstance(other, CosetSum) and dict((dc, c) for c, dc in self.terms) == \
            dict((dc, c) for c, dc in other.terms)

    def __add__(self, other):
        return CosetSum(self.terms + other.terms)

    def scale(self, c):
        return CosetSum([(c * a, dc) for a, dc in self.terms])

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(("%d*%r" % (c, dc)) if c != 1 else repr(dc) for c, dc in self.terms)

    def degree(self):
        return sum(c * dc.count() for c, dc in self.terms)

    def to_json(self):
        return [[c, dc.to_json()] for c, dc in self.terms]


def _check_composable(dc2, dc1):
    if dc2.p != dc1.p:
        raise ValueError("double cosets at different primes")
    if dc2.right != dc1.left:
        raise ValueError("subgroup mismatch: %r then %r" % (dc2.right, dc1.left))


def _compose_brute(dc2, dc1):
    """c_n = #{(a, b) : x_a y_b V = h_n V} from the two single-coset decompositions."""
    p = dc1.p
    k = dc1.right.i
    xs = coset_decompose(dc2)
    ys = coset_decompose(dc1)
    T = max(dc2.left.i, k) + dc2.t + dc1.t + 1
    counts = {}
    reps = {}
    for x in xs:
        for y in ys:
            h = _reduce(_mul(x, y), p, T)
            key = coset_key(h, p, k)
            counts[key] = counts.get(key, 0) + 1
            reps.setdefault(key, h)
    terms = []
    done = set()
    for key in sorted(counts):
        if key in done:
            continue
        dc = DoubleCoset(p, dc2.left.i, reps[key], k)
        orbit = set(dc._cosets)
        if not orbit <= set(counts):
            raise AssertionError("product is not a union of double cosets")
        vals = {counts[o] for o in orbit}
        if len(vals) != 1:
            raise AssertionError("coefficient is not constant on a double coset")
        done |= orbit
        terms.append((vals.pop(), dc))
    return CosetSum(terms)


def _compose_index(dc2, dc1):
    """Coefficients sum_k [W_k : W_k'] over U' = disjoint union of U'_2 u_k U'_1."""
    p = dc1.p
    i, j, k = dc2.left.i, dc2.right.i, dc1.right.i
    g2, g1 = dc2.g, dc1.g
    U2, U1 = dc2.left, dc1.left     # U'' and U'
    T = max(i, j, k) + dc2.t + dc1.t + 2
    # U'-orbits on pairs (x g2^-1 U'', y g1 U); fixing the first entry gives U'_2-orbits
    # on U'/U'_1, i.e. the double cosets U'_2 u U'_1.
    X = _orbit(U1, g1, k, T)
    a2 = _adj(g2)
    covered = set()
    us = []
    one_key = coset_key(a2, p, i)
    for xk in sorted(X):
        if xk in covered:
            continue
        # element u with u g1 U = x: found by the orbit search from g1
        u = _element_to(U1, g1, k, xk, T)
        orb = _pair_orbit(U1, a2, i, _mul(u, g1), k, T)
        for (yk, x2), _ in orb.items():
            if yk == one_key:
                covered.add(x2)
        us.append(u)
    terms = []
    for u in us:
        h = _mul(_mul(g2, u), g1)
        n_w = len(_orbit(U2, h, k, T))                         # [U'' : W_k]
        n_ww = len(_pair_orbit(U2, h, k, g2, j, T))            # [U'' : W_k']
        if n_ww % n_w:
            raise AssertionError("index is not an integer")
        terms.append((n_ww // n_w, DoubleCoset(p, i, h, k)))
    return CosetSum(terms)


def _element_to(group, h, j, target, T):
    """A group element u with u h V_j having the given key."""
    p = group.p
    gens = group.generators()
    one = (1, 0, 0, 1)
    start = coset_key(h, p, j)
    if start == target:
        return one
    seen = {start}
    todo = deque([one])
    while todo:
        u = todo.popleft()
        for s in gens:
            w = _reduce(_mul(s, u), p, T)
            key = coset_key(_mul(w, h), p, j)
            if key == target:
                return w
            if key not in seen:
                seen.add(key)
                todo.append(w)
    raise ValueError("target coset is not in the orbit")


def compose(dc2, dc1, mode="index"):
    """[V_i g' V_j] . [V_j g V_k] as a CosetSum.

    mode "index": the W_k-index formula; "brute": counting products of single cosets;
    "both": compute both and require agreement."""
    _check_composable(dc2, dc1)
    if mode == "index":
        return _compose_index(dc2, dc1)
    if mode == "brute":
        return _compose_brute(dc2, dc1)
    if mode == "both":
        a = _compose_index(dc2, dc1)
        b = _compose_brute(dc2, dc1)
        if a != b:
            raise AssertionError("index formula %r != brute force %r" % (a, b))
        return a
    raise ValueError("unknown mode %r" % mode)


def A(p, t=1):
    return (1, 0, 0, p ** t)


def B(p, t=1):
    """B_0 = I, B_1 = diag(p, 1), B_2 = p I."""
    return [(1, 0, 0, 1), (p, 0, 0, 1), (p, 0, 0, p)][t]


IDENTITY = (1, 0, 0, 1)


def _relation_instances(p, imax, tmax):
    """(identity, parameters, lhs thunk, rhs CosetSum thunk)."""
    dc = lambda i, g, j: DoubleCoset(p, i, g, j)
    out = []
    out.append(("B0", {"p": p},
                lambda: [(dc(2, IDENTITY, 0), dc(0, B(p), 0))],
                lambda: CosetSum([(1, dc(2, B(p), 0)), (1, dc(2, A(p), 0))])))
    for t in range(tmax + 1):
        if t == 0:
            rhs = (lambda: CosetSum([(1, dc(2, B(p), 0))]))
        else:
            rhs = (lambda t=t: CosetSum([(p, dc(2, _mul(B(p), A(p, t)), 0))]))
        out.append(("AB0", {"p": p, "t": t},
                    lambda t=t: [(dc(2, B(p), 2), dc(2, A(p, t), 0))], rhs))
    for i in range(1, imax + 1):
        for s in range(3):
            for t in range(min(tmax, 2) + 1):
                m = i + s
                out.append(("B", {"p": p, "i": i, "s": s, "t": t, "side": "left"},
                            lambda m=m, i=i, t=t: [(dc(m, B(p, t), m), dc(m, IDENTITY, i))],
                            lambda m=m, i=i, t=t: CosetSum([(1, dc(m, B(p, t), i))])))
                out.append(("B", {"p": p, "i": i, "s": s, "t": t, "side": "right"},
                            lambda m=m, i=i, t=t: [(dc(m, IDENTITY, i), dc(i, B(p, t), i))],
                            lambda m=m, i=i, t=t: CosetSum([(1, dc(m, B(p, t), i))])))
        out.append(("AB", {"p": p, "i": i},
                    lambda i=i: [(dc(i + 1, B(p), i + 1), dc(i + 1, A(p), i))],
                    lambda i=i: CosetSum([(p, dc(i + 1, (p, 0, 0, p), i))])))
    return out


def verify_relations(p, imax=2, tmax=2, modes=("index", "brute")):
    """Check the four relation families; one report entry per identity, parameters, mode."""
    report = []
    for name, params, lhs, rhs in _relation_instances(p, imax, tmax):
        target = rhs()
        for mode in modes:
            (d2, d1), = lhs()
            try:
                got = compose(d2, d1, mode)
                ok = got == target
                detail = repr(got)
            except (AssertionError, ValueError) as e:
                ok, detail = False, str(e)
            report.append({"identity": name, "parameters": params, "mode": mode,
                           "pass": ok, "result": detail, "expected": repr(target)})
    return report


def random_double_coset(p, rng, left, right, tmax=2):
    """A double coset with a random representative of determinant p^t, t <= tmax."""
    t = rng.randint(0, tmax)
    a = rng.randint(0, t)
    g = (p ** a, 0, 0, p ** (t - a))
    for _ in range(2):
        u = (1, rng.randint(0, p * p - 1), 0, 1) if rng.random() < 0.5 else \
            (1, 0, rng.randint(0, p * p - 1), 1)
        g = _mul(u, g) if rng.random() < 0.5 else _mul(g, u)
    return DoubleCoset(p, left, g, right)


def random_pairs(p, n, seed=0, imax=2):
    """n random composable pairs (dc2, dc1) at p."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        i, j, k = (rng.randint(0, imax) for _ in range(3))
        out.append((random_double_coset(p, rng, i, j), random_double_coset(p, rng, j, k)))
    return out


def modes_agree(p, n=100, seed=0):
    """Compare the index formula with brute force on n random pairs; returns mismatches."""
    bad = []
    for d2, d1 in random_pairs(p, n, seed):
        a = compose(d2, d1, "index")
        b = compose(d2, d1, "brute")
        if a != b:
            bad.append((d2, d1, a, b))
    return bad


def compose_sums(s2, s1, mode="brute"):
    """Bilinear extension of compose to CosetSums."""
    terms = []
    for c2, d2 in s2.terms:
        for c1, d1 in s1.terms:
            for c, d in compose(d2, d1, mode).terms:
                terms.append((c2 * c1 * c, d))
    return CosetSum(terms)
