"""Congruence ideals from the integral pairing, their Sigma-scaling, bad primes and
Selmer-length predictions."""

import random
from math import factorial, gcd

from flint import fmpq_mat

from . import _linalg as la
from .numfield import (FractionalIdeal, primes_above, primes_upto, prime_divisors,
                       factor_int, is_prime)
from .modsym import cuspidal_subspace, pairing_gram, sturm_bound
from .hecke import get_space, lift_character, sigma_level, _lattice_op
from .lfun import naive_adjoint_value_at_one_inverse

LATTICE_MODEL = "modular symbols"


def _excluded(n, k):
    """Rational primes dividing n * k!."""
    return set(prime_divisors(n * factorial(k))) if n * factorial(k) > 1 else set()


class EtaResult:
    """eta_f^Sigma as a valuation vector at primes of the Hecke field away from N^Sigma k!."""

    def __init__(self, record, sigma, ideal, level, window, gram, generators, excluded):
        self.record = record
        self.sigma = tuple(sorted(sigma))
        self.ideal = ideal
        self.level = level
        self.window = window              # primes of the field examined
        self.gram = gram                  # pairing values on the f-lattice basis
        self.generators = generators      # Z-basis of the f-lattice (rows)
        self.excluded = sorted(excluded)  # rational primes dividing level * k!

    def valuation(self, P):
        return self.ideal.valuation(P)

    def valuations(self):
        """[(ell, index of the prime above ell, valuation)] over the window."""
        out = []
        for P in self.window:
            idx = [Q.key() for Q in primes_above(P.field, P.ell)].index(P.key())
            out.append((P.ell, idx, self.ideal.valuation(P)))
        return out

    def to_json(self):
        return {"form": self.record.label, "sigma": list(self.sigma), "level": self.level,
                "eta": [list(t) for t in self.valuations() if t[2] != 0],
                "window": [list(t[:2]) for t in self.valuations()],
                "excluded_primes": self.excluded,
                "lattice_model": LATTICE_MODEL,
                "normalization": "G = I W^-1 on the cuspidal lattice; valuations only"}


def _kron(A, B):
    ra, ca, rb, cb = A.nrows(), A.ncols(), B.nrows(), B.ncols()
    M = fmpq_mat(ra * rb, ca * cb)
    for i in range(ra):
        for j in range(ca):
            a = A[i, j]
            if a == 0:
                continue
            for s in range(rb):
                for t in range(cb):
                    if B[s, t] != 0:
                        M[i * rb + s, j * cb + t] = a * B[s, t]
    return M


def _eigen_conditions(record, sigma, space):
    """Yield (operator on the cuspidal lattice, eigenvalue in K) pinning down f^Sigma."""
    Nt = space.N
    K = record.field
    for p in sorted(set(sigma)):
        if Nt % p == 0:
            yield p, _lattice_op(space, space.hecke_matrix(p)), K.zero()
    for q in prime_divisors(record.level) if record.level > 1 else []:
        if q not in sigma:
            yield q, _lattice_op(space, space.hecke_matrix(q)), record.a(q)
    for q in primes_upto(max(sturm_bound(Nt, space.k), 2) + 50):
        if Nt % q:
            yield q, _lattice_op(space, space.hecke_matrix(q)), record.a(q)


def f_lattice(record, sigma=()):
    """Z-basis (rows in Z^(R d), index i d + j) of the f^Sigma-part of the level-N^Sigma
    cuspidal lattice tensored with Z[a], and the space it lives in."""
    psi = record.character
    if not psi.is_trivial():
        raise NotImplementedError("eta is implemented for the trivial character")
    sigma = tuple(sorted(set(sigma)))
    Nt = sigma_level(record, sigma)
    space = get_space(Nt, record.weight, lift_character(psi, Nt))
    R = cuspidal_subspace(space).rank
    d = record.field.degree
    Id = la.identity(d)
    IR = la.identity(R)
    blocks = []
    rows = None
    for q, T, a in _eigen_conditions(record, sigma, space):
        blocks.append(_kron(T, Id) - _kron(IR, a.minpoly_matrix()))
        rows = la.integer_kernel(la.vstack(blocks))
        if len(rows) <= 2 * d:
            break
    if rows is None or len(rows) != 2 * d:
        raise ValueError("f-lattice rank %s != 2 over the Hecke field order"
                         % (None if rows is None else len(rows) / d))
    return [list(r) for r in rows], space


def _pair_values(field, rows, G):
    """Matrix of <x, y> in K for x, y in rows, with the K-bilinear extension of G."""
    d = field.degree
    R = G.nrows()
    parts = [la.qmat([[r[i * d + j] for i in range(R)] for r in rows], R) for j in range(d)]
    a = field.gen()
    pw = [field.one()]
    for _ in range(2 * d):
        pw.append(pw[-1] * a)
    n = len(rows)
    vals = [[field.zero()] * n for _ in range(n)]
    for j in range(d):
        for jj in range(d):
            P = parts[j] * G * parts[jj].transpose()
            for s in range(n):
                for t in range(n):
                    if P[s, t] != 0:
                        vals[s][t] = vals[s][t] + pw[j + jj] * P[s, t]
    return vals


def _candidate_primes(field, values):
    """Rational primes that can carry a nonzero valuation of the ideal generated by values."""
    nz = [v for row in values for v in row if not v.is_zero()]
    if not nz:
        raise ValueError("the pairing vanishes on the f-lattice")
    g = 0
    ells = set()
    for v in nz:
        n = v.norm()
        g = gcd(g, int(n.p))
        if n.q > 1:
            ells.update(prime_divisors(int(n.q)))
        if v.denominator() > 1:
            ells.update(prime_divisors(v.denominator()))
    if abs(g) > 1:
        ells.update(prime_divisors(abs(g)))
    return ells


def _ideal_from_values(field, values, extra_ells, excluded):
    """The ideal generated by values, and the report window: its support together with
    every prime above extra_ells (all away from the excluded rational primes)."""
    ells = (_candidate_primes(field, values) | set(extra_ells)) - set(excluded)
    primes = []
    for ell in sorted(ells):
        primes.extend(primes_above(field, ell))
    gens = [v for row in values for v in row if not v.is_zero()]
    ideal = FractionalIdeal.from_generators(field, gens, primes)
    window = [P for P in primes if ideal.valuation(P) or P.ell in extra_ells]
    return ideal, window


def random_unimodular(n, seed, steps=None):
    """A random matrix in SL_n(Z) built from elementary operations."""
    rng = random.Random(seed)
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps or 4 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            continue
        c = rng.randint(-3, 3)
        M[i] = [x + c * y for x, y in zip(M[i], M[j])]
    return M


def eta_ideal(record, sigma=(), extra_primes=(), seed=None, gram_sign=1, bad=None):
    """eta_f^Sigma: the ideal generated by the pairing on the saturated f^Sigma-lattice.

    The report window is the support of the pairing values plus extra_primes and the
    screened primes of bad_prime_set (so that e.g. Eisenstein primes are always listed).

    seed: apply a random unimodular change of the f-lattice basis first.
    gram_sign: -1 pairs with the opposite sign convention (same valuations).
    """
    sigma = tuple(sorted(set(sigma)))
    rows, space = f_lattice(record, sigma)
    K = record.field
    if seed is not None:
        U = random_unimodular(len(rows), seed)
        rows = [[sum(U[i][t] * rows[t][c] for t in range(len(rows)))
                 for c in range(len(rows[0]))] for i in range(len(rows))]
    G = pairing_gram(space).matrix * gram_sign
    values = _pair_values(K, rows, G)
    excluded = _excluded(space.N, record.weight)
    bad = bad or bad_prime_set(record)
    extra = set(extra_primes) | set(bad.suspects) | set(bad.dihedral)
    ideal, window = _ideal_from_values(K, values, extra, excluded)
    return EtaResult(record, sigma, ideal, space.N, window, values, rows, excluded)


def eta_scaling_check(record, sigma, p, bad=None):
    """Check v(eta^(Sigma+p)) - v(eta^Sigma) = v(L_p^naive(A_f, 1)^-1) at every prime of the
    window away from N^(Sigma+p) k!."""
    sigma = tuple(sorted(set(sigma)))
    if p in sigma:
        raise ValueError("p must not lie in Sigma")
    factor = naive_adjoint_value_at_one_inverse(record, p)
    K = record.field
    fval = K(factor) if not hasattr(factor, "field") else factor
    extra = set()
    if not fval.is_zero():
        nm = fval.norm()
        for x in (int(nm.p), int(nm.q)):
            if abs(x) > 1:
                extra.update(prime_divisors(abs(x)))
    big = sigma_level(record, sigma + (p,))
    excluded = _excluded(big, record.weight)
    if bad is None:
        bad = bad_prime_set(record)
    e0 = eta_ideal(record, sigma, extra, bad=bad)
    e1 = eta_ideal(record, sigma + (p,), extra, bad=bad)
    window = sorted({P for P in e0.window + e1.window if P.ell not in excluded},
                    key=lambda P: P.key())
    rows = []
    ok = True
    for P in window:
        d_eta = e1.valuation(P) - e0.valuation(P)
        d_fac = P.valuation(fval) if not fval.is_zero() else None
        match = d_eta == d_fac
        if bad.reasons_at(P):
            status = "outside theorem hypotheses"
        else:
            status = "pass" if match else "fail"
            ok = ok and match
        rows.append({"ell": P.ell, "prime": repr(P), "eta_sigma": e0.valuation(P),
                     "eta_sigma_p": e1.valuation(P), "difference": d_eta,
                     "factor_valuation": d_fac, "match": match, "status": status})
    return {"form": record.label, "sigma": list(sigma), "p": p,
            "factor": str(fval if K.degree > 1 else fval.to_rational()),
            "excluded_primes": sorted(excluded), "rows": rows, "pass": ok}


class BadPrimeReport:
    """Primes excluded from predictions: divisors of N k!, Eisenstein suspects and the
    dihedral window, each with its reasons."""

    def __init__(self, record, bound, divisors, suspects, dihedral, ambient, low_confidence):
        self.record = record
        self.bound = bound
        self.divisors = sorted(divisors)
        self.suspects = suspects            # ell -> {prime above ell: witnesses}
        self.dihedral = sorted(dihedral)
        self.ambient = sorted(ambient)
        self.low_confidence = low_confidence
        reasons = {}
        for ell in self.divisors:
            reasons.setdefault(ell, []).append("divides N k!")
        for ell in sorted(suspects):
            reasons.setdefault(ell, []).append("reducible suspect (Eisenstein congruence)")
        for ell in self.dihedral:
            reasons.setdefault(ell, []).append("dihedral window")
        for ell in self.ambient:
            reasons.setdefault(ell, []).append("divides (2k-1)(2k-3)")
        self.reasons = reasons
        self.final = set(reasons)

    def reasons_at(self, P):
        """Reasons excluding the prime P of the Hecke field (empty if P is outside T_f)."""
        out = []
        for r in self.reasons.get(P.ell, []):
            if r.startswith("reducible") and repr(P) not in self.suspects[P.ell]:
                continue
            out.append(r)
        return out

    def to_json(self):
        return {"form": self.record.label, "bound": self.bound,
                "divisor_exclusions": self.divisors,
                "reducible_suspects": {str(ell): {P: w for P, w in sorted(ws.items())}
                                       for ell, ws in sorted(self.suspects.items())},
                "dihedral_window": self.dihedral,
                "dihedral_lemma_bound": self.ambient,
                "low_confidence": self.low_confidence,
                "T_f": {str(ell): r for ell, r in sorted(self.reasons.items())}}


def dihedral_window(k):
    """Primes ell with (ell - 1) | 2(k - 1) or (ell + 1) | 2(k - 1)."""
    m = 2 * (k - 1)
    divs = [t for t in range(1, m + 1) if m % t == 0]
    out = set()
    for t in divs:
        for ell in (t + 1, t - 1):
            if ell >= 2 and is_prime(ell):
                out.add(ell)
    return out


def _eisenstein_differences(record, bound):
    N, k = record.level, record.weight
    out = []
    for q in primes_upto(bound):
        if q % N == 1 % N and N % q:
            out.append((q, record.a(q) - (q ** (k - 1) + 1)))
    return out


def bad_prime_set(record, bound=50):
    """T_f with reasons; the Eisenstein scan uses primes q <= bound with q = 1 mod N."""
    N, k = record.level, record.weight
    K = record.field
    divisors = _excluded(N, k)
    diffs = _eisenstein_differences(record, bound)
    cands = set()
    for q, v in diffs[:2]:
        if not v.is_zero():
            n = v.norm()
            cands.update(prime_divisors(abs(int(n.p))) if abs(n.p) > 1 else [])
    suspects = {}
    for ell in sorted(cands - divisors):
        for P in primes_above(K, ell):
            wit = []
            good = True
            for q, v in diffs:
                if q == ell:
                    continue
                if not v.is_zero() and P.valuation(v) <= 0:
                    good = False
                    break
                wit.append("a_%d = %d^%d + 1 mod %r" % (q, q, k - 1, P))
            if good and wit:
                suspects.setdefault(ell, {})[repr(P)] = wit
    low = bound < sturm_bound(N, k) or len(diffs) < 2
    ambient = set(prime_divisors((2 * k - 1) * (2 * k - 3))) - divisors
    return BadPrimeReport(record, bound, divisors, suspects, dihedral_window(k),
                          ambient, low)


def required_sigma(record, minimal=()):
    """Primes where the ramification of f is not known to be minimal: v_p(N) >= 2 and p not
    certified in `minimal`. A Selmer prediction needs them in Sigma."""
    return [p for p, e in (factor_int(record.level) if record.level > 1 else [])
            if e >= 2 and p not in minimal]


def selmer_prediction(record, sigma=(), bad=None, eta=None, minimal=()):
    """Predicted Selmer lengths v_lambda(eta_f^Sigma), gated by T_f."""
    sigma = tuple(sorted(set(sigma)))
    missing = [p for p in required_sigma(record, minimal) if p not in sigma]
    if missing:
        raise ValueError("Sigma must contain the primes %s where ramification is not minimal "
                         "(the prediction requires lambda not to divide any prime in Sigma "
                         "outside that set)" % missing)
    bad = bad or bad_prime_set(record)
    eta = eta or eta_ideal(record, sigma, bad=bad)
    preds = []
    for P in eta.window:
        v = eta.valuation(P)
        if P.ell in sigma:
            continue
        why = bad.reasons_at(P)
        if why:
            preds.append({"ell": P.ell, "prime": repr(P), "length": "no prediction",
                          "reason": "; ".join(why)})
        else:
            preds.append({"ell": P.ell, "prime": repr(P), "length": v,
                          "reason": "v_lambda(eta) with lambda outside T_f"})
    return {"form": record.label, "sigma": list(sigma), "eta": eta.to_json()["eta"],
            "lattice_model": LATTICE_MODEL, "predictions": preds}
