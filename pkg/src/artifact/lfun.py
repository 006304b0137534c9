"""Local Euler factors, Dirichlet coefficients, completed L-functions, Petersson
norms and the Hida / functional-equation consistency checks."""

from math import factorial, pi as PI, log as mlog, ceil

import numpy as np
import flint
from flint import acb, arb, fmpq

from .numfield import QQ, NFElem, primes_upto, euler_phi, working_precision, qstr, factor_int
from .hecke import classify_local


class LocalFactor:
    """1 + c_1 X + ... + c_d X^d with X = p^-s, coefficients in the Hecke field.

    marker records provenance, e.g. "exceptional-unknown" when a naive factor was
    produced without exceptional-prime data.
    """

    def __init__(self, p, coeffs, kind="f", exceptional=False, marker=None):
        self.p = p
        self.coeffs = list(coeffs)
        while len(self.coeffs) > 1 and self.coeffs[-1].is_zero():
            self.coeffs.pop()
        if self.coeffs[0] != 1:
            raise ValueError("local factor must have constant term 1")
        self.kind = kind
        self.exceptional = exceptional
        self.marker = marker

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __repr__(self):
        return "LocalFactor(p=%d, %s)" % (self.p, [str(c) for c in self.coeffs])

    def __eq__(self, other):
        return self.p == other.p and len(self.coeffs) == len(other.coeffs) and \
            all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def evaluate(self, x):
        r = self.coeffs[0].field.zero()
        for c in reversed(self.coeffs):
            r = r * x + c
        return r

    def to_json(self):
        return {"p": self.p, "kind": self.kind, "exceptional": self.exceptional,
                "marker": self.marker,
                "coeffs": [[qstr(t) for t in c.coords()] for c in self.coeffs]}


def _poly_mul(a, b):
    out = [a[0] * 0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def local_factor_f(record, p):
    K = record.field
    ap = record.a(p)
    if record.level % p == 0:
        return LocalFactor(p, [K.one(), -ap], "f")
    chi = record.psi_value(p) * p ** (record.weight - 1)
    return LocalFactor(p, [K.one(), -ap, chi], "f")


def local_factor_adjoint(record, p, naive=True):
    """Euler factor of the adjoint L-function at p (naive: exceptional factors dropped)."""
    K = record.field
    k = record.weight
    lt = record.local_types.get(p) or classify_local(record, p)
    one = K.one()
    if lt.delta == 2:
        ap = record.a(p)
        chi = record.psi_value(p) * p ** (k - 1)
        s = (ap * ap - chi * 2) / chi
        return LocalFactor(p, _poly_mul([one, -one], [one, -s, one]), "adjoint")
    if lt.delta == 1:
        if lt.cls == "special":
            return LocalFactor(p, [one, K(fmpq(-1, p))], "adjoint")
        if lt.cls == "principal-series":
            return LocalFactor(p, [one, -one], "adjoint")
        raise ValueError("unclassified local type at %d" % p)
    if lt.exceptional and not naive:
        return LocalFactor(p, [one, one], "adjoint", exceptional=True,
                           marker="exceptional:" + lt.provenance)
    marker = None if lt.provenance not in ("default-unverified",) else "exceptional-unknown"
    return LocalFactor(p, [one], "adjoint", exceptional=lt.exceptional, marker=marker)


def adjoint_factors(record, B, naive=True):
    return {p: local_factor_adjoint(record, p, naive) for p in primes_upto(B)}


def naive_adjoint_value_at_one_inverse(record, p):
    """L_p^naive(A_f, 1)^-1, i.e. the naive adjoint factor evaluated at X = 1/p."""
    return local_factor_adjoint(record, p, naive=True).evaluate(fmpq(1, p))


def _to_scalar(x):
    if isinstance(x, NFElem) and x.field.degree == 1:
        return x.to_rational()
    return x


def dirichlet_coefficients(factors, naive, B):
    """c_1..c_B of prod_p factor_p(p^-s)^-1 (exceptional factors dropped when naive)."""
    c = [None] * (B + 1)
    one = None
    ppow = {}
    for p in primes_upto(B):
        if p not in factors:
            raise ValueError("missing local factor at %d" % p)
        F = factors[p]
        coeffs = [_to_scalar(x) for x in F.coeffs]
        if naive and F.exceptional:
            coeffs = coeffs[:1]
        if one is None:
            one = coeffs[0]
        # inverse power series in X up to X^e with p^e <= B
        e = 0
        q = 1
        while q * p <= B:
            q *= p
            e += 1
        inv = [coeffs[0]]
        for n in range(1, e + 1):
            acc = coeffs[0] * 0
            for j in range(1, min(n, len(coeffs) - 1) + 1):
                acc = acc - coeffs[j] * inv[n - j]
            inv.append(acc)
        ppow[p] = inv
    if one is None:
        one = fmpq(1)
    c[1] = one
    for n in range(2, B + 1):
        m = n
        val = one
        for p, _ in factor_int(n):
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            val = val * ppow[p][e]
        c[n] = val
    return c[1:]


# ---------------------------------------------------------------------------
# Completed L-series

def gamma_r(s):
    return acb.pi() ** (-s / 2) * (s / 2).gamma()


def gamma_c(s):
    return 2 * (2 * acb.pi()) ** (-s) * s.gamma()


class CompletedLSeries:
    """Lambda(s) = c^(s/2) prod Gamma_R(s + mu) prod Gamma_C(s + nu) sum a_n n^-s.

    poles: list of (s0, residue) of Lambda, used for the contour correction.
    """

    def __init__(self, coeffs, gamma_r_shifts, gamma_c_shifts, conductor=1, sign=1,
                 poles=None, name="L", source=None):
        self.coeffs = list(coeffs)
        self.source = source
        self.mu = list(gamma_r_shifts)
        self.nu = list(gamma_c_shifts)
        self.conductor = conductor
        self.sign = sign
        self.poles = list(poles or [])
        self.name = name

    def gamma_factor(self, s):
        g = acb(1)
        for m in self.mu:
            g *= gamma_r(s + m)
        for n in self.nu:
            g *= gamma_c(s + n)
        return g

    def degree(self):
        return len(self.mu) + 2 * len(self.nu)

    def ensure(self, B):
        """Make at least B coefficients available (computed on demand from source)."""
        if B > len(self.coeffs):
            if self.source is None:
                raise PrecisionError("need %d coefficients, have %d" % (B, len(self.coeffs)))
            self.coeffs = list(self.source(B))


def _line_params(L, tol_log2):
    """Half-length T of the integration line and step h for the trapezoid rule."""
    d = L.degree()
    shift = max([0] + list(L.mu) + list(L.nu))
    # |gamma(s + it)| ~ exp(-pi d |t| / 4) |t|^(...) ; choose T with a safe margin
    T = 10.0
    while T < 400:
        decay = PI * d * T / 4 - (shift + d) * mlog(T + 1) - 10
        if decay / mlog(2) > tol_log2:
            break
        T += 5
    h = 2 * PI * 1.5 / (tol_log2 * mlog(2) + 10)
    return T, min(h, 0.1)


def required_terms(L, s, A, tol_log2, sigma=1.5):
    """Smallest B such that the smoothing weight beyond B is below 2^-tol_log2 (estimate
    by shifting the line to the right and bounding the integrand on a coarse grid)."""
    with working_precision(64):
        c = arb(L.conductor)
        s = acb(s)
        Aa = arb(A)

        def weight_bound(n, sig):
            tot = 0.0
            for t in np.arange(-40, 40.01, 0.5):
                z = acb(sig, float(t))
                v = (c ** ((s + z) / 2)) * L.gamma_factor(s + z) * Aa ** z / z
                tot += abs(complex(v.mid())) * 0.5
            return tot * float(n) ** (-(float(s.real.mid()) + sig)) / (2 * PI)

        re_s = float(s.real.mid())
        sigs = [sig for sig in (1.5, 4, 8, 16, 32) if re_s + sig >= 1.5 - 1e-9]
        sigs = sigs or [_line_sigma(s)]
        for B in [8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192]:
            vals = [weight_bound(B, sig) for sig in sigs]
            best = min([v for v in vals if np.isfinite(v)] or [float("inf")])
            if best < 2.0 ** (-tol_log2) and B >= 8:
                return B
    raise PrecisionError("coefficient bound for the requested precision exceeds 8192")


class PrecisionError(ArithmeticError):
    pass


def _smallest_prime_factors(B):
    spf = list(range(B + 1))
    for i in range(2, int(B ** 0.5) + 1):
        if spf[i] == i:
            for j in range(i * i, B + 1, i):
                if spf[j] == j:
                    spf[j] = i
    return spf


def _line_sigma(s):
    """Real part of the integration line: Re(s + z) >= 3/2 keeps it right of every pole."""
    return max(1.5, 1.5 - float(acb(s).real.mid()))


def _smoothed_sum(L, s, A, B, T, h, sigma=None):
    """F_A(s) = (1/2 pi) int Lambda(s + z) A^z / z dt on Re z = sigma (trapezoid rule).

    n^-(s+z) is built multiplicatively from prime powers at each node, which keeps
    ball radii small.
    """
    s = acb(s)
    if sigma is None:
        sigma = _line_sigma(s)
    c = arb(L.conductor)
    A = arb(A)
    coeffs = [acb(x) for x in L.coeffs[:B]]
    spf = _smallest_prime_factors(B)
    primes = [p for p in range(2, B + 1) if spf[p] == p]
    logs = {p: arb(p).log() for p in primes}
    npts = int(ceil(T / h))
    tot = acb(0)
    for j in range(-npts, npts + 1):
        z = acb(sigma, j * h)
        w = s + z
        G = c ** (w / 2) * L.gamma_factor(w) * A ** z / z
        val = [acb(0), acb(1)] + [None] * (B - 1)
        for p in primes:
            val[p] = (-w * logs[p]).exp()
        D = coeffs[0]
        for n in range(2, B + 1):
            p = spf[n]
            if p != n:
                val[n] = val[p] * val[n // p]
            if coeffs[n - 1] != 0:
                D += coeffs[n - 1] * val[n]
        tot += G * D
    return tot * h / (2 * acb.pi())


def evaluate_completed(L, s, prec=128, A=1.0, B=None):
    """Lambda(s) by the smoothed approximate functional equation.

    Returns (value, B_used). The error radius of the value includes interval
    rounding; discretization and truncation are controlled to 2^-(prec/2).
    """
    tol = max(40, prec // 2)
    with working_precision(prec):
        s = acb(s)
        if B is None:
            B = max(required_terms(L, s, A, tol), required_terms(L, 1 - s, 1.0 / A, tol))
        L.ensure(B)
        T, h = _line_params(L, tol)
        v = _smoothed_sum(L, s, A, B, T, h)
        v += L.sign * _smoothed_sum(L, 1 - s, 1.0 / A, B, T, h)
        Aa = arb(A)
        for s0, r in L.poles:
            v -= acb(r) * Aa ** (acb(s0) - s) / (acb(s0) - s)
        return v, B


def zeta_series(B):
    return CompletedLSeries([1] * B, [0], [], conductor=1, sign=1,
                            poles=[(1, 1), (0, -1)], name="zeta")


def adjoint_series(record, B=0, embedding=0, conductor=None, sign=1, naive=True, prec=128):
    """Completed adjoint L-series: gamma factor Gamma_R(s+1) Gamma_C(s+k-1).

    B coefficients are computed up front; more are computed when an evaluation needs them.
    """
    k = record.weight
    if conductor is None:
        conductor = 1
        for p, e in factor_int(record.level) if record.level > 1 else []:
            conductor *= p ** (2 * e)

    def source(n):
        cs = dirichlet_coefficients(adjoint_factors(record, n, naive=naive), naive, n)
        with working_precision(prec):
            if record.field.degree == 1:
                return [acb(arb(x)) for x in cs]
            root = record.field.embeddings(prec)[embedding]
            return [x.embed(root) for x in cs]

    return CompletedLSeries(source(B) if B else [], [1], [k - 1], conductor=conductor,
                            sign=sign, name="Ad(%s)" % record.label, source=source)


def l_value(L, s, prec=128, A=1.0):
    """L(s) = Lambda(s) / (c^(s/2) gamma(s))."""
    with working_precision(prec):
        lam, B = evaluate_completed(L, s, prec, A)
        s = acb(s)
        return lam / (arb(L.conductor) ** (s / 2) * L.gamma_factor(s)), B


def functional_equation_residual(L, points=(0.25, 0.5, 0.75), prec=128, A1=1.0, A2=1.3):
    """max |Lambda(s) - eps Lambda(1-s)| / |Lambda(s)|, the two sides computed with
    different smoothing parameters."""
    worst = 0.0
    with working_precision(prec):
        for s in points:
            a, _ = evaluate_completed(L, s, prec, A1)
            b, _ = evaluate_completed(L, 1 - s, prec, A2)
            r = abs(complex((a - L.sign * b).mid())) / abs(complex(a.mid()))
            worst = max(worst, r)
    return worst


def funatone_ratio(L, prec=128):
    """L(A, 0) / L(A, 1) and the predicted (k - 1) eps / (2 pi^2) sqrt(c)-free value."""
    with working_precision(prec):
        l0, _ = l_value(L, 0, prec, A=1.0)
        l1, _ = l_value(L, 1, prec, A=1.2)
        return l0 / l1


def fit_sign_conductor(record, B=0, candidates=None, prec=64):
    """Best (eps, c) over a small grid, by the functional-equation residual (a fit)."""
    N = record.level
    if candidates is None:
        cs = sorted({N, N * N} | ({1} if N == 1 else set()))
        candidates = [(e, c) for c in cs for e in (1, -1)]
    best = None
    for eps, c in candidates:
        L = adjoint_series(record, B, conductor=c, sign=eps, prec=prec)
        try:
            r = functional_equation_residual(L, (0.3, 0.6), prec=prec)
        except PrecisionError:
            continue
        if best is None or r < best[2]:
            best = (eps, c, r)
    return best


# ---------------------------------------------------------------------------
# Petersson norm

def _gl_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return [float(t) for t in x], [float(t) for t in w]


def _incomplete_strip(an, k, y0):
    """sum_n |a_n|^2 int_{y0}^oo e^(-4 pi n y) y^(k-2) dy (exact incomplete gamma sum)."""
    tot = arb(0)
    for n, a in enumerate(an, start=1):
        if a == 0:
            continue
        lam = 4 * arb.pi() * n
        # int_{y0}^oo e^{-lam y} y^{k-2} dy = Gamma(k-1, lam y0) / lam^(k-1)
        g = acb(lam * y0).gamma_upper(k - 1)
        tot += abs(a) ** 2 * g.real / lam ** (k - 1)
    return tot


def _cap_integral(an, k, N, split, order):
    """sum_j int over the cap of (F + j)/N of |f|^2 y^k dmu, plus the same over F itself.

    The caps are bounded away from the real axis, so double precision suffices here.
    """
    xs, ws = np.polynomial.legendre.leggauss(order)
    a = np.array([float(x.mid()) for x in an])
    n = np.arange(1, len(a) + 1)
    x = 0.5 * xs[:, None]
    ylo = np.sqrt(1 - x * x)
    half = (split - ylo) / 2
    y = (split + ylo) / 2 + half * xs[None, :]
    wt = (0.5 * ws[:, None]) * half * ws[None, :]

    def f2(z):
        q = np.exp(2j * np.pi * z[..., None] * n)
        return np.abs(q @ a) ** 2

    tot = 0.0
    for j in range(N if N > 1 else 1):
        z = (x + j + 1j * y) / N
        tot += np.sum(f2(z) * (y / N) ** k / y ** 2 * wt)
    if N > 1:
        tot += np.sum(f2(x + 1j * y) * y ** (k - 2) * wt)
    return arb(tot)


def petersson_norm_gamma0(record, prec=128, split=1.0, order=40, terms=None):
    """(f, f) over Gamma0(N), N = 1 or prime, with f normalized by a_1 = 1."""
    N, k = record.level, record.weight
    if N > 1 and len(factor_int(N)) != 1 or (N > 1 and factor_int(N)[0][1] != 1):
        raise NotImplementedError("Petersson quadrature is implemented for N = 1 or N prime")
    if record.field.degree != 1:
        raise NotImplementedError("Petersson quadrature is implemented for rational forms")
    with working_precision(prec):
        ymin = (3 ** 0.5 / 2) / N
        if terms is None:
            terms = int(ceil((prec * 0.7 + 40) / (2 * PI * ymin))) + 10
        an = [arb(int(x.to_rational().p)) / int(x.to_rational().q)
              for x in record.an_list(terms)]
        strip = _incomplete_strip(an, k, arb(split) / N)
        if N > 1:
            strip += _incomplete_strip(an, k, arb(split))
        caps = _cap_integral(an, k, N, split, order)
        return strip + caps


def petersson_norm_numeric(record, prec=128, split=1.0, order=40):
    """(f, f) over Gamma1(N) with an error estimate from two quadrature orders."""
    N = record.level
    with working_precision(prec):
        a = petersson_norm_gamma0(record, prec, split, order)
        b = petersson_norm_gamma0(record, prec, split, order + 16)
        scale = arb(euler_phi(N)) / 2 if N > 2 else arb(1)
        val = b * scale
        err = abs(float((a - b).mid())) * float(scale.mid())
        return val, err


def hida_constant(record):
    """(k-1)! delta(N) N phi(N) / (4^k pi^(k+1)) as an arb."""
    N, k = record.level, record.weight
    delta = 2 if N <= 2 else 1
    return arb(factorial(k - 1) * delta * N * euler_phi(N)) / (arb(4) ** k * arb.pi() ** (k + 1))


def hida_check(record, prec=128, tol=1e-3, conductor=None, sign=None, B=None):
    """Compare the Petersson norm with Hida's formula; returns a report dict."""
    N = record.level
    if sign is None or conductor is None:
        if N == 1:
            sign, conductor, fitted = 1, 1, False
        else:
            sign, conductor, _ = fit_sign_conductor(record)
            fitted = True
    else:
        fitted = False
    with working_precision(prec):
        L = adjoint_series(record, B or 0, conductor=conductor, sign=sign, prec=prec)
        l1, Bused = l_value(L, 1, prec)
        rhs = hida_constant(record) * l1.real
        lhs, err = petersson_norm_numeric(record, prec)
        rel = abs(float(((lhs - rhs) / rhs).mid()))
        return {"form": record.label, "lhs": float(lhs.mid()), "rhs": float(rhs.mid()),
                "relative_error": rel, "quadrature_error": err, "pass": rel <= tol,
                "sign": sign, "conductor": conductor,
                "sign_conductor": "fit" if fitted else "hypothesis",
                "B_used": Bused, "precision_bits": prec}
