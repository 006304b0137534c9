"""Exact arithmetic substrate: rationals, number fields, Dirichlet characters,
Gauss sums and valuations at primes of an equation order."""

from contextlib import contextmanager
from fractions import Fraction
from functools import lru_cache
from math import gcd

import flint
from flint import fmpq, fmpq_poly, fmpz_poly, nmod_poly


def qq(x):
    """Coerce an int, Fraction, fmpz or fmpq to fmpq."""
    if isinstance(x, fmpq):
        return x
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        if "/" in x:
            a, b = x.split("/")
            return fmpq(int(a), int(b))
        return fmpq(int(x))
    return fmpq(int(x))


def qstr(x):
    """Serialize a rational as 'num/den' (or 'num' when integral)."""
    x = qq(x)
    if x.q == 1:
        return str(int(x.p))
    return "%d/%d" % (int(x.p), int(x.q))


def vp(n, p):
    """p-adic valuation of a nonzero integer."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vq(x, p):
    x = qq(x)
    return vp(x.p, p) - vp(x.q, p)


def factor_int(n):
    """Prime factorization as a list of (p, e)."""
    return [(int(p), int(e)) for p, e in flint.fmpz(abs(int(n))).factor()]


def prime_divisors(n):
    return [p for p, _ in factor_int(n)] if abs(int(n)) > 1 else []


def primes_upto(n):
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(n ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return [i for i in range(n + 1) if sieve[i]]


def is_prime(n):
    return n >= 2 and flint.fmpz(n).is_prime()


def euler_phi(n):
    r = n
    for p in prime_divisors(n):
        r = r // p * (p - 1)
    return r


@contextmanager
def working_precision(bits):
    old = flint.ctx.prec
    flint.ctx.prec = bits
    try:
        yield
    finally:
        flint.ctx.prec = old


# ---------------------------------------------------------------------------
# Number fields

class NumberField:
    """K = Q[x]/(m) for a monic irreducible m. Degree one is the rationals."""

    def __init__(self, poly, name="a"):
        if not isinstance(poly, fmpq_poly):
            poly = fmpq_poly([qq(c) for c in poly])
        if poly.degree() < 1:
            raise ValueError("defining polynomial must have positive degree")
        lead = poly[poly.degree()]
        if lead != 1:
            poly = poly / lead
        _, facs = poly.factor()
        if len(facs) != 1 or facs[0][1] != 1:
            raise ValueError("defining polynomial is reducible: %s" % poly)
        self.poly = poly
        self.degree = poly.degree()
        self.name = name

    def __repr__(self):
        if self.degree == 1:
            return "Rational Field"
        return "Number Field with defining polynomial %s" % self.poly.str(var="x")

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.poly == other.poly

    def __hash__(self):
        return hash(tuple(self.coeffs_of_poly()))

    def coeffs_of_poly(self):
        return [qstr(c) for c in self.poly.coeffs()]

    def __call__(self, x):
        if isinstance(x, NFElem):
            if x.field != self:
                raise ValueError("element of a different field")
            return x
        if isinstance(x, (list, tuple)):
            return NFElem(self, fmpq_poly([qq(c) for c in x]))
        if isinstance(x, fmpq_poly):
            return NFElem(self, x)
        return NFElem(self, fmpq_poly([qq(x)]))

    def gen(self):
        return NFElem(self, fmpq_poly([0, 1]))

    def zero(self):
        return self(0)

    def one(self):
        return self(1)

    def is_rational(self):
        return self.degree == 1

    def integral_poly(self):
        """The defining polynomial as an fmpz_poly, or None if not integral."""
        if any(c.q != 1 for c in self.poly.coeffs()):
            return None
        return fmpz_poly([int(c.p) for c in self.poly.coeffs()])

    def discriminant(self):
        f = self.integral_poly()
        if f is None:
            raise ValueError("defining polynomial is not integral")
        d = self.degree
        res = fmpq_poly(self.poly).derivative()
        # disc = (-1)^(d(d-1)/2) Res(f, f')
        r = _resultant(self.poly, res)
        return int((-1) ** (d * (d - 1) // 2) * r.p) if r.q == 1 else None

    def embeddings(self, prec=128):
        """Complex embeddings as the list of roots of m (balls)."""
        with working_precision(prec):
            f = self.integral_poly()
            if f is None:
                den = 1
                for c in self.poly.coeffs():
                    den = den * c.q // gcd(den, int(c.q))
                f = fmpz_poly([int(c * den) for c in self.poly.coeffs()])
            roots = [r for r, _ in f.complex_roots()]
        # real roots first, then by real part, then imaginary part
        def key(r):
            re = float(r.real.mid())
            im = float(r.imag.mid())
            return (abs(im) > 1e-20, re, im)
        return sorted(roots, key=key)


def _resultant(f, g):
    """Resultant of two rational polynomials via the Sylvester determinant."""
    m, n = f.degree(), g.degree()
    size = m + n
    rows = []
    fc = list(reversed(f.coeffs()))
    gc = list(reversed(g.coeffs()))
    for i in range(n):
        rows.append([fmpq(0)] * i + fc + [fmpq(0)] * (size - m - 1 - i))
    for i in range(m):
        rows.append([fmpq(0)] * i + gc + [fmpq(0)] * (size - n - 1 - i))
    M = flint.fmpq_mat(size, size, [c for r in rows for c in r])
    return M.det()


class NFElem:
    __slots__ = ("field", "poly")

    def __init__(self, field, poly):
        self.field = field
        if poly.degree() >= field.degree:
            poly = poly % field.poly
        self.poly = poly

    def _coerce(self, other):
        if isinstance(other, NFElem):
            return other
        return self.field(other)

    def __add__(self, other):
        return NFElem(self.field, self.poly + self._coerce(other).poly)

    __radd__ = __add__

    def __sub__(self, other):
        return NFElem(self.field, self.poly - self._coerce(other).poly)

    def __rsub__(self, other):
        return NFElem(self.field, self._coerce(other).poly - self.poly)

    def __neg__(self):
        return NFElem(self.field, -self.poly)

    def __mul__(self, other):
        return NFElem(self.field, self.poly * self._coerce(other).poly)

    __rmul__ = __mul__

    def inverse(self):
        if self.poly.is_zero():
            raise ZeroDivisionError("inverse of zero in number field")
        if self.poly.degree() == 0:
            return NFElem(self.field, fmpq_poly([1 / self.poly[0]]))
        # extended gcd against the defining polynomial
        g, s, _ = self.poly.xgcd(self.field.poly)
        return NFElem(self.field, s / g[0])

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        r = self.field.one()
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def __eq__(self, other):
        try:
            return (self - other).poly.is_zero()
        except (TypeError, ValueError):
            return False

    def __hash__(self):
        return hash(tuple(self.coords()))

    def __bool__(self):
        return not self.poly.is_zero()

    def is_zero(self):
        return self.poly.is_zero()

    def coords(self):
        """Coordinates in the power basis 1, a, ..., a^(d-1) as fmpq."""
        c = list(self.poly.coeffs())
        return [qq(x) for x in c] + [fmpq(0)] * (self.field.degree - len(c))

    def is_rational(self):
        return self.poly.degree() <= 0

    def to_rational(self):
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.poly[0] if self.poly.degree() == 0 else fmpq(0)

    def minpoly_matrix(self):
        """Matrix of multiplication by self on the power basis (columns)."""
        d = self.field.degree
        cols = []
        x = self
        a = self.field.gen()
        b = self.field.one()
        for _ in range(d):
            cols.append((x * b).coords())
            b = b * a
        return flint.fmpq_mat(d, d, [cols[j][i] for i in range(d) for j in range(d)])

    def norm(self):
        return self.minpoly_matrix().det()

    def trace(self):
        M = self.minpoly_matrix()
        return sum((M[i, i] for i in range(M.nrows())), fmpq(0))

    def charpoly(self):
        return self.minpoly_matrix().charpoly()

    def denominator(self):
        den = 1
        for c in self.coords():
            den = den * int(c.q) // gcd(den, int(c.q))
        return den

    def embed(self, root):
        """Image under the embedding a -> root (an acb)."""
        s = flint.acb(0)
        for c in reversed(self.poly.coeffs()):
            s = s * root + flint.acb(flint.arb(c))
        return s

    def __repr__(self):
        if self.field.degree == 1:
            return qstr(self.to_rational())
        return self.poly.str(var=self.field.name)

    def to_json(self):
        return [qstr(c) for c in self.coords()]


QQ = NumberField([0, 1])


# ---------------------------------------------------------------------------
# Primes and valuations in the equation order Z[a]

class PrimeOfField:
    """A prime of Z[a] above ell, given by an irreducible factor g of m mod ell."""

    def __init__(self, field, ell, g, e):
        self.field = field
        self.ell = ell
        self.g = tuple(int(c) % ell for c in g)  # coefficients low to high
        self.e = e
        self.f = len(self.g) - 1
        self._beta = None

    def __repr__(self):
        if self.field.degree == 1:
            return "(%d)" % self.ell
        gp = nmod_poly(list(self.g), self.ell)
        return "(%d, %s)" % (self.ell, gp.str(var=self.field.name))

    def key(self):
        return (self.ell, self.g)

    def __eq__(self, other):
        return isinstance(other, PrimeOfField) and self.key() == other.key() \
            and self.field == other.field

    def __lt__(self, other):
        return self.key() < other.key()

    def __hash__(self):
        return hash(self.key())

    def beta(self):
        """An element with valuation -1 here and >= 0 at the other primes above ell."""
        if self._beta is None:
            ell = self.ell
            m = self.field.integral_poly()
            mbar = nmod_poly([int(c) % ell for c in m.coeffs()], ell)
            gbar = nmod_poly(list(self.g), ell)
            h = mbar // gbar
            hz = fmpq_poly([int(c) for c in h.coeffs()])
            self._beta = NFElem(self.field, hz) / ell
        return self._beta

    def valuation(self, x):
        """v_P(x) for x in the field (x nonzero)."""
        K = self.field
        x = K(x) if not isinstance(x, NFElem) else x
        if x.is_zero():
            raise ValueError("valuation of zero")
        ell = self.ell
        if K.degree == 1:
            return vq(x.to_rational(), ell)
        # clear the ell part of the denominator
        den = x.denominator()
        s = vp(den, ell) if den > 1 else 0
        y = x * (ell ** s)
        v = -s * self.e
        b = self.beta()
        # multiply by beta while the result stays ell-integral
        n = 0
        while True:
            z = y * b
            if any(int(c.q) % ell == 0 for c in z.coords()):
                break
            y = z
            n += 1
            if n > 10000:
                raise RuntimeError("valuation did not terminate")
        return v + n


def primes_above(field, ell):
    """Primes of the equation order above ell (Dedekind criterion enforced)."""
    if not is_prime(ell):
        raise ValueError("%d is not prime" % ell)
    if field.degree == 1:
        return [PrimeOfField(field, ell, (0, 1), 1)]
    m = field.integral_poly()
    if m is None:
        raise ValueError("defining polynomial is not integral; supply a better order")
    mbar = nmod_poly([int(c) % ell for c in m.coeffs()], ell)
    _, facs = mbar.factor()
    # Dedekind: r = (m - prod g_i^e_i)/ell; need g_i not dividing r for e_i >= 2
    prod = fmpz_poly([1])
    lifts = []
    for g, e in facs:
        gz = fmpz_poly([int(c) for c in g.coeffs()])
        lifts.append((g, gz, e))
        prod = prod * gz ** e
    diff = m - prod
    r = nmod_poly([int(c) // ell for c in diff.coeffs()], ell)
    for g, _, e in lifts:
        if e >= 2 and (r % g).is_zero():
            raise ValueError(
                "equation order is not maximal at %d; a better order is required" % ell)
    return [PrimeOfField(field, ell, [int(c) for c in g.coeffs()], e) for g, _, e in lifts]


class FractionalIdeal:
    """Valuation vector over a finite set of primes; empty support is the unit ideal."""

    def __init__(self, field, support=None):
        self.field = field
        self.support = {}
        for P, v in (support or {}).items():
            if v:
                self.support[P] = int(v)

    @classmethod
    def from_generators(cls, field, gens, primes):
        """Ideal generated by gens, localized at the listed primes."""
        sup = {}
        nz = [g for g in gens if not field(g).is_zero()]
        if not nz:
            raise ValueError("zero ideal")
        for P in primes:
            sup[P] = min(P.valuation(field(g)) for g in nz)
        return cls(field, sup)

    def valuation(self, P):
        return self.support.get(P, 0)

    def __mul__(self, other):
        sup = dict(self.support)
        for P, v in other.support.items():
            sup[P] = sup.get(P, 0) + v
        return FractionalIdeal(self.field, sup)

    def inverse(self):
        return FractionalIdeal(self.field, {P: -v for P, v in self.support.items()})

    def __eq__(self, other):
        return self.support == other.support

    def is_unit(self):
        return not self.support

    def items(self):
        return sorted(self.support.items(), key=lambda t: t[0].key())

    def __repr__(self):
        if not self.support:
            return "(1)"
        return " * ".join("%r^%d" % (P, v) for P, v in self.items())


# ---------------------------------------------------------------------------
# Dirichlet characters, Conrey labels

@lru_cache(maxsize=None)
def primitive_root(n):
    """Smallest primitive root modulo n = p^e (p odd) or n in {2, 4}."""
    if n in (1, 2):
        return 1
    if n == 4:
        return 3
    phi = euler_phi(n)
    qs = prime_divisors(phi)
    for g in range(2, n):
        if gcd(g, n) != 1:
            continue
        if all(pow(g, phi // q, n) != 1 for q in qs):
            return g
    raise ValueError("no primitive root modulo %d" % n)


@lru_cache(maxsize=None)
def _dlog_table(g, n, order):
    tab = {}
    x = 1
    for k in range(order):
        tab.setdefault(x, k)
        x = x * g % n
    return tab


def _dlog(a, g, n, order):
    k = _dlog_table(g, n, order).get(a % n)
    if k is None:
        raise ValueError("discrete log failed")
    return k


def _local_angle(n, m, p, e):
    """Angle (in Q/Z) of the Conrey character chi_n at m, for the component p^e."""
    q = p ** e
    if p != 2:
        g = primitive_root(q)
        phi = q // p * (p - 1)
        a = _dlog(n % q, g, q, phi)
        b = _dlog(m % q, g, q, phi)
        return Fraction(a * b, phi)
    if e == 1:
        return Fraction(0)
    # 2^e with e >= 2: x = eps * 5^k
    def split(x):
        x %= q
        eps = 1 if x % 4 == 1 else -1
        y = x if eps == 1 else (-x) % q
        order = q // 4
        k = _dlog(y, 5, q, order) if order > 1 else 0
        return eps, k, order
    en, an, order = split(n)
    em, am, _ = split(m)
    ang = Fraction((1 - en) * (1 - em), 8)
    if order > 1:
        ang += Fraction(an * am, order)
    return ang


class DirichletCharacter:
    """Dirichlet character mod N in Conrey labelling 'N.n' (n coprime to N, 1 <= n <= N)."""

    def __init__(self, modulus, index):
        N = int(modulus)
        n = int(index)
        if N < 1:
            raise ValueError("modulus must be positive")
        if N == 1:
            if n != 1:
                raise ValueError("index out of range for modulus 1")
        elif not (1 <= n <= N) or gcd(n, N) != 1:
            raise ValueError("index %d out of range for modulus %d" % (n, N))
        self.modulus = N
        self.index = n % N if N > 1 else 1
        if self.index == 0:
            self.index = 1
        self._fac = factor_int(N) if N > 1 else []
        self._angles = {}
        for m in range(N):
            if gcd(m, N) == 1:
                ang = Fraction(0)
                for p, e in self._fac:
                    ang += _local_angle(self.index, m, p, e)
                self._angles[m] = ang - (ang.numerator // ang.denominator)
        if N == 1:
            self._angles = {0: Fraction(0)}
        den = 1
        for a in self._angles.values():
            den = den * a.denominator // gcd(den, a.denominator)
        self.order = den
        self.parity = 0 if self.angle(-1) == 0 else 1
        self.conductor = self._conductor()

    @property
    def label(self):
        return "%d.%d" % (self.modulus, self.index)

    def __repr__(self):
        return "DirichletCharacter(%s)" % self.label

    def __eq__(self, other):
        return isinstance(other, DirichletCharacter) and self.label == other.label

    def __hash__(self):
        return hash(self.label)

    def angle(self, a):
        """psi(a) = exp(2 pi i * angle); None when gcd(a, N) > 1."""
        if self.modulus == 1:
            return Fraction(0)
        return self._angles.get(a % self.modulus)

    def exponent(self, a):
        """psi(a) = zeta_order^exponent, or None."""
        ang = self.angle(a)
        if ang is None:
            return None
        return int(ang * self.order)

    def is_trivial(self):
        return self.order == 1

    def _conductor(self):
        N = self.modulus
        for d in sorted(x for x in range(1, N + 1) if N % x == 0):
            if all(self.angle(a) == 0 for a in self._angles if a % d == 1 % d):
                return d
        return N

    def is_primitive(self):
        return self.conductor == self.modulus

    def value_field(self):
        """Field generated by the values: Q if order <= 2, else Q(zeta_order)."""
        return cyclotomic_field(self.order)

    def value(self, a, field=None):
        """Exact value in the value field (0 if not coprime)."""
        K = field or self.value_field()
        e = self.exponent(a)
        if e is None:
            return K(0)
        return root_of_unity(K, self.order, e)

    def complex_value(self, a, prec=128):
        ang = self.angle(a)
        if ang is None:
            return flint.acb(0)
        with working_precision(prec):
            t = flint.arb(ang.numerator) / ang.denominator
            return (flint.acb(0, 2) * flint.arb.pi() * t).exp()

    def conjugate(self):
        if self.modulus == 1:
            return self
        for n in range(1, self.modulus + 1):
            if gcd(n, self.modulus) == 1:
                c = DirichletCharacter(self.modulus, n)
                if all(c.angle(a) == (-self.angle(a)) % 1 for a in self._angles):
                    return c
        raise RuntimeError("conjugate not found")

    def value_at_prime_to_part(self, p):
        """psi_0(p): value at p of the component of psi of modulus prime to p (angle)."""
        ang = Fraction(0)
        for ell, e in self._fac:
            if ell == p:
                continue
            ang += _local_angle(self.index, p, ell, e)
        return ang - (ang.numerator // ang.denominator)

    def to_json(self):
        return {"label": self.label, "modulus": self.modulus, "conductor": self.conductor,
                "order": self.order, "parity": self.parity}


def cyclotomic_field(n):
    if n <= 2:
        return QQ
    phi = fmpz_poly.cyclotomic(n)
    return NumberField(fmpq_poly([int(c) for c in phi.coeffs()]), name="z%d" % n)


def root_of_unity(K, n, e):
    e %= n
    if n <= 2:
        return K(1 if e == 0 else -1)
    return K.gen() ** e


def character_from_label(label):
    """Parse 'modulus.index' (Conrey labelling)."""
    try:
        a, b = str(label).strip().split(".")
        N, n = int(a), int(b)
    except ValueError:
        raise ValueError("malformed character label %r" % (label,))
    return DirichletCharacter(N, n)


def trivial_character(N=1):
    return DirichletCharacter(N, 1)


def characters(N):
    """All characters mod N, ordered by Conrey index."""
    if N == 1:
        return [DirichletCharacter(1, 1)]
    return [DirichletCharacter(N, n) for n in range(1, N + 1) if gcd(n, N) == 1]


def gauss_sum(psi, prec=128):
    """G(psi) = sum_a psi(a) e^(2 pi i a/N) as a complex ball; psi must be primitive."""
    if not psi.is_primitive():
        raise ValueError("Gauss sum requires a primitive character")
    N = psi.modulus
    with working_precision(prec + 20):
        s = flint.acb(0)
        two_pi_i = flint.acb(0, 2) * flint.arb.pi()
        for a in range(N if N > 1 else 1):
            ang = psi.angle(a)
            if ang is None:
                continue
            t = flint.arb(ang.numerator) / ang.denominator + flint.arb(a) / N
            s += (two_pi_i * t).exp()
        if N == 1:
            s = flint.acb(1)
    with working_precision(prec):
        return s + 0
