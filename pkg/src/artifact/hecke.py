"""Hecke operators, newform extraction, local types, Atkin-Lehner and the
Sigma-variation (degeneracy) operators.

Eigenvalues are stored classically: T_p acts on f by a_p and S_p by psi(p) p^(k-2).
"""

from itertools import product as iproduct

from flint import fmpq, fmpq_mat, fmpq_poly

from . import _linalg as la
from .modsym import (build_space, cuspidal_subspace, atkin_lehner_matrix, pushforward_matrix,
                     pairing_gram, sturm_bound, CuspidalLattice)
from .numfield import (NumberField, NFElem, QQ, trivial_character, character_from_label,
                       characters, prime_divisors, primes_upto, is_prime, vp, qq, qstr)


_SPACES = {}


def get_space(N, k, psi=None):
    """Cached build_space."""
    psi = psi or trivial_character(N)
    key = (N, k, psi.label)
    if key not in _SPACES:
        _SPACES[key] = build_space(N, k, psi)
    return _SPACES[key]


def clear_space_cache():
    _SPACES.clear()


def restrict_character(psi, M):
    """The character mod M inducing psi (psi must factor through M)."""
    if M % psi.conductor:
        return None
    N = psi.modulus
    for chi in characters(M):
        if all(chi.angle(a % M if M > 1 else 0) == psi.angle(a)
               for a in range(N) if psi.angle(a) is not None):
            return chi
    return None


def lift_character(psi, M):
    """The character mod M (a multiple of the modulus) induced from psi."""
    if M % psi.modulus:
        raise ValueError("modulus must divide the new level")
    for chi in characters(M):
        if all(chi.angle(a) == psi.angle(a % psi.modulus if psi.modulus > 1 else 0)
               for a in range(M) if chi.angle(a) is not None):
            return chi
    raise ValueError("no induced character")


class HeckeOperator:
    """An exact matrix on a symbol space (or between cuspidal lattices), with its kind.

    kind is one of "T", "S", "AtkinLehner", "Degeneracy", "Phi", "Gamma".
    Matrices act on column vectors.
    """

    def __init__(self, kind, index, matrix, space, target=None, meta=None):
        self.kind = kind
        self.index = index
        self.matrix = matrix
        self.space = space
        self.target = target if target is not None else space
        self.meta = dict(meta or {})

    def __repr__(self):
        return "HeckeOperator(%s, %r, level %d)" % (self.kind, self.index, self.space.N)

    def on_cuspidal(self):
        """Matrix on the cuspidal lattice (operators on a single space only)."""
        if self.target is not self.space:
            raise ValueError("operator changes level")
        return cuspidal_subspace(self.space).restrict(self.matrix)

    def to_json(self):
        M = self.matrix
        entries = []
        if isinstance(M, fmpq_mat):
            for i in range(M.nrows()):
                for j in range(M.ncols()):
                    x = M[i, j]
                    if x != 0:
                        entries.append([i, j, int(x.p), int(x.q)])
            shape = [M.nrows(), M.ncols()]
        else:
            for i, row in enumerate(M):
                for j, x in enumerate(row):
                    if x != 0:
                        entries.append([i, j] + [qstr(c) for c in x.coords()])
            shape = [len(M), len(M[0]) if M else 0]
        return {"kind": self.kind, "index": self.index, "level": self.space.N,
                "weight": self.space.k, "character": self.space.psi.label,
                "shape": shape, "entries": entries,
                "meta": {k: str(v) for k, v in sorted(self.meta.items())}}


def hecke_operator(space, p, kind="T"):
    """T_n (any n >= 1) or the central operator S_p = (T_p^2 - T_{p^2})/p for p not dividing N."""
    if kind == "T":
        return HeckeOperator("T", p, space.hecke_matrix(p), space)
    if kind == "S":
        if space.N % p == 0:
            raise ValueError("S_p requires p not dividing the level")
        if not space.rational:
            raise NotImplementedError("S_p is implemented over the rationals only")
        T = space.hecke_matrix(p)
        M = (T * T - space.hecke_matrix(p * p)) * fmpq(1, p)
        return HeckeOperator("S", p, M, space)
    raise ValueError("unknown operator kind %r" % kind)


def atkin_lehner(space):
    if space.N > 1 and not space.psi.is_trivial():
        raise ValueError("Atkin-Lehner requires a self-dual (here: trivial) character")
    return HeckeOperator("AtkinLehner", space.N, atkin_lehner_matrix(space), space)


# ---------------------------------------------------------------------------
# Subspaces

def _factor(poly):
    _, facs = poly.factor()
    return [(f, e) for f, e in facs]


def _poly_key(f):
    return (f.degree(), [abs(c) for c in reversed(f.coeffs())], list(reversed(f.coeffs())))


def _sub_rows(rows, C):
    """Rows of the product rows * C as an fmpq_mat (rows given as an fmpq_mat)."""
    if rows.nrows() == 0:
        return fmpq_mat(0, C.ncols())
    return rows * C


def cuspidal_rows(space):
    L = cuspidal_subspace(space)
    if isinstance(L, CuspidalLattice):
        return L.basis
    return L


def new_subspace(space):
    """Rows spanning the new cuspidal subspace: common kernel of the two degeneracy maps
    to each level N/p."""
    if "new" in space._cache:
        return space._cache["new"]
    if not space.rational:
        raise NotImplementedError("newform extraction is implemented over the rationals only")
    C = cuspidal_rows(space)
    N, k, psi = space.N, space.k, space.psi
    conds = []
    if C.nrows():
        for p in prime_divisors(N):
            M = N // p
            chi = restrict_character(psi, M)
            if chi is None:
                continue
            low = get_space(M, k, chi)
            if low.dim == 0:
                continue
            for m in (1, p):
                A = pushforward_matrix(space, low, m)
                conds.append(A * C.transpose())
    if conds and C.nrows():
        K = la.rational_kernel(la.vstack(conds))
        new = K * C if K.nrows() else fmpq_mat(0, space.dim)
    else:
        new = C
    space._cache["new"] = new
    return new


def _plus_rows(space):
    if "plus" not in space._cache:
        S = space.star_matrix()
        space._cache["plus"] = la.rational_kernel(S - la.identity(space.dim))
    return space._cache["plus"]


def _intersect_rows(A, B):
    """Row span intersection of two rational row bases."""
    if A.nrows() == 0 or B.nrows() == 0:
        return fmpq_mat(0, A.ncols())
    M = la.vstack([A, -B]).transpose()
    K = la.rational_kernel(M)
    if K.nrows() == 0:
        return fmpq_mat(0, A.ncols())
    X = la.qmat([[K[i, j] for j in range(A.nrows())] for i in range(K.nrows())], A.nrows())
    return la.row_space(X * A)


def _operator_from_combo(space, combo):
    T = None
    for p, c in combo:
        M = space.hecke_matrix(p) * fmpq(c)
        T = M if T is None else T + M
    return T


def _combos(N, limit=6):
    good = [p for p in primes_upto(200) if N % p][:limit]
    for p in good:
        yield ((p, 1),)
    for i, p in enumerate(good):
        for q in good[i + 1:]:
            for c in (1, 2, 3, -1):
                yield ((p, 1), (q, c))
    for p, q, r in zip(good, good[1:], good[2:]):
        yield ((p, 1), (q, 2), (r, 5))


# ---------------------------------------------------------------------------
# Newform records

class LocalType:
    """Local type at p: delta in {0, 1, 2}, class name, exceptional flag with provenance."""

    def __init__(self, p, delta, cls, exceptional=False, provenance="definitional"):
        self.p = p
        self.delta = delta
        self.cls = cls
        self.exceptional = exceptional
        self.provenance = provenance

    def __repr__(self):
        return "LocalType(p=%d, delta=%d, %s%s)" % (
            self.p, self.delta, self.cls, ", exceptional" if self.exceptional else "")

    def __eq__(self, other):
        return isinstance(other, LocalType) and self.to_list() == other.to_list()

    def to_list(self):
        return [self.p, self.delta, self.cls, bool(self.exceptional), self.provenance]

    @classmethod
    def from_list(cls, row):
        return cls(int(row[0]), int(row[1]), row[2], bool(row[3]), row[4])


class _Context:
    """Internal link from a record to the symbol space it was extracted from."""

    def __init__(self, space, combo, fpoly, plus_basis, Tplus, proj, seed_vec, component):
        self.space = space
        self.combo = combo
        self.fpoly = fpoly
        self.plus_basis = plus_basis    # rows (free coords) of the plus part of M
        self.Tplus = Tplus              # generator on the plus part of M
        self.proj = proj                # M -> plus coords, onto the f-component
        self.seed = seed_vec            # free index f with proj e_f != 0
        self.component = component      # rows (free coords) of the full f-component (dim 2d)
        d = fpoly.degree()
        u = [proj[i, seed_vec] for i in range(proj.nrows())]
        cols = [u]
        for _ in range(d - 1):
            v = la.qmat([[x] for x in cols[-1]])
            w = Tplus * v
            cols.append([w[i, 0] for i in range(w.nrows())])
        self.krylov = la.qmat(cols)     # rows u, Tu, ...

    def eigenvalue(self, n, field):
        """Eigenvalue of T_n on f as an element of field, via a single Manin generator."""
        sp = self.space
        vec = sp.hecke_on_gen(sp.free[self.seed], n)
        y = self.proj * la.qmat([[x] for x in vec], 1)
        c = la.solve_in_span(self.krylov, y)
        return field([c[i, 0] for i in range(c.nrows())])


class NewformRecord:
    """A Galois orbit of newforms: level, weight, character, Hecke field, eigenvalues."""

    def __init__(self, level, weight, character, field, ap, label=None, bound=None,
                 local_types=None, exceptional=None, embedding_index=0, warnings=None,
                 generator=None, context=None):
        self.level = level
        self.weight = weight
        self.character = character
        self.field = field
        self.ap = dict(ap)
        self.label = label
        self.bound = bound if bound is not None else (max(ap) if ap else 0)
        self.local_types = dict(local_types or {})
        self.exceptional = dict(exceptional or {})   # p -> (flag, provenance)
        self.embedding_index = embedding_index
        self.warnings = list(warnings or [])
        self.generator = generator
        self._ctx = context

    def __repr__(self):
        return "NewformRecord(%s, field degree %d)" % (self.label, self.field.degree)

    @property
    def degree(self):
        return self.field.degree

    def psi_value(self, n):
        """psi(n) as an element of the Hecke field (0 if n is not a unit)."""
        v = self.character.value(n, QQ) if self.character.order <= 2 else None
        if v is None:
            raise NotImplementedError("characters of order > 2")
        return self.field(v.to_rational())

    def a(self, p):
        """Eigenvalue a_p (computed on demand when a space context is attached)."""
        if p not in self.ap:
            if self._ctx is None:
                raise KeyError("eigenvalue a_%d not available" % p)
            self.ap[p] = self._ctx.eigenvalue(p, self.field)
        return self.ap[p]

    def extend(self, B):
        for p in primes_upto(B):
            self.a(p)
        self.bound = max(self.bound, B)
        return self

    def an_list(self, B):
        """[a_1, ..., a_B] by multiplicativity and the Hecke recursion."""
        K = self.field
        a = [K.zero()] * (B + 1)
        a[1] = K.one()
        ppow = {}
        for p in primes_upto(B):
            ap = self.a(p)
            chi = self.psi_value(p) * (p ** (self.weight - 1))
            seq = [K.one(), ap]
            q = p * p
            while q <= B:
                seq.append(ap * seq[-1] - chi * seq[-2])
                q *= p
            ppow[p] = seq
        for n in range(2, B + 1):
            m = n
            val = K.one()
            for p in prime_divisors(n):
                e = vp(m, p)
                val = val * ppow[p][e]
            a[n] = val
        return a[1:]

    def to_json(self):
        lt = [self.local_types[p].to_list() for p in sorted(self.local_types)]
        return {
            "label": self.label,
            "level": self.level,
            "weight": self.weight,
            "character_label": self.character.label,
            "field_poly": [qstr(c) for c in self.field.poly.coeffs()],
            "bound": self.bound,
            "ap": [[p] + [qstr(c) for c in self.ap[p].coords()] for p in sorted(self.ap)],
            "local_types": lt,
            "exceptional": [[p, bool(f), prov] for p, (f, prov) in sorted(self.exceptional.items())],
            "embedding_index": self.embedding_index,
            "generator": [[p, c] for p, c in (self.generator or ())],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_json(cls, obj):
        field = NumberField([qq(c) for c in obj["field_poly"]])
        ap = {}
        for row in obj["ap"]:
            ap[int(row[0])] = field([qq(c) for c in row[1:]])
        lt = {int(r[0]): LocalType.from_list(r) for r in obj.get("local_types", [])}
        exc = {int(r[0]): (bool(r[1]), r[2]) for r in obj.get("exceptional", [])}
        gen = tuple((int(p), int(c)) for p, c in obj.get("generator", []))
        return cls(int(obj["level"]), int(obj["weight"]),
                   character_from_label(obj["character_label"]), field, ap,
                   label=obj.get("label"), bound=int(obj.get("bound", 0)),
                   local_types=lt, exceptional=exc,
                   embedding_index=int(obj.get("embedding_index", 0)),
                   warnings=obj.get("warnings", []), generator=gen or None)


def _letter(i):
    s = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        s = chr(97 + r) + s
    return s


def _form_label(N, k, psi, i):
    if psi.is_trivial():
        return "%d.%d.%s" % (N, k, _letter(i))
    return "%d.%d.%d.%s" % (N, k, psi.index, _letter(i))


MAX_FIELD_DEGREE = 8


def newform_decomposition(space, bound=None):
    """Newform Galois orbits in the space, with eigenvalues a_p for p <= bound."""
    if "newforms" in space._cache and bound is None:
        return space._cache["newforms"]
    if not space.rational:
        raise NotImplementedError("newform extraction is implemented over the rationals only")
    N, k, psi = space.N, space.k, space.psi
    B = bound if bound is not None else sturm_bound(N, k)
    warnings = []
    if B < sturm_bound(N, k):
        warnings.append("bound %d below the Sturm bound %d: identification not certified"
                        % (B, sturm_bound(N, k)))
    new = new_subspace(space)
    if new.nrows() == 0:
        return []
    plus = _plus_rows(space)
    new_plus = _intersect_rows(new, plus)
    choice = None
    for combo in _combos(N):
        T = _operator_from_combo(space, combo)
        Tnp = la.restrict(new_plus, T)
        facs = _factor(Tnp.charpoly())
        if any(e > 1 for _, e in facs):
            continue
        Tp = la.restrict(plus, T)
        ok = True
        for f, _ in facs:
            if la.rational_kernel(la.poly_eval_mat(f, Tp)).nrows() != f.degree():
                ok = False
                break
        if ok:
            choice = (combo, T, Tp, facs)
            break
    if choice is None:
        raise ArithmeticError("no separating Hecke operator found")
    combo, T, Tp, facs = choice
    cp = Tp.charpoly()
    Q = la.solve_in_span(plus, (la.identity(space.dim) + space.star_matrix()) * fmpq(1, 2))
    Tnew = la.restrict(new, T)
    records = []
    for i, (f, _) in enumerate(sorted(facs, key=lambda t: _poly_key(t[0]))):
        d = f.degree()
        g = cp // f
        gg, s, _t = g.xgcd(f)
        e_poly = (s * g) * (1 / gg[0])
        E = la.poly_eval_mat(e_poly, Tp)
        proj = E * Q
        seed = None
        for j in range(space.dim):
            if any(proj[t, j] != 0 for t in range(proj.nrows())):
                seed = j
                break
        kern = la.rational_kernel(la.poly_eval_mat(f, Tnew))
        component = kern * new
        field = NumberField(f) if d > 1 else QQ
        ctx = _Context(space, combo, f, plus, Tp, proj, seed, component)
        rec = NewformRecord(N, k, psi, field, {}, label=_form_label(N, k, psi, i),
                            bound=B, warnings=list(warnings), generator=combo, context=ctx)
        if d > MAX_FIELD_DEGREE:
            rec.warnings.append("Hecke field of degree %d exceeds %d: characteristic polynomial only"
                                % (d, MAX_FIELD_DEGREE))
        else:
            rec.extend(B)
        for p in prime_divisors(N):
            rec.local_types[p] = classify_local(rec, p)
        records.append(rec)
    if bound is None:
        space._cache["newforms"] = records
    return records


def parse_form_label(label):
    """'N.k', 'N.k.a' or 'N.k.n.a' -> (N, k, character, orbit index)."""
    aliases = {"Delta": "1.12.a", "delta": "1.12.a", "11a": "11.2.a"}
    label = aliases.get(label, label)
    parts = label.split(".")
    try:
        if len(parts) == 2:
            N, k = int(parts[0]), int(parts[1])
            return N, k, trivial_character(N), 0
        if len(parts) == 3:
            N, k = int(parts[0]), int(parts[1])
            return N, k, trivial_character(N), _letter_index(parts[2])
        if len(parts) == 4:
            N, k = int(parts[0]), int(parts[1])
            from .numfield import DirichletCharacter
            return N, k, DirichletCharacter(N, int(parts[2])), _letter_index(parts[3])
    except ValueError:
        pass
    raise ValueError("malformed form label %r" % (label,))


def _letter_index(s):
    if not s.isalpha() or not s.islower():
        raise ValueError("bad orbit letter %r" % s)
    n = 0
    for ch in s:
        n = n * 26 + (ord(ch) - 96)
    return n - 1


def get_newform(label, bound=None):
    N, k, psi, idx = parse_form_label(label)
    recs = newform_decomposition(get_space(N, k, psi))
    if idx >= len(recs):
        raise ValueError("no newform %s" % label)
    rec = recs[idx]
    if bound is not None and bound > rec.bound:
        rec.extend(bound)
    return rec


def attach_context(record):
    """Re-link an ingested record to a freshly extracted one with matching eigenvalues."""
    if record._ctx is not None:
        return record
    for cand in newform_decomposition(get_space(record.level, record.weight, record.character)):
        if cand.field.poly != record.field.poly:
            continue
        if all(cand.a(p) == x for p, x in record.ap.items()):
            record._ctx = cand._ctx
            return record
    raise ValueError("record does not match any computed newform")


# ---------------------------------------------------------------------------
# Local types

def classify_local(record, p):
    """delta_p and the local class at p."""
    N, k = record.level, record.weight
    if N % p:
        return LocalType(p, 2, "good")
    ap = record.a(p)
    if ap.is_zero():
        flag, prov = record.exceptional.get(p, (False, "default-unverified"))
        return LocalType(p, 0, "supercuspidal", flag, prov)
    psi = record.character
    ang = psi.value_at_prime_to_part(p)
    if ang.denominator > 2:
        raise NotImplementedError("characters of order > 2")
    psi0 = 1 if ang == 0 else -1
    special = (ap * ap == record.field(psi0 * p ** (k - 2)))
    cond_p = vp(psi.conductor, p) if psi.conductor % p == 0 else 0
    ps = vp(N, p) == cond_p
    if special and ps:
        raise ValueError("inconsistent local data at %d: special and principal series" % p)
    if special:
        return LocalType(p, 1, "special")
    if ps:
        return LocalType(p, 1, "principal-series")
    raise ValueError("inconsistent local data at %d: a_p nonzero but neither special nor "
                     "principal series" % p)


# ---------------------------------------------------------------------------
# Sigma-variation

def _delta(record, p):
    lt = record.local_types.get(p) or classify_local(record, p)
    return lt.delta


def sigma_level(record, sigma):
    M = record.level
    for p in sigma:
        M *= p ** _delta(record, p)
    return M


def lattice_hecke_series(space, B):
    """{n: T_n on the cuspidal lattice} for n <= B, from prime operators by the Hecke
    recursion (trivial or quadratic character)."""
    L = cuspidal_subspace(space)
    r = L.rank
    k = space.k
    out = {1: la.identity(r)}
    for p in primes_upto(B):
        Tp = L.restrict(space.hecke_matrix(p))
        out[p] = Tp
        q, prev, cur = p * p, out[1], Tp
        while q <= B:
            if space.N % p:
                chi = int(space.psi.value(p, QQ).to_rational()) * p ** (k - 1)
                nxt = Tp * cur - prev * fmpq(chi)
            else:
                nxt = Tp * cur
            out[q] = nxt
            prev, cur = cur, nxt
            q *= p
    for n in range(2, B + 1):
        if n in out:
            continue
        M = None
        m = n
        for p in prime_divisors(n):
            pe = p ** vp(n, p)
            M = out[pe] if M is None else M * out[pe]
        out[n] = M
    return out


def _lattice_op(space, T):
    return cuspidal_subspace(space).restrict(T)


def _lattice_map(high, low, A):
    """Matrix of A: M(high) -> M(low) between cuspidal lattices (columns = coordinates)."""
    Lh = cuspidal_subspace(high)
    Ll = cuspidal_subspace(low)
    return la.solve_in_span(Ll.basis, A * Lh.basis.transpose())


def epsilon_m(source, target, m):
    """eps_m = G_target^-1 (m^(1-k) A_m)^T G_source on cuspidal lattices."""
    k = source.k
    A = _lattice_map(target, source, pushforward_matrix(target, source, m))
    Gs = pairing_gram(source).matrix
    Gt = pairing_gram(target).matrix
    return Gt.inv() * (A * fmpq(1, m ** (k - 1))).transpose() * Gs


def degeneracy_gamma(record, sigma, source=None, target=None):
    """gamma = sum_m eps_m phi_m from the level-N lattice to the level-N^Sigma lattice."""
    N, k, psi = record.level, record.weight, record.character
    if not psi.is_trivial():
        raise NotImplementedError("Sigma-variation is implemented for the trivial character")
    sigma = sorted(set(sigma))
    source = source or get_space(N, k, psi)
    Nt = sigma_level(record, sigma)
    target = target or get_space(Nt, k, lift_character(psi, Nt))
    if source.N != N or target.N != Nt or source.k != k or target.k != k:
        raise ValueError("mismatched spaces")
    r = cuspidal_subspace(source).rank
    I = la.identity(r)
    options = []
    for p in sigma:
        dl = _delta(record, p)
        Tp = _lattice_op(source, source.hecke_matrix(p))
        if dl == 2:
            opts = [(1, I), (p, -Tp), (p * p, I * fmpq(int(psi.value(p, QQ).to_rational()) * p ** (k - 1)))]
        elif dl == 1:
            opts = [(1, I), (p, -Tp)]
        else:
            opts = [(1, I)]
        options.append(opts)
    gamma = None
    eps_cache = {}
    for choice in iproduct(*options):
        m = 1
        Phi = I
        for mm, P in choice:
            m *= mm
            Phi = Phi * P
        if m not in eps_cache:
            eps_cache[m] = epsilon_m(source, target, m)
        term = eps_cache[m] * Phi
        gamma = term if gamma is None else gamma + term
    return HeckeOperator("Gamma", tuple(sigma), gamma, source, target,
                         meta={"adjoint_normalization": 1, "target_level": Nt})


def _component_lattice_coords(record):
    """Columns (lattice coordinates) spanning the full f-component at the record's level."""
    attach_context(record)
    ctx = record._ctx
    L = cuspidal_subspace(ctx.space)
    return la.solve_in_span(L.basis, ctx.component.transpose())


def _generator_on_lattice(record):
    ctx = record._ctx
    return _lattice_op(ctx.space, _operator_from_combo(ctx.space, ctx.combo))


def _scalar_on_component(record, M):
    """The element c of the Hecke field with M = c on the f-component (lattice coords)."""
    C = _component_lattice_coords(record)
    Tg = _generator_on_lattice(record)
    d = record.degree
    v = la.qmat([[C[i, 0]] for i in range(C.nrows())])
    cols = [v]
    for _ in range(d - 1):
        cols.append(Tg * cols[-1])
    Kr = la.hstack(cols).transpose()
    c = la.solve_in_span(Kr, M * v)
    val = record.field([c[i, 0] for i in range(d)])
    # the same scalar must act on the whole component
    X = la.poly_eval_mat(val.poly, Tg) if d > 1 else la.scalar(Tg.nrows(), val.to_rational())
    if M * C != X * C:
        raise ArithmeticError("operator is not a scalar on the eigencomponent")
    return val


def gamma_adjoint_product(record, sigma):
    """The scalar by which gamma^t gamma acts on the f-component."""
    if not sigma:
        return record.field.one()
    G = degeneracy_gamma(record, sigma)
    Gs = pairing_gram(G.space).matrix
    Gt = pairing_gram(G.target).matrix
    gt = Gs.inv() * G.matrix.transpose() * Gt
    return _scalar_on_component(record, gt * G.matrix)


def gamma_closed_form(record, sigma):
    """Closed form of gamma^t gamma: product over Sigma of the local factors."""
    K = record.field
    k = record.weight
    val = K.one()
    for p in sorted(set(sigma)):
        lt = record.local_types.get(p) or classify_local(record, p)
        ap = record.a(p)
        if lt.delta == 2:
            psi = record.psi_value(p)
            x = (K(fmpq(p + 1, p)) ** 2 - ap * ap / (psi * p ** k)) * fmpq(p - 1, p)
            val = val * x * psi * p ** (k - 1)
        elif lt.delta == 1:
            if lt.cls == "special":
                val = val * (-ap) * fmpq(p * p - 1, p * p)
            else:
                val = val * (-ap) * fmpq(p - 1, p)
    return val


def sigma_coefficients(record, sigma, B):
    """a_n(f^Sigma) for n <= B: a_n(f) if n is prime to Sigma, else 0."""
    an = record.an_list(B)
    K = record.field
    return [K.zero() if any(n % p == 0 for p in sigma) else an[n - 1] for n in range(1, B + 1)]


def gamma_kill_check(record, sigma, B=None):
    """Check T_n gamma = gamma a_n(f^Sigma) on the f-component for n <= B.

    Returns (ok, list of failing n). By duality a_n(g) = a_1(T_n g), so this is the
    coefficientwise identity gamma(f) = f^Sigma up to the bound.
    """
    G = degeneracy_gamma(record, sigma)
    target = G.target
    if B is None:
        B = sturm_bound(target.N, target.k)
    C = _component_lattice_coords(record)
    Tg = _generator_on_lattice(record)
    coeffs = sigma_coefficients(record, sigma, B)
    GC = G.matrix * C
    bad = []
    if all(GC[i, j] == 0 for i in range(GC.nrows()) for j in range(GC.ncols())):
        return False, [0]
    Tn_all = lattice_hecke_series(target, B)
    for n in range(1, B + 1):
        Tn = Tn_all[n]
        a = coeffs[n - 1]
        if record.degree > 1:
            X = la.poly_eval_mat(a.poly, Tg)
        else:
            X = la.scalar(Tg.nrows(), a.to_rational())
        if Tn * GC != G.matrix * X * C:
            bad.append(n)
    return not bad, bad
