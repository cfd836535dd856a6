"""Point counts over small finite fields, involution fixed loci and quotient genera."""
from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np
import sympy

from .pencil import WeierstrassModel
from .polys import parse_expression
from .qmath import is_prime, is_rational_square, kernel, mat_mul, rank, rational_sqrt
from .zmod_gl2 import InvalidInput

DEFAULT_BUDGET = 2_000_000
_CHUNK = 1 << 17
VARIABLE_ORDER = ("x", "y", "z", "w", "t", "u", "v", "s")


class BudgetExceeded(RuntimeError):
    """The requested enumeration exceeds the point budget."""


class FixedLocusError(RuntimeError):
    """Fixed locus is positive dimensional or not transverse."""


def enumeration_budget() -> int:
    raw = os.environ.get("QPT_BUDGET")
    if raw:
        try:
            return int(raw)
        except ValueError as exc:
            raise InvalidInput(f"QPT_BUDGET must be an integer, got {raw!r}") from exc
    return DEFAULT_BUDGET


# --- finite fields ----------------------------------------------------------

class FiniteField:
    """GF(p^k), k <= 3.  Elements are ints whose base-p digits are coordinates
    in the basis 1, a, a^2 for a root a of a fixed irreducible polynomial."""

    def __init__(self, p: int, k: int = 1):
        if not is_prime(p):
            raise InvalidInput(f"{p} is not prime")
        if not 1 <= k <= 3:
            raise InvalidInput("extension degree must be 1, 2 or 3")
        self.p, self.k, self.q = p, k, p ** k
        if k > 1:
            self.modulus = self._irreducible()
            self._build_tables()

    def _irreducible(self) -> tuple:
        p, k = self.p, self.k
        for tail in range(p ** k):
            coeffs = [(tail // p ** i) % p for i in range(k)] + [1]
            if all(sum(c * pow(x, i, p) for i, c in enumerate(coeffs)) % p for x in range(p)):
                return tuple(coeffs)
        raise AssertionError("no irreducible polynomial")  # pragma: no cover

    def _digits(self, a: int) -> list:
        return [(a // self.p ** i) % self.p for i in range(self.k)]

    def _from_digits(self, ds) -> int:
        return sum((d % self.p) * self.p ** i for i, d in enumerate(ds))

    def _slow_mul(self, a: int, b: int) -> int:
        p, k = self.p, self.k
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(da):
            for j, y in enumerate(db):
                prod[i + j] += x * y
        for deg in range(2 * k - 2, k - 1, -1):
            c = prod[deg] % p
            if c:
                for i, m in enumerate(self.modulus[:-1]):
                    prod[deg - k + i] -= c * m
            prod[deg] = 0
        return self._from_digits(prod[:k])

    def _build_tables(self):
        q = self.q
        for g in range(2, q):
            exp = [1]
            x = g
            while x != 1:
                exp.append(x)
                x = self._slow_mul(x, g)
            if len(exp) == q - 1:
                break
        self.exp = np.array(exp + exp, dtype=np.int64)
        self.log = np.zeros(q, dtype=np.int64)
        self.log[np.array(exp)] = np.arange(q - 1)
        digits = np.array([self._digits(a) for a in range(q)], dtype=np.int64)
        self._digit_table = digits
        self._powers = np.array([self.p ** i for i in range(self.k)], dtype=np.int64)

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def from_int(self, c: int) -> int:
        return int(c) % self.p

    def add(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        s = (self._digit_table[a] + self._digit_table[b]) % self.p
        return s @ self._powers

    def mul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        a = np.asarray(a)
        b = np.asarray(b)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def scalar_mul(self, c: int, a):
        return self.mul(np.full_like(np.asarray(a), self.from_int(c)), a)

    def power(self, a, e: int):
        if self.k == 1:
            return _int_power(a, e, self.p)
        a = np.asarray(a)
        if e == 0:
            return np.ones_like(a)
        out = self.exp[(self.log[a] * e) % (self.q - 1)]
        return np.where(a == 0, 0, out)


def _int_power(a, e, p):
    result = np.ones_like(a)
    base = np.asarray(a) % p
    while e:
        if e & 1:
            result = (result * base) % p
        base = (base * base) % p
        e >>= 1
    return result


# --- schemes --------------------------------------------------------------

def _poly_terms(expr, syms) -> list:
    poly = sympy.Poly(expr, *syms)
    terms = []
    for monom, coeff in poly.terms():
        if not coeff.is_integer:
            num, den = sympy.fraction(coeff)
            terms.append((monom, Fraction(int(num), int(den))))
        else:
            terms.append((monom, Fraction(int(coeff))))
    return terms


@dataclass(frozen=True)
class ProjectiveScheme:
    variables: tuple
    polynomials: tuple  # sympy expressions

    @classmethod
    def from_strings(cls, polys, variables=None) -> "ProjectiveScheme":
        extra = tuple(variables or ())
        exprs = [parse_expression(s, extra) if isinstance(s, str) else sympy.expand(s) for s in polys]
        if variables is None:
            present = set().union(*(e.free_symbols for e in exprs)) if exprs else set()
            names = {str(s) for s in present}
            unknown = names - set(VARIABLE_ORDER)
            if unknown:
                raise InvalidInput(f"unknown variables {sorted(unknown)}")
            last = max((VARIABLE_ORDER.index(n) for n in names), default=0)
            variables = VARIABLE_ORDER[: max(last + 1, 2)]
        variables = tuple(variables)
        if len(variables) > 8:
            raise InvalidInput("ambient dimension is at most 7")
        syms = sympy.symbols(variables)
        for e in exprs:
            if e == 0:
                continue
            P = sympy.Poly(e, *syms)
            if not P.is_homogeneous:
                raise InvalidInput(f"{e} is not homogeneous")
        return cls(variables, tuple(exprs))

    @classmethod
    def from_file(cls, path) -> "ProjectiveScheme":
        from pathlib import Path

        variables = None
        polys = []
        for raw in Path(path).read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.lower().startswith("vars:"):
                variables = tuple(v.strip() for v in line[5:].split(",") if v.strip())
                continue
            polys.append(line)
        if not polys:
            raise InvalidInput(f"{path}: no polynomials")
        return cls.from_strings(polys, variables)

    @property
    def symbols(self) -> tuple:
        return tuple(sympy.symbols(self.variables))

    @property
    def ambient_dimension(self) -> int:
        return len(self.variables) - 1

    def terms(self) -> list:
        return [_poly_terms(e, self.symbols) for e in self.polynomials if e != 0]

    def bad_denominator(self, p: int) -> bool:
        return any(c.denominator % p == 0 for poly in self.terms() for _, c in poly)


def projective_space_size(q: int, n: int) -> int:
    return (q ** (n + 1) - 1) // (q - 1)


def _eval_terms(F: FiniteField, terms, pts: np.ndarray) -> np.ndarray:
    acc = np.zeros(len(pts), dtype=np.int64)
    for monom, c in terms:
        c_int = c.numerator * pow(c.denominator, -1, F.p)
        coef = F.from_int(c_int)
        if coef == 0:
            continue
        val = np.full(len(pts), coef, dtype=np.int64)
        for i, e in enumerate(monom):
            if e:
                val = F.mul(val, F.power(pts[:, i], e))
        acc = F.add(acc, val)
    return acc


def _chart_points(F: FiniteField, n: int, chart: int, start: int, stop: int) -> np.ndarray:
    """Points of the chart x_0 = ... = x_{chart-1} = 0, x_chart = 1, rows start..stop."""
    free = n - chart
    idx = np.arange(start, stop, dtype=np.int64)
    pts = np.zeros((len(idx), n + 1), dtype=np.int64)
    pts[:, chart] = 1
    for j in range(free):
        pts[:, n - j] = idx % F.q
        idx //= F.q
    return pts


def count_points(S: ProjectiveScheme, p: int, k: int = 1, budget: int | None = None) -> int:
    """Number of F_{p^k}-points of S by exhaustive projective enumeration."""
    F = FiniteField(p, k)
    if S.bad_denominator(p):
        raise InvalidInput(f"p={p} divides a coefficient denominator")
    n = S.ambient_dimension
    limit = enumeration_budget() if budget is None else budget
    size = projective_space_size(F.q, n)
    if size > limit:
        raise BudgetExceeded(f"P^{n}(F_{F.q}) has {size} points, budget is {limit}")
    polys = S.terms()
    total = 0
    for chart in range(n + 1):
        npts = F.q ** (n - chart)
        for start in range(0, npts, _CHUNK):
            pts = _chart_points(F, n, chart, start, min(npts, start + _CHUNK))
            ok = np.ones(len(pts), dtype=bool)
            for terms in polys:
                ok &= _eval_terms(F, terms, pts) == 0
            total += int(ok.sum())
    return total


# --- elliptic curves --------------------------------------------------------

@dataclass(frozen=True)
class WeierstrassCurve:
    model: WeierstrassModel

    @classmethod
    def from_ainvs(cls, ainvs) -> "WeierstrassCurve":
        m = WeierstrassModel.from_ainvs(ainvs)
        if m.discriminant == 0:
            raise InvalidInput("singular Weierstrass equation")
        return cls(m)

    @classmethod
    def from_string(cls, text: str) -> "WeierstrassCurve":
        x, y = sympy.symbols("x y")
        expr = parse_expression(text)
        P = sympy.Poly(expr, x, y)
        lead = P.coeff_monomial(y ** 2)
        if lead == 0:
            raise InvalidInput(f"{text!r} is not a Weierstrass equation")
        P = sympy.Poly(expr / lead, x, y)
        cube = P.coeff_monomial(x ** 3)
        if cube != -1:
            raise InvalidInput(f"{text!r} is not a Weierstrass equation")
        allowed = {(0, 2), (1, 1), (0, 1), (3, 0), (2, 0), (1, 0), (0, 0)}
        if set(P.monoms()) - allowed:
            raise InvalidInput(f"{text!r} is not a Weierstrass equation")
        get = lambda m: Fraction(str(P.coeff_monomial(m)))
        a1, a3 = get(x * y), get(y)
        a2, a4, a6 = -get(x ** 2), -get(x), -get(sympy.Integer(1))
        return cls.from_ainvs([a1, a2, a3, a4, a6])

    @property
    def ainvs(self) -> tuple:
        return self.model.ainvs

    def as_scheme(self) -> ProjectiveScheme:
        x, y, z = sympy.symbols("x y z")
        a1, a2, a3, a4, a6 = (sympy.Rational(c.numerator, c.denominator) for c in self.ainvs)
        expr = (y ** 2 * z + a1 * x * y * z + a3 * y * z ** 2
                - x ** 3 - a2 * x ** 2 * z - a4 * x * z ** 2 - a6 * z ** 3)
        return ProjectiveScheme.from_strings([sympy.expand(expr)], ("x", "y", "z"))

    def has_good_reduction(self, p: int) -> bool:
        if any(c.denominator % p == 0 for c in self.ainvs):
            return False
        D = self.model.discriminant
        return D.numerator % p != 0


def _reduce(c: Fraction, p: int) -> int:
    return c.numerator * pow(c.denominator, -1, p) % p


def count_elliptic(E: WeierstrassCurve, p: int) -> int:
    """#E(F_p) including the point at infinity."""
    if not E.has_good_reduction(p):
        raise InvalidInput(f"bad reduction at {p}")
    a1, a2, a3, a4, a6 = (_reduce(c, p) for c in E.ainvs)
    if p == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    n += 1
        return n
    b2 = (a1 * a1 + 4 * a2) % p
    b4 = (2 * a4 + a1 * a3) % p
    b6 = (a3 * a3 + 4 * a6) % p
    xs = np.arange(p, dtype=np.int64)
    g = (4 * xs ** 3 % p + b2 * xs * xs + 2 * b4 * xs + b6) % p
    chi = np.where(g == 0, 0, np.where(_int_power(g, (p - 1) // 2, p) == 1, 1, -1))
    return int(p + 1 + chi.sum())


def ap_trace(E: WeierstrassCurve, p: int) -> int:
    a = p + 1 - count_elliptic(E, p)
    assert a * a <= 4 * p, "Hasse bound violated"
    return a


def torsion_bound(E: WeierstrassCurve, primes) -> int:
    good = [p for p in primes if E.has_good_reduction(p)]
    if len(good) < 2:
        raise InvalidInput("torsion bound needs at least two primes of good reduction")
    g = 0
    for p in good:
        g = gcd(g, count_elliptic(E, p))
    return g


@dataclass
class MismatchVerdict:
    status: str
    counts: dict
    first_mismatch: int | None = None

    @property
    def mismatch(self) -> bool:
        return self.status == "MISMATCH"


def _count_any(X, p: int, budget=None) -> int:
    if isinstance(X, WeierstrassCurve):
        return count_elliptic(X, p)
    return count_points(X, p, 1, budget)


def mismatch_filter(quotient, E, primes, budget=None) -> MismatchVerdict:
    """MISMATCH as soon as #quotient(F_p) differs from #E(F_p) for a listed prime."""
    counts = {}
    first = None
    for p in primes:
        a, b = _count_any(quotient, p, budget), _count_any(E, p, budget)
        counts[p] = (a, b)
        if a != b and first is None:
            first = p
    return MismatchVerdict("MISMATCH" if first is not None else "INCONCLUSIVE", counts, first)


# --- involutions ------------------------------------------------------------

@dataclass(frozen=True)
class LinearInvolution:
    matrix: tuple

    @classmethod
    def from_rows(cls, rows) -> "LinearInvolution":
        M = tuple(tuple(Fraction(x) for x in r) for r in rows)
        n = len(M)
        if any(len(r) != n for r in M):
            raise InvalidInput("involution matrix must be square")
        sq = mat_mul([list(r) for r in M], [list(r) for r in M])
        lam = sq[0][0]
        if lam == 0 or any(sq[i][j] != (lam if i == j else 0) for i in range(n) for j in range(n)):
            raise InvalidInput("matrix does not square to a nonzero scalar")
        return cls(M)

    @property
    def scalar(self) -> Fraction:
        M = [list(r) for r in self.matrix]
        return mat_mul(M, M)[0][0]

    def apply(self, expr, syms):
        n = len(syms)
        images = [sum(sympy.Rational(self.matrix[i][j].numerator, self.matrix[i][j].denominator) * syms[j]
                      for j in range(n)) for i in range(n)]
        return sympy.expand(expr.subs(dict(zip(syms, images)), simultaneous=True))

    def eigenspaces(self) -> list:
        lam = self.scalar
        if not is_rational_square(lam):
            raise InvalidInput("eigenvalues are irrational; rescale the involution")
        mu = rational_sqrt(lam)
        n = len(self.matrix)
        spaces = []
        for ev in (mu, -mu):
            A = [[self.matrix[i][j] - (ev if i == j else 0) for j in range(n)] for i in range(n)]
            spaces.append(kernel(A))
        return spaces


def _coefficient_vectors(exprs, syms):
    monos = set()
    polys = [sympy.Poly(e, *syms) for e in exprs]
    for P in polys:
        monos.update(P.monoms())
    monos = sorted(monos)
    return [[Fraction(str(P.coeff_monomial(m))) if m in P.monoms() else Fraction(0) for m in monos]
            for P in polys]


def preserves_ideal(S: ProjectiveScheme, iota: LinearInvolution) -> bool:
    """Each Q o iota lies in the span of the generators of the same degree."""
    syms = S.symbols
    gens = [e for e in S.polynomials if e != 0]
    for e in gens:
        deg = sympy.Poly(e, *syms).total_degree()
        same = [g for g in gens if sympy.Poly(g, *syms).total_degree() == deg]
        img = iota.apply(e, syms)
        vecs = _coefficient_vectors(same + [img], syms)
        if rank(vecs) != rank(vecs[:-1]):
            return False
    return True


@dataclass
class FixedLocus:
    count: int
    per_eigenspace: list = field(default_factory=list)


def _standard_monomial_count(G, gens) -> int | None:
    """Dimension of Q[gens]/I from a Groebner basis, or None if infinite."""
    leads = [sympy.Poly(g, *gens).monoms(order=G.order)[0] for g in G.exprs]
    n = len(gens)
    pure = [None] * n
    for m in leads:
        nz = [i for i, e in enumerate(m) if e]
        if len(nz) == 1:
            i = nz[0]
            pure[i] = m[i] if pure[i] is None else min(pure[i], m[i])
    if any(b is None for b in pure):
        return None
    count = 0

    def rec(i, mono):
        nonlocal count
        if i == n:
            if not any(all(a >= b for a, b in zip(mono, m)) for m in leads):
                count += 1
            return
        for e in range(pure[i]):
            rec(i + 1, mono + (e,))

    rec(0, ())
    return count


def _affine_point_count(exprs, gens, rng) -> tuple[int, int]:
    """(distinct, with multiplicity) for a zero-dimensional affine system over Q-bar."""
    exprs = [e for e in exprs if e != 0]
    if not gens:
        return (0, 0) if exprs else (1, 1)
    if not exprs:
        raise FixedLocusError("fixed locus is positive dimensional")
    G = sympy.groebner(exprs, *gens, order="grevlex")
    if list(G.exprs) == [1]:
        return 0, 0
    mult = _standard_monomial_count(G, gens)
    if mult is None:
        raise FixedLocusError("fixed locus is positive dimensional")
    T = sympy.Dummy("T")
    distinct = 0
    for _ in range(3):
        ell = sum(rng.randint(-20, 20) * g for g in gens)
        H = sympy.groebner(list(G.exprs) + [T - ell], *gens, T, order="lex")
        uni = [h for h in H.exprs if h.free_symbols <= {T}]
        f = sympy.Poly(uni[-1], T)
        sqf = sympy.quo(f, sympy.gcd(f, f.diff(T)))
        distinct = max(distinct, sqf.degree())
    return distinct, mult


def _projective_point_count(exprs, syms, rng) -> tuple[int, int]:
    distinct = mult = 0
    for chart in range(len(syms)):
        sub = {s: 0 for s in syms[:chart]}
        sub[syms[chart]] = 1
        local = [sympy.expand(e.subs(sub)) for e in exprs]
        d, m = _affine_point_count(local, list(syms[chart + 1:]), rng)
        distinct += d
        mult += m
    return distinct, mult


def fixed_locus(S: ProjectiveScheme, iota: LinearInvolution, seed: int = 0) -> FixedLocus:
    """Number of geometric points of S fixed by iota, computed exactly over Q."""
    n = len(S.variables)
    if len(iota.matrix) != n:
        raise InvalidInput("involution size does not match the ambient space")
    if not preserves_ideal(S, iota):
        raise InvalidInput("involution does not preserve the ideal")
    syms = S.symbols
    rng = random.Random(seed)
    total = 0
    parts = []
    for basis in iota.eigenspaces():
        if not basis:
            parts.append(0)
            continue
        params = sympy.symbols(f"s0:{len(basis)}")
        point = [sum(sympy.Rational(b[i].numerator, b[i].denominator) * s for b, s in zip(basis, params))
                 for i in range(n)]
        restricted = [sympy.expand(e.subs(dict(zip(syms, point)), simultaneous=True))
                      for e in S.polynomials]
        d, m = _projective_point_count(restricted, params, rng)
        if d != m:
            raise FixedLocusError(f"non-transverse fixed points: {d} distinct, {m} with multiplicity")
        parts.append(d)
        total += d
    return FixedLocus(total, parts)


def quotient_genus(g: int, r: int) -> int:
    """Genus of C/iota from Riemann-Hurwitz: 2g - 2 = 2(2g' - 2) + r."""
    num = 2 * g + 2 - r
    if g < 0 or r < 0 or num % 4 or num < 0:
        raise InvalidInput(f"no quotient genus for g={g}, r={r}")
    return num // 4
