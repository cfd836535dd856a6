"""Genus-one curves cut out by two quadrics in P^3.

Covers the determinant quartic of the pencil, its singular members (rank-3
cones) and their base conics, vertex-line degree-2 divisors, smooth members
with square discriminant and the Jacobian of a binary quartic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import numpy as np
import sympy

from .local import conic_verdict, quaternary_verdict
from .polys import CANONICAL_VARS, gram_matrix, parse_expression, quadratic_form_string
from .qmath import (
    determinant,
    is_rational_square,
    kernel,
    mat_add,
    mat_mul,
    mat_vec,
    primitive_vector,
    quad_eval,
    rank,
    squarefree_part,
    transpose,
)
from .zmod_gl2 import InvalidInput

DEFAULT_SEARCH_HEIGHT = 1000

_u, _v = sympy.symbols("u v")


class DegeneratePencil(InvalidInput):
    """det(u A1 + v A2) vanishes identically."""


class SingularQuartic(InvalidInput):
    """The binary quartic has a repeated root."""


@dataclass(frozen=True)
class SymQuadric:
    gram: tuple

    @classmethod
    def from_matrix(cls, rows) -> "SymQuadric":
        A = tuple(tuple(Fraction(x) for x in r) for r in rows)
        if len(A) != 4 or any(len(r) != 4 for r in A):
            raise InvalidInput("a quadric in P^3 needs a 4x4 Gram matrix")
        if any(A[i][j] != A[j][i] for i in range(4) for j in range(4)):
            raise InvalidInput("Gram matrix is not symmetric")
        return cls(A)

    @classmethod
    def from_string(cls, text: str) -> "SymQuadric":
        return cls.from_matrix(gram_matrix(parse_expression(text), CANONICAL_VARS))

    @property
    def matrix(self) -> list:
        return [list(r) for r in self.gram]

    def __call__(self, X) -> Fraction:
        return quad_eval(self.matrix, [Fraction(x) for x in X])

    def bilinear(self, X, Y) -> Fraction:
        return sum((Fraction(x) * y for x, y in zip(X, mat_vec(self.matrix, Y))), Fraction(0))

    def combine(self, u, v, other: "SymQuadric") -> "SymQuadric":
        return SymQuadric.from_matrix(mat_add(self.matrix, other.matrix, Fraction(u), Fraction(v)))

    def __str__(self) -> str:
        return quadratic_form_string(self.matrix)


@dataclass(frozen=True)
class BinaryQuartic:
    """a u^4 + b u^3 v + c u^2 v^2 + d u v^3 + e v^4."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    e: Fraction

    @property
    def coefficients(self) -> tuple:
        return (self.a, self.b, self.c, self.d, self.e)

    @property
    def I(self) -> Fraction:
        a, b, c, d, e = self.coefficients
        return 12 * a * e - 3 * b * d + c * c

    @property
    def J(self) -> Fraction:
        a, b, c, d, e = self.coefficients
        return 72 * a * c * e - 27 * a * d * d - 27 * e * b * b + 9 * b * c * d - 2 * c ** 3

    @property
    def discriminant(self) -> Fraction:
        return (4 * self.I ** 3 - self.J ** 2) / 27

    def __call__(self, u, v):
        a, b, c, d, e = self.coefficients
        return a * u ** 4 + b * u ** 3 * v + c * u * u * v * v + d * u * v ** 3 + e * v ** 4

    def as_expr(self):
        return sum(sympy.Rational(x.numerator, x.denominator) * _u ** (4 - i) * _v ** i
                   for i, x in enumerate(self.coefficients))

    def dehomogenized(self, variable: str = "t", at: str = "u") -> str:
        """The quartic as a polynomial in t = v/u (``at='u'``) or t = u/v."""
        t = sympy.Symbol(variable)
        sub = {_u: 1, _v: t} if at == "u" else {_u: t, _v: 1}
        return str(sympy.factor(self.as_expr().subs(sub)))

    def transform(self, M) -> "BinaryQuartic":
        """f(alpha u + beta v, gamma u + delta v) for M = [[alpha, beta], [gamma, delta]]."""
        (al, be), (ga, de) = M
        expr = sympy.expand(self.as_expr().subs({_u: al * _u + be * _v, _v: ga * _u + de * _v},
                                                simultaneous=True))
        return quartic_from_expr(expr)

    def scaled(self, lam) -> "BinaryQuartic":
        lam = Fraction(lam)
        return BinaryQuartic(*(lam * x for x in self.coefficients))

    def __str__(self) -> str:
        return str(sympy.factor(self.as_expr())).replace("**", "^")


def quartic_from_expr(expr) -> BinaryQuartic:
    poly = sympy.Poly(sympy.expand(expr), _u, _v)
    coeffs = []
    for i in range(5):
        c = poly.coeff_monomial(_u ** (4 - i) * _v ** i)
        coeffs.append(Fraction(int(sympy.numer(c)), int(sympy.denom(c))))
    return BinaryQuartic(*coeffs)


@dataclass(frozen=True)
class PencilCurve:
    q1: SymQuadric
    q2: SymQuadric

    @classmethod
    def from_strings(cls, s1: str, s2: str) -> "PencilCurve":
        return cls(SymQuadric.from_string(s1), SymQuadric.from_string(s2))

    @classmethod
    def from_line(cls, line: str) -> "PencilCurve":
        parts = [p for p in line.split(";") if p.strip()]
        if len(parts) != 2:
            raise InvalidInput("expected two quadrics separated by ';'")
        return cls.from_strings(*parts)

    def member(self, u, v) -> SymQuadric:
        return self.q1.combine(u, v, self.q2)

    def contains(self, X) -> bool:
        return self.q1(X) == 0 and self.q2(X) == 0


def pencil_quartic(C: PencilCurve) -> BinaryQuartic:
    """det(u A1 + v A2) expanded exactly."""
    M = sympy.Matrix(4, 4, lambda i, j: sympy.Rational(str(C.q1.gram[i][j])) * _u
                     + sympy.Rational(str(C.q2.gram[i][j])) * _v)
    f = quartic_from_expr(M.det(method="berkowitz"))
    if all(x == 0 for x in f.coefficients):
        raise DegeneratePencil("det(u A1 + v A2) is identically zero")
    return f


def is_smooth(f: BinaryQuartic) -> bool:
    return f.discriminant != 0


# --- singular members ---------------------------------------------------------

@dataclass
class ConeData:
    parameter: tuple
    rank: int
    vertex: tuple | None = None
    base_plane: tuple | None = None
    base_conic: list | None = None
    conic_variables: tuple = ()

    @property
    def conic_string(self) -> str:
        if self.base_conic is None:
            return ""
        return quadratic_form_string(self.base_conic, self.conic_variables)

    def plane_basis(self) -> list:
        return _plane_basis(self.base_plane)


@dataclass
class IrrationalMembers:
    factor: str
    degree: int
    field_discriminant: int | None
    roots: list = field(default_factory=list)
    roots_v_over_u: list = field(default_factory=list)


@dataclass
class SingularMembers:
    rational: list
    irrational: list
    multiplicity_total: int


def _plane_candidates():
    for k in (3, 2, 1, 0):
        yield tuple(int(i == k) for i in range(4))
    for coeffs in itertools.product((-1, 0, 1), repeat=4):
        nz = [c for c in coeffs if c]
        if len(nz) >= 2 and nz[0] == 1:
            yield coeffs


def _plane_basis(plane) -> list:
    """Basis of {L . X = 0}; for a coordinate plane, the other unit vectors."""
    if sum(1 for c in plane if c) == 1:
        k = next(i for i, c in enumerate(plane) if c)
        return [[Fraction(int(i == j)) for i in range(4)] for j in range(4) if j != k]
    return kernel([[Fraction(c) for c in plane]])


def _plane_variables(plane) -> tuple:
    if sum(1 for c in plane if c) == 1:
        k = next(i for i, c in enumerate(plane) if c)
        return tuple(v for i, v in enumerate(CANONICAL_VARS) if i != k)
    return ("r", "s", "t")


def restrict_to_plane(Q: SymQuadric, plane) -> list:
    B = transpose(_plane_basis(plane))
    return mat_mul(mat_mul(transpose(B), Q.matrix), B)


def cone_data(C: PencilCurve, u, v) -> ConeData:
    Q = C.member(u, v)
    r = rank(Q.matrix)
    cone = ConeData((int(u), int(v)), r)
    if r != 3:
        return cone
    V = kernel(Q.matrix)[0]
    cone.vertex = tuple(int(x) for x in V)
    for plane in _plane_candidates():
        if sum(Fraction(a) * x for a, x in zip(plane, V)) != 0:
            cone.base_plane = plane
            break
    if cone.base_plane is None:  # pragma: no cover - the search always finds a plane
        raise InvalidInput("no base plane misses the vertex")
    cone.base_conic = restrict_to_plane(Q, cone.base_plane)
    cone.conic_variables = _plane_variables(cone.base_plane)
    return cone


def _linear_root(coeffs) -> tuple:
    """Projective root [u:v] of alpha u + beta v as coprime integers."""
    al, be = coeffs
    vec = primitive_vector([Fraction(be), Fraction(-al)])
    if vec[1] < 0 or (vec[1] == 0 and vec[0] < 0):
        vec = [-x for x in vec]
    return tuple(int(x) for x in vec)


def singular_members(C: PencilCurve) -> SingularMembers:
    f = pencil_quartic(C)
    if not is_smooth(f):
        raise SingularQuartic(f"quartic {f} has a repeated root")
    _, factors = sympy.factor_list(f.as_expr(), _u, _v)
    rational, irrational = [], []
    total = 0
    for fac, mult in factors:
        p = sympy.Poly(fac, _u, _v)
        deg = p.total_degree()
        total += deg * mult
        if deg == 1:
            al = p.coeff_monomial(_u)
            be = p.coeff_monomial(_v)
            u, v = _linear_root((Fraction(str(al)), Fraction(str(be))))
            rational.append(cone_data(C, u, v))
        else:
            disc = None
            roots, inv_roots = [], []
            if deg == 2:
                A = Fraction(str(p.coeff_monomial(_u ** 2)))
                B = Fraction(str(p.coeff_monomial(_u * _v)))
                Cc = Fraction(str(p.coeff_monomial(_v ** 2)))
                disc = squarefree_part(B * B - 4 * A * Cc)
                t = sympy.Symbol("t")
                roots = [str(sympy.radsimp(r)) for r in sympy.solve(fac.subs({_u: t, _v: 1}), t)]
                inv_roots = [str(sympy.radsimp(r)) for r in sympy.solve(fac.subs({_u: 1, _v: t}), t)]
            irrational.append(IrrationalMembers(str(fac).replace("**", "^"), deg, disc,
                                                sorted(roots), sorted(inv_roots)))
    rational.sort(key=lambda c: (c.parameter[0] * 1.0 / c.parameter[1]) if c.parameter[1] else float("inf"))
    return SingularMembers(rational, irrational, total)


def base_conics(C: PencilCurve) -> list:
    return [c for c in singular_members(C).rational if c.base_conic is not None]


# --- vertex-line divisors -----------------------------------------------------

class NoRationalRuling(Exception):
    """The base conic has no rational point."""

    def __init__(self, cone: ConeData, obstruction):
        super().__init__(f"base conic {cone.conic_string} is insoluble at {obstruction}")
        self.cone = cone
        self.obstruction = obstruction


@dataclass
class QuadraticPointDivisor:
    vertex: tuple
    base_point: tuple
    binary_form: tuple
    field_discriminant: int
    rational_part: tuple
    sqrt_coefficient: tuple
    rational_points: list = field(default_factory=list)

    @property
    def gives_degree2_divisor(self) -> bool:
        return True

    def point_string(self) -> str:
        if self.field_discriminant == 1:
            return " + ".join("[" + ":".join(str(x) for x in P) + "]" for P in self.rational_points)
        d = self.field_discriminant
        parts = []
        for r, s in zip(self.rational_part, self.sqrt_coefficient):
            if s == 0:
                parts.append(str(r))
            elif r == 0:
                parts.append(f"{_coef(s)}√{d}")
            else:
                parts.append(f"{r}{'+' if s > 0 else '-'}{_coef(abs(s))}√{d}")
        return "[" + ":".join(parts) + "]"


def _coef(s) -> str:
    if s == 1:
        return ""
    if s == -1:
        return "-"
    return str(s)


def base_point_from_conic(cone: ConeData, height: int = 200):
    verdict = conic_verdict(cone.base_conic, witness_height=height)
    if not verdict.soluble:
        raise NoRationalRuling(cone, verdict.obstruction)
    if verdict.witness is None:
        return None
    basis = cone.plane_basis()
    P = [sum(Fraction(c) * b[i] for c, b in zip(verdict.witness, basis)) for i in range(4)]
    return tuple(int(x) for x in primitive_vector(P))


def vertex_line_divisor(cone: ConeData, other: SymQuadric, base_point=None,
                        witness_height: int = 200) -> QuadraticPointDivisor:
    """Intersect the line through the vertex and a base-conic point with ``other``."""
    if cone.vertex is None:
        raise InvalidInput("cone has no vertex (rank is not 3)")
    if base_point is None:
        base_point = base_point_from_conic(cone, witness_height)
        if base_point is None:
            raise NoRationalRuling(cone, "search")
    V = [Fraction(x) for x in cone.vertex]
    B = [Fraction(x) for x in base_point]
    if primitive_vector(B) == primitive_vector(V):
        raise InvalidInput("base point equals the vertex")
    alpha = other(V)
    beta = 2 * other.bilinear(V, B)
    gamma = other(B)
    if gamma == 0 and alpha == 0:
        raise InvalidInput("the line lies on both quadrics")
    if gamma == 0:
        # B lies on the curve; alpha s + beta t = 0 gives the residual point
        pts = [tuple(int(x) for x in primitive_vector(B)),
               tuple(int(x) for x in primitive_vector([beta * v - alpha * b for v, b in zip(V, B)]))]
        return QuadraticPointDivisor(cone.vertex, tuple(base_point), (alpha, beta, gamma), 1,
                                     (), (), sorted(pts))
    D = beta * beta - 4 * alpha * gamma
    if D == 0:
        x = -beta / (2 * gamma)
        P = primitive_vector([v + x * b for v, b in zip(V, B)])
        pt = tuple(int(c) for c in P)
        return QuadraticPointDivisor(cone.vertex, tuple(base_point), (alpha, beta, gamma), 1,
                                     (), (), [pt, pt])
    d = squarefree_part(D)
    k = _rational_sqrt_ratio(D, d)
    # point V + x B with x = -beta/(2 gamma) +- (k/(2 gamma)) sqrt(d)
    r0 = -beta / (2 * gamma)
    s0 = k / (2 * gamma)
    rat = [v + r0 * b for v, b in zip(V, B)]
    irr = [s0 * b for b in B]
    if d == 1:
        pts = []
        for sign in (1, -1):
            P = primitive_vector([r + sign * s for r, s in zip(rat, irr)])
            pts.append(tuple(int(c) for c in P))
        return QuadraticPointDivisor(cone.vertex, tuple(base_point), (alpha, beta, gamma), 1,
                                     (), (), sorted(pts))
    rat, irr = _normalize_quadratic_point(rat, irr)
    return QuadraticPointDivisor(cone.vertex, tuple(base_point), (alpha, beta, gamma), d,
                                 tuple(rat), tuple(irr))


def _rational_sqrt_ratio(D: Fraction, d: int) -> Fraction:
    q = Fraction(D) / d
    if not is_rational_square(q):  # pragma: no cover - squarefree_part guarantees this
        raise AssertionError("bad squarefree decomposition")
    return Fraction(isqrt(q.numerator), isqrt(q.denominator))


def _normalize_quadratic_point(rat, irr):
    """Scale to integers with content 1; sign chosen so the leading entry is positive."""
    vals = list(rat) + list(irr)
    den = 1
    for x in vals:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in vals]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    rat, irr = ints[:4], ints[4:]
    lead = next((x for x in rat if x), None)
    if lead is not None and lead < 0:
        rat, irr = [-x for x in rat], [-x for x in irr]
    if next((x for x in irr if x), 0) < 0:  # pick the conjugate with positive sqrt part
        irr = [-x for x in irr]
    return rat, irr


# --- square-discriminant members -----------------------------------------------

@dataclass
class SquareDiscMember:
    u: int
    v: int
    y: int
    smooth: bool

    @property
    def point(self) -> tuple:
        return (self.u, self.y, self.v)


@dataclass
class SquareDiscSearch:
    model_scale: int
    height: int
    members: list


def _integral_model(f: BinaryQuartic) -> tuple[list, int]:
    """Smallest square s^2 with s^2 f integral; returns the integer coefficients and s."""
    den = 1
    for x in f.coefficients:
        den = den * x.denominator // gcd(den, x.denominator)
    s = 1
    for p, e in sympy.factorint(den).items():
        s *= p ** ((e + 1) // 2)
    return [int(x * s * s) for x in f.coefficients], s


def square_disc_members(C: PencilCurve, height: int = DEFAULT_SEARCH_HEIGHT) -> SquareDiscSearch:
    """Rational [u:v] with det(uA1+vA2) a rational square, |u|,|v| <= height.

    Points are reported on y^2 = s^2 * det(uA1+vA2), the smallest integral rescaling.
    """
    f = pencil_quartic(C)
    coeffs, s = _integral_model(f)
    found = _square_values(coeffs, height)
    members = [SquareDiscMember(u, v, y, y != 0) for u, v, y in found]
    return SquareDiscSearch(s * s, height, members)


_SIEVE_MODULI = (64, 63, 65, 11)


def _square_values(coeffs, height: int) -> list:
    squares = {m: np.zeros(m, dtype=bool) for m in _SIEVE_MODULI}
    for m, tab in squares.items():
        tab[(np.arange(m) ** 2) % m] = True
    out = []
    a, b, c, d, e = coeffs
    us = np.arange(-height, height + 1, dtype=np.int64)
    for v in range(0, height + 1):
        if v == 0:
            cand = [1]
        else:
            cand = us[np.gcd(us, v) == 1]
            for m, tab in squares.items():
                uu, vv = cand % m, v % m
                val = (a % m * uu ** 4 + b % m * uu ** 3 * vv + c % m * uu ** 2 * vv * vv
                       + d % m * uu * vv ** 3 + e % m * vv ** 4) % m
                cand = cand[tab[val]]
            cand = cand.tolist()
        for u in cand:
            val = a * u ** 4 + b * u ** 3 * v + c * u * u * v * v + d * u * v ** 3 + e * v ** 4
            if val < 0:
                continue
            y = isqrt(val)
            if y * y != val:
                continue
            out.append((u, v, y))
            if y:
                out.append((u, v, -y))
    out.sort(key=lambda t: (max(abs(t[0]), t[1]), t[1], t[0], t[2]))
    return out


def ruling_has_rational_line(Q: SymQuadric):
    """Whether a smooth quadric surface with square discriminant contains a rational line."""
    A = Q.matrix
    det = determinant(A)
    if det == 0:
        raise InvalidInput("quadric is singular")
    if not is_rational_square(det):
        raise InvalidInput(f"discriminant {det} is not a square; rulings are conjugate")
    return quaternary_verdict(A)


# --- Jacobian ---------------------------------------------------------------

@dataclass(frozen=True)
class WeierstrassModel:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6."""

    a1: Fraction = Fraction(0)
    a2: Fraction = Fraction(0)
    a3: Fraction = Fraction(0)
    a4: Fraction = Fraction(0)
    a6: Fraction = Fraction(0)

    @classmethod
    def from_ainvs(cls, ainvs) -> "WeierstrassModel":
        return cls(*(Fraction(x) for x in ainvs))

    @property
    def ainvs(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c4(self) -> Fraction:
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self) -> Fraction:
        b2, b4, b6, _ = self.b_invariants
        return -b2 ** 3 + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self) -> Fraction:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self) -> Fraction:
        if self.discriminant == 0:
            raise InvalidInput("singular Weierstrass model")
        return self.c4 ** 3 / self.discriminant

    def __str__(self) -> str:
        x, y = sympy.symbols("x y")
        a1, a2, a3, a4, a6 = (sympy.Rational(q.numerator, q.denominator) for q in self.ainvs)
        lhs = y ** 2 + a1 * x * y + a3 * y
        rhs = x ** 3 + a2 * x ** 2 + a4 * x + a6
        return f"{lhs} = {rhs}".replace("**", "^")


def jacobian_from_quartic(f: BinaryQuartic) -> WeierstrassModel:
    """y^2 = x^3 - 27 I x - 27 J."""
    if f.discriminant == 0:
        raise SingularQuartic("quartic has a repeated root")
    return WeierstrassModel(a4=-27 * f.I, a6=-27 * f.J)
