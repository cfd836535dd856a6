"""Local-global solubility of quadratic forms and of models y^2 = f(x)."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt, lcm

import numpy as np
import sympy

from .qmath import (
    determinant,
    diagonalize_symmetric,
    factor,
    is_square_in_qp,
    legendre,
    primes_up_to,
    squarefree_part,
    valuation,
)
from .zmod_gl2 import InvalidInput

INF = "inf"
DEFAULT_WITNESS_HEIGHT = 200


def hilbert_symbol(a, b, place) -> int:
    """(a, b)_v for nonzero rationals and v a prime or ``"inf"``."""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise InvalidInput("Hilbert symbol needs nonzero arguments")
    if place == INF:
        return -1 if a < 0 and b < 0 else 1
    p = int(place)
    # replace a rational by an integer in the same square class
    a_int = a.numerator * a.denominator
    b_int = b.numerator * b.denominator
    alpha, beta = valuation(a_int, p), valuation(b_int, p)
    u = a_int // p ** alpha
    v = b_int // p ** beta
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        omega = lambda t: ((t * t - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    e = (alpha * beta * ((p - 1) // 2)) % 2
    s = -1 if e else 1
    if beta % 2:
        s *= legendre(u, p)
    if alpha % 2:
        s *= legendre(v, p)
    return s


def relevant_places(values) -> list:
    """``inf``, 2 and every prime dividing a numerator or denominator."""
    primes = {2}
    for q in values:
        q = Fraction(q)
        primes.update(factor(q.numerator))
        primes.update(factor(q.denominator))
    return [INF] + sorted(primes)


def _check_form(gram, n: int) -> list:
    A = [[Fraction(x) for x in row] for row in gram]
    if len(A) != n or any(len(r) != n for r in A):
        raise InvalidInput(f"expected a {n}x{n} Gram matrix")
    if any(A[i][j] != A[j][i] for i in range(n) for j in range(n)):
        raise InvalidInput("Gram matrix is not symmetric")
    if determinant(A) == 0:
        raise InvalidInput("degenerate quadratic form")
    return A


@dataclass
class ConicVerdict:
    soluble: bool
    obstruction: object = None
    witness: tuple | None = None
    diagonal: tuple = ()
    places_checked: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.soluble


def conic_local_isotropic(diag, place) -> bool:
    a, b, c = diag
    return hilbert_symbol(-a * c, -b * c, place) == 1


def conic_verdict(gram, witness_height: int = DEFAULT_WITNESS_HEIGHT) -> ConicVerdict:
    """Hasse-Minkowski test for a ternary form, with a witness point if soluble."""
    A = _check_form(gram, 3)
    diag, _ = diagonalize_symmetric(A)
    places = relevant_places(diag)
    for v in places:
        if not conic_local_isotropic(diag, v):
            return ConicVerdict(False, v, None, tuple(diag), places)
    witness = conic_point_search(A, witness_height) if witness_height else None
    return ConicVerdict(True, None, witness, tuple(diag), places)


def conic_has_rational_point(gram) -> bool:
    return conic_verdict(gram, witness_height=0).soluble


def _integer_gram(A) -> np.ndarray:
    den = lcm(*[x.denominator for row in A for x in row])
    return np.array([[int(x * den) for x in row] for row in A], dtype=object)


def conic_point_search(gram, height: int) -> tuple | None:
    """Smallest-height integral zero with |x|,|y| <= height, solving for z.

    Returns a primitive integer triple or None.
    """
    A = [[Fraction(x) for x in row] for row in gram]
    for i in range(3):
        if A[i][i] == 0:
            return tuple(int(i == k) for k in range(3))
    if height <= 0:
        return None
    M = _integer_gram(A)
    a, b, c = int(M[0][0]), int(M[1][1]), int(M[2][2])
    d, e, f = int(M[0][1]), int(M[0][2]), int(M[1][2])
    # Q = a x^2 + b y^2 + c z^2 + 2d xy + 2e xz + 2f yz; solve c z^2 + 2(ex+fy) z + Q0 = 0
    r = np.arange(-height, height + 1, dtype=np.int64)
    X, Y = np.meshgrid(r, r, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    keep = (np.abs(X) + np.abs(Y)) > 0
    X, Y = X[keep], Y[keep]
    order = np.lexsort((Y, X, np.maximum(np.abs(X), np.abs(Y))))
    X, Y = X[order], Y[order]
    L = e * X.astype(object) + f * Y.astype(object)
    Q0 = a * X.astype(object) ** 2 + b * Y.astype(object) ** 2 + 2 * d * X.astype(object) * Y.astype(object)
    disc = L * L - c * Q0
    for i in np.nonzero(np.array([D >= 0 for D in disc]))[0]:
        D = int(disc[i])
        s = isqrt(D)
        if s * s != D:
            continue
        for sign in (1, -1):
            num = -int(L[i]) + sign * s
            z = Fraction(num, c)
            x, y = int(X[i]), int(Y[i])
            den = z.denominator
            pt = (x * den, y * den, z.numerator)
            g = 0
            for t in pt:
                g = gcd(g, t)
            pt = [int(t // g) for t in pt]
            if next(t for t in pt if t) < 0:
                pt = [-t for t in pt]
            return tuple(pt)
    return None


@dataclass
class QuaternaryVerdict:
    isotropic: bool
    obstruction: object = None
    diagonal: tuple = ()
    places_checked: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.isotropic


def quaternary_local_isotropic(diag, place) -> bool:
    d = Fraction(1)
    for x in diag:
        d *= x
    if not is_square_in_qp(d, place):
        return True
    eps = 1
    for i in range(4):
        for j in range(i + 1, 4):
            eps *= hilbert_symbol(diag[i], diag[j], place)
    return eps == hilbert_symbol(-1, -1, place)


def quaternary_verdict(gram) -> QuaternaryVerdict:
    A = _check_form(gram, 4)
    diag, _ = diagonalize_symmetric(A)
    places = relevant_places(diag)
    for v in places:
        if not quaternary_local_isotropic(diag, v):
            return QuaternaryVerdict(False, v, tuple(diag), places)
    return QuaternaryVerdict(True, None, tuple(diag), places)


def quaternary_isotropic(gram) -> bool:
    return quaternary_verdict(gram).isotropic


# --- y^2 = f(x) ------------------------------------------------------------

@dataclass
class LocalSolubility:
    soluble: bool
    obstruction: object = None
    places_checked: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.soluble


def _poly_eval(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _shift_scale(coeffs, z, p):
    """Coefficients of F(z + p t) in t."""
    n = len(coeffs)
    out = [0] * n
    # Horner in polynomial arithmetic: acc = acc * (z + p t) + c
    for c in reversed(coeffs):
        new = [0] * n
        for k, a in enumerate(out):
            if a:
                new[k] += a * z
                if k + 1 < n:
                    new[k + 1] += a * p
        new[0] += c
        out = new
    return out


def _content(coeffs) -> int:
    g = 0
    for c in coeffs:
        g = gcd(g, c)
    return int(g)


def _soluble_integral(coeffs, p: int, c: int, depth: int = 0) -> bool:
    """Is there x in Z_p (or a point at infinity of this chart) with c F(x) a square?

    ``coeffs`` is a binary form of formal degree len(coeffs)-1 (even).
    """
    if depth > 200:
        raise RuntimeError(f"p-adic lifting did not terminate at p={p}")
    lead = coeffs[-1]
    if lead == 0 or is_square_in_qp(c * lead, p):
        return True
    q = 8 if p == 2 else p
    for x in range(q):
        val = c * _poly_eval(coeffs, x)
        if is_square_in_qp(val, p):
            return True
    for z in range(p):
        if _poly_eval(coeffs, z) % p:
            continue
        G = _shift_scale(coeffs, z, p)
        g = _content(G)
        G = [a // g for a in G]
        c2 = squarefree_part(c * g)
        if _soluble_integral(G, p, c2, depth + 1):
            return True
    return False


def soluble_at_prime(coeffs, p: int) -> bool:
    """Q_p-points on the smooth model of y^2 = f(x), f of even formal degree."""
    f = list(coeffs)
    if (len(f) - 1) % 2:
        f.append(0)
    if _soluble_integral(f, p, 1):
        return True
    return _soluble_integral(f[::-1], p, 1)


def soluble_at_infinity(coeffs) -> bool:
    deg = len(coeffs) - 1
    if deg % 2 or coeffs[-1] > 0:
        return True
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x)
    return poly.count_roots() > 0


def _genus(deg: int) -> int:
    return max((deg - 1) // 2, 0)


def hyperelliptic_places(coeffs) -> list:
    """Places to test: inf, 2, primes dividing lc*disc(f), and small primes for genus >= 2."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x)
    disc = int(sympy.discriminant(poly)) if poly.degree() > 1 else 1
    primes = {2} | set(factor(disc)) | set(factor(coeffs[-1]))
    g = _genus(poly.degree())
    if g >= 2:
        primes |= set(primes_up_to(4 * g * g))
    return [INF] + sorted(primes)


def hyperelliptic_everywhere_locally_soluble(coeffs) -> LocalSolubility:
    """Everywhere-local solubility of y^2 = f(x); ``coeffs`` are constant term first."""
    coeffs = [int(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not 2 <= len(coeffs) <= 7:
        raise InvalidInput("need 1 <= deg f <= 6")
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x)
    if sympy.degree(sympy.gcd(poly, poly.diff(x)), x) > 0:
        raise InvalidInput("f is not squarefree")
    places = hyperelliptic_places(coeffs)
    if (len(coeffs) - 1) % 2:
        return LocalSolubility(True, None, places)
    for v in places:
        ok = soluble_at_infinity(coeffs) if v == INF else soluble_at_prime(coeffs, v)
        if not ok:
            return LocalSolubility(False, v, places)
    return LocalSolubility(True, None, places)
