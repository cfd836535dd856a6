"""Exact rational linear algebra and small number-theory helpers."""
from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt, lcm
from typing import Sequence

from sympy import factorint

Matrix = list  # list of rows of Fractions


def as_fraction_matrix(rows) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def mat_identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def mat_add(A: Matrix, B: Matrix, s=1, t=1) -> Matrix:
    return [[s * a + t * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    cols = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols] for row in A]


def transpose(A: Matrix) -> Matrix:
    return [list(r) for r in zip(*A)]


def mat_vec(A: Matrix, v: Sequence) -> list:
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A]


def quad_eval(A: Matrix, v: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(v, mat_vec(A, v))), Fraction(0))


def determinant(A: Matrix) -> Fraction:
    M = [list(map(Fraction, r)) for r in A]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return det


def row_reduce(A: Matrix) -> tuple[Matrix, list]:
    M = [list(map(Fraction, r)) for r in A]
    rows = len(M)
    cols = len(M[0]) if M else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, pivots


def rank(A: Matrix) -> int:
    return len(row_reduce(A)[1])


def kernel(A: Matrix) -> list[list[Fraction]]:
    """Basis of the right kernel, each vector scaled to coprime integers."""
    R, pivots = row_reduce(A)
    n = len(A[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -R[i][f]
        basis.append(primitive_vector(v))
    return basis


def primitive_vector(v: Sequence) -> list:
    """Scale a rational vector to coprime integers with first nonzero entry positive."""
    den = lcm(*[Fraction(x).denominator for x in v]) if v else 1
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return [Fraction(0)] * len(v)
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    if lead < 0:
        ints = [-x for x in ints]
    return [Fraction(x) for x in ints]


def _height(q: Fraction) -> int:
    return max(abs(q.numerator), q.denominator)


def diagonalize_symmetric(A: Matrix) -> tuple[list, Matrix]:
    """Congruence-diagonalize a symmetric rational matrix.

    Returns ``(diag, P)`` with ``P^T A P = diag(diag)``.  Pivots are chosen
    among nonzero diagonal entries of minimal height.
    """
    n = len(A)
    M = [list(map(Fraction, r)) for r in A]
    P = mat_identity(n)

    def swap(i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]
        M[i], M[j] = M[j], M[i]
        for row in P:
            row[i], row[j] = row[j], row[i]

    def add_col(src, dst, f):
        # basis change e_dst += f * e_src
        for row in M:
            row[dst] += f * row[src]
        for k in range(n):
            M[dst][k] += f * M[src][k]
        for row in P:
            row[dst] += f * row[src]

    diag = []
    for k in range(n):
        cands = [i for i in range(k, n) if M[i][i] != 0]
        if not cands:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if M[i][j] != 0), None)
            if pair is None:
                diag.extend([Fraction(0)] * (n - k))
                break
            i, j = pair
            add_col(j, i, Fraction(1))
            cands = [i]
        best = min(cands, key=lambda i: (_height(M[i][i]), i))
        if best != k:
            swap(k, best)
        pv = M[k][k]
        for j in range(k + 1, n):
            if M[k][j] != 0:
                add_col(k, j, -M[k][j] / pv)
        diag.append(M[k][k])
    return diag, P


# --- number theory ---------------------------------------------------------

def factor(n: int) -> dict:
    n = abs(int(n))
    if n <= 1:
        return {}
    return dict(factorint(n))


def prime_divisors(n: int) -> list[int]:
    return sorted(factor(n))


def valuation(q, p: int) -> int:
    q = Fraction(q)
    if q == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def unit_part(q, p: int) -> Fraction:
    q = Fraction(q)
    return q / Fraction(p) ** valuation(q, p)


def squarefree_part(q) -> int:
    """The squarefree integer d with q = d * r^2, r rational."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("squarefree part of zero")
    n = q.numerator * q.denominator
    sign = -1 if n < 0 else 1
    d = 1
    for p, e in factor(n).items():
        if e % 2:
            d *= p
    return sign * d


def is_rational_square(q) -> bool:
    q = Fraction(q)
    if q < 0:
        return False
    return isqrt(q.numerator) ** 2 == q.numerator and isqrt(q.denominator) ** 2 == q.denominator


def rational_sqrt(q) -> Fraction:
    q = Fraction(q)
    if not is_rational_square(q):
        raise ValueError(f"{q} is not a square")
    return Fraction(isqrt(q.numerator), isqrt(q.denominator))


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def is_square_in_qp(q, p) -> bool:
    """Is the rational q a square in Q_p (p a prime, or the string 'inf')."""
    q = Fraction(q)
    if q == 0:
        return True
    if p == "inf":
        return q > 0
    if valuation(q, p) % 2:
        return False
    u = unit_part(q, p)
    num = u.numerator * u.denominator  # same square class as u
    if p == 2:
        return num % 8 == 1
    return legendre(num, p) == 1


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return [i for i in range(n + 1) if sieve[i]]


def is_prime(n: int) -> bool:
    return n >= 2 and factor(n) == {n: 1}
