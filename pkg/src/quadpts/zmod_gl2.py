"""2x2 matrices over Z/N and finitely generated subgroups of GL2(Z/N).

Matrices are handled internally as row-major 4-tuples ``(a, b, c, d)`` with
entries reduced to ``[0, N)``.  Subgroups are stored as explicit element sets,
which keeps level, determinant and ``-I`` checks trivial for the moduli used
here (N <= 32 or so).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

import numpy as np

MAX_SUBGROUP_ORDER = 10**6

Mat = tuple  # (a, b, c, d)


class InvalidInput(ValueError):
    """Raised when an input violates an operation's precondition."""


def prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def is_prime_power(n: int) -> bool:
    return n > 1 and len(prime_factors(n)) == 1


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def mat_mul(x: Mat, y: Mat, n: int) -> Mat:
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % n, (a * f + b * h) % n,
            (c * e + d * g) % n, (c * f + d * h) % n)


def mat_det(x: Mat, n: int) -> int:
    return (x[0] * x[3] - x[1] * x[2]) % n


def mat_inv(x: Mat, n: int) -> Mat:
    a, b, c, d = x
    dinv = pow((a * d - b * c) % n, -1, n) if n > 1 else 0
    return ((d * dinv) % n, (-b * dinv) % n, (-c * dinv) % n, (a * dinv) % n)


def mat_reduce(x: Mat, m: int) -> Mat:
    return tuple(v % m for v in x)


def identity(n: int) -> Mat:
    return (1 % n, 0, 0, 1 % n)


def minus_identity(n: int) -> Mat:
    return ((-1) % n, 0, 0, (-1) % n)


def mat_order(x: Mat, n: int) -> int:
    one = identity(n)
    k, y = 1, x
    while y != one:
        y = mat_mul(y, x, n)
        k += 1
    return k


@dataclass(frozen=True, order=True)
class ZmodMatrix:
    modulus: int
    entries: tuple

    def __post_init__(self):
        if self.modulus < 1:
            raise InvalidInput("modulus must be positive")
        if len(self.entries) != 4:
            raise InvalidInput("a 2x2 matrix has four entries")
        object.__setattr__(self, "entries",
                           tuple(int(v) % self.modulus for v in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], modulus: int) -> "ZmodMatrix":
        (a, b), (c, d) = rows
        return cls(modulus, (a, b, c, d))

    def det(self) -> int:
        return mat_det(self.entries, self.modulus)

    def is_unit(self) -> bool:
        return gcd(self.det(), self.modulus) == 1

    def __matmul__(self, other: "ZmodMatrix") -> "ZmodMatrix":
        if other.modulus != self.modulus:
            raise InvalidInput("modulus mismatch")
        return ZmodMatrix(self.modulus, mat_mul(self.entries, other.entries, self.modulus))

    def inverse(self) -> "ZmodMatrix":
        if not self.is_unit():
            raise InvalidInput(f"{self} is not invertible")
        return ZmodMatrix(self.modulus, mat_inv(self.entries, self.modulus))

    def reduce(self, m: int) -> "ZmodMatrix":
        if self.modulus % m:
            raise InvalidInput(f"{m} does not divide {self.modulus}")
        return ZmodMatrix(m, self.entries)

    def rows(self) -> list[list[int]]:
        a, b, c, d = self.entries
        return [[a, b], [c, d]]

    def __str__(self):
        a, b, c, d = self.entries
        return f"[[{a},{b}],[{c},{d}]]"


def _as_tuple(g, n: int) -> Mat:
    if isinstance(g, ZmodMatrix):
        if g.modulus != n:
            raise InvalidInput("generator modulus mismatch")
        return g.entries
    if len(g) == 2:
        (a, b), (c, d) = g
        g = (a, b, c, d)
    return tuple(int(v) % n for v in g)


def group_order(n: int) -> int:
    """|GL2(Z/n)| = n^4 prod_{p | n} (1 - 1/p)(1 - 1/p^2)."""
    if n < 1:
        raise InvalidInput("modulus must be positive")
    out = n**4
    for p in prime_factors(n):
        out = out * (p - 1) * (p * p - 1) // p**3
    return out


def sl2_order(n: int) -> int:
    out = n**3
    for p in prime_factors(n):
        out = out * (p * p - 1) // p**2
    return out


def _unit_mask(n: int, dets: np.ndarray) -> np.ndarray:
    mask = np.ones(dets.shape, dtype=bool)
    for p in prime_factors(n):
        mask &= dets % p != 0
    return mask


@lru_cache(maxsize=16)
def gl2_elements(n: int) -> tuple:
    """All elements of GL2(Z/n), sorted."""
    if n == 1:
        return ((0, 0, 0, 0),)
    r = np.arange(n, dtype=np.int64)
    a, b, c, d = (x.ravel() for x in np.meshgrid(r, r, r, r, indexing="ij"))
    dets = (a * d - b * c) % n
    keep = _unit_mask(n, dets)
    rows = np.stack([a[keep], b[keep], c[keep], d[keep]], axis=1)
    return tuple(map(tuple, rows.tolist()))


@lru_cache(maxsize=16)
def sl2_elements(n: int) -> tuple:
    if n == 1:
        return ((0, 0, 0, 0),)
    return tuple(g for g in gl2_elements(n) if mat_det(g, n) == 1)


def closure(gens: Iterable[Mat], n: int, limit: int = MAX_SUBGROUP_ORDER) -> frozenset:
    """Elements of the subgroup generated by ``gens`` (breadth-first)."""
    gens = [tuple(g) for g in gens]
    one = identity(n)
    elems = {one}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = mat_mul(x, g, n)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        if len(elems) > limit:
            raise InvalidInput(f"subgroup order exceeds guard {limit}")
        frontier = nxt
    return frozenset(elems)


def _small_generating_set(elements: frozenset, n: int) -> tuple:
    gens: list = []
    cur = frozenset([identity(n)])
    for x in sorted(elements):
        if x not in cur:
            gens.append(x)
            cur = closure(gens, n)
            if len(cur) == len(elements):
                break
    return tuple(gens)


def _reduced_set(elements: Iterable[Mat], m: int) -> frozenset:
    return frozenset(tuple(v % m for v in x) for x in elements)


@dataclass(frozen=True, eq=False)
class Subgroup:
    """A subgroup of GL2(Z/N) stored as an explicit element set."""

    modulus: int
    generators: tuple
    elements: frozenset = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def level(self) -> int:
        return gl2_level(self)

    @property
    def det_image(self) -> frozenset:
        n = self.modulus
        return frozenset(mat_det(x, n) for x in self.elements)

    @property
    def has_minus_I(self) -> bool:
        return minus_identity(self.modulus) in self.elements

    def sorted_elements(self) -> tuple:
        return tuple(sorted(self.elements))

    def __contains__(self, g) -> bool:
        return _as_tuple(g, self.modulus) in self.elements

    def __eq__(self, other):
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.modulus == other.modulus and self.elements == other.elements

    def __hash__(self):
        return hash((self.modulus, self.elements))

    def generator_matrices(self) -> list[ZmodMatrix]:
        return [ZmodMatrix(self.modulus, g) for g in self.generators]

    def to_line(self) -> str:
        return format_subgroup_line(self)


def close_subgroup(gens, modulus: int) -> Subgroup:
    """Subgroup of GL2(Z/modulus) generated by ``gens``.

    Generators may be ZmodMatrix objects, 4-tuples or nested 2x2 lists.
    """
    n = modulus
    if n < 1:
        raise InvalidInput("modulus must be positive")
    tgens = [_as_tuple(g, n) for g in gens]
    for g in tgens:
        if gcd(mat_det(g, n), n) != 1:
            raise InvalidInput(f"generator {g} is not invertible mod {n}")
    elems = closure(tgens, n)
    return Subgroup(n, tuple(tgens), elems)


def subgroup_from_elements(elements: Iterable[Mat], modulus: int) -> Subgroup:
    elems = frozenset(elements)
    return Subgroup(modulus, _small_generating_set(elems, modulus), elems)


def full_group(n: int) -> Subgroup:
    return subgroup_from_elements(gl2_elements(n), n)


def reduction(H: Subgroup, m: int) -> Subgroup:
    if H.modulus % m:
        raise InvalidInput(f"{m} does not divide {H.modulus}")
    elems = _reduced_set(H.elements, m)
    gens = tuple(sorted({tuple(v % m for v in g) for g in H.generators}))
    return Subgroup(m, gens, elems)


def full_preimage(Hm: Subgroup, n: int) -> Subgroup:
    """All elements of GL2(Z/n) whose reduction mod Hm.modulus lies in Hm."""
    m = Hm.modulus
    if n % m:
        raise InvalidInput(f"{m} does not divide {n}")
    k = n // m
    lifts = []
    steps = [i * m for i in range(k)]
    for a, b, c, d in Hm.elements:
        for i in steps:
            for j in steps:
                for s in steps:
                    for t in steps:
                        g = (a + i, b + j, c + s, d + t)
                        if gcd(mat_det(g, n), n) == 1:
                            lifts.append(g)
    return subgroup_from_elements(lifts, n)


def _is_full_preimage(elements: frozenset, n: int, m: int, kernel: int) -> bool:
    return len(elements) == len(_reduced_set(elements, m)) * kernel


def gl2_level(H: Subgroup) -> int:
    """Smallest m | N such that H is the full preimage of H mod m."""
    n = H.modulus
    for m in divisors(n):
        if _is_full_preimage(H.elements, n, m, group_order(n) // group_order(m)):
            return m
    return n


def index_in_gl2(H: Subgroup) -> int:
    return group_order(H.modulus) // H.order


def admissible(H: Subgroup) -> bool:
    n = H.modulus
    units = {u for u in range(n) if gcd(u, n) == 1} if n > 1 else {0}
    return H.has_minus_I and H.det_image == frozenset(units)


@dataclass(frozen=True, eq=False)
class SL2Part:
    """A subgroup of SL2(Z/M) (the finite-level data of a congruence subgroup)."""

    modulus: int
    generators: tuple
    elements: frozenset = field(repr=False)

    def __post_init__(self):
        n = self.modulus
        for x in self.generators:
            if mat_det(x, n) != 1 % n:
                raise InvalidInput(f"{x} does not have determinant 1")

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def has_minus_I(self) -> bool:
        return minus_identity(self.modulus) in self.elements

    def __eq__(self, other):
        if not isinstance(other, SL2Part):
            return NotImplemented
        return self.modulus == other.modulus and self.elements == other.elements

    def __hash__(self):
        return hash((self.modulus, self.elements))

    @property
    def level(self) -> int:
        return sl2_level(self)

    def with_minus_I(self) -> "SL2Part":
        if self.has_minus_I:
            return self
        gens = self.generators + (minus_identity(self.modulus),)
        return SL2Part(self.modulus, gens, closure(gens, self.modulus))

    def reduce(self, m: int) -> "SL2Part":
        if self.modulus % m:
            raise InvalidInput(f"{m} does not divide {self.modulus}")
        elems = _reduced_set(self.elements, m)
        return SL2Part(m, _small_generating_set(elems, m), elems)

    def at_level(self) -> "SL2Part":
        return self.reduce(self.level)

    def index(self) -> int:
        return sl2_order(self.modulus) // self.order


def sl2_from_generators(gens, modulus: int) -> SL2Part:
    tgens = tuple(_as_tuple(g, modulus) for g in gens)
    return SL2Part(modulus, tgens, closure(tgens, modulus))


def sl2_level(G: SL2Part) -> int:
    n = G.modulus
    for m in divisors(n):
        if _is_full_preimage(G.elements, n, m, sl2_order(n) // sl2_order(m)):
            return m
    return n


def sl2_part(H: Subgroup) -> SL2Part:
    """H intersected with SL2(Z/N)."""
    n = H.modulus
    one = 1 % n
    elems = frozenset(x for x in H.elements if mat_det(x, n) == one)
    return SL2Part(n, _small_generating_set(elems, n), elems)


def _conjugate_gens(gens, g: Mat, n: int) -> list:
    gi = mat_inv(g, n)
    return [mat_mul(mat_mul(g, x, n), gi, n) for x in gens]


def conjugate(H: Subgroup, g) -> Subgroup:
    n = H.modulus
    g = _as_tuple(g, n)
    gi = mat_inv(g, n)
    elems = frozenset(mat_mul(mat_mul(g, x, n), gi, n) for x in H.elements)
    return Subgroup(n, tuple(_conjugate_gens(H.generators, g, n)), elems)


def class_signature(elements: Iterable[Mat], n: int) -> tuple:
    """Conjugation-invariant fingerprint: multiset of (det, trace, order)."""
    counts: dict = {}
    for x in elements:
        key = (mat_det(x, n), (x[0] + x[3]) % n, mat_order(x, n))
        counts[key] = counts.get(key, 0) + 1
    return tuple(sorted(counts.items()))


def find_conjugator(H1: Subgroup, H2: Subgroup, ambient: Sequence[Mat] | None = None):
    """Return g with g H1 g^-1 = H2, or None.  ``ambient`` defaults to GL2(Z/N)."""
    n = H1.modulus
    if H2.modulus != n:
        raise InvalidInput("modulus mismatch")
    if H1.order != H2.order:
        return None
    if H1.elements == H2.elements:
        return identity(n)
    if H1.det_image != H2.det_image or H1.has_minus_I != H2.has_minus_I:
        return None
    if gl2_level(H1) != gl2_level(H2):
        return None
    gens = H1.generators or _small_generating_set(H1.elements, n)
    target = H2.elements
    covered: set = set()
    for g in (ambient if ambient is not None else gl2_elements(n)):
        if g in covered:
            continue
        if all(x in target for x in _conjugate_gens(gens, g, n)):
            return g
        # every element of the right coset H2*g gives the same answer
        for h in target:
            covered.add(mat_mul(h, g, n))
    return None


def conjugacy_equal(H1: Subgroup, H2: Subgroup) -> bool:
    if H1.modulus != H2.modulus:
        raise InvalidInput("modulus mismatch")
    return find_conjugator(H1, H2) is not None


def canonical_form(H: Subgroup) -> tuple:
    """Lexicographically minimal sorted element tuple over all GL2-conjugates."""
    n = H.modulus
    best = None
    for g in gl2_elements(n):
        gi = mat_inv(g, n)
        cand = tuple(sorted(mat_mul(mat_mul(g, x, n), gi, n) for x in H.elements))
        if best is None or cand < best:
            best = cand
    return best


_MATRIX_RE = re.compile(r"\[\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*,\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*\]")


def parse_subgroup_line(line: str) -> Subgroup:
    """Parse ``N; [[a,b],[c,d]]; ...`` into the generated subgroup."""
    compact = "".join(line.split())
    if not compact:
        raise InvalidInput("empty subgroup line")
    head, _, rest = compact.partition(";")
    try:
        n = int(head)
    except ValueError as exc:
        raise InvalidInput(f"bad modulus field {head!r}") from exc
    gens = []
    for chunk in filter(None, rest.split(";")):
        m = _MATRIX_RE.fullmatch(chunk)
        if not m:
            raise InvalidInput(f"bad matrix {chunk!r}")
        gens.append(tuple(int(v) % n for v in m.groups()))
    if not gens:
        gens = [identity(n)]
    return close_subgroup(gens, n)


def format_subgroup_line(H: Subgroup) -> str:
    mats = "; ".join(str(ZmodMatrix(H.modulus, g)) for g in H.generators)
    return f"{H.modulus}; {mats}" if mats else f"{H.modulus}"
