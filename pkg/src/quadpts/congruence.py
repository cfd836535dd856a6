"""Invariants of congruence subgroups from their finite-level SL2 data.

The right-coset action of S = [[0,-1],[1,0]] and T = [[1,1],[0,1]] on
``(+-Gamma_M) \\ SL2(Z/M)`` gives the index, elliptic points and cusps, and the
genus follows from the usual Riemann-Hurwitz count over the j-line.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .zmod_gl2 import (
    InvalidInput,
    SL2Part,
    is_prime_power,
    mat_inv,
    mat_mul,
    prime_factors,
    sl2_elements,
)


class GenusComputationError(RuntimeError):
    """The genus formula produced a non-integral or negative value."""


@dataclass(frozen=True)
class CongruenceData:
    sl2_level: int
    index_psl2: int
    e2: int
    e3: int
    cusps: int
    genus: int
    adjoined_minus_I: bool = False

    def as_row(self) -> tuple:
        return (self.sl2_level, self.index_psl2, self.e2, self.e3, self.cusps, self.genus)


@dataclass(frozen=True)
class NormalizerQuotient:
    base: SL2Part
    quotient_order: int
    element_orders: tuple

    def order_counts(self) -> dict:
        out: dict = {}
        for k in self.element_orders:
            out[k] = out.get(k, 0) + 1
        return out


def _normalized(gamma: SL2Part) -> tuple[SL2Part, bool]:
    adjoined = not gamma.has_minus_I
    return gamma.with_minus_I().at_level(), adjoined


def _coset_key(elems: frozenset, g, m: int):
    return min(mat_mul(x, g, m) for x in elems)


def coset_permutations(gamma: SL2Part) -> tuple[list, list, list]:
    """Right action of S and T on the cosets of ``gamma`` (which must contain -I).

    Returns ``(representatives, perm_S, perm_T)``.
    """
    m = gamma.modulus
    S = (0, (-1) % m, 1 % m, 0)
    T = (1 % m, 1 % m, 0, 1 % m)
    elems = gamma.elements
    one = (1 % m, 0, 0, 1 % m)
    reps = [one]
    index = {_coset_key(elems, one, m): 0}
    perm_S: list = []
    perm_T: list = []
    i = 0
    while i < len(reps):
        g = reps[i]
        for gen, perm in ((S, perm_S), (T, perm_T)):
            h = mat_mul(g, gen, m)
            key = _coset_key(elems, h, m)
            if key not in index:
                index[key] = len(reps)
                reps.append(h)
            perm.append(index[key])
        i += 1
    return reps, perm_S, perm_T


def _orbit_count(perm: list) -> int:
    seen = [False] * len(perm)
    count = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        count += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
    return count


def genus_from_counts(mu: int, e2: int, e3: int, cusps: int) -> int:
    g = 1 + Fraction(mu, 12) - Fraction(e2, 4) - Fraction(e3, 3) - Fraction(cusps, 2)
    if g.denominator != 1 or g < 0:
        raise GenusComputationError(
            f"genus formula gave {g} for mu={mu}, e2={e2}, e3={e3}, cusps={cusps}")
    return int(g)


def congruence_data(gamma: SL2Part) -> CongruenceData:
    """Index, elliptic points, cusps and genus of the congruence subgroup."""
    G, adjoined = _normalized(gamma)
    reps, perm_S, perm_T = coset_permutations(G)
    mu = len(reps)
    perm_ST = [perm_T[perm_S[i]] for i in range(mu)]
    e2 = sum(1 for i in range(mu) if perm_S[i] == i)
    e3 = sum(1 for i in range(mu) if perm_ST[i] == i)
    cusps = _orbit_count(perm_T)
    genus = genus_from_counts(mu, e2, e3, cusps)
    return CongruenceData(G.modulus, mu, e2, e3, cusps, genus, adjoined)


def _element_order_mod(g, elems: frozenset, m: int) -> int:
    k, y = 1, g
    while y not in elems:
        y = mat_mul(y, g, m)
        k += 1
    return k


def normalizer_quotient(gamma: SL2Part) -> NormalizerQuotient:
    """N(+-Gamma_M) / (+-Gamma_M) inside SL2(Z/M), by brute force."""
    G, _ = _normalized(gamma)
    m = G.modulus
    elems = G.elements
    gens = G.generators
    normalizer = []
    for g in sl2_elements(m):
        gi = mat_inv(g, m)
        if all(mat_mul(mat_mul(g, x, m), gi, m) in elems for x in gens):
            normalizer.append(g)
    seen: set = set()
    orders = []
    for g in normalizer:
        if g in seen:
            continue
        seen.update(mat_mul(g, x, m) for x in elems)
        orders.append(_element_order_mod(g, elems, m))
    return NormalizerQuotient(G, len(normalizer) // len(elems), tuple(sorted(orders)))


def level_bound(gamma: SL2Part) -> int:
    """Upper bound for the GL2 level of an admissible H whose SL2 part is ``gamma``.

    Only valid when the GL2 level and the SL2 level share their prime factors.
    """
    G, _ = _normalized(gamma)
    m = G.modulus
    if not is_prime_power(m):
        raise InvalidInput(f"SL2 level {m} is not a prime power")
    support = set(prime_factors(m))
    b = 1
    for k in normalizer_quotient(G).element_orders:
        if set(prime_factors(k)) <= support:
            b = lcm(b, k)
    return 2 * m * b if m % 4 == 2 else m * b
