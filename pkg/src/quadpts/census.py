"""Desk-scale census of admissible subgroups of GL2(Z/p^n) and label-table tallies."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .congruence import congruence_data
from .zmod_gl2 import (
    InvalidInput,
    Subgroup,
    _small_generating_set,
    admissible,
    canonical_form,
    class_signature,
    closure,
    find_conjugator,
    gl2_elements,
    gl2_level,
    is_prime_power,
    mat_det,
    mat_mul,
    minus_identity,
    prime_factors,
    sl2_part,
)

DEFAULT_MAX_MODULUS = 16

LMFDB_LABEL_RE = re.compile(r"^(\d+)\.(\d+)\.(\d+)\.([a-z]+)\.(\d+)$")
CP_LABEL_RE = re.compile(r"^(\d+)([A-Z]+)(\d+)$")


@dataclass(frozen=True)
class LabelRecord:
    label: str
    level: int
    index: int | None
    genus: int
    family: str = ""


@dataclass
class CensusResult:
    modulus: int
    max_genus: int | None
    admissible_classes: list
    genera: list
    per_genus_tally: dict = field(default_factory=dict)

    def class_rows(self) -> list[dict]:
        from .zmod_gl2 import index_in_gl2

        rows = []
        for H, g in zip(self.admissible_classes, self.genera):
            rows.append({
                "order": H.order,
                "index": index_in_gl2(H),
                "level": gl2_level(H),
                "genus": g,
                "generators": [[[a, b], [c, d]] for a, b, c, d in H.generators],
            })
        return rows


@dataclass
class TallyReport:
    modulus: int
    rows: list
    mismatches: list

    @property
    def matches(self) -> bool:
        return not self.mismatches

    def as_dict(self) -> dict:
        return {"modulus": self.modulus, "rows": self.rows,
                "mismatches": self.mismatches, "match": self.matches}


def _unit_generators(n: int) -> list[int]:
    """Generators of (Z/n)^x for a prime power n (two of them when 8 | n)."""
    if n <= 2:
        return []
    if n % 8 == 0:
        return [n - 1, 5]
    units = [u for u in range(1, n) if u % prime_factors(n)[0]]
    phi = len(units)
    for u in units:
        k, x = 1, u
        while x != 1:
            x = x * u % n
            k += 1
        if k == phi:
            return [u]
    raise AssertionError("unit group not cyclic")


class _ClassStore:
    """Subgroups bucketed by a conjugation invariant, one representative per class."""

    def __init__(self, n: int):
        self.n = n
        self.buckets: dict = {}
        self.order: list = []
        self.seen_sets: set = set()

    def add(self, H: Subgroup) -> bool:
        if H.elements in self.seen_sets:
            return False
        self.seen_sets.add(H.elements)
        key = (H.order, H.det_image, class_signature(H.elements, self.n))
        bucket = self.buckets.setdefault(key, [])
        for K in bucket:
            if find_conjugator(H, K) is not None:
                return False
        bucket.append(H)
        self.order.append(H)
        return True


def _seed_groups(n: int) -> list[Subgroup]:
    """Minimal admissible groups <-I, h_1, ...> with det(h_i) generating the units."""
    minus = minus_identity(n)
    targets = _unit_generators(n)
    elems = gl2_elements(n)
    if not targets:
        return [Subgroup(n, (minus,), closure([minus], n))]
    by_det: dict = {}
    for g in elems:
        by_det.setdefault(mat_det(g, n), []).append(g)
    firsts = by_det[targets[0]]
    if len(targets) == 1:
        combos = [(h,) for h in firsts]
    else:
        combos = [(h1, h2) for h1 in _class_representatives(firsts, n) for h2 in by_det[targets[1]]]
    out = []
    seen: set = set()
    for hs in combos:
        gens = (minus,) + hs
        E = closure(gens, n)
        if E in seen:
            continue
        seen.add(E)
        out.append(Subgroup(n, gens, E))
    return out


def _class_representatives(candidates: list, n: int) -> list:
    pool = set(candidates)
    reps = []
    G = gl2_elements(n)
    from .zmod_gl2 import mat_inv

    for x in sorted(candidates):
        if x not in pool:
            continue
        reps.append(x)
        for g in G:
            pool.discard(mat_mul(mat_mul(g, x, n), mat_inv(g, n), n))
    return reps


def _right_coset_reps(H: Subgroup, n: int) -> list:
    covered: set = set(H.elements)
    reps = []
    for g in gl2_elements(n):
        if g in covered:
            continue
        reps.append(g)
        covered.update(mat_mul(h, g, n) for h in H.elements)
    return reps


def enumerate_admissible(modulus: int, max_genus: int | None = 0, *, allow_large: bool = False) -> CensusResult:
    """Conjugacy classes of admissible H <= GL2(Z/N) of level exactly N with genus <= max_genus.

    Classes are grown upward from minimal admissible seeds by adjoining one
    element at a time; a group whose level drops below N is discarded because
    every overgroup keeps the smaller level.
    """
    n = modulus
    if not is_prime_power(n):
        raise InvalidInput(f"modulus {n} is not a prime power")
    if n > DEFAULT_MAX_MODULUS and not allow_large:
        raise InvalidInput(f"modulus {n} exceeds the desk-scale guard {DEFAULT_MAX_MODULUS}")
    store = _ClassStore(n)
    queue = []
    for S in _seed_groups(n):
        if gl2_level(S) == n and store.add(S):
            queue.append(S)
    i = 0
    while i < len(queue):
        K = queue[i]
        i += 1
        for g in _right_coset_reps(K, n):
            gens = K.generators + (g,)
            L = closure(gens, n)
            if L in store.seen_sets:
                continue
            H = Subgroup(n, _small_generating_set(L, n), L)
            if gl2_level(H) != n:
                store.seen_sets.add(L)
                continue
            if store.add(H):
                queue.append(H)
    classes = []
    for H in store.order:
        assert admissible(H)
        g = congruence_data(sl2_part(H)).genus
        if max_genus is None or g <= max_genus:
            canon = canonical_form(H)
            C = Subgroup(n, _small_generating_set(frozenset(canon), n), frozenset(canon))
            classes.append((C.order, canon, C, g))
    classes.sort(key=lambda t: (t[0], t[1]))
    tally: dict = {}
    for *_, g in classes:
        tally[g] = tally.get(g, 0) + 1
    return CensusResult(n, max_genus, [c[2] for c in classes], [c[3] for c in classes],
                        dict(sorted(tally.items())))


def parse_label(label: str, family: str = "") -> LabelRecord:
    m = LMFDB_LABEL_RE.match(label)
    if m:
        level, index, genus = (int(m.group(k)) for k in (1, 2, 3))
        if level < 1 or index < 1:
            raise InvalidInput(f"malformed label {label!r}")
        return LabelRecord(label, level, index, genus, family)
    m = CP_LABEL_RE.match(label)
    if m:
        return LabelRecord(label, int(m.group(1)), None, int(m.group(3)), family)
    raise InvalidInput(f"malformed label {label!r}")


def ingest_labels(path, family: str | None = None) -> tuple[list[LabelRecord], list[str]]:
    """Read one label per line; returns ``(records, errors)``.

    A ``# family: NAME`` comment sets the family for the records that follow.
    Only the first whitespace-separated token of a line is the label.
    """
    records, errors = [], []
    fam = family or Path(path).stem
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            m = re.match(r"#\s*family:\s*(\S+)", line)
            if m and family is None:
                fam = m.group(1)
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        token = line.split()[0]
        try:
            records.append(parse_label(token, fam))
        except InvalidInput as exc:
            errors.append(f"line {lineno}: {exc}")
    return records, errors


def tally_match(census: CensusResult, records: list[LabelRecord]) -> TallyReport:
    """Compare per-genus class counts with the counts read off label records."""
    table: dict = {}
    for r in records:
        if r.level != census.modulus:
            continue
        if census.max_genus is not None and r.genus > census.max_genus:
            continue
        table[r.genus] = table.get(r.genus, 0) + 1
    rows, mismatches = [], []
    for g in sorted(set(table) | set(census.per_genus_tally)):
        computed = census.per_genus_tally.get(g, 0)
        expected = table.get(g, 0)
        rows.append({"genus": g, "computed": computed, "table": expected})
        if computed != expected:
            mismatches.append({"genus": g, "computed": computed, "table": expected})
    return TallyReport(census.modulus, rows, mismatches)


def data_path(name: str) -> Path:
    return Path(__file__).parent / "data" / name
