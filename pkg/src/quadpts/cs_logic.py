"""Decision rules for hyperellipticity, bielliptic quotients and quadratic points.

Verdict fields are three-valued: ``"yes"``, ``"no"`` or ``"unknown"``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .zmod_gl2 import InvalidInput

YES, NO, UNKNOWN = "yes", "no", "unknown"
_VALUES = (YES, NO, UNKNOWN)


class ConsistencyError(RuntimeError):
    """Evidence rules contradict each other."""


@dataclass(frozen=True)
class CoverDatum:
    degree: int
    target_genus: int
    target_pointless: bool | None = None

    def __post_init__(self):
        if self.degree < 1 or self.target_genus < 0:
            raise InvalidInput("cover needs degree >= 1 and target genus >= 0")


def cs_bound(c1: CoverDatum, c2: CoverDatum) -> int:
    """Castelnuovo-Severi: g <= d1 g1 + d2 g2 + (d1 - 1)(d2 - 1)."""
    return (c1.degree * c1.target_genus + c2.degree * c2.target_genus
            + (c1.degree - 1) * (c2.degree - 1))


def pointless_conic_excludes_hyperelliptic(genus: int, conic_soluble: bool) -> bool:
    """True means the curve is not hyperelliptic."""
    return genus >= 2 and not conic_soluble


def unique_genus1_quotient(genus: int) -> bool:
    return genus > cs_bound(CoverDatum(2, 1), CoverDatum(2, 1))


def reduction_excludes_bielliptic(quotient_genera_mod_p) -> bool:
    """True ("not bielliptic") iff no involution mod p has a genus-one quotient."""
    return all(g != 1 for g in quotient_genera_mod_p)


def jacobian_factor_gate(genus: int, has_positive_rank_factor: bool) -> str:
    """Positive-rank bielliptic value allowed by the Jacobian decomposition."""
    if genus < 2:
        raise InvalidInput("the Jacobian-factor gate applies only to genus >= 2")
    return UNKNOWN if has_positive_rank_factor else NO


@dataclass
class VerdictRecord:
    label: str
    genus: int
    hyperelliptic: str = UNKNOWN
    positive_rank_bielliptic: str = UNKNOWN
    infinitely_many_quadratic_points: str = UNKNOWN
    deciding_rule: str = ""
    evidence: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "VerdictRecord":
        return cls(**d)

    @property
    def summary(self) -> str:
        v = self.infinitely_many_quadratic_points
        if v == YES:
            return "infinitely many quadratic points"
        if v == NO:
            return "no quadratic points" if self.evidence_says_none() else "finitely many quadratic points"
        return "unresolved"

    def evidence_says_none(self) -> bool:
        return any(e.get("name") == "no_rational_degree2_divisor" and e.get("outcome") is True
                   for e in self.evidence)


# Each rule maps (genus, inputs, outcome) to field assertions.

def _rule_genus_zero(g, inputs, outcome):
    if g != 0:
        raise InvalidInput("genus_zero rule needs genus 0")
    return {"infinitely_many_quadratic_points": YES}


def _rule_rational_degree2_divisor(g, inputs, outcome):
    if g != 1:
        raise InvalidInput("rational_degree2_divisor applies to genus 1")
    return {"infinitely_many_quadratic_points": YES if outcome else UNKNOWN}


def _rule_no_rational_degree2_divisor(g, inputs, outcome):
    if g != 1:
        raise InvalidInput("no_rational_degree2_divisor applies to genus 1")
    return {"infinitely_many_quadratic_points": NO if outcome else UNKNOWN}


def _rule_hyperelliptic_model(g, inputs, outcome):
    return {"hyperelliptic": YES if outcome else UNKNOWN}


def _rule_pointless_conic(g, inputs, outcome):
    excluded = pointless_conic_excludes_hyperelliptic(g, bool(inputs.get("conic_soluble", True)))
    if outcome is not None and bool(outcome) != excluded:
        raise ConsistencyError("pointless_conic_exclusion outcome does not follow from its inputs")
    return {"hyperelliptic": NO if excluded else UNKNOWN}


def _rule_not_hyperelliptic(g, inputs, outcome):
    return {"hyperelliptic": NO if outcome else UNKNOWN}


def _rule_positive_rank_quotient(g, inputs, outcome):
    return {"positive_rank_bielliptic": YES if outcome else UNKNOWN}


def _rule_jacobian_factor(g, inputs, outcome):
    has = inputs.get("has_positive_rank_factor")
    if has is None:
        has = bool(outcome)
    return {"positive_rank_bielliptic": jacobian_factor_gate(g, bool(has))}


def _rule_not_bielliptic_mod_p(g, inputs, outcome):
    genera = inputs.get("quotient_genera_mod_p")
    excluded = reduction_excludes_bielliptic(genera) if genera is not None else bool(outcome)
    return {"positive_rank_bielliptic": NO if excluded else UNKNOWN}


def _rule_quotient_exclusion(g, inputs, outcome):
    # every bielliptic quotient is known and has rank zero
    return {"positive_rank_bielliptic": NO if outcome else UNKNOWN}


RULES = {
    "genus_zero": _rule_genus_zero,
    "rational_degree2_divisor": _rule_rational_degree2_divisor,
    "no_rational_degree2_divisor": _rule_no_rational_degree2_divisor,
    "hyperelliptic_model": _rule_hyperelliptic_model,
    "pointless_conic_exclusion": _rule_pointless_conic,
    "not_hyperelliptic": _rule_not_hyperelliptic,
    "positive_rank_quotient": _rule_positive_rank_quotient,
    "jacobian_factor_gate": _rule_jacobian_factor,
    "not_bielliptic_mod_p": _rule_not_bielliptic_mod_p,
    "quotient_exclusion": _rule_quotient_exclusion,
}


def _merge(record: VerdictRecord, key: str, value: str, rule: str, sources: dict):
    if value == UNKNOWN:
        return
    current = getattr(record, key)
    if current != UNKNOWN and current != value:
        raise ConsistencyError(
            f"{record.label}: {key} is {current} by {sources[key]} but {value} by {rule}")
    if current == UNKNOWN:
        setattr(record, key, value)
        sources[key] = rule


def compose_verdict(bundle: dict) -> VerdictRecord:
    """Apply the rule registry to an evidence bundle ``{label, genus, rules: [...]}``."""
    try:
        label = str(bundle["label"])
        genus = int(bundle["genus"])
        rules = list(bundle.get("rules", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed evidence bundle: {exc}") from exc
    if genus < 0:
        raise InvalidInput("negative genus")
    record = VerdictRecord(label, genus, evidence=rules)
    sources: dict = {}
    for entry in rules:
        name = entry.get("name")
        if name not in RULES:
            raise InvalidInput(f"unknown rule {name!r}")
        assertions = RULES[name](genus, entry.get("inputs", {}) or {}, entry.get("outcome"))
        for key, value in assertions.items():
            if value not in _VALUES:  # pragma: no cover - rules return fixed strings
                raise AssertionError(value)
            _merge(record, key, value, name, sources)

    if genus == 0:
        _merge(record, "infinitely_many_quadratic_points", YES, "genus_zero", sources)
    elif genus >= 2:
        h, b = record.hyperelliptic, record.positive_rank_bielliptic
        derived = YES if YES in (h, b) else (NO if h == NO and b == NO else UNKNOWN)
        current = record.infinitely_many_quadratic_points
        if current != UNKNOWN and derived != UNKNOWN and current != derived:
            raise ConsistencyError(
                f"{label}: quadratic-point verdict {current} contradicts hyperelliptic={h}, "
                f"positive_rank_bielliptic={b}")
        if current == YES and derived == UNKNOWN:
            raise ConsistencyError(
                f"{label}: infinitely many quadratic points asserted without a hyperelliptic "
                "or positive-rank bielliptic witness")
        if derived != UNKNOWN:
            _merge(record, "infinitely_many_quadratic_points", derived,
                   "hyperelliptic_or_bielliptic", sources)
    record.deciding_rule = sources.get("infinitely_many_quadratic_points", "")
    _check_invariant(record)
    return record


def _check_invariant(r: VerdictRecord):
    if r.genus >= 2:
        witnessed = YES in (r.hyperelliptic, r.positive_rank_bielliptic)
        if (r.infinitely_many_quadratic_points == YES) != witnessed:
            if r.infinitely_many_quadratic_points != UNKNOWN or witnessed:
                raise ConsistencyError(f"{r.label}: verdict violates the genus >= 2 criterion")
