import itertools

import pytest
from hypothesis import given, strategies as st

from quadpts.cs_logic import (
    NO,
    RULES,
    UNKNOWN,
    YES,
    ConsistencyError,
    CoverDatum,
    VerdictRecord,
    compose_verdict,
    cs_bound,
    jacobian_factor_gate,
    pointless_conic_excludes_hyperelliptic,
    reduction_excludes_bielliptic,
    unique_genus1_quotient,
)
from quadpts.zmod_gl2 import InvalidInput


def test_cs_bound_values():
    assert cs_bound(CoverDatum(2, 0), CoverDatum(2, 0)) == 1
    assert cs_bound(CoverDatum(2, 1), CoverDatum(2, 1)) == 5
    assert cs_bound(CoverDatum(3, 0), CoverDatum(2, 1)) == 4


@given(st.integers(1, 6), st.integers(0, 5), st.integers(1, 6), st.integers(0, 5))
def test_cs_bound_symmetric_and_monotone(d1, g1, d2, g2):
    b = cs_bound(CoverDatum(d1, g1), CoverDatum(d2, g2))
    assert b == cs_bound(CoverDatum(d2, g2), CoverDatum(d1, g1))
    assert cs_bound(CoverDatum(d1 + 1, g1), CoverDatum(d2, g2)) >= b
    assert cs_bound(CoverDatum(d1, g1 + 1), CoverDatum(d2, g2)) >= b


def test_unique_genus1_quotient_threshold():
    assert [g for g in range(0, 20) if unique_genus1_quotient(g)] == list(range(6, 20))


def test_small_rules():
    assert pointless_conic_excludes_hyperelliptic(3, False)
    assert not pointless_conic_excludes_hyperelliptic(3, True)
    assert not pointless_conic_excludes_hyperelliptic(1, False)
    assert reduction_excludes_bielliptic([0, 2, 3])
    assert not reduction_excludes_bielliptic([0, 1])
    assert jacobian_factor_gate(5, False) == NO
    assert jacobian_factor_gate(5, True) == UNKNOWN
    with pytest.raises(InvalidInput):
        jacobian_factor_gate(1, False)
    with pytest.raises(InvalidInput):
        CoverDatum(0, 1)


def _bundle(genus, *rules):
    return {"label": "t", "genus": genus, "rules": [dict(r) for r in rules]}


HYP = {"name": "hyperelliptic_model", "outcome": True}
NOT_HYP = {"name": "not_hyperelliptic", "outcome": True}
POS = {"name": "positive_rank_quotient", "outcome": True}
GATE_NO = {"name": "jacobian_factor_gate", "inputs": {"has_positive_rank_factor": False}}
NOT_BI = {"name": "not_bielliptic_mod_p", "inputs": {"quotient_genera_mod_p": [0, 2]}}


def test_contradiction_raises():
    bad = _bundle(3, HYP, {"name": "pointless_conic_exclusion", "outcome": True,
                          "inputs": {"conic_soluble": False}})
    with pytest.raises(ConsistencyError):
        compose_verdict(bad)


def test_inconsistent_rule_outcome_raises():
    with pytest.raises(ConsistencyError):
        compose_verdict(_bundle(3, {"name": "pointless_conic_exclusion", "outcome": True,
                                    "inputs": {"conic_soluble": True}}))


def test_genus_two_plus_verdicts():
    assert compose_verdict(_bundle(5, HYP)).infinitely_many_quadratic_points == YES
    assert compose_verdict(_bundle(5, NOT_HYP, POS)).infinitely_many_quadratic_points == YES
    r = compose_verdict(_bundle(5, NOT_HYP, GATE_NO))
    assert r.infinitely_many_quadratic_points == NO and r.deciding_rule == "hyperelliptic_or_bielliptic"
    assert compose_verdict(_bundle(5, NOT_HYP, NOT_BI)).infinitely_many_quadratic_points == NO
    assert compose_verdict(_bundle(5, NOT_HYP)).infinitely_many_quadratic_points == UNKNOWN
    with pytest.raises(ConsistencyError):
        compose_verdict(_bundle(5, POS, GATE_NO))


def test_genus_zero_and_one():
    assert compose_verdict(_bundle(0)).infinitely_many_quadratic_points == YES
    r = compose_verdict(_bundle(1, {"name": "rational_degree2_divisor", "outcome": True}))
    assert r.infinitely_many_quadratic_points == YES
    r = compose_verdict(_bundle(1, {"name": "no_rational_degree2_divisor", "outcome": True}))
    assert r.infinitely_many_quadratic_points == NO and r.summary == "no quadratic points"
    with pytest.raises(ConsistencyError):
        compose_verdict(_bundle(1, {"name": "rational_degree2_divisor", "outcome": True},
                                {"name": "no_rational_degree2_divisor", "outcome": True}))
    with pytest.raises(InvalidInput):
        compose_verdict(_bundle(2, {"name": "rational_degree2_divisor", "outcome": True}))


def test_malformed_bundles():
    with pytest.raises(InvalidInput):
        compose_verdict({"genus": 2})
    with pytest.raises(InvalidInput):
        compose_verdict(_bundle(2, {"name": "no_such_rule"}))
    with pytest.raises(InvalidInput):
        compose_verdict(_bundle(-1))


def test_record_roundtrip():
    r = compose_verdict(_bundle(5, NOT_HYP, GATE_NO))
    assert VerdictRecord.from_dict(r.as_dict()) == r


GENUS2_RULES = [HYP, NOT_HYP, POS, GATE_NO, NOT_BI,
                {"name": "quotient_exclusion", "outcome": True},
                {"name": "pointless_conic_exclusion", "outcome": True, "inputs": {"conic_soluble": False}}]


@pytest.mark.parametrize("subset", [s for k in range(0, 4) for s in itertools.combinations(range(7), k)])
def test_invariant_and_monotonicity(subset):
    """Any consistent bundle satisfies the genus >= 2 criterion, and adding evidence never
    flips a decided value."""
    rules = [GENUS2_RULES[i] for i in subset]
    try:
        r = compose_verdict(_bundle(4, *rules))
    except ConsistencyError:
        return
    witnessed = YES in (r.hyperelliptic, r.positive_rank_bielliptic)
    if r.infinitely_many_quadratic_points == YES:
        assert witnessed
    if r.infinitely_many_quadratic_points == NO:
        assert r.hyperelliptic == NO and r.positive_rank_bielliptic == NO
    for extra in GENUS2_RULES:
        try:
            r2 = compose_verdict(_bundle(4, *rules, extra))
        except ConsistencyError:
            continue
        for key in ("hyperelliptic", "positive_rank_bielliptic", "infinitely_many_quadratic_points"):
            if getattr(r, key) != UNKNOWN:
                assert getattr(r2, key) == getattr(r, key)


def test_registry_names():
    assert {"genus_zero", "pointless_conic_exclusion", "jacobian_factor_gate",
            "quotient_exclusion"} <= set(RULES)
