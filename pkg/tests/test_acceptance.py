"""Acceptance criteria 1-10.

Each criterion prints one PASS/FAIL line with its runtime against the limit.
Run with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import random
import sys
import tempfile
import time
import traceback
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from conftest import FIXTURES  # noqa: E402
from quadpts.census import data_path, enumerate_admissible, ingest_labels, tally_match  # noqa: E402
from quadpts.congruence import congruence_data, level_bound  # noqa: E402
from quadpts.cs_logic import ConsistencyError, CoverDatum, compose_verdict, cs_bound, unique_genus1_quotient  # noqa: E402
from quadpts.fp_geometry import (  # noqa: E402
    LinearInvolution,
    ProjectiveScheme,
    WeierstrassCurve,
    count_elliptic,
    fixed_locus,
    mismatch_filter,
    quotient_genus,
    torsion_bound,
)
from quadpts.local import INF, conic_verdict, hilbert_symbol, hyperelliptic_everywhere_locally_soluble, relevant_places  # noqa: E402
from quadpts.pencil import (  # noqa: E402
    PencilCurve,
    WeierstrassModel,
    cone_data,
    jacobian_from_quartic,
    pencil_quartic,
    ruling_has_rational_line,
    singular_members,
    square_disc_members,
    vertex_line_divisor,
)
from quadpts.pipeline import analyze_pencil, packaged_replay_config, run_pipeline  # noqa: E402
from quadpts.zmod_gl2 import gl2_level, index_in_gl2, parse_subgroup_line, sl2_from_generators, sl2_part  # noqa: E402


def _curve(name):
    text = (FIXTURES / "curves" / f"{name}.txt").read_text()
    line = next(ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#"))
    return PencilCurve.from_line(line)


def crit1():
    C = _curve("8.48.1.bi.1")
    f = pencil_quartic(C)
    assert str(f) == "u*(u - 2*v)*(7*u^2 - 20*u*v - 4*v^2)/4"
    for u, v in [(1, 1), (3, -5), (7, 2)]:
        assert 4 * f(u, v) == u * (u - 2 * v) * (7 * u * u - 20 * u * v - 4 * v * v)
    sm = singular_members(C)
    assert [c.parameter for c in sm.rational] == [(0, 1), (2, 1)]
    assert len(sm.irrational) == 1 and sm.irrational[0].field_discriminant == 2
    assert [c.conic_string for c in sm.rational] == ["4x^2-2xy+y^2-2yz+2z^2", "8x^2+4xy+y^2+2w^2"]
    for c in sm.rational:
        v = conic_verdict(c.base_conic)
        assert not v.soluble and v.obstruction == INF
    search = square_disc_members(C, 10)
    assert {m.point for m in search.members} == {(0, 0, 1), (2, 0, 1), (2, -32, 3), (2, 32, 3)}
    assert {(m.u, m.v) for m in search.members if m.smooth} == {(2, 3)}
    Qs = C.member(2, 3)
    assert str(Qs) == "16x^2+3y^2-4yz+4z^2+2w^2"
    assert not ruling_has_rational_line(Qs).isotropic
    d = analyze_pencil("8.48.1.bi.1", C, jacobian="y^2=x^3+36x^2-272x+448", jacobian_rational_points=4,
                       settings={"square_disc_height": 10})
    assert d.verdict["infinitely_many_quadratic_points"] == "no"
    assert d.verdict_record.summary == "no quadratic points"


def crit2():
    C = _curve("16.48.1.l.1")
    assert pencil_quartic(C).dehomogenized("t", "u") == "16*t*(t + 1)*(8*t**2 + 8*t + 1)"
    cone = cone_data(C, 1, 0)
    assert cone.vertex == (1, -4, 0, 0)
    div = vertex_line_divisor(cone, C.q2, (0, 0, 1, 1))
    assert div.field_discriminant == -2
    assert div.point_string() == "[1:-4:4√-2:4√-2]"
    d = analyze_pencil("16.48.1.l.1", C, base_points=[[0, 0, 1, 1]], settings={"square_disc_height": 10})
    assert d.verdict["infinitely_many_quadratic_points"] == "yes"


def crit3():
    J = jacobian_from_quartic(pencil_quartic(_curve("8.48.1.bi.1")))
    E = WeierstrassCurve.from_string("y^2=x^3+36x^2-272x+448")
    assert J.j_invariant == E.model.j_invariant
    assert isinstance(J, WeierstrassModel)
    assert torsion_bound(E, [3, 5, 7, 11, 13]) % 4 == 0


def crit4():
    for line in ("32; [[1,12],[8,31]]; [[11,23],[16,1]]; [[13,9],[16,31]]; [[25,3],[0,3]]",
                 "32; [[7,5],[4,7]]; [[29,24],[8,7]]; [[29,29],[4,5]]"):
        H = parse_subgroup_line(line)
        assert (gl2_level(H), index_in_gl2(H), congruence_data(sl2_part(H)).genus) == (32, 96, 5)


def crit5():
    for p, a in ((7, 3), (11, 2), (13, 2)):
        G = sl2_from_generators([(a, 0, 0, pow(a, -1, p)), (1, 1, 0, 1)], p)
        assert level_bound(G) == p
    G = sl2_from_generators([(1, 1, 0, 1), (2, 0, 9, 14)], 27)
    assert congruence_data(G).genus == 0
    assert level_bound(G) == 81


# row counts of the published genus-0 label table at levels 2, 3, 4
TABLE_ROWS = {2: 3, 3: 5, 4: 18}


def crit6():
    records, errors = ingest_labels(data_path("genus0_labels.txt"))
    assert not errors
    for n, rows in TABLE_ROWS.items():
        res = enumerate_admissible(n, 0)
        assert sum(res.per_genus_tally.values()) == rows
        assert tally_match(res, records).matches
        if n == 2:
            assert all(r["level"] == 2 for r in res.class_rows())


def crit7():
    res = hyperelliptic_everywhere_locally_soluble([-128, 0, 0, 0, -65536])
    assert not res.soluble and res.obstruction == INF
    rng = random.Random(2024)
    for _ in range(1000):
        a = rng.choice([-1, 1]) * rng.randint(1, 10**6)
        b = rng.choice([-1, 1]) * rng.randint(1, 10**6)
        prod = 1
        for v in relevant_places([a, b]):
            prod *= hilbert_symbol(a, b, v)
        assert prod == 1
    forms = 0
    while forms < 200:
        A = [[0] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(i, 3):
                A[i][j] = A[j][i] = rng.randint(-5, 5)
        if oracles.frac_det(A) == 0:
            continue
        forms += 1
        found = oracles.conic_height_search(A, 200)
        assert conic_verdict(A, witness_height=0).soluble == (found is not None), A


def crit8():
    E = WeierstrassCurve.from_string("y^2=x^3-2x")
    naive = sum(1 for x in range(5) for y in range(5) if (y * y - x ** 3 + 2 * x) % 5 == 0) + 1
    assert count_elliptic(E, 5) == naive == 10
    X = ProjectiveScheme.from_strings(["y^2*z-x^3-x*z^2"])
    v = mismatch_filter(X, E, [5])
    assert v.mismatch and v.counts[5] == (4, 10)
    S = ProjectiveScheme.from_strings(["2x^2+3xy+yz-z^2+w^2", "4x^2-2xy+y^2-2yz+2z^2"])
    iota = LinearInvolution.from_rows([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]])
    r = fixed_locus(S, iota).count
    assert r == 4 and quotient_genus(1, r) == 0


def crit9():
    assert cs_bound(CoverDatum(2, 0), CoverDatum(2, 0)) == 1
    assert cs_bound(CoverDatum(2, 1), CoverDatum(2, 1)) == 5
    assert all(unique_genus1_quotient(g) == (g >= 6) for g in range(0, 40))
    import json

    bundle = json.loads((FIXTURES / "bundles" / "contradictory.json").read_text())
    try:
        compose_verdict(bundle)
    except ConsistencyError:
        return
    raise AssertionError("contradictory bundle accepted")


def crit10():
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        ra = run_pipeline(packaged_replay_config(), a)
        rb = run_pipeline(packaged_replay_config(), b)
        assert ra.exit_code == rb.exit_code == 0
        files = sorted(p.name for p in Path(a).iterdir())
        assert files == sorted(p.name for p in Path(b).iterdir())
        assert len(files) >= 12
        for name in files:
            assert (Path(a) / name).read_bytes() == (Path(b) / name).read_bytes(), name


CRITERIA = [
    (1, "pencil fixture 8.48.1.bi.1", 5, crit1),
    (2, "pencil fixture 16.48.1.l.1", 5, crit2),
    (3, "Jacobian extraction and torsion bound", 5, crit3),
    (4, "label-invariant replay (32, 96, 5)", 60, crit4),
    (5, "level bounds 7, 11, 13 and 81", 60, crit5),
    (6, "census tallies at moduli 2, 3, 4", 600, crit6),
    (7, "local solubility, product formula, conic search", 120, crit7),
    (8, "finite-field counts, mismatch, fixed locus", 120, crit8),
    (9, "Castelnuovo-Severi logic and consistency", 1, crit9),
    (10, "replay determinism", 600, crit10),
]


def run_criterion(num, title, limit, func, out=print):
    start = time.perf_counter()
    error = None
    try:
        func()
    except Exception as exc:  # report, then re-raise under pytest
        error = exc
    elapsed = time.perf_counter() - start
    ok = error is None and elapsed < limit
    why = "" if ok else (f" [{type(error).__name__}: {error}]" if error else " [over time limit]")
    out(f"{'PASS' if ok else 'FAIL'} criterion {num}: {title} ({elapsed:.2f}s, limit {limit}s){why}")
    return ok, error, elapsed


@pytest.mark.parametrize("num,title,limit,func", CRITERIA, ids=[f"criterion{c[0]}" for c in CRITERIA])
def test_criterion(num, title, limit, func, capsys):
    with capsys.disabled():
        ok, error, elapsed = run_criterion(num, title, limit, func, out=lambda s: print("\n" + s))
    if error is not None:
        raise error
    assert elapsed < limit, f"criterion {num} took {elapsed:.2f}s (limit {limit}s)"


if __name__ == "__main__":
    results = []
    for c in CRITERIA:
        ok, error, _ = run_criterion(*c)
        if error is not None and "-v" in sys.argv:
            traceback.print_exception(error)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
