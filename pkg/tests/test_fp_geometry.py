import sympy
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import FIXTURES
from quadpts.fp_geometry import (
    BudgetExceeded,
    FiniteField,
    FixedLocusError,
    LinearInvolution,
    ProjectiveScheme,
    WeierstrassCurve,
    ap_trace,
    count_elliptic,
    count_points,
    enumeration_budget,
    fixed_locus,
    mismatch_filter,
    projective_space_size,
    quotient_genus,
    torsion_bound,
)
from quadpts.zmod_gl2 import InvalidInput

BI = ["2x^2+3xy+yz-z^2+w^2", "4x^2-2xy+y^2-2yz+2z^2"]


def _callables(S):
    fs = [sympy.lambdify(S.symbols, e, "math") for e in S.polynomials]
    return [lambda v, f=f: int(f(*v)) for f in fs]


@pytest.mark.parametrize("polys,p", [
    (["y^2*z-x^3+2*x*z^2"], 5),
    (["y^2*z-x^3+2*x*z^2"], 7),
    (["x^2+y^2+z^2"], 3),
    (BI, 3),
    (BI, 5),
    (BI, 7),
    (["x*w-y*z", "x^2+y^2-z^2-w^2"], 5),
])
def test_counts_against_naive_enumeration(polys, p):
    S = ProjectiveScheme.from_strings(polys)
    n = len(S.variables)
    assert count_points(S, p) == oracles.count_projective_naive(_callables(S), n, p)


def test_known_counts():
    E = WeierstrassCurve.from_string("y^2=x^3-2x")
    assert count_elliptic(E, 5) == 10
    assert count_points(E.as_scheme(), 5) == 10
    assert ap_trace(E, 5) == -4
    assert count_points(ProjectiveScheme.from_strings(["x^2+y^2+z^2"]), 3) == 4


@pytest.mark.parametrize("p", [3, 5, 7])
def test_quadratic_extension_against_pair_arithmetic(p):
    E = WeierstrassCurve.from_string("y^2=x^3-2x")
    assert count_points(E.as_scheme(), p, 2) == oracles.count_weierstrass_fp2((0, 0, 0, -2, 0), p)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_weil_relations(p):
    E = WeierstrassCurve.from_string("y^2=x^3-2x")
    a = ap_trace(E, p)
    S = E.as_scheme()
    assert count_points(S, p, 2) == p ** 2 + 1 - (a * a - 2 * p)
    assert count_points(S, p, 3) == p ** 3 + 1 - (a ** 3 - 3 * p * a)


@pytest.mark.parametrize("p", [3, 5])
def test_base_field_points_inside_extension(p):
    S = ProjectiveScheme.from_strings(BI)
    assert count_points(S, p) <= count_points(S, p, 2)


@pytest.mark.parametrize("p,k", [(2, 2), (3, 2), (2, 3), (5, 2), (3, 3)])
def test_field_axioms(p, k):
    F = FiniteField(p, k)
    q = p ** k
    els = list(range(q))
    for a in els:
        if a:
            inv = F.power(a, q - 2)
            assert F.mul(a, inv) == F.from_int(1)
        assert F.power(a, q) == a
    for a in els[:6]:
        for b in els[:6]:
            for c in els[:6]:
                assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
                assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))


def test_naive_elliptic_count_agrees():
    E = WeierstrassCurve.from_ainvs((0, 36, 0, -272, 448))
    for p in (3, 5, 7, 11, 13):
        S = E.as_scheme()
        assert count_elliptic(E, p) == oracles.count_projective_naive(_callables(S), 3, p)


def test_torsion_bounds():
    E = WeierstrassCurve.from_ainvs((0, 36, 0, -272, 448))
    assert torsion_bound(E, [3, 5, 7, 11, 13]) == 4
    F = WeierstrassCurve.from_string("y^2=x^3-2x")
    assert torsion_bound(F, [3, 5, 7, 11, 13]) == 2
    with pytest.raises(InvalidInput):
        torsion_bound(F, [2, 3])


def test_mismatch_filter():
    E = WeierstrassCurve.from_string("y^2=x^3-2x")
    X = ProjectiveScheme.from_strings(["y^2*z-x^3-x*z^2"])
    assert oracles.count_projective_naive(_callables(X), 3, 5) == 4
    v = mismatch_filter(X, E, [5, 7])
    assert v.mismatch and v.first_mismatch == 5 and v.counts[5] == (4, 10)
    same = mismatch_filter(E.as_scheme(), E, [3, 5, 7])
    assert same.status == "INCONCLUSIVE"


def test_canonical_model_counts():
    S = ProjectiveScheme.from_file(FIXTURES / "schemes" / "32.96.5.f.1.txt")
    counts = [count_points(S, p) for p in (3, 5, 7, 11)]
    assert counts == [4, 4, 8, 12]
    assert counts[0] == oracles.count_projective_naive(_callables(S), len(S.variables), 3)


def test_quotient_scheme_counts_p3():
    S = ProjectiveScheme.from_file(FIXTURES / "schemes" / "32.96.5.f.1_C3.txt")
    assert len(S.variables) == 8
    assert count_points(S, 3) == 4 == oracles.count_projective_naive(_callables(S), 8, 3)


def test_budget(monkeypatch):
    S = ProjectiveScheme.from_strings(BI)
    with pytest.raises(BudgetExceeded):
        count_points(S, 11, budget=100)
    monkeypatch.setenv("QPT_BUDGET", "50")
    assert enumeration_budget() == 50
    with pytest.raises(BudgetExceeded):
        count_points(S, 5)
    assert projective_space_size(5, 3) == 1 + 5 + 25 + 125


def test_fixed_locus_on_bi():
    S = ProjectiveScheme.from_strings(BI)
    fl = fixed_locus(S, LinearInvolution.from_rows([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]]))
    assert fl.count == 4 and fl.per_eigenspace == [4, 0]
    assert quotient_genus(1, fl.count) == 0


def test_fixed_locus_oracle_on_bi():
    # w = 0: two conics in the plane meeting in four distinct points, none at z = 0
    x, y, z = sympy.symbols("x y z")
    f1 = 2 * x ** 2 + 3 * x * y + y * z - z ** 2
    f2 = 4 * x ** 2 - 2 * x * y + y ** 2 - 2 * y * z + 2 * z ** 2
    R = sympy.Poly(sympy.resultant(f1.subs(z, 1), f2.subs(z, 1), x), y)
    assert R.degree() == 4 and sympy.degree(sympy.gcd(R, R.diff(y)), y) == 0
    assert sympy.resultant(f1.subs(z, 0), f2.subs(z, 0), x).subs(y, 1) != 0


def test_etale_involution():
    S = ProjectiveScheme.from_strings(["x^2+y^2+z^2+2w^2", "x^2-y^2+3z^2-w^2"])
    fl = fixed_locus(S, LinearInvolution.from_rows([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]]))
    assert fl.count == 0 and quotient_genus(1, 0) == 1


def test_involution_errors():
    S = ProjectiveScheme.from_strings(BI)
    with pytest.raises(FixedLocusError):
        fixed_locus(S, LinearInvolution.from_rows([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))
    with pytest.raises(InvalidInput):
        LinearInvolution.from_rows([[1, 1], [0, 1]])
    with pytest.raises(InvalidInput):
        fixed_locus(S, LinearInvolution.from_rows([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))
    with pytest.raises(InvalidInput):
        LinearInvolution.from_rows([[0, 2], [1, 0]]).eigenspaces()


@pytest.mark.parametrize("g,r,expected", [(1, 4, 0), (3, 0, 2), (5, 8, 1), (1, 0, 1), (5, 12, 0)])
def test_quotient_genus(g, r, expected):
    assert quotient_genus(g, r) == expected


@settings(max_examples=100)
@given(st.integers(0, 30), st.integers(0, 70))
def test_quotient_genus_riemann_hurwitz(g, r):
    try:
        h = quotient_genus(g, r)
    except InvalidInput:
        assert (2 * g + 2 - r) % 4 or 2 * g + 2 - r < 0
    else:
        assert 2 * g - 2 == 2 * (2 * h - 2) + r


def test_scheme_file_parsing(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("# comment\nvars: a, b, c\na^2 + b^2 - c^2\n")
    S = ProjectiveScheme.from_file(f)
    assert count_points(S, 5) == 6
    with pytest.raises(FileNotFoundError):
        ProjectiveScheme.from_file(tmp_path / "missing.txt")
