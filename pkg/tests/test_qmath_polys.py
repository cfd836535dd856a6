import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from quadpts.polys import parse_expression, parse_hyperelliptic, parse_quadratic_form, quadratic_form_string
from quadpts.qmath import (
    determinant,
    diagonalize_symmetric,
    is_square_in_qp,
    kernel,
    mat_mul,
    rank,
    squarefree_part,
    transpose,
    valuation,
)
from quadpts.zmod_gl2 import InvalidInput

small = st.integers(-6, 6)


@settings(max_examples=100, deadline=None)
@given(st.lists(small, min_size=16, max_size=16))
def test_determinant_and_kernel(vals):
    A = [[Fraction(v) for v in vals[4 * i:4 * i + 4]] for i in range(4)]
    assert determinant(A) == oracles.frac_det(A)
    assert round(np.linalg.det(np.array(vals, dtype=float).reshape(4, 4))) == determinant(A)
    K = kernel(A)
    assert len(K) == 4 - rank(A)
    for v in K:
        assert all(sum(r[j] * v[j] for j in range(4)) == 0 for r in A)


@settings(max_examples=100, deadline=None)
@given(st.lists(small, min_size=10, max_size=10))
def test_diagonalization_is_a_congruence(vals):
    it = iter(vals)
    A = [[Fraction(0)] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(i, 4):
            A[i][j] = A[j][i] = Fraction(next(it))
    diag, P = diagonalize_symmetric(A)
    D = mat_mul(mat_mul(transpose(P), A), P)
    assert all(D[i][j] == (diag[i] if i == j else 0) for i in range(4) for j in range(4))
    assert determinant(P) != 0


@given(st.integers(-10**6, 10**6).filter(bool), st.integers(1, 10**4))
def test_squarefree_and_valuation(n, d):
    q = Fraction(n, d)
    s = squarefree_part(q)
    assert (q / s) > 0
    num, den = (q / s).numerator, (q / s).denominator
    assert int(round(num ** 0.5)) ** 2 == num and int(round(den ** 0.5)) ** 2 == den
    assert valuation(q, 2) == oracles._val(abs(n), 2) - oracles._val(d, 2)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_padic_squares_by_residues(p):
    # a unit u is a p-adic square iff it is a square mod p (mod 8 for p = 2)
    M = 8 if p == 2 else p
    sq = {(x * x) % M for x in range(M)}
    for u in range(1, 60):
        if u % p == 0:
            continue
        assert is_square_in_qp(u, p) == (u % M in sq)
        assert is_square_in_qp(u * p * p, p) == is_square_in_qp(u, p)
        assert not is_square_in_qp(u * p, p)


def test_parse_quadratic_forms():
    A, names = parse_quadratic_form("4x^2-2xy+y^2-2yz+2z^2", 3)
    assert names == ("x", "y", "z")
    assert A == [[4, -1, 0], [-1, 1, -1], [0, -1, 2]]
    assert quadratic_form_string(A, names) == "4x^2-2xy+y^2-2yz+2z^2"
    for text in ["2x^2+3xy+yz-z^2+w^2", "16x^2+3y^2-4yz+4z^2+2w^2", "xw-yz"]:
        B, n = parse_quadratic_form(text, 4)
        assert quadratic_form_string(B, n) == text
    with pytest.raises(InvalidInput):
        parse_quadratic_form("x^3+y^2", 3)
    with pytest.raises(InvalidInput):
        parse_expression("q^2+1")


def test_parse_hyperelliptic():
    assert parse_hyperelliptic("y^2 = -(65536x^4+128)") == [-128, 0, 0, 0, -65536]
    assert parse_hyperelliptic("y^2=x^3-2x") == [0, -2, 0, 1]
    with pytest.raises(InvalidInput):
        parse_hyperelliptic("y^3 = x")


def test_gram_symmetry_random_forms():
    for coeffs in itertools.islice(itertools.product(range(-2, 3), repeat=6), 0, 15625, 97):
        a, b, c, d, e, f = coeffs
        text = f"{a}*x^2+{b}*y^2+{c}*z^2+{d}*x*y+{e}*x*z+{f}*y*z"
        if not any(coeffs):
            continue
        A, _ = parse_quadratic_form(text, 3)
        v = (2, -1, 3)
        direct = a * 4 + b * 1 + c * 9 + d * -2 + e * 6 + f * -3
        assert sum(A[i][j] * v[i] * v[j] for i in range(3) for j in range(3)) == direct
