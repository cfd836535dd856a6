"""Parsing of polynomial strings such as ``4x^2-2xy+y^2`` or ``y^2 = x^3+1``."""
from __future__ import annotations

from fractions import Fraction

import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from .zmod_gl2 import InvalidInput

_TRANSFORMS = standard_transformations + (implicit_multiplication_application, convert_xor)
CANONICAL_VARS = ("x", "y", "z", "w")
_SYMBOLS = {name: sympy.Symbol(name) for name in ("x", "y", "z", "w", "u", "v", "t")}


def parse_expression(text: str, variables=()) -> sympy.Expr:
    """Expand a polynomial string; ``variables`` adds names beyond x, y, z, w, u, v, t."""
    text = text.strip()
    if not text:
        raise InvalidInput("empty polynomial")
    if "=" in text:
        lhs, rhs = text.split("=", 1)
        return parse_expression(lhs, variables) - parse_expression(rhs, variables)
    local = dict(_SYMBOLS)
    local.update({name: sympy.Symbol(name) for name in variables})
    try:
        expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMS)
    except Exception as exc:  # sympy raises a zoo of exception types
        raise InvalidInput(f"cannot parse {text!r}: {exc}") from exc
    bad = {str(s) for s in expr.free_symbols} - set(local)
    if bad:
        raise InvalidInput(f"unknown variables {sorted(bad)} in {text!r}")
    return sympy.expand(expr)


def gram_matrix(expr, variables) -> list:
    """Symmetric Gram matrix of a homogeneous quadratic form."""
    syms = [_SYMBOLS[v] if isinstance(v, str) else v for v in variables]
    poly = sympy.Poly(expr, *syms)
    if not poly.is_homogeneous or poly.total_degree() != 2:
        raise InvalidInput(f"{expr} is not a homogeneous quadratic form")
    n = len(syms)
    A = [[Fraction(0)] * n for _ in range(n)]
    for monom, coeff in poly.terms():
        c = Fraction(int(sympy.numer(coeff)), int(sympy.denom(coeff)))
        idx = [i for i, e in enumerate(monom) for _ in range(e)]
        i, j = idx
        if i == j:
            A[i][i] += c
        else:
            A[i][j] += c / 2
            A[j][i] += c / 2
    return A


def parse_quadratic_form(text: str, nvars: int | None = None) -> tuple[list, tuple]:
    """Gram matrix and variable names of a form given as a string.

    Variables are taken in the order x, y, z, w; absent ones are padded in that
    order until ``nvars`` variables are present.
    """
    expr = parse_expression(text)
    present = {str(s) for s in expr.free_symbols}
    names = [v for v in CANONICAL_VARS if v in present]
    if nvars is not None:
        if len(names) > nvars:
            raise InvalidInput(f"{text!r} has more than {nvars} variables")
        for v in CANONICAL_VARS:
            if len(names) >= nvars:
                break
            if v not in names:
                names.append(v)
        names.sort(key=CANONICAL_VARS.index)
    return gram_matrix(expr, names), tuple(names)


def quadratic_form_string(A, names=CANONICAL_VARS) -> str:
    """Compact string with monomials in the order x^2, xy, xz, ..., y^2, ..."""
    out = ""
    n = len(A)
    for i in range(n):
        for j in range(i, n):
            c = Fraction(A[i][j]) * (1 if i == j else 2)
            if c == 0:
                continue
            mono = f"{names[i]}^2" if i == j else f"{names[i]}{names[j]}"
            mag = abs(c)
            coef = "" if mag == 1 else (str(mag) if mag.denominator == 1 else f"({mag})")
            sign = "-" if c < 0 else ("+" if out else "")
            out += f"{sign}{coef}{mono}"
    return out or "0"


def parse_hyperelliptic(text: str) -> list[int]:
    """Integer coefficients (constant term first) of f for ``y^2 = f(x)``."""
    expr = parse_expression(text) if "=" in text else None
    y, x = _SYMBOLS["y"], _SYMBOLS["x"]
    if expr is None:
        raise InvalidInput("expected an equation y^2 = f(x)")
    poly_y = sympy.Poly(expr, y)
    if poly_y.degree() != 2 or poly_y.coeff_monomial(y) != 0:
        raise InvalidInput(f"{text!r} is not of the form y^2 = f(x)")
    lead = poly_y.coeff_monomial(y ** 2)
    if lead.free_symbols or lead == 0:
        raise InvalidInput(f"{text!r} is not of the form y^2 = f(x)")
    f = sympy.expand(-poly_y.coeff_monomial(1) / lead)
    if f.free_symbols - {x}:
        raise InvalidInput(f"f(x) involves other variables in {text!r}")
    coeffs = sympy.Poly(f, x).all_coeffs()[::-1]
    out = []
    for c in coeffs:
        if not c.is_integer:
            raise InvalidInput(f"non-integer coefficient {c} in {text!r}")
        out.append(int(c))
    return out
