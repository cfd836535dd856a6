import itertools

import pytest
from hypothesis import given, strategies as st

import oracles
from quadpts.zmod_gl2 import (
    InvalidInput,
    admissible,
    close_subgroup,
    conjugacy_equal,
    conjugate,
    format_subgroup_line,
    gl2_level,
    group_order,
    index_in_gl2,
    mat_det,
    mat_inv,
    mat_mul,
    parse_subgroup_line,
    sl2_order,
    sl2_part,
)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8, 9])
def test_group_orders_match_enumeration(n):
    assert group_order(n) == len(oracles.all_gl2(n))
    assert sl2_order(n) == len(oracles.all_sl2(n))


@given(st.integers(2, 12), st.lists(st.integers(0, 143), min_size=8, max_size=8))
def test_multiplication_and_inverse(n, vals):
    x = tuple(v % n for v in vals[:4])
    y = tuple(v % n for v in vals[4:])
    assert mat_mul(x, y, n) == oracles.mul(x, y, n)
    assert mat_det(mat_mul(x, y, n), n) == (mat_det(x, n) * mat_det(y, n)) % n
    if oracles.gcd(mat_det(x, n), n) == 1:
        assert mat_mul(x, mat_inv(x, n), n) == (1 % n, 0, 0, 1 % n)


def test_parse_roundtrip_and_errors():
    H = parse_subgroup_line("8; [[1,1],[0,1]]; [[3,0],[0,5]]")
    assert parse_subgroup_line(format_subgroup_line(H)) == H
    for bad in ("", "x; [[1,0],[0,1]]", "8; [[1,0],[0]]"):
        with pytest.raises(InvalidInput):
            parse_subgroup_line(bad)


GROUPS = [
    "32; [[1,12],[8,31]]; [[11,23],[16,1]]; [[13,9],[16,31]]; [[25,3],[0,3]]",
    "16; [[3,6],[14,13]]; [[1,4],[14,15]]; [[11,14],[14,5]]; [[13,15],[6,7]]",
    "8; [[1,2],[0,1]]; [[3,0],[0,5]]; [[-1,0],[0,-1]]; [[1,0],[0,3]]",
    "9; [[1,3],[0,1]]; [[2,0],[0,5]]; [[1,0],[3,1]]; [[2,0],[0,1]]",
]


@pytest.mark.parametrize("line", GROUPS[2:])
def test_level_against_kernel_oracle(line):
    H = parse_subgroup_line(line)
    assert gl2_level(H) == oracles.level_by_kernel(H.elements, H.modulus)


@pytest.mark.parametrize("line", GROUPS[2:])
def test_closure_matches_oracle(line):
    H = parse_subgroup_line(line)
    assert H.elements == oracles.generate(list(H.generators), H.modulus)


def test_index_and_sl2_part_sizes():
    H = parse_subgroup_line(GROUPS[2])
    assert index_in_gl2(H) * H.order == group_order(8)
    G = sl2_part(H)
    assert all(mat_det(x, 8) == 1 for x in G.elements)
    assert G.order == sum(1 for x in H.elements if oracles.det(x, 8) == 1)


def test_admissibility():
    borel = parse_subgroup_line("5; [[2,0],[0,1]]; [[1,0],[0,2]]; [[1,1],[0,1]]")
    assert admissible(borel)
    split_sl2 = parse_subgroup_line("5; [[1,1],[0,1]]; [[-1,0],[0,-1]]")
    assert not admissible(split_sl2)  # det not surjective


def test_conjugation_preserves_class():
    H = parse_subgroup_line(GROUPS[2])
    g = (1, 1, 2, 3)
    K = conjugate(H, g)
    assert conjugacy_equal(H, K)
    assert K.order == H.order and gl2_level(K) == gl2_level(H)
    brute = frozenset(oracles.mul(oracles.mul(g, h, 8), oracles.inverse(g, 8), 8) for h in H.elements)
    assert K.elements == brute


def test_trivial_generator_list_gives_identity():
    H = close_subgroup([(1, 0, 0, 1)], 4)
    assert H.order == 1 and H.elements == frozenset({(1, 0, 0, 1)})
    assert len(list(itertools.islice(H.elements, 2))) == 1
