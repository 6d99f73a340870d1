import numpy as np
import pytest
from hypothesis import given, strategies as st

from widthlab.errors import InputError
from widthlab.perm import Permutation, format_cycles, parse_cycles


def perm_strategy(degree=6):
    return st.permutations(range(degree)).map(
        lambda xs: Permutation(np.array(xs)))


def test_compose_left_to_right():
    a = parse_cycles("(0 1 2)", 3)
    b = parse_cycles("(0 1)", 3)
    assert (a * b).images.tolist() == [b.images[a.images[i]]
                                       for i in range(3)]


def test_conjugate_example():
    # conjugate((0 1 2), (0 1)) on 3 points -> (0 2 1)
    x = parse_cycles("(0 1 2)", 3)
    y = parse_cycles("(0 1)", 3)
    assert format_cycles(x.conjugate(y)) == "(0 2 1)"


def test_inverse_three_cycle():
    assert format_cycles(parse_cycles("(0 1 2)", 3).inverse()) == "(0 2 1)"


def test_commutator_identity_case():
    ident = Permutation.identity(4)
    b = parse_cycles("(0 1 2 3)", 4)
    assert ident.commutator(b).is_identity()


def test_degree_mismatch_rejected():
    with pytest.raises(InputError):
        parse_cycles("(0 1)", 2) * parse_cycles("(0 1)", 3)


def test_parse_cycles_formats():
    assert parse_cycles("(0 1 2)(3 4)", 5).moved_points() == 5
    assert parse_cycles("(0,1,2)", 4) == parse_cycles("(0 1 2)", 4)
    assert parse_cycles("id", 3).is_identity()
    with pytest.raises(InputError):
        parse_cycles("(0 1)(1 2)", 3)
    with pytest.raises(InputError):
        parse_cycles("(0 9)", 3)


@given(perm_strategy(), perm_strategy())
def test_inverse_of_product(a, b):
    assert (a * b).inverse() == b.inverse() * a.inverse()


@given(perm_strategy())
def test_double_inverse(a):
    assert a.inverse().inverse() == a


@given(perm_strategy(), perm_strategy())
def test_conjugation_is_homomorphism(a, b):
    c = parse_cycles("(0 1 2 3 4 5)", 6)
    assert (a * b).conjugate(c) == a.conjugate(c) * b.conjugate(c)


@given(perm_strategy())
def test_cycle_roundtrip(a):
    assert parse_cycles(format_cycles(a), 6) == a
