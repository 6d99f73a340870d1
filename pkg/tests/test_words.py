import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from widthlab import ElementSet, InputError, parse_group
from widthlab.words import (
    Constants,
    constants,
    eval_word,
    format_word,
    gamma_word,
    hamidoune_check,
    leq_power_product,
    nilp_comm_check,
    parse_word,
    tau_chain,
    twogensets_check,
    value_set,
    value_set_sampled,
    verbal_subgroup,
    width,
    word_width,
    xi_derivative_check,
)


# -- parsing -------------------------------------------------------------------

def test_parse_examples():
    assert parse_word("[x1,x2]").arity == 2
    assert parse_word("x1^2").arity == 1
    g3 = parse_word("[[x1,x2],x3]")
    assert g3.arity == 3
    assert g3 == gamma_word(3)


def test_parse_errors_carry_position():
    with pytest.raises(InputError) as err:
        parse_word("[x1 x2")
    assert "position" in str(err.value) or "syntax error" in str(err.value)


def test_roundtrip_simple():
    for text in ["[x1,x2]", "x1^2", "x1 x2^-1 (x1 x3)^2", "[[x1,x2],x3]"]:
        w = parse_word(text)
        assert parse_word(format_word(w)) == w


@st.composite
def word_strategy(draw, max_depth=3):
    depth = draw(st.integers(0, max_depth))
    if depth == 0:
        return parse_word(f"x{draw(st.integers(1, 3))}")
    kind = draw(st.sampled_from(["prod", "pow", "comm"]))
    if kind == "prod":
        from widthlab.words import w_prod
        return w_prod(draw(word_strategy(max_depth=depth - 1)),
                      draw(word_strategy(max_depth=depth - 1)))
    if kind == "pow":
        from widthlab.words import w_pow
        e = draw(st.integers(-3, 3).filter(lambda x: x != 0))
        return w_pow(draw(word_strategy(max_depth=depth - 1)), e)
    from widthlab.words import w_comm
    return w_comm(draw(word_strategy(max_depth=depth - 1)),
                  draw(word_strategy(max_depth=depth - 1)))


@given(word_strategy())
@settings(max_examples=60, deadline=None)
def test_roundtrip_random(w):
    assert parse_word(format_word(w)) == w


# -- value sets ------------------------------------------------------------------

def test_value_set_identity_word(sym3):
    vs = value_set(sym3, parse_word("x1"))
    assert vs.size() == 6


def test_value_set_squares_sym3(sym3):
    vs = value_set(sym3, parse_word("x1^2"))
    assert vs.size() == 3           # id and the two 3-cycles


def test_value_set_commutators_alt5(alt5):
    vs = value_set(alt5, parse_word("[x1,x2]"))
    assert vs.size() == 60          # Ore at this order


def test_value_set_closure_properties(sym4):
    vs = value_set(sym4, parse_word("[x1,x2]"))
    ids = set(int(i) for i in vs.ids())
    assert 0 in ids
    assert all(sym4.inv(i) in ids for i in ids)
    for g in range(0, 24, 5):
        assert all(sym4.conj(i, g) in ids for i in ids)


def test_value_set_matches_pointwise_eval(sym3):
    w = parse_word("x1^2 [x2,x1]")
    vs = value_set(sym3, w)
    expect = {eval_word(sym3, w, (a, b))
              for a in range(6) for b in range(6)}
    expect |= {sym3.inv(v) for v in expect}
    expect.add(0)
    assert set(int(i) for i in vs.ids()) == expect


def test_value_set_budget():
    t = parse_group("Sym(4)").table()
    from widthlab.errors import CapacityError
    with pytest.raises(CapacityError):
        value_set(t, parse_word("[x1,[x2,x3]]"), budget=100)
    vs = value_set_sampled(t, parse_word("[x1,[x2,x3]]"), 50, seed=1)
    assert vs.size() >= 1


# -- widths ----------------------------------------------------------------------

def test_width_full_set(alt5):
    full = ElementSet.full(alt5)
    rep = width(alt5, full, full)
    assert rep.width == 1


def test_width_trivial(alt5):
    triv = ElementSet.trivial(alt5)
    rep = width(alt5, triv, triv)
    assert rep.width == 0


def test_width_squares_alt5(alt5):
    rep = word_width(alt5, parse_word("x1^2"))
    assert rep.width == 2
    assert rep.frontier_sizes == [1, 45, 60]
    assert all(a < b for a, b in zip(rep.frontier_sizes,
                                     rep.frontier_sizes[1:]))


def test_width_requires_generating_target(alt5):
    squares = value_set(alt5, parse_word("x1^2"))
    with pytest.raises(InputError):
        width(alt5, squares, ElementSet.trivial(alt5))


def test_verbal_subgroups(sym3):
    assert verbal_subgroup(sym3, parse_word("x1^2")).size() == 3
    assert verbal_subgroup(sym3, parse_word("x1^6")).size() == 1
    ab = parse_group("Cyclic(6)").table()
    assert verbal_subgroup(ab, parse_word("[x1,x2]")).size() == 1


# -- Hamidoune --------------------------------------------------------------------

def test_hamidoune_whole_group(sym3):
    assert hamidoune_check(sym3, ElementSet.full(sym3), 1)


def test_hamidoune_cyclic5():
    t = parse_group("Cyclic(5)").table()
    X = ElementSet.from_ids(t, [0, 1])
    assert hamidoune_check(t, X, 3)


def test_hamidoune_alt4(alt4):
    three_cycles = [i for i in range(12) if alt4.order_of(i) == 3]
    X = ElementSet.from_ids(alt4, [0] + three_cycles[:8])
    assert X.size() == 9
    assert hamidoune_check(alt4, X, 2)


def test_hamidoune_preconditions(sym3):
    X = ElementSet.from_ids(sym3, [0, 1])
    with pytest.raises(InputError):
        hamidoune_check(sym3, X, 1)   # |G| > r|X|


# -- tau chains ---------------------------------------------------------------------

def test_tau_all_identity(alt5):
    taus = tau_chain(alt5, [3, 5, 7], [0, 0, 0])
    assert taus == [0, 0, 0]


def test_tau_single_is_v(alt5):
    assert tau_chain(alt5, [9], [23]) == [23]
    assert xi_derivative_check(alt5, [9], [23], [41])


def test_xi_derivative_random(alt5):
    rnd = random.Random(2)
    for _ in range(40):
        m = rnd.randrange(1, 5)
        g = [rnd.randrange(60) for _ in range(m)]
        v = [rnd.randrange(60) for _ in range(m)]
        x = [rnd.randrange(60) for _ in range(m)]
        assert xi_derivative_check(alt5, g, v, x)


def test_twogensets(sym4):
    rnd = random.Random(3)
    for _ in range(30):
        m = rnd.randrange(1, 4)
        g = [rnd.randrange(24) for _ in range(m)]
        v = [rnd.randrange(24) for _ in range(m)]
        assert twogensets_check(sym4, g, v)
    # v = identity tuple
    assert twogensets_check(sym4, [3, 7], [0, 0])


# -- nilpotent-correction decomposition ----------------------------------------------

def test_nilp_comm_trivial_h(sym3):
    assert nilp_comm_check(sym3, ElementSet.trivial(sym3),
                           sym3.gen_ids, 2)


def test_nilp_comm_heisenberg(heis3):
    assert nilp_comm_check(heis3, ElementSet.full(heis3),
                           heis3.gen_ids, 2)


def test_nilp_comm_dihedral():
    from widthlab import bracket
    t = parse_group("Dihedral(4)").table()
    der = bracket(t, ElementSet.full(t), ElementSet.full(t))
    assert nilp_comm_check(t, der, t.gen_ids, 3)


def test_nilp_comm_precondition(heis3):
    # x's must generate modulo G'
    with pytest.raises(InputError):
        nilp_comm_check(heis3, ElementSet.full(heis3), [0], 2)


# -- constants ------------------------------------------------------------------------

def test_constants_paper_shape():
    c = Constants(D=1, C0=1, M_of_q=1, mu_of_q=Fraction(1, 2))
    out = constants(2, 2, c)
    assert out == {"k": 53, "h1": 159, "z": 48, "Dbar": 6, "k_plain": 17,
                   "h2": 51, "k_prime": 53, "h3": 159}


def test_constants_rejects_bad_inputs():
    with pytest.raises(InputError):
        Constants(D=0)
    with pytest.raises(InputError):
        Constants(mu_of_q=Fraction(2, 3))
    with pytest.raises(InputError):
        constants(1, 2, Constants())


def test_exact_power_comparison():
    assert leq_power_product(7, [(2, 3)])            # 7 <= 8
    assert not leq_power_product(9, [(2, 3)])
    assert leq_power_product(2, [(9, Fraction(1, 2))])      # 2 <= 3
    assert not leq_power_product(4, [(9, Fraction(1, 2))])
    assert leq_power_product(1, [(10, Fraction(-1, 2)), (100, 1)])
