import random

import numpy as np
import pytest

from widthlab import parse_group
from widthlab.errors import InputError, InvariantFailure
from widthlab.gammawords import colour_type, hat, is_balanced, leq_Ln, support
from widthlab.perm import _DTYPE
from widthlab.structure import Automorphism
from widthlab.semisimple import (
    Actor,
    AmbientElement,
    SemisimpleAction,
    build_system,
    eliminate_H,
    reduce_to_single,
    reduction_stats,
    solve_commutator_equation,
    solve_product_chain,
    twisted_set,
    twisted_width,
)
from widthlab.suites import prop91_configuration


def swap_actor(t, c0, c1):
    return Actor(t, np.array([1, 0], dtype=_DTYPE),
                 [Automorphism.inner(t, c0), Automorphism.inner(t, c1)])


def ident_actor(t, c0, c1):
    return Actor(t, np.array([0, 1], dtype=_DTYPE),
                 [Automorphism.inner(t, c0), Automorphism.inner(t, c1)])


# -- actor algebra ------------------------------------------------------------

def test_actor_compose_matches_apply(alt5):
    rnd = random.Random(0)
    for _ in range(20):
        a = swap_actor(alt5, rnd.randrange(60), rnd.randrange(60))
        b = ident_actor(alt5, rnd.randrange(60), rnd.randrange(60))
        x = np.array([rnd.randrange(60), rnd.randrange(60)], dtype=_DTYPE)
        assert (a.compose(b).apply(x) == b.apply(a.apply(x))).all()
        assert (a.inverse().apply(a.apply(x)) == x).all()
        assert (a.power(3).apply(x)
                == a.apply(a.apply(a.apply(x)))).all()


def test_ambient_group_laws(alt5):
    rnd = random.Random(1)
    act = SemisimpleAction(alt5, 2, [])
    els = []
    for _ in range(6):
        nu = np.array([rnd.randrange(60), rnd.randrange(60)], dtype=_DTYPE)
        auto = swap_actor(alt5, rnd.randrange(60), rnd.randrange(60))
        els.append(AmbientElement(act, nu, auto))
    for a in els[:3]:
        for b in els[3:]:
            prod = a * b
            # associativity and inverse laws through the n-part
            assert ((a * b).inverse().auto.sigma
                    == (b.inverse() * a.inverse()).auto.sigma).all()
            lhs = (a * b).inverse() * (a * b)
            assert lhs.in_n() and (lhs.n_part() == 0).all()


def test_actor_conjugation_action(alt5):
    rnd = random.Random(2)
    act = SemisimpleAction(alt5, 2, [])
    nu = np.array([7, 9], dtype=_DTYPE)
    auto = swap_actor(alt5, 3, 5)
    g = AmbientElement(act, nu, auto)
    conj = g.conj_action()
    for _ in range(10):
        x = np.array([rnd.randrange(60), rnd.randrange(60)], dtype=_DTYPE)
        expect = (g.inverse() * AmbientElement.of_n(act, x) * g)
        assert expect.in_n()
        assert (conj.apply(x) == expect.n_part()).all()


# -- system building ----------------------------------------------------------

def test_build_single_factor(alt5):
    act = SemisimpleAction(alt5, 1, [Actor.identity(alt5, 1)])
    sys = build_system(act, [0], np.array([5], dtype=_DTYPE))
    assert len(sys.equations) == 1
    assert len(sys.conditions) == 1
    assert len(sys.equations[0]) == 1


def test_build_swap_condition(alt5):
    a = swap_actor(alt5, 5, 17)
    act = SemisimpleAction(alt5, 2, [a, swap_actor(alt5, 3, 4)])
    sys = build_system(act, [0, 1], np.array([0, 0], dtype=_DTYPE))
    cond = sys.conditions[0]
    assert cond.orbit == (0, 1) and cond.k == 0
    # beta = g^2(0): composed component maps, checked by hand
    g2 = a.compose(a)
    assert cond.beta == g2.comps[0]


def test_build_requires_transitive(alt5):
    act = SemisimpleAction(alt5, 2, [ident_actor(alt5, 1, 2)])
    with pytest.raises(InputError):
        build_system(act, [0], np.array([0, 0], dtype=_DTYPE))


def test_eliminate_invariants(alt5):
    act = SemisimpleAction(alt5, 2, [swap_actor(alt5, 5, 0),
                                     swap_actor(alt5, 0, 17),
                                     swap_actor(alt5, 3, 7)])
    sys = build_system(act, [0, 1, 2], np.array([4, 9], dtype=_DTYPE))
    eliminate_H(sys)
    with pytest.raises(InputError):
        eliminate_H(sys)
    # every equation has colour type <= L_1 (checked internally too)
    for s, eq in sys.equations.items():
        assert leq_Ln(colour_type(hat(eq)), 3, 1)


def test_reduce_single_equation(alt5):
    act = SemisimpleAction(alt5, 1, [Actor.identity(alt5, 1),
                                     Actor.identity(alt5, 1)])
    sys = build_system(act, [0, 1], np.array([3], dtype=_DTYPE))
    eliminate_H(sys)
    word, trace = reduce_to_single(sys)
    assert trace == []


def test_reduce_swap_support_count(alt5):
    actors = [swap_actor(alt5, 5, 0), swap_actor(alt5, 0, 17),
              ident_actor(alt5, 3, 7)]
    act = SemisimpleAction(alt5, 2, actors)
    sys = build_system(act, [0, 1, 2], np.array([4, 9], dtype=_DTYPE))
    eliminate_H(sys)
    word, trace = reduce_to_single(sys)
    stats = reduction_stats(sys, word)
    # m=3, n=2, cycles = 1 + 1 + 2: support = 6 - 4 - 1 = 1
    assert stats["sum_cycles"] == 4
    assert stats["support"] == stats["support_expected"] == 1
    assert stats["balanced"] and stats["colour_type_leq_Ln"]
    assert len(trace) == 1


def test_reduce_three_cycle_shift(alt5):
    shift = Actor(alt5, np.array([1, 2, 0], dtype=_DTYPE),
                  [Automorphism.inner(alt5, c) for c in (3, 5, 7)])
    actors = [shift, shift, shift, Actor.identity(alt5, 3)]
    act = SemisimpleAction(alt5, 3, actors)
    sys = build_system(act, [0, 1, 2, 3],
                       np.array([1, 2, 3], dtype=_DTYPE))
    eliminate_H(sys)
    word, trace = reduce_to_single(sys)
    stats = reduction_stats(sys, word)
    assert len(trace) == 2
    assert stats["colour_type_leq_Ln"]
    assert stats["support"] == stats["support_expected"]


def test_reduce_trace_replay(alt5):
    """The reduced equation is a faithful consequence of the system."""
    rnd = random.Random(4)
    actors = [swap_actor(alt5, 5, 0), swap_actor(alt5, 0, 17),
              swap_actor(alt5, 3, 7), ident_actor(alt5, 11, 2)]
    act = SemisimpleAction(alt5, 2, actors)
    from widthlab.gammawords import GammaAssignment
    for _ in range(20):
        kappa = np.array([rnd.randrange(60), rnd.randrange(60)],
                         dtype=_DTYPE)
        sys = build_system(act, [0, 1, 2, 3], kappa)
        eliminate_H(sys)
        word, trace = reduce_to_single(sys)
        values = {}
        for s in range(2):
            values[sys.k_par(s).name] = 0  # placeholder, fixed below
        for cond in sys.conditions:
            values[sys.u_par(cond.actor_pos, cond.k).name] = \
                rnd.randrange(60)
        for s, eq in sys.equations.items():
            for l in eq:
                if l.sym.kind == "var":
                    values.setdefault(l.sym.name, rnd.randrange(60))
        ga = GammaAssignment(alt5, values, sys.registry.eval_map())
        # recover eliminated variables and the true kappa components
        for cond in sys.conditions:
            i = cond.actor_pos
            uval = ga.values[sys.u_par(i, cond.k).name]
            acc = alt5.mul(alt5.inv(uval), cond.beta.apply(uval))
            tail = 0
            for f, e in zip(cond.factors[1:], cond.exps[1:]):
                xval = ga.values[sys.var(i, f).name]
                tail = alt5.mul(tail, sys.registry.eval_exp(e).apply(xval))
            ga.values[sys.var(i, cond.k).name] = alt5.mul(
                acc, alt5.inv(tail))
        for s in range(2):
            acc = 0
            for i in range(4):
                acc = alt5.mul(acc, ga.values[sys.var(i, s).name])
            ga.values[sys.k_par(s).name] = acc
        assert ga.eval(word) == ga.values[sys.k_par(0).name]
        for name, expr in trace:
            assert ga.values[name] == ga.eval(expr)


# -- twisted widths -----------------------------------------------------------

def test_twisted_width_identity_pairs(alt5):
    ident = Automorphism.identity(alt5)
    rep = twisted_width(alt5, [(ident, ident)])
    assert rep.width == 1 and rep.covered


def test_twisted_width_matches_commutator_width(alt5):
    from widthlab.words import parse_word, word_width
    ident = Automorphism.identity(alt5)
    rep = twisted_width(alt5, [(ident, ident), (ident, ident)])
    w = word_width(alt5, parse_word("[x1,x2]"))
    assert rep.width == w.width


def test_twisted_width_sl25():
    t = parse_group("SL(2,5)").table()
    ident = Automorphism.identity(t)
    rep = twisted_width(t, [(ident, ident)])
    assert rep.width == 1


def test_twisted_width_rejects_imperfect():
    t = parse_group("Cyclic(2)").table()
    ident = Automorphism.identity(t)
    with pytest.raises(InputError):
        twisted_width(t, [(ident, ident)])


def test_twisted_set_witnesses(alt5):
    alpha = Automorphism.inner(alt5, 9)
    beta = Automorphism.inner(alt5, 23)
    bits, wit = twisted_set(alt5, alpha, beta)
    for v, (x, y) in list(wit.items())[:30]:
        val = alt5.mul(alt5.mul(alt5.inv(x), alt5.inv(y)),
                       alt5.mul(alpha.apply(x), beta.apply(y)))
        assert val == v


def test_product_chain_solver(alt5):
    alpha = Automorphism.inner(alt5, 9)
    sets = [twisted_set(alt5, alpha, Automorphism.identity(alt5)),
            twisted_set(alt5, Automorphism.identity(alt5), alpha)]
    for target in range(0, 60, 7):
        wits = solve_product_chain(alt5, sets, target)
        acc = 0
        for (bits, wmap), (x, y) in zip(sets, wits):
            pass
        # recompute the chain value
        (x1, y1), (x2, y2) = wits
        v1 = alt5.mul(alt5.mul(alt5.inv(x1), alt5.inv(y1)),
                      alt5.mul(alpha.apply(x1), y1))
        v2 = alt5.mul(alt5.mul(alt5.inv(x2), alt5.inv(y2)),
                      alt5.mul(x2, alpha.apply(y2)))
        assert alt5.mul(v1, v2) == target


# -- the solver ------------------------------------------------------------------

def test_solver_identity_kappa(alt5):
    act = prop91_configuration()
    sol = solve_commutator_equation(act, list(range(6)),
                                    np.array([0, 0], dtype=_DTYPE))
    assert len(sol.u) == 6


def test_solver_count_precondition(alt5):
    act = SemisimpleAction(alt5, 2, [swap_actor(alt5, 0, 0),
                                     swap_actor(alt5, 5, 0),
                                     swap_actor(alt5, 0, 17),
                                     swap_actor(alt5, 3, 7)])
    with pytest.raises(InputError):
        solve_commutator_equation(act, [0, 1, 2, 3],
                                  np.array([1, 2], dtype=_DTYPE))


def test_solver_random_kappas(alt5):
    act = prop91_configuration()
    rnd = random.Random(8)
    for _ in range(40):
        kappa = np.array([rnd.randrange(60), rnd.randrange(60)],
                         dtype=_DTYPE)
        sol = solve_commutator_equation(act, list(range(6)), kappa)
        # verification happens inside; membership witnesses exposed
        for u, x in zip(sol.u, sol.x):
            assert x.shape == (2,)
