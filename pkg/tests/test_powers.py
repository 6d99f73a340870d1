import random
from itertools import combinations_with_replacement

import numpy as np
import pytest

from widthlab import parse_group
from widthlab.errors import CapacityError, InputError
from widthlab.matching import hall_matching, matching_exists_brute
from widthlab.perm import _DTYPE
from widthlab.structure import Automorphism
from widthlab.semisimple import Actor, SemisimpleAction
from widthlab.powers import (
    orbit_data,
    power_twist_cover,
    psi_value,
    q_comm_construct,
    select_independent,
    solve_power_equation,
)


# -- Hall matching ----------------------------------------------------------------

def test_matching_empty():
    status, m = hall_matching([], [], {})
    assert status == "matching" and m == {}


def test_matching_complete_3x3():
    men = ["a", "b", "c"]
    women = [1, 2, 3]
    status, m = hall_matching(men, women, {w: men for w in women})
    assert status == "matching"
    assert len(set(m.values())) == 3


def test_matching_deficiency_witness():
    status, bad = hall_matching(["a"], [1, 2], {1: ["a"], 2: ["a"]})
    assert status == "deficient"
    assert bad == {1, 2}


def test_matching_against_brute_small():
    rnd = random.Random(0)
    for w in range(1, 5):
        for m in range(1, 5):
            for _ in range(60):
                masks = [rnd.randrange(1 << m) for _ in range(w)]
                knows = {i: [j for j in range(m) if masks[i] >> j & 1]
                         for i in range(w)}
                status, _ = hall_matching(list(range(m)), list(range(w)),
                                          knows)
                assert (status == "matching") \
                    == matching_exists_brute(masks, m)


# -- orbit data --------------------------------------------------------------------

def test_orbit_data_r1_all_type_one(alt5):
    actors = [Actor(alt5, np.array([0], dtype=_DTYPE),
                    [Automorphism.inner(alt5, i)]) for i in (3, 5, 7, 9)]
    data = orbit_data(actors, 2, 6)
    assert data.orbits == [(0,)]
    assert data.types[(0,)] == "I"
    assert data.i_omega[(0,)] == 0
    assert data.lam[(0,)] == 0


def test_orbit_data_type_two(alt5):
    # q = 3 with swaps: sigma(k^3) = swap, nothing fixed, lambda = 2m;
    # type II needs lambda >= dbar * |orbit|, i.e. m >= 6 here
    swap = np.array([1, 0], dtype=_DTYPE)
    actors = [Actor(alt5, swap, [Automorphism.identity(alt5)] * 2)
              for _ in range(8)]
    data = orbit_data(actors, 3, 6)
    assert data.types[(0, 1)] == "II"
    few = orbit_data(actors[:4], 3, 6)
    assert few.types[(0, 1)] == "I"


def test_select_independent_needs_z(alt5):
    actors = [Actor(alt5, np.array([0], dtype=_DTYPE),
                    [Automorphism.identity(alt5)])] * 10
    data = orbit_data(actors, 2, 6)
    with pytest.raises(InputError):
        select_independent(data, actors, 2)


def test_select_independent_slots(alt5):
    m = 2 * 6 * 8
    actors = [Actor(alt5, np.array([0], dtype=_DTYPE),
                    [Automorphism.inner(alt5, i % 60)])
              for i in range(m)]
    data = orbit_data(actors, 2, 6)
    sel = select_independent(data, actors, 2)
    (J, I), = sel.values()
    assert len(I) == 2
    assert all(j in data.fix_star[0] for j in I)


# -- power twist covers ---------------------------------------------------------------

def test_cover_alt5_q1_single():
    t = parse_group("Alt(5)").table()
    ident = Automorphism.identity(t)
    rep = power_twist_cover(t, [ident, ident], [1, 1], seed=0)
    assert rep.found


def test_cover_alt5_q2():
    t = parse_group("Alt(5)").table()
    ident = Automorphism.identity(t)
    rep = power_twist_cover(t, [ident] * 3, [2] * 3, seed=0)
    assert rep.found
    rep1 = power_twist_cover(t, [ident], [2], seed=0)
    assert not rep1.found and rep1.reached_fraction < 1.0


def test_cover_validates_lengths():
    t = parse_group("Alt(5)").table()
    with pytest.raises(InputError):
        power_twist_cover(t, [Automorphism.identity(t)], [2, 2])


# -- the power equation solver -----------------------------------------------------------

def _inner_actors(t, r, m, seed):
    rnd = random.Random(seed)
    if r == 1:
        return [Actor(t, np.array([0], dtype=_DTYPE),
                      [Automorphism.inner(t, rnd.randrange(t.n))])
                for _ in range(m)]
    swap = np.array([1, 0], dtype=_DTYPE)
    return [Actor(t, swap, [Automorphism.inner(t, rnd.randrange(t.n)),
                            Automorphism.inner(t, rnd.randrange(t.n))])
            for _ in range(m)]


def test_power_solver_r1(alt5):
    m = 2 * 6 * 8
    act = SemisimpleAction(alt5, 1, _inner_actors(alt5, 1, m, 1))
    sol = solve_power_equation(act, list(range(m)), 2,
                               np.array([37], dtype=_DTYPE),
                               dbar=6, M=2, seed=0)
    assert sol.mode == "constructive"


def test_power_solver_r2_q3(alt5):
    m = 2 * 6 * 9
    act = SemisimpleAction(alt5, 2, _inner_actors(alt5, 2, m, 2))
    sol = solve_power_equation(act, list(range(m)), 3,
                               np.array([3, 48], dtype=_DTYPE),
                               dbar=6, M=2, seed=0)
    assert sol.mode == "constructive"


def test_power_solver_m1_brute(alt5):
    act = SemisimpleAction(alt5, 1, [Actor.identity(alt5, 1)])
    sq = alt5.power(14, 2)
    sol = solve_power_equation(act, [0], 2, np.array([sq], dtype=_DTYPE))
    assert sol.mode == "brute"
    squares = {alt5.power(x, 2) for x in range(60)}
    bad = next(v for v in range(60) if v not in squares)
    with pytest.raises(CapacityError):
        solve_power_equation(act, [0], 2, np.array([bad], dtype=_DTYPE))


def test_power_kappa_identity(alt5):
    act = SemisimpleAction(alt5, 1, [Actor.identity(alt5, 1)])
    sol = solve_power_equation(act, [0], 2, np.array([0], dtype=_DTYPE))
    got = psi_value(act, [act.actors[0]], sol.a, 2)
    assert (got == 0).all()


def test_q_comm_solves_all_orbit_types(alt5):
    rnd = random.Random(3)
    m = 2 * 6 * 8
    actors = _inner_actors(alt5, 2, m, 4)
    act = SemisimpleAction(alt5, 2, actors)
    qd = q_comm_construct(act, list(range(m)), 2, 6, 2, seed=0)
    for _ in range(5):
        kappa = np.array([rnd.randrange(60), rnd.randrange(60)],
                         dtype=_DTYPE)
        vs = qd.solve(kappa)
        assert len(vs) == m
