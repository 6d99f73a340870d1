import numpy as np
import pytest

from widthlab import (
    CapacityError,
    ElementSet,
    InputError,
    bracket,
    bracket_omega,
    catalog_groups,
    coset_action,
    maximal_subgroups,
    mu,
    normal_subgroups,
    parse_group,
    subgroup,
)
from widthlab.groups import (
    Quotient,
    all_subgroups,
    enumerate_group,
    is_abelian_set,
    is_normal,
    is_soluble_set,
    subgroup_table,
)
from widthlab.perm import parse_cycles
from widthlab.structure import (
    Automorphism,
    automorphism_from_ambient,
    find_qmn,
    is_acceptable,
)


# -- enumeration -------------------------------------------------------------

@pytest.mark.parametrize("spec,order", [
    ("Alt(5)", 60), ("Cyclic(1)", 1), ("Sym(4)", 24), ("Dihedral(6)", 12),
    ("Heisenberg(3)", 27), ("SL(2,3)", 24), ("SL(2,5)", 120),
    ("SL(2,4)", 60), ("Direct(Sym(3),Cyclic(2))", 12),
    ("FromGenerators(4; (0 1 2), (0 1)(2 3))", 12),
])
def test_orders(spec, order):
    assert parse_group(spec).table().n == order


def test_enumeration_limit():
    g = parse_group("Sym(5)")
    with pytest.raises(CapacityError):
        enumerate_group(g, limit=50)


def test_identity_is_id_zero(sym4):
    assert sym4.element(0).is_identity()


def test_closure_idempotence(sym4):
    regen = parse_group("FromGenerators(4; " + ", ".join(
        str(sym4.element(i)) for i in range(sym4.n)) + ")")
    assert regen.table().n == sym4.n


def test_mul_inv_consistency(alt5):
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b = int(rng.integers(60)), int(rng.integers(60))
        assert alt5.element(a) * alt5.element(b) \
            == alt5.element(alt5.mul(a, b))
        assert alt5.mul(a, alt5.inv(a)) == 0


# -- subgroups ---------------------------------------------------------------

def test_subgroup_trivial_seed(sym4):
    s = subgroup(sym4, ElementSet.trivial(sym4), "generated")
    assert s.size() == 1


def test_normal_closure_three_cycle(sym4):
    c3 = sym4.lookup(parse_cycles("(0 1 2)", 4))
    nc = subgroup(sym4, ElementSet.from_ids(sym4, [c3]), "normal_closure")
    assert nc.size() == 12


def test_cyclic_subgroup_of_alt5(alt5):
    five = next(i for i in range(60) if alt5.order_of(i) == 5)
    s = subgroup(alt5, ElementSet.from_ids(alt5, [five]), "generated")
    assert s.size() == 5


def test_lagrange_on_outputs(alt5, sym4):
    for t in (alt5, sym4):
        for n in normal_subgroups(t):
            assert t.n % n.size() == 0
        for s in all_subgroups(t):
            assert t.n % s.size() == 0


# -- bracket -----------------------------------------------------------------

def test_bracket_with_trivial(alt5):
    full = ElementSet.full(alt5)
    assert bracket(alt5, full, ElementSet.trivial(alt5)).size() == 1


def test_alt5_perfect(alt5):
    full = ElementSet.full(alt5)
    assert bracket(alt5, full, full) == full


def test_bracket_klein_in_alt4(alt4):
    v = subgroup(alt4, ElementSet.from_ids(
        alt4, [alt4.lookup(parse_cycles("(0 1)(2 3)", 4))]),
        "normal_closure")
    assert bracket(alt4, v, ElementSet.full(alt4)) == v


def test_bracket_oracle_exhaustive(sym4):
    # dual route: generator-commutator closure vs all-pairs enumeration
    full = ElementSet.full(sym4)
    derived = bracket(sym4, full, full)
    comms = {sym4.comm(a, b) for a in range(24) for b in range(24)}
    oracle = subgroup(sym4, ElementSet.from_ids(sym4, comms), "generated")
    assert derived == oracle


def test_bracket_monotone_chain(sym4):
    full = ElementSet.full(sym4)
    prev = full
    for n in range(1, 5):
        cur = bracket(sym4, full, full, n=n)
        assert cur.issubset(prev)
        prev = cur
    omega = bracket_omega(sym4, full, full)
    assert bracket(sym4, omega, full) == omega


def test_bracket_rejects_nonsubgroup(sym4):
    bad = ElementSet.from_ids(sym4, [0, 1, 2])
    if not bad.is_subgroup():
        with pytest.raises(InputError):
            bracket(sym4, bad, ElementSet.full(sym4))


# -- normal subgroup lattice --------------------------------------------------

def test_normals_alt5_simple(alt5):
    assert [n.size() for n in normal_subgroups(alt5)] == [1, 60]


def test_normals_sym3(sym3):
    assert [n.size() for n in normal_subgroups(sym3)] == [1, 3, 6]


def test_normals_trivial_group():
    t = parse_group("Cyclic(1)").table()
    assert [n.size() for n in normal_subgroups(t)] == [1]


def test_normals_sym4(sym4):
    assert [n.size() for n in normal_subgroups(sym4)] == [1, 4, 12, 24]


# -- quasi-minimal normal subgroups -------------------------------------------

def test_qmn_klein(alt4):
    v = subgroup(alt4, ElementSet.from_ids(
        alt4, [alt4.lookup(parse_cycles("(0 1)(2 3)", 4))]),
        "normal_closure")
    rep = find_qmn(alt4, v)
    assert rep.N == v and rep.Z.size() == 1
    assert rep.kind == "soluble-abelian" and rep.p == 2


def test_qmn_alt5(alt5):
    rep = find_qmn(alt5, ElementSet.full(alt5))
    assert rep.kind == "quasi-semisimple"
    assert rep.N.size() == 60 and rep.Z.size() == 1
    assert len(rep.factors) == 1


def test_qmn_trivial_rejected(alt5):
    with pytest.raises(InputError):
        find_qmn(alt5, ElementSet.trivial(alt5))


def test_qmn_requires_h_eq_hg(sym4):
    # H = Sym(4) has [H,G] = Alt(4) != H
    with pytest.raises(InputError):
        find_qmn(sym4, ElementSet.full(sym4))


# -- acceptability -------------------------------------------------------------

def test_acceptable_trivial(alt5):
    ok, wit = is_acceptable(alt5, ElementSet.trivial(alt5))
    assert ok and wit is None


def test_acceptable_alt5_false(alt5):
    ok, (z, n) = is_acceptable(alt5, ElementSet.full(alt5))
    assert not ok
    assert z.size() == 1 and n.size() == 60


def test_acceptable_klein(alt4):
    v = subgroup(alt4, ElementSet.from_ids(
        alt4, [alt4.lookup(parse_cycles("(0 1)(2 3)", 4))]),
        "normal_closure")
    ok, _ = is_acceptable(alt4, v)
    assert ok


def test_acceptable_s_times_s():
    t = parse_group("Direct(Alt(5),Alt(5))").table()
    ok, (z, n) = is_acceptable(t, ElementSet.full(t))
    assert not ok


# -- maximal subgroups and mu ---------------------------------------------------

def test_maximal_alt5(alt5):
    idx = sorted({alt5.n // m.size() for m in maximal_subgroups(alt5)})
    assert idx == [5, 6, 10]
    m = mu(alt5)
    assert (m.min_index, m.order) == (5, 60)
    assert abs(m.value - 0.3930) < 1e-3


def test_maximal_sym3(sym3):
    idx = sorted({sym3.n // m.size() for m in maximal_subgroups(sym3)})
    assert idx == [2, 3]


def test_maximal_cyclic_prime():
    t = parse_group("Cyclic(5)").table()
    ms = maximal_subgroups(t)
    assert len(ms) == 1 and ms[0].size() == 1
    assert mu(t).min_index == 5 and mu(t).value == 1.0


# -- automorphisms ---------------------------------------------------------------

def test_automorphism_identity_conjugator(sym5):
    a5 = subgroup(sym5, ElementSet.from_ids(
        sym5, [sym5.lookup(parse_cycles("(0 1 2)", 5)),
               sym5.lookup(parse_cycles("(0 1 2 3 4)", 5))]), "generated")
    aut = automorphism_from_ambient(sym5, a5, parse_cycles("id", 5))
    assert aut.is_identity()


def test_automorphism_outer(sym5):
    a5 = subgroup(sym5, ElementSet.from_ids(
        sym5, [sym5.lookup(parse_cycles("(0 1 2)", 5)),
               sym5.lookup(parse_cycles("(0 1 2 3 4)", 5))]), "generated")
    aut = automorphism_from_ambient(sym5, a5, parse_cycles("(0 1)", 5))
    assert aut.check_full()
    sub, _ = subgroup_table(sym5, a5)
    assert all(Automorphism.inner(sub, g) != aut for g in range(sub.n))


def test_automorphism_inner_matches_conjugation(alt5):
    g = 7
    aut = Automorphism.inner(alt5, g)
    for x in range(0, 60, 7):
        assert aut.apply(x) == alt5.conj(x, g)


def test_automorphism_bad_conjugator(sym5):
    # a point stabilizer is not normalized by everything
    stab = subgroup(sym5, ElementSet.from_ids(
        sym5, [sym5.lookup(parse_cycles("(1 2)", 5)),
               sym5.lookup(parse_cycles("(1 2 3 4)", 5))]), "generated")
    assert stab.size() == 24
    with pytest.raises(InputError):
        automorphism_from_ambient(sym5, stab, parse_cycles("(0 1)", 5))


def test_automorphism_full_product_preservation(sym4):
    aut = Automorphism.inner(sym4, 5)
    assert aut.check_full()


# -- quotients and coset actions -------------------------------------------------

def test_quotient_sym4_by_klein(sym4):
    v = subgroup(sym4, ElementSet.from_ids(
        sym4, [sym4.lookup(parse_cycles("(0 1)(2 3)", 4))]),
        "normal_closure")
    q = Quotient(sym4, v)
    assert q.table.n == 6
    # projection is a homomorphism
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b = int(rng.integers(24)), int(rng.integers(24))
        assert q.project(sym4.mul(a, b)) \
            == q.table.mul(q.project(a), q.project(b))


def test_coset_action_transitive(alt5):
    m = next(s for s in maximal_subgroups(alt5) if s.size() == 12)
    g = coset_action(alt5, m)
    assert g.degree == 5
    assert g.table().n in (60,)


def test_fixed_point_lemma_on_catalog():
    # every transitive coset action with n >= 2: some generator moves
    # at least n/d points
    from widthlab.soluble import fixed_point_property
    from fractions import Fraction
    for g in catalog_groups(max_order=130):
        t = g.table()
        d = max(len(g.generators), 1)
        subs = [s for s in all_subgroups(t, limit=200)
                if s.size() < t.n] if t.n <= 130 else []
        for h in subs[:6]:
            act = coset_action(t, h)
            if act.degree < 2:
                continue
            ok, _ = fixed_point_property(act, act.generators, 1,
                                         Fraction(1, d))
            assert ok, (g.spec, h.size())
