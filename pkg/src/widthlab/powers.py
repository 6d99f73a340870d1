"""Power maps over semisimple N = S^r: orbit typing, independent slot
selection via Hall matching, power-twist covers, and the constructive
solver for the q-th power surjectivity statement."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapacityError, InputError, InvariantFailure
from .perm import _DTYPE
from .groups import ElementSet, ElementTable
from .structure import Automorphism
from .matching import hall_matching
from .semisimple import (
    Actor,
    AmbientElement,
    SemisimpleAction,
    build_system,
    eliminate_H,
    reduce_to_single,
    solve_commutator_equation,
    _sigma_orbits,
)
from .gammawords import GammaAssignment, hat, support


# ---------------------------------------------------------------------------
# orbit data

@dataclass
class OrbitData:
    """Typing data for the action of <k_1^q, ..., k_m^q> on the factors."""

    q: int
    dbar: int
    m: int
    r: int
    fix_star: list              # fix*(i) = sorted [j : sigma(k_j)^q fixes i]
    orbits: list                # G_1-orbits (sorted tuples)
    lam: dict                   # orbit -> lambda
    types: dict                 # orbit -> 'I' | 'II'
    i_omega: dict               # type-I orbit -> chosen fixed index


def orbit_data(actors, q: int, dbar: int) -> OrbitData:
    m = len(actors)
    r = actors[0].r
    sig_q = [a.power(q).sigma for a in actors]
    fix_star = [sorted(j for j in range(m) if int(sig_q[j][i]) == i)
                for i in range(r)]
    orbits = _perm_group_orbits(sig_q, r)
    lam, types, i_omega = {}, {}, {}
    for orb in orbits:
        l = m * len(orb) - sum(len(fix_star[i]) for i in orb)
        lam[orb] = l
        if l < dbar * len(orb):
            types[orb] = "I"
            cands = [i for i in orb if len(fix_star[i]) > m - dbar]
            if not cands:
                raise InvariantFailure("type-I orbit without eligible index")
            i_omega[orb] = min(cands)
        else:
            types[orb] = "II"
    return OrbitData(q=q, dbar=dbar, m=m, r=r, fix_star=fix_star,
                     orbits=orbits, lam=lam, types=types, i_omega=i_omega)


def _perm_group_orbits(sigmas, r):
    seen = [False] * r
    orbits = []
    for start in range(r):
        if seen[start]:
            continue
        orb = {start}
        frontier = [start]
        seen[start] = True
        while frontier:
            nxt = []
            for p in sigmas:
                for i in frontier:
                    for j in (int(p[i]), int(np.nonzero(p == i)[0][0])):
                        if not seen[j]:
                            seen[j] = True
                            orb.add(j)
                            nxt.append(j)
            frontier = nxt
        orbits.append(tuple(sorted(orb)))
    return orbits


def _cycle_of(sigma, i):
    """Canonical cycle of i (rotated to start at its least member)."""
    cyc = [i]
    j = int(sigma[i])
    while j != i:
        cyc.append(j)
        j = int(sigma[j])
    k = cyc.index(min(cyc))
    return tuple(cyc[k:] + cyc[:k])


def select_independent(data: OrbitData, actors, M: int):
    """Per type-I orbit, an interval J and a slot set I of size M such that
    the selected (orbit, slot) pairs are pairwise independent."""
    q, dbar, m = data.q, data.dbar, data.m
    z = M * dbar * (q + dbar)
    if m < z:
        raise InputError(f"need m >= z(q) = {z} slots, have {m}")
    type_one = [o for o in data.orbits if data.types[o] == "I"]
    if not type_one:
        return {}
    chosen = {o: set() for o in type_one}
    n_intervals = M * dbar
    bounds = [round(t * m / n_intervals) for t in range(n_intervals + 1)]
    for t in range(n_intervals):
        X = range(bounds[t], bounds[t + 1])
        men = set()
        knows = {}
        for o in type_one:
            i0 = data.i_omega[o]
            ms = []
            for j in X:
                if j in data.fix_star[i0]:
                    cyc = _cycle_of(actors[j].sigma, i0)
                    ms.append((cyc, j))
            knows[o] = ms
            men.update(ms)
        status, result = hall_matching(sorted(men), type_one, knows)
        if status != "matching":
            raise InvariantFailure(
                f"Hall matching failed on interval {t}: violator {result}")
        for o, (cyc, j) in result.items():
            chosen[o].add(j)
    out = {}
    for o in type_one:
        i0 = data.i_omega[o]
        got = sorted(chosen[o])
        best = None
        for J in _intervals_of(data.fix_star[i0]):
            inside = [j for j in got if J[0] <= j <= J[-1]]
            if len(inside) >= M and (best is None or len(inside) > len(best[1])):
                best = (J, inside)
        if best is None:
            raise InvariantFailure(
                f"no fix* interval holds {M} selected slots for orbit {o}")
        out[o] = (best[0], best[1][:M])
    _assert_independent(data, actors, out)
    return out


def _intervals_of(sorted_js):
    """Maximal runs of consecutive integers."""
    runs = []
    cur = []
    for j in sorted_js:
        if cur and j == cur[-1] + 1:
            cur.append(j)
        else:
            if cur:
                runs.append(cur)
            cur = [j]
    if cur:
        runs.append(cur)
    return runs


def _assert_independent(data, actors, selection):
    pairs = [(o, j) for o, (_, I) in selection.items() for j in I]
    for a in range(len(pairs)):
        for b in range(a + 1, len(pairs)):
            (o1, j1), (o2, j2) = pairs[a], pairs[b]
            if j1 != j2:
                continue
            c1 = _cycle_of(actors[j1].sigma, data.i_omega[o1])
            c2 = _cycle_of(actors[j2].sigma, data.i_omega[o2])
            if set(c1) & set(c2):
                raise InvariantFailure("selected pairs are not independent")


# ---------------------------------------------------------------------------
# power-twist covers

def comm_set_with(S: ElementTable, gamma: Automorphism):
    """[S, gamma] = {x^-1 x^gamma} as bits with one witness per value."""
    ids = np.arange(S.n, dtype=_DTYPE)
    vals = S.mul_vec_vec(S.inverses[ids], gamma.element_images[ids])
    bits = np.zeros(S.n, dtype=bool)
    wit = {}
    for x in range(S.n):
        v = int(vals[x])
        if not bits[v]:
            bits[v] = True
            wit[v] = x
    return bits, wit


@dataclass
class PowerCoverReport:
    found: bool
    twists: Optional[list]      # inner conjugators a_j (S ids)
    slots_used: int
    reached_fraction: float


def power_twist_cover(S: ElementTable, betas, q_divisors,
                      seed: int = 0, trials: int = 400) -> PowerCoverReport:
    """Inner twists a_j with S = prod_j [S, (inner(a_j) beta_j)^{q_j}].

    Greedy coverage growth first, then seeded random restarts; the final
    cover is re-verified by an exact product-set computation."""
    if len(betas) != len(q_divisors):
        raise InputError("one divisor per automorphism")
    M = len(betas)
    sets_for = []
    for beta, qj in zip(betas, q_divisors):
        per_a = {}
        for a in range(S.n):
            gamma = _auto_power(Automorphism.inner(S, a).compose(beta), qj)
            per_a[a] = comm_set_with(S, gamma)[0]
        sets_for.append(per_a)
    # greedy
    choice = []
    reached = np.zeros(S.n, dtype=bool)
    reached[0] = True
    for j in range(M):
        best_a, best_cov = None, -1
        for a in range(S.n):
            cov = int(S.set_mul(reached, np.nonzero(sets_for[j][a])[0]).sum())
            if cov > best_cov:
                best_a, best_cov = a, cov
        choice.append(best_a)
        reached = S.set_mul(reached, np.nonzero(sets_for[j][best_a])[0])
        if reached.all():
            break
    if reached.all():
        choice += [0] * (M - len(choice))
        return PowerCoverReport(True, choice, M, 1.0)
    rng = random.Random(seed)
    best_frac = float(reached.sum()) / S.n
    for _ in range(trials):
        cand = [rng.randrange(S.n) for _ in range(M)]
        cur = np.zeros(S.n, dtype=bool)
        cur[0] = True
        for j in range(M):
            cur = S.set_mul(cur, np.nonzero(sets_for[j][cand[j]])[0])
        if cur.all():
            return PowerCoverReport(True, cand, M, 1.0)
        best_frac = max(best_frac, float(cur.sum()) / S.n)
    return PowerCoverReport(False, None, M, best_frac)


def _auto_power(a: Automorphism, k: int) -> Automorphism:
    acc = Automorphism.identity(a.table)
    base = a
    while k:
        if k & 1:
            acc = acc.compose(base)
        base = base.compose(base)
        k >>= 1
    return acc


# ---------------------------------------------------------------------------
# the q-commutator construction (per-orbit solving)

@dataclass
class QCommData:
    """Data realizing N = prod_j [N, (y_j k_j)^q] with per-orbit machinery."""

    act: SemisimpleAction
    k_actors: list
    q: int
    y: list                     # y_j in N
    g_actors: list              # actors of (y_j k_j)^q
    data: OrbitData
    selection: dict

    def solve(self, kappa, d_eff: int = 1):
        """Write kappa = prod_j [v_j, g_j]; returns the v_j tuples."""
        return _solve_orbitwise(self.act, self.g_actors, kappa,
                                self.data, self.selection, d_eff)


def q_comm_construct(act: SemisimpleAction, k_ids, q: int,
                     dbar: int, M: int, seed: int = 0,
                     d_eff: int = 1) -> QCommData:
    k_actors = [act.actors[i] for i in k_ids]
    data = orbit_data(k_actors, q, dbar)
    selection = select_independent(data, k_actors, M) if any(
        t == "I" for t in data.types.values()) else {}
    y = [act.n_identity() for _ in k_actors]
    for o, (J, I) in selection.items():
        i0 = data.i_omega[o]
        betas, qjs = [], []
        for j in I:
            cyc = _cycle_of(k_actors[j].sigma, i0)
            e = len(cyc)
            if q % e:
                raise InvariantFailure("cycle length does not divide q")
            P = k_actors[j].power(e)
            betas.append(P.comps[i0])
            qjs.append(q // e)
        cover = power_twist_cover(act.S, betas, qjs, seed=seed)
        if not cover.found:
            raise CapacityError(
                f"power-twist cover not found for orbit {o} "
                f"(reached {cover.reached_fraction:.3f})")
        for j, a in zip(I, cover.twists):
            if int(y[j][i0]) != 0:
                raise InvariantFailure("slot clash while building y")
            y[j][i0] = a
    g_actors = []
    for yj, kj in zip(y, k_actors):
        amb = AmbientElement.of_n(act, yj) * AmbientElement.of_actor(act, kj)
        g_actors.append(amb.power(q).conj_action())
    # re-check the per-orbit coverage promise (S-omega)
    for o, (J, I) in selection.items():
        i0 = data.i_omega[o]
        reached = np.zeros(act.S.n, dtype=bool)
        reached[0] = True
        for j in J:
            if int(g_actors[j].sigma[i0]) != i0:
                raise InvariantFailure("g_j moves the chosen factor")
            bits, _ = comm_set_with(act.S, g_actors[j].comps[i0])
            reached = act.S.set_mul(reached, np.nonzero(bits)[0])
        if not reached.all():
            raise InvariantFailure(
                "selected slots do not cover S on a type-I orbit")
    return QCommData(act=act, k_actors=k_actors, q=q, y=y,
                     g_actors=g_actors, data=data, selection=selection)


def _restrict_action(act: SemisimpleAction, actors, orbit):
    """Restrict actors to an invariant set of factors (re-indexed)."""
    index = {f: i for i, f in enumerate(orbit)}
    sub = []
    for a in actors:
        sigma = np.array([index[int(a.sigma[f])] for f in orbit],
                         dtype=_DTYPE)
        comps = [a.comps[f] for f in orbit]
        sub.append(Actor(act.S, sigma, comps))
    return SemisimpleAction(act.S, len(orbit), sub), index


def _solve_orbitwise(act, g_actors, kappa, data, selection, d_eff):
    """kappa = prod_j [v_j, g_j] solved orbit by orbit.

    sigma(G) = sigma(G_1), so the orbits are exactly those of the typing
    data: type II goes through the commutator-equation solver, type I
    through the designated-interval block."""
    kappa = np.asarray(kappa, dtype=_DTYPE)
    m = len(g_actors)
    v = [act.n_identity() for _ in range(m)]
    for orbit in data.orbits:
        sub_act, index = _restrict_action(act, g_actors, orbit)
        kap_sub = np.array([int(kappa[f]) for f in orbit], dtype=_DTYPE)
        if data.types[orbit] == "II":
            sol = solve_commutator_equation(sub_act, list(range(m)),
                                            kap_sub, d_eff=d_eff)
            vs = sol.u
        else:
            J, _ = selection[orbit]
            vs = _solve_type_one(sub_act, kap_sub,
                                 index[data.i_omega[orbit]], J)
        for j in range(m):
            for f in orbit:
                v[j][f] = vs[j][index[f]]
    _verify_qcomm_solution(act, g_actors, kappa, v)
    return v


def _solve_type_one(sub_act, kappa, i0, J):
    """Solve the orbit system through the designated u-block interval."""
    from .semisimple import _base_assignment, _replay_trace, \
        _recover_membership, solve_product_chain
    m = len(sub_act.actors)
    sys = build_system(sub_act, list(range(m)), kappa)
    eliminate_H(sys)
    word, trace = reduce_to_single(sys, target=i0)
    block_names = [sys.u_par(i, i0).name for i in J]
    pos = [idx for idx, l in enumerate(word) if l.sym.name in block_names]
    if len(pos) != 2 * len(J) or pos != list(range(pos[0], pos[0] + len(pos))):
        raise InvariantFailure("designated u-block is not contiguous")
    first, last = pos[0], pos[-1]
    assign = _base_assignment(sys, word)
    prefix_val = assign.eval(word[:first])
    suffix_val = assign.eval(word[last + 1:])
    S = sub_act.S
    target = S.mul(S.inv(prefix_val),
                   S.mul(int(kappa[i0]), S.inv(suffix_val)))
    conds = {c.actor_pos: c for c in sys.conditions
             if c.actor_pos in J and c.orbit == (i0,)}
    sets = []
    for i in J:
        bits, wit = comm_set_with(S, conds[i].beta)
        sets.append((bits, wit))
    wits = solve_product_chain(S, sets, target)
    for i, u in zip(J, wits):
        assign.values[sys.u_par(i, i0).name] = int(u)
    if assign.eval(word) != int(kappa[i0]):
        raise InvariantFailure("u-block solution does not close the equation")
    _replay_trace(sys, assign, trace)
    us, _ = _recover_membership(sys, assign)
    return us


def _verify_qcomm_solution(act, g_actors, kappa, v):
    prod = AmbientElement.of_n(act, act.n_identity())
    for vj, gj in zip(v, g_actors):
        ve = AmbientElement.of_n(act, vj)
        ge = AmbientElement.of_actor(act, gj)
        prod = prod * ve.comm(ge)
    if not prod.in_n() or not (prod.n_part() == kappa).all():
        raise InvariantFailure("q-commutator solution failed re-verification")


# ---------------------------------------------------------------------------
# the power-equation solver

def psi_value(act: SemisimpleAction, h_actors, a_tuples, q: int):
    """psi(a) with prod (a_i h_i)^q = psi(a) * prod h_i^q."""
    lhs = AmbientElement.of_n(act, act.n_identity())
    rhs = AmbientElement.of_n(act, act.n_identity())
    for a, h in zip(a_tuples, h_actors):
        ah = AmbientElement.of_n(act, a) * AmbientElement.of_actor(act, h)
        lhs = lhs * ah.power(q)
        rhs = rhs * AmbientElement.of_actor(act, h).power(q)
    out = lhs * rhs.inverse()
    return out.n_part()


@dataclass
class PowerSolution:
    a: list
    mode: str                   # 'constructive' | 'brute'
    qdata: Optional[QCommData] = None


def solve_power_equation(act: SemisimpleAction, h_ids, q: int, kappa,
                         dbar: int = 6, M: int = 1, seed: int = 0,
                         d_eff: int = 1,
                         brute_budget: int = 500_000) -> PowerSolution:
    """Solve psi(a) = kappa constructively; small cases fall back to
    exhaustive search when the cover machinery is unavailable."""
    kappa = np.asarray(kappa, dtype=_DTYPE)
    h_actors = [act.actors[i] for i in h_ids]
    m = len(h_actors)
    try:
        a = _solve_power_constructive(act, h_actors, q, kappa, dbar, M,
                                      seed, d_eff)
        _verify_power(act, h_actors, a, q, kappa)
        return PowerSolution(a=a, mode="constructive")
    except (InputError, CapacityError, InvariantFailure) as exc:
        if act.S.n ** (act.r * m) > brute_budget:
            raise
        a = _solve_power_brute(act, h_actors, q, kappa, brute_budget)
        if a is None:
            raise CapacityError(
                f"psi is not surjective onto this kappa (exhausted); "
                f"constructive path failed with: {exc}") from exc
        _verify_power(act, h_actors, a, q, kappa)
        return PowerSolution(a=a, mode="brute")


def _solve_power_constructive(act, h_actors, q, kappa, dbar, M, seed, d_eff):
    m = len(h_actors)
    amb_h = [AmbientElement.of_actor(act, h) for h in h_actors]
    one = AmbientElement.of_n(act, act.n_identity())
    # tau_i(h) = h_{i-1}^{-q} ... h_1^{-q}
    tau_h = [one]
    for i in range(1, m):
        tau_h.append(amb_h[i - 1].power(q).inverse() * tau_h[i - 1])
    k_actors = [
        (amb_h[i].conj_by(tau_h[i])).inverse().conj_action()
        for i in range(m)]
    k_act = SemisimpleAction(act.S, act.r, k_actors)
    qdata = q_comm_construct(k_act, list(range(m)), q, dbar, M,
                             seed=seed, d_eff=d_eff)
    # recursive definition of the base点 x
    xs = []
    amb_x = []
    tau_xh = one
    for i in range(m):
        xi_corr = tau_xh * tau_h[i].inverse()      # xi_i(x_1..x_{i-1})
        y_amb = AmbientElement.of_n(act, qdata.y[i])
        y_conj = y_amb.conj_by(tau_h[i].inverse()).conj_by(xi_corr.inverse())
        xi_amb = (amb_h[i].comm(xi_corr.inverse())
                  * y_conj.inverse()).conj_by(amb_h[i].inverse())
        x_i = xi_amb.n_part()
        xs.append(x_i)
        amb_x.append(xi_amb)
        tau_xh = (AmbientElement.of_n(act, x_i) * amb_h[i]).power(q) \
            .inverse() * tau_xh
    psi_x = psi_value(act, h_actors, xs, q)
    target = act.n_mul(kappa, act.n_inv(psi_x))
    aprime = qdata.solve(target, d_eff=d_eff)
    # b_i = a'_i^{tau_i(xh)^{-1}}, a_i = x_i^{b_i} [b_i, h_i^{-1}]
    tau_xh_list = [one]
    for i in range(1, m):
        tau_xh_list.append(
            (AmbientElement.of_n(act, xs[i - 1]) * amb_h[i - 1]).power(q)
            .inverse() * tau_xh_list[i - 1])
    a_out = []
    for i in range(m):
        b = AmbientElement.of_n(act, aprime[i]).conj_by(
            tau_xh_list[i].inverse())
        a_i = (AmbientElement.of_n(act, xs[i]).conj_by(b)
               * b.comm(amb_h[i].inverse()))
        a_out.append(a_i.n_part())
    return a_out


def _verify_power(act, h_actors, a, q, kappa):
    got = psi_value(act, h_actors, a, q)
    if not (got == kappa).all():
        raise InvariantFailure("power solution failed re-verification")


def _solve_power_brute(act, h_actors, q, kappa, budget):
    m = len(h_actors)
    n = act.S.n
    total = n ** (act.r * m)
    if total > budget:
        raise CapacityError(f"brute-force space {total} exceeds {budget}")
    digits = [0] * (act.r * m)
    while True:
        a = [np.array(digits[j * act.r:(j + 1) * act.r], dtype=_DTYPE)
             for j in range(m)]
        if (psi_value(act, h_actors, a, q) == kappa).all():
            return a
        i = len(digits) - 1
        while i >= 0:
            digits[i] += 1
            if digits[i] < n:
                break
            digits[i] = 0
            i -= 1
        if i < 0:
            return None
