"""Equations over direct powers N = S^r with automorphism actions.

An Actor is an automorphism of S^r given by a factor permutation and
componentwise automorphisms of S, following the indexing convention
x^g(i) = x(^g i)^{g(i)}.  Equation systems (one per factor, plus membership
side conditions) are eliminated and reduced symbolically, twisted
commutators are extracted, and the residual twisted equation in S is solved
by product-set search with witnesses; every solution is re-verified by
direct multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError, InvariantFailure
from .perm import _DTYPE
from .groups import ElementSet, ElementTable, bracket
from .structure import Automorphism
from .gammawords import (
    GammaAssignment,
    GammaWord,
    GLetter,
    GSym,
    extract_k_twisted,
    back_solve_step,
    colour_type,
    gexp_inv,
    gw,
    hat,
    is_balanced,
    leq_Ln,
    support,
)


class Actor:
    """Automorphism of S^r: factor permutation sigma plus components."""

    __slots__ = ("S", "r", "sigma", "comps")

    def __init__(self, S: ElementTable, sigma, comps):
        self.S = S
        self.sigma = np.asarray(sigma, dtype=_DTYPE)
        self.r = self.sigma.shape[0]
        if sorted(self.sigma.tolist()) != list(range(self.r)):
            raise InputError("actor sigma is not a permutation")
        if len(comps) != self.r:
            raise InputError("actor needs one component per factor")
        self.comps = list(comps)

    @staticmethod
    def identity(S, r):
        return Actor(S, np.arange(r, dtype=_DTYPE),
                     [Automorphism.identity(S)] * r)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """x^g with x^g(i) = x(^g i)^{g(i)}."""
        out = np.empty(self.r, dtype=_DTYPE)
        for i in range(self.r):
            out[i] = self.comps[i].apply(int(x[self.sigma[i]]))
        return out

    def compose(self, other: "Actor") -> "Actor":
        """self then other: x^{(self)(other)} = (x^self)^other."""
        sigma = self.sigma[other.sigma]
        comps = [self.comps[other.sigma[i]].compose(other.comps[i])
                 for i in range(self.r)]
        return Actor(self.S, sigma, comps)

    def inverse(self) -> "Actor":
        inv_sigma = np.empty(self.r, dtype=_DTYPE)
        inv_sigma[self.sigma] = np.arange(self.r, dtype=_DTYPE)
        comps = [self.comps[inv_sigma[i]].inverse() for i in range(self.r)]
        return Actor(self.S, inv_sigma, comps)

    def power(self, k: int) -> "Actor":
        if k < 0:
            return self.inverse().power(-k)
        acc = Actor.identity(self.S, self.r)
        base = self
        while k:
            if k & 1:
                acc = acc.compose(base)
            base = base.compose(base)
            k >>= 1
        return acc

    def is_identity(self) -> bool:
        return (bool((self.sigma == np.arange(self.r)).all())
                and all(c.is_identity() for c in self.comps))

    def __eq__(self, other):
        return (isinstance(other, Actor)
                and bool((self.sigma == other.sigma).all())
                and self.comps == other.comps)


@dataclass
class SemisimpleAction:
    """S^r with a list of acting automorphisms."""

    S: ElementTable
    r: int
    actors: list

    def __post_init__(self):
        for a in self.actors:
            if a.r != self.r or a.S is not self.S:
                raise InputError("actor does not match the action")

    def n_identity(self) -> np.ndarray:
        return np.zeros(self.r, dtype=_DTYPE)

    def n_mul(self, x, y) -> np.ndarray:
        return np.array([self.S.mul(int(a), int(b)) for a, b in zip(x, y)],
                        dtype=_DTYPE)

    def n_inv(self, x) -> np.ndarray:
        return self.S.inverses[np.asarray(x, dtype=_DTYPE)]

    def transitive(self, actor_ids) -> bool:
        seen = {0}
        frontier = [0]
        perms = [self.actors[i].sigma for i in actor_ids]
        inv_perms = [self.actors[i].inverse().sigma for i in actor_ids]
        while frontier:
            nxt = []
            for p in perms + inv_perms:
                for i in frontier:
                    j = int(p[i])
                    if j not in seen:
                        seen.add(j)
                        nxt.append(j)
            frontier = nxt
        return len(seen) == self.r


class AmbientElement:
    """Element n * a of the semidirect product N x| <actors>."""

    __slots__ = ("act", "nu", "auto")

    def __init__(self, act: SemisimpleAction, nu, auto: Actor):
        self.act = act
        self.nu = np.asarray(nu, dtype=_DTYPE)
        self.auto = auto

    @staticmethod
    def of_n(act, nu):
        return AmbientElement(act, nu, Actor.identity(act.S, act.r))

    @staticmethod
    def of_actor(act, auto):
        return AmbientElement(act, act.n_identity(), auto)

    def __mul__(self, other: "AmbientElement") -> "AmbientElement":
        conj = self.auto.inverse().apply(other.nu)
        return AmbientElement(self.act, self.act.n_mul(self.nu, conj),
                              self.auto.compose(other.auto))

    def inverse(self) -> "AmbientElement":
        n_inv = self.act.n_inv(self.auto.apply(self.nu))
        return AmbientElement(self.act, n_inv, self.auto.inverse())

    def power(self, k: int) -> "AmbientElement":
        if k < 0:
            return self.inverse().power(-k)
        acc = AmbientElement.of_n(self.act, self.act.n_identity())
        base = self
        while k:
            if k & 1:
                acc = acc * base
            base = base * base
            k >>= 1
        return acc

    def conj_by(self, other: "AmbientElement") -> "AmbientElement":
        return other.inverse() * self * other

    def comm(self, other: "AmbientElement") -> "AmbientElement":
        return self.inverse() * other.inverse() * self * other

    def in_n(self) -> bool:
        return self.auto.is_identity()

    def n_part(self) -> np.ndarray:
        if not self.in_n():
            raise InvariantFailure("ambient element is not in N")
        return self.nu

    def conj_action(self) -> Actor:
        """The automorphism of N induced by conjugation by this element."""
        inner_comps = []
        base = self.auto
        # x^(n a) = (x^n)^a where x^n is inner by each component after
        # permuting: conj by n*a equals (inner by n) then a
        comps = []
        for i in range(self.act.r):
            inner = Automorphism.inner(self.act.S, int(self.nu[self.auto.sigma[i]]))
            comps.append(inner.compose(base.comps[i]))
        return Actor(self.act.S, base.sigma, comps)


# ---------------------------------------------------------------------------
# gamma registry: concrete automorphisms named as abstract generators

class GammaRegistry:
    """Names concrete Aut(S) elements so words stay formal until evaluation."""

    def __init__(self, S: ElementTable):
        self.S = S
        self.by_print = {}
        self.autos = {}
        self._n = 0

    def name_of(self, auto: Automorphism) -> tuple:
        if auto.is_identity():
            return ()
        key = auto.fingerprint()
        if key not in self.by_print:
            name = f"c{self._n}"
            self._n += 1
            self.by_print[key] = name
            self.autos[name] = auto
        return ((self.by_print[key], 1),)

    def eval_map(self) -> dict:
        return dict(self.autos)

    def eval_exp(self, exp) -> Automorphism:
        acc = Automorphism.identity(self.S)
        for name, e in exp:
            a = self.autos[name]
            acc = acc.compose(a if e == 1 else a.inverse())
        return acc


# ---------------------------------------------------------------------------
# equation systems

@dataclass
class HCondition:
    actor_pos: int            # index into the g-list (0-based)
    orbit: tuple              # sorted factor indices
    k: int                    # first member
    beta: Automorphism        # g^{n(orbit)}(k)
    exps: list                # gamma exps of x_i(^{g^j}k), j = 0..n-1
    factors: list             # ^{g^j}k, j = 0..n-1 in traversal order


@dataclass
class EquationSystem:
    act: SemisimpleAction
    g_ids: list
    kappa: np.ndarray
    equations: dict           # s -> GammaWord (right-hand side)
    conditions: list          # HCondition per (i, orbit)
    registry: GammaRegistry
    eliminated: bool = False
    trace: list = field(default_factory=list)

    def var(self, i, s) -> GSym:
        return GSym(f"x{i + 1}({s + 1})", "var", colour=i + 1)

    def u_par(self, i, k) -> GSym:
        return GSym(f"u{i + 1}({k + 1})", "param")

    def k_par(self, s) -> GSym:
        return GSym(f"k({s + 1})", "param")


def build_system(act: SemisimpleAction, g_ids, kappa) -> EquationSystem:
    """The equations kappa(s) = x_1(s)...x_m(s) plus membership conditions."""
    if not act.transitive(g_ids):
        raise InputError(
            "actors must act transitively; split into orbit blocks first")
    kappa = np.asarray(kappa, dtype=_DTYPE)
    if kappa.shape != (act.r,):
        raise InputError("kappa must have one entry per factor")
    registry = GammaRegistry(act.S)
    sys = EquationSystem(act, list(g_ids), kappa, {}, [], registry)
    m = len(g_ids)
    for s in range(act.r):
        sys.equations[s] = GammaWord(
            [GLetter(sys.var(i, s), 1, ()) for i in range(m)])
    for pos, gid in enumerate(g_ids):
        actor = act.actors[gid]
        for orbit in _sigma_orbits(actor.sigma):
            k = orbit[0]
            nlen = len(orbit)
            # traversal ^{g^j} k and component automorphisms g^j(k)
            factors, exps = [], []
            cur = Actor.identity(act.S, act.r)
            for j in range(nlen):
                factors.append(int(cur.sigma[k]))
                exps.append(registry.name_of(cur.comps[k]) if j else ())
                cur = actor.compose(cur)
            beta = cur.comps[k]
            sys.conditions.append(HCondition(pos, tuple(orbit), k, beta,
                                             exps, factors))
    return sys


def _sigma_orbits(sigma):
    r = sigma.shape[0]
    seen = [False] * r
    orbits = []
    for i in range(r):
        if seen[i]:
            continue
        orb = [i]
        seen[i] = True
        j = int(sigma[i])
        while j != i:
            orb.append(j)
            seen[j] = True
            j = int(sigma[j])
        orbits.append(tuple(sorted(orb)))
    return orbits


def eliminate_H(sys: EquationSystem) -> EquationSystem:
    """Solve each membership condition for x_i(k) and substitute it."""
    if sys.eliminated:
        raise InputError("system already eliminated")
    for cond in sys.conditions:
        i = cond.actor_pos
        actor = sys.act.actors[sys.g_ids[i]]
        upar = sys.u_par(i, cond.k)
        beta_name = sys.registry.name_of(cond.beta)
        # x_i(k) = u^-1 u^beta * (prod_{j>=1} x_i(^{g^j}k)^{g^j(k)})^-1
        tail = GammaWord([
            GLetter(sys.var(i, f), 1, e)
            for f, e in zip(cond.factors[1:], cond.exps[1:])])
        repl = gw(GLetter(upar, -1, ()), GLetter(upar, 1, beta_name)) \
            * tail.inv()
        target = sys.equations[cond.k]
        out = []
        hit = False
        vsym = sys.var(i, cond.k)
        for l in target:
            if l.sym == vsym and l.sign == 1 and not hit:
                out.extend(repl.letters)
                hit = True
            else:
                out.append(l)
        if not hit:
            raise InvariantFailure("eliminated variable not found")
        sys.equations[cond.k] = GammaWord(out)
    sys.eliminated = True
    _assert_once_with_inverse(sys)
    return sys


def _assert_once_with_inverse(sys):
    counts = {}
    for s, eq in sys.equations.items():
        for l in eq:
            if l.sym.kind == "var":
                counts.setdefault(l.sym, [0, 0])[0 if l.sign == 1 else 1] += 1
    for sym, (p, m) in counts.items():
        if p != 1 or m != 1:
            raise InvariantFailure(
                f"variable {sym.name} occurs {p}+/{m}- after elimination")
    for s, eq in sys.equations.items():
        if not leq_Ln(colour_type(hat(eq)), len(sys.g_ids), 1):
            raise InvariantFailure("an equation exceeds colour type L_1")


def generic_reduce(eqs: dict, lhs: dict, target, eliminable):
    """Reduce a linked system {key: kappa_key = word} to one equation.

    `eliminable` selects which symbols may be solved for (they must occur
    exactly once with their inverse across the system).  Returns
    (word, trace); trace lists (symbol name, defining word) in order."""
    eqs = dict(eqs)
    trace = []
    while len(eqs) > 1:
        cand = _find_link(eqs, target, eliminable)
        if cand is None:
            raise InvariantFailure(
                "linkage graph disconnected with equations remaining")
        l, sym = cand
        expr = _solve_equation_for(eqs[l], lhs[l], sym)
        trace.append((sym.name, expr))
        eqs[target] = _substitute(eqs[target], sym, expr)
        del eqs[l]
    return eqs[target], trace


def reduce_to_single(sys: EquationSystem, target: int = 0):
    """Apply n-1 substitutions, returning the single reduced equation."""
    if not sys.eliminated:
        raise InputError("eliminate_H must run before reduction")
    lhs = {s: sys.k_par(s) for s in sys.equations}
    word, trace = generic_reduce(sys.equations, lhs, target,
                                 lambda sym: sym.kind == "var")
    sys.trace = trace
    return word, trace


def _find_link(eqs, target, eliminable):
    in_target = set()
    for l in eqs[target]:
        if eliminable(l.sym):
            in_target.add(l.sym)
    best = None
    for s in sorted(eqs):
        if s == target:
            continue
        for l in eqs[s]:
            if eliminable(l.sym) and l.sym in in_target:
                key = (s, l.sym.colour or 0, l.sym.name)
                if best is None or key < best[0]:
                    best = (key, s, l.sym)
    if best is None:
        return None
    return best[1], best[2]


def _solve_equation_for(word, lhs_sym, sym):
    """Solve lhs = word for the unique occurrence of sym."""
    pos = [idx for idx, l in enumerate(word) if l.sym == sym]
    if len(pos) != 1:
        raise InvariantFailure("solved symbol is not unique in equation")
    p = pos[0]
    l = word[p]
    A = word[:p]
    B = word[p + 1:]
    kl = gw(GLetter(lhs_sym, 1, ()))
    if l.sign == 1:
        expr = A.inv() * kl * B.inv()
    else:
        expr = B * kl.inv() * A
    return expr.twist(gexp_inv(l.exp))


def _substitute(word, sym, expr):
    out = []
    for l in word:
        if l.sym == sym:
            rep = expr.twist(l.exp)
            if l.sign == -1:
                rep = rep.inv()
            out.extend(rep.letters)
        else:
            out.append(l)
    return GammaWord(out)


def reduction_stats(sys: EquationSystem, word: GammaWord) -> dict:
    m, n = len(sys.g_ids), sys.act.r
    cycles = sum(len(_sigma_orbits(sys.act.actors[g].sigma))
                 for g in sys.g_ids)
    w = hat(word)
    return {
        "m": m,
        "n": n,
        "sum_cycles": cycles,
        "support": len(support(w)),
        "support_expected": m * n - cycles - (n - 1),
        "balanced": is_balanced(w),
        "colour_type_leq_Ln": leq_Ln(colour_type(w), m, n),
    }


# ---------------------------------------------------------------------------
# twisted width and twisted product solving

def twisted_set(S: ElementTable, alpha: Automorphism,
                beta: Automorphism):
    """T_{alpha,beta}(S,S) as bits plus one (x, y) witness per value."""
    n = S.n
    bits = np.zeros(n, dtype=bool)
    witness = {}
    inv = S.inverses
    a_im = alpha.element_images
    b_im = beta.element_images
    ids = np.arange(n, dtype=_DTYPE)
    for y in range(n):
        yi = int(inv[y])
        yb = int(b_im[y])
        # t(x) = x^-1 y^-1 x^alpha y^beta
        vec = S.mul_vec_scalar(
            S.mul_vec_vec(S.mul_vec_scalar(inv, yi), a_im[ids]), yb)
        for x in range(n):
            v = int(vec[x])
            if not bits[v]:
                bits[v] = True
                witness[v] = (x, y)
    return bits, witness


def is_perfect(S: ElementTable) -> bool:
    full = ElementSet.full(S)
    return bracket(S, full, full) == full


@dataclass
class TwistedWidthReport:
    width: Optional[int]
    covered: bool
    reached_fraction: float
    witness: Optional[list] = None


def twisted_width(S: ElementTable, pairs, witness_for: Optional[int] = None
                  ) -> TwistedWidthReport:
    """Least t with T_1(S,S)...T_t(S,S) = S, by product-set BFS."""
    if not is_perfect(S):
        raise InputError("twisted width needs a perfect (quasisimple) group")
    reached = np.zeros(S.n, dtype=bool)
    reached[0] = True
    chain = []
    for t, (alpha, beta) in enumerate(pairs, start=1):
        bits, wit = twisted_set(S, alpha, beta)
        chain.append((bits, wit))
        prev = reached.copy()
        if t == 1:
            reached = bits.copy()
        else:
            reached = S.set_mul(prev, np.nonzero(bits)[0])
            reached |= prev  # 1 is in every twisted set (x=y=1)
        if reached.all():
            wl = None
            if witness_for is not None:
                wl = solve_product_chain(S, chain, witness_for)
            return TwistedWidthReport(t, True, 1.0, wl)
    return TwistedWidthReport(None, False, float(reached.sum()) / S.n)


def solve_product_chain(S: ElementTable, sets, target: int):
    """Write target = t_1 ... t_k with t_j in the j-th set; returns the
    stored witness of each t_j.  Each entry of `sets` is (bits, witnesses)."""
    reach = [dict()]
    reach[0][0] = None
    for bits, wit in sets:
        nxt = {}
        ids = np.nonzero(bits)[0]
        for prevval in reach[-1]:
            col = S.left_col(prevval)
            for v in ids:
                nv = int(col[v])
                if nv not in nxt:
                    nxt[nv] = (prevval, int(v))
        reach.append(nxt)
    if target not in reach[-1]:
        raise InvariantFailure(
            f"product-chain shortfall: {len(sets)} factors reach "
            f"{len(reach[-1])} of {S.n} elements")
    out = []
    cur = target
    for j in range(len(sets), 0, -1):
        prevval, v = reach[j][cur]
        out.append(sets[j - 1][1][v])
        cur = prevval
    out.reverse()
    return out


def solve_twisted_chain(S: ElementTable, autopairs, target: int):
    """Write target as T_1(x1,y1)...T_k(xk,yk); returns [(x_i, y_i)]."""
    sets = [twisted_set(S, a, b) for a, b in autopairs]
    return solve_product_chain(S, sets, target)


# ---------------------------------------------------------------------------
# the constructive commutator-equation solver

@dataclass
class CommutatorSolution:
    u: list                    # m tuples in N (np arrays)
    x: list                    # the membership witnesses x_i = [u_i, g_i]
    stats: dict


def solve_commutator_equation(act: SemisimpleAction, g_ids, kappa,
                              d_eff: int = 1) -> CommutatorSolution:
    """Solve prod_i [u_i, g_i] = kappa constructively (proof pipeline)."""
    kappa = np.asarray(kappa, dtype=_DTYPE)
    m, n = len(g_ids), act.r
    cycles = sum(len(_sigma_orbits(act.actors[g].sigma)) for g in g_ids)
    if cycles > (m - 2) * n - 2 * d_eff:
        raise InputError(
            f"cycle count {cycles} exceeds (m-2)n - 2D = "
            f"{(m - 2) * n - 2 * d_eff}")
    sys = build_system(act, g_ids, kappa)
    eliminate_H(sys)
    word, trace = reduce_to_single(sys)
    stats = reduction_stats(sys, word)
    if not stats["balanced"] or not stats["colour_type_leq_Ln"]:
        raise InvariantFailure("reduced equation fails §-shape checks")
    ext = extract_k_twisted(word, d_eff, m, n)
    assign = _base_assignment(sys, ext.residual)
    mu_val = assign.eval(ext.residual)
    S = act.S
    target = S.mul(int(kappa[0]), S.inv(mu_val))
    autopairs = [(sys.registry.eval_exp(a), sys.registry.eval_exp(b))
                 for a, b in ext.twists]
    tw = solve_twisted_chain(S, autopairs, target)
    # back-substitute extraction steps in reverse order
    for step, (xv, yv) in zip(ext.steps[::-1], tw[::-1]):
        back_solve_step(step, assign, int(xv), int(yv))
    _replay_trace(sys, assign, trace)
    u, x = _recover_membership(sys, assign)
    _verify_commutator_solution(act, g_ids, kappa, u)
    return CommutatorSolution(u=u, x=x, stats=stats)


def _base_assignment(sys, residual) -> GammaAssignment:
    values = {}
    for s in range(sys.act.r):
        values[sys.k_par(s).name] = int(sys.kappa[s])
    for cond in sys.conditions:
        values[sys.u_par(cond.actor_pos, cond.k).name] = 0
    for symb in support(hat(residual)):
        values[symb.name] = 0
    return GammaAssignment(sys.act.S, values, sys.registry.eval_map())


def _replay_trace(sys, assign, trace):
    for name, expr in reversed(trace):
        assign.values[name] = assign.eval(expr)


def _recover_membership(sys, assign):
    """Values of all x_i, then the u_i in N with x_i = [u_i, g_i]."""
    S = sys.act.S
    m = len(sys.g_ids)
    xs = [np.zeros(sys.act.r, dtype=_DTYPE) for _ in range(m)]
    # eliminated x_i(k) from the membership identity with u_i(k) preset
    for cond in sys.conditions:
        i = cond.actor_pos
        uval = assign.values[sys.u_par(i, cond.k).name]
        beta = cond.beta
        acc = S.mul(S.inv(uval), beta.apply(uval))
        tail = 0
        for f, e in zip(cond.factors[1:], cond.exps[1:]):
            xval = assign.values[sys.var(i, f).name]
            tail = S.mul(tail, sys.registry.eval_exp(e).apply(xval))
        assign.values[sys.var(i, cond.k).name] = S.mul(acc, S.inv(tail))
    for i in range(m):
        for s in range(sys.act.r):
            xs[i][s] = assign.values[sys.var(i, s).name]
    us = []
    for pos, gid in enumerate(sys.g_ids):
        actor = sys.act.actors[gid]
        u = np.zeros(sys.act.r, dtype=_DTYPE)
        for cond in sys.conditions:
            if cond.actor_pos != pos:
                continue
            u[cond.k] = assign.values[sys.u_par(pos, cond.k).name]
            # x(f) = u(f)^-1 u(^g f)^{g(f)}, so walk the orbit forward:
            # u(sigma[f]) = g(f)^-1 applied to u(f) * x(f)
            f = cond.k
            for _ in range(len(cond.orbit) - 1):
                xval = assign.values[sys.var(pos, f).name]
                nxt = actor.comps[f].inverse().apply(
                    sys.act.S.mul(int(u[f]), xval))
                f = int(actor.sigma[f])
                u[f] = nxt
        us.append(u)
    return us, xs


def _verify_commutator_solution(act, g_ids, kappa, us):
    prod = AmbientElement.of_n(act, act.n_identity())
    for u, gid in zip(us, g_ids):
        ue = AmbientElement.of_n(act, u)
        ge = AmbientElement.of_actor(act, act.actors[gid])
        prod = prod * ue.comm(ge)
    if not prod.in_n() or not (prod.n_part() == kappa).all():
        raise InvariantFailure("commutator solution failed re-verification")
