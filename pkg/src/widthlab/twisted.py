"""Twisted-commutator systems over N = S^r: the constructive solver for
products of T_{alpha,beta} covering N.

Per acting pair the factor equations are reduced per orbit to a single
word, one twisted commutator is extracted (with a class-two nontriviality
certificate), the extracted pair is renamed as fresh letters, and the
global product system is reduced over the per-factor parameters.  The
residual twisted equation in S is solved by product-set search and
everything is back-substituted and re-verified."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, InvariantFailure
from .perm import _DTYPE
from .groups import ElementTable
from .structure import Automorphism
from .gammawords import (
    GammaAssignment,
    GammaWord,
    GLetter,
    GSym,
    back_solve_step,
    extract_twisted,
    gexp_inv,
    gexp_mul,
    gw,
    hat,
    is_balanced,
)
from .semisimple import (
    Actor,
    AmbientElement,
    GammaRegistry,
    SemisimpleAction,
    generic_reduce,
    solve_product_chain,
    twisted_set,
)


# ---------------------------------------------------------------------------
# class-two nontriviality certificate

def theta_class_two(w: GammaWord):
    """Image of a hat word in the free class-two group on (xi, eta), as
    (a, b, c) meaning xi^a eta^b [xi,eta]^c; x-letters map to xi, y to eta."""
    a = b = c = 0
    for l in w:
        if l.sym.kind != "var":
            continue
        ea = l.sign if l.sym.name.startswith("x") else 0
        eb = l.sign if not l.sym.name.startswith("x") else 0
        # (a,b,c)*(ea,eb,0): c gains -b*ea from moving eta^b past xi^ea
        c = c - b * ea
        a += ea
        b += eb
    return a, b, c


# ---------------------------------------------------------------------------
# per-pair orbit systems

@dataclass
class OrbitBlock:
    pair_index: int
    orbit: tuple
    k: int
    step: object                 # ExtractionStep for the U_Delta word
    fresh_x: GSym
    fresh_y: GSym
    trace: list                  # per-orbit substitution trace
    eqs_words: dict              # s -> original E_s right-hand word
    x_val: int = 0               # chosen concrete values for (xi, eta)
    y_val: int = 0


def _pair_orbits(alpha: Actor, beta: Actor):
    r = alpha.r
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
            for p in (alpha.sigma, beta.sigma,
                      alpha.inverse().sigma, beta.inverse().sigma):
                for i in frontier:
                    j = int(p[i])
                    if not seen[j]:
                        seen[j] = True
                        orb.add(j)
                        nxt.append(j)
            frontier = nxt
        orbits.append(tuple(sorted(orb)))
    return orbits


def _xvar(i, s):
    return GSym(f"x{i + 1}.{s + 1}", "var", colour=1)


def _yvar(i, s):
    return GSym(f"y{i + 1}.{s + 1}", "var", colour=2)


def _kpar(i, s):
    return GSym(f"u{i + 1}.{s + 1}", "param")     # kappa_i(s)


def _kconst(s):
    return GSym(f"k.{s + 1}", "param")            # kappa(s)


def _build_pair_equation(registry, alpha, beta, i, s):
    """E_s: kappa_i(s) = x(s)^-1 y(s)^-1 x(^a s)^{a(s)} y(^b s)^{b(s)}."""
    xa = int(alpha.sigma[s])
    yb = int(beta.sigma[s])
    return gw(
        GLetter(_xvar(i, s), -1, ()),
        GLetter(_yvar(i, s), -1, ()),
        GLetter(_xvar(i, xa), 1, registry.name_of(alpha.comps[s])),
        GLetter(_yvar(i, yb), 1, registry.name_of(beta.comps[s])),
    )


def _reduce_pair_orbit(registry, alpha, beta, i, orbit):
    eqs = {s: _build_pair_equation(registry, alpha, beta, i, s)
           for s in orbit}
    lhs = {s: _kpar(i, s) for s in orbit}
    k = orbit[0]
    word, trace = generic_reduce(eqs, lhs, k,
                                 lambda sym: sym.kind == "var")
    w = hat(word)
    if not is_balanced(w):
        raise InvariantFailure("per-orbit word lost balance")
    a, b, c = theta_class_two(w)
    if (a, b) != (0, 0) or c != len(orbit):
        raise InvariantFailure(
            f"class-two certificate failed: theta = ({a},{b},{c}), "
            f"orbit size {len(orbit)}")
    step = extract_twisted(word)
    _check_parameter_shape(word, step.residual, i, orbit)
    return OrbitBlock(pair_index=i, orbit=orbit, k=k, step=step,
                      fresh_x=GSym(f"X{i + 1}.{k + 1}", "var", colour=1),
                      fresh_y=GSym(f"Y{i + 1}.{k + 1}", "var", colour=2),
                      trace=trace, eqs_words=eqs)


def _check_parameter_shape(word, residual, i, orbit):
    """kappa_i(s), s != k occurs exactly once in V with negative sign;
    kappa_i(k) does not occur."""
    k = orbit[0]
    counts = {}
    for l in residual:
        if l.sym.kind == "param":
            counts[(l.sym.name, l.sign)] = counts.get(
                (l.sym.name, l.sign), 0) + 1
    for s in orbit:
        name = _kpar(i, s).name
        if s == k:
            if (name, 1) in counts or (name, -1) in counts:
                raise InvariantFailure("kappa_i(k) appears in the residual")
        else:
            if counts.get((name, -1), 0) != 1 or (name, 1) in counts:
                raise InvariantFailure(
                    "kappa_i(s) multiplicity violated in the residual")


# ---------------------------------------------------------------------------
# the solver

@dataclass
class TwistedSystemSolution:
    a: list                     # tuples in N, one per pair
    b: list
    blocks: list
    mode: str = "constructive"


def solve_twisted_system(act: SemisimpleAction, pairs, kappa
                         ) -> TwistedSystemSolution:
    """Solve prod_i T_{alpha_i,beta_i}(a_i, b_i) = kappa over N = S^r."""
    kappa = np.asarray(kappa, dtype=_DTYPE)
    S = act.S
    registry = GammaRegistry(S)
    D = len(pairs)
    if D < 1:
        raise InputError("need at least one automorphism pair")
    blocks = []
    for i, (alpha, beta) in enumerate(pairs):
        for orbit in _pair_orbits(alpha, beta):
            blocks.append(_reduce_pair_orbit(registry, alpha, beta, i,
                                             orbit))
    # global product system F_s: kappa(s) = kappa_1(s) ... kappa_D(s),
    # with kappa_i(k_Delta) replaced by T(fresh) * V_Delta
    eqs = {}
    for s in range(act.r):
        letters = []
        for i in range(D):
            blk = _block_at(blocks, i, s)
            if blk is not None:
                letters.extend(_fresh_T_word(blk).letters)
                letters.extend(blk.step.residual.letters)
            else:
                letters.append(GLetter(_kpar(i, s), 1, ()))
        eqs[s] = GammaWord(letters)
    lhs = {s: _kconst(s) for s in range(act.r)}
    eliminable = {_kpar(i, s).name
                  for i in range(D) for s in range(act.r)}
    word, gtrace = generic_reduce(eqs, lhs, 0,
                                  lambda sym: sym.name in eliminable)
    # split the final word at the fresh twisted-commutator runs
    runs, segments = _split_runs(word, blocks)
    if len(runs) != len(blocks):
        raise InvariantFailure("not every block survived reduction intact")
    assign = GammaAssignment(S, {}, registry.eval_map())
    for s in range(act.r):
        assign.values[_kconst(s).name] = int(kappa[s])
    for l in word:
        if l.sym.kind == "param" and l.sym.name in eliminable:
            assign.values.setdefault(l.sym.name, 0)
        if l.sym.kind == "var" and not _is_fresh(l.sym):
            assign.values.setdefault(l.sym.name, 0)
    for blk in blocks:
        for l in blk.step.residual:
            if l.sym.kind == "var":
                assign.values.setdefault(l.sym.name, 0)
            elif l.sym.name in eliminable:
                assign.values.setdefault(l.sym.name, 0)
    seg_vals = [assign.eval(seg) for seg in segments]
    # kappa(1) = w0 T1' w1 T2' ... Tt' wt
    total_tail = 0
    for v in seg_vals:
        total_tail = S.mul(total_tail, v)
    target = S.mul(int(kappa[0]), S.inv(total_tail))
    chain_sets = []
    adjust = []
    prefix = seg_vals[0]
    for j, run in enumerate(runs):
        gamma_auto = registry.eval_exp(run["gamma"])
        pref_inner = Automorphism.inner(S, S.inv(prefix))
        psi = gamma_auto.compose(pref_inner)
        psi_inv = psi.inverse()
        alpha = registry.eval_exp(run["block"].step.a)
        beta = registry.eval_exp(run["block"].step.b)
        alpha_h = psi_inv.compose(alpha).compose(psi)
        beta_h = psi_inv.compose(beta).compose(psi)
        chain_sets.append(twisted_set(S, alpha_h, beta_h))
        adjust.append(psi)
        prefix = S.mul(prefix, seg_vals[j + 1])
    wits = solve_product_chain(S, chain_sets, target)
    # pull the fresh-symbol values back through the adjustments
    for run, psi, (sx, sy) in zip(runs, adjust, wits):
        psi_inv = psi.inverse()
        run["block"].x_val = psi_inv.apply(int(sx))
        run["block"].y_val = psi_inv.apply(int(sy))
        assign.values[run["block"].fresh_x.name] = run["block"].x_val
        assign.values[run["block"].fresh_y.name] = run["block"].y_val
    if assign.eval(word) != int(kappa[0]):
        raise InvariantFailure("global reduced equation failed to close")
    # derive eliminated kappa_i(s) in reverse order
    for name, expr in reversed(gtrace):
        assign.values[name] = assign.eval(expr)
    # per-orbit back-substitution
    a_out = [act.n_identity() for _ in range(D)]
    b_out = [act.n_identity() for _ in range(D)]
    for blk in blocks:
        back_solve_step(blk.step, assign, blk.x_val, blk.y_val)
        for name, expr in reversed(blk.trace):
            assign.values[name] = assign.eval(expr)
        for s in blk.orbit:
            a_out[blk.pair_index][s] = assign.values[_xvar(
                blk.pair_index, s).name]
            b_out[blk.pair_index][s] = assign.values[_yvar(
                blk.pair_index, s).name]
    _verify_twisted_solution(act, pairs, kappa, a_out, b_out)
    return TwistedSystemSolution(a=a_out, b=b_out, blocks=blocks)


def _block_at(blocks, i, s):
    for blk in blocks:
        if blk.pair_index == i and blk.k == s:
            return blk
    return None


def _fresh_T_word(blk) -> GammaWord:
    st = blk.step
    return gw(
        GLetter(blk.fresh_x, -1, (), block=id(blk)),
        GLetter(blk.fresh_y, -1, (), block=id(blk)),
        GLetter(blk.fresh_x, 1, st.a, block=id(blk)),
        GLetter(blk.fresh_y, 1, st.b, block=id(blk)),
    )


def _is_fresh(sym):
    return sym.name[0] in "XY"


def _split_runs(word, blocks):
    """Locate the 4-letter fresh runs; return run info and the segments
    between them (in order)."""
    by_id = {id(b): b for b in blocks}
    runs = []
    segments = []
    cur = []
    idx = 0
    letters = list(word)
    while idx < len(letters):
        l = letters[idx]
        if l.block in by_id:
            blk = by_id[l.block]
            chunk = letters[idx:idx + 4]
            if len(chunk) < 4 or any(c.block != l.block for c in chunk):
                raise InvariantFailure("fresh run broken apart")
            g = chunk[0].exp
            expect = [(blk.fresh_x, -1, g),
                      (blk.fresh_y, -1, g),
                      (blk.fresh_x, 1, gexp_mul(blk.step.a, g)),
                      (blk.fresh_y, 1, gexp_mul(blk.step.b, g))]
            for c, (sym, sign, exp) in zip(chunk, expect):
                if c.sym != sym or c.sign != sign or c.exp != exp:
                    raise InvariantFailure("fresh run twisted unevenly")
            segments.append(GammaWord(cur))
            cur = []
            runs.append({"block": blk, "gamma": g,
                         "a": gexp_mul(gexp_inv(g),
                                       gexp_mul(blk.step.a, g)),
                         "b": gexp_mul(gexp_inv(g),
                                       gexp_mul(blk.step.b, g))})
            idx += 4
        else:
            cur.append(l)
            idx += 1
    segments.append(GammaWord(cur))
    return runs, segments


def _verify_twisted_solution(act, pairs, kappa, a_out, b_out):
    prod = AmbientElement.of_n(act, act.n_identity())
    for (alpha, beta), a, b in zip(pairs, a_out, b_out):
        ae = AmbientElement.of_n(act, a)
        be = AmbientElement.of_n(act, b)
        term = (ae.inverse() * be.inverse()
                * AmbientElement.of_n(act, alpha.apply(a))
                * AmbientElement.of_n(act, beta.apply(b)))
        prod = prod * term
    if not prod.in_n() or not (prod.n_part() == kappa).all():
        raise InvariantFailure("twisted solution failed re-verification")
