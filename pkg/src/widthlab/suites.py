"""Named verification suites, shared by the CLI and the test suite.

Each suite runs a family of seeded checks of one statement-shaped
invariant and returns a summary dict; a suite passes only if every
instance passed.  Suites are deterministic for a fixed seed."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from .errors import InputError
from .perm import _DTYPE
from .groups import ElementSet, bracket, maximal_subgroups
from .catalog import catalog_groups, parse_group
from .structure import Automorphism, find_qmn
from .words import (
    hamidoune_check,
    nilp_comm_check,
    parse_word,
    twogensets_check,
    value_set,
    xi_derivative_check,
)
from .gammawords import (
    GammaAssignment,
    GammaWord,
    GLetter,
    GSym,
    colour_type,
    extract_k_twisted,
    gexp_reduce,
    hat,
    is_balanced,
    is_trivial_in_F,
    leq_Ln,
    support,
)
from .semisimple import (
    Actor,
    SemisimpleAction,
    solve_commutator_equation,
    twisted_width,
)
from .powers import solve_power_equation
from .twisted import solve_twisted_system
from .soluble import (
    SubdirectConfig,
    count_nongenerating,
    phi_fibres,
    subdirect_bound_check,
    v_identity_check,
)

SMALL_CATALOG = ["Cyclic(6)", "Sym(3)", "Sym(4)", "Alt(4)", "Alt(5)",
                 "Dihedral(4)", "Dihedral(6)", "Heisenberg(3)", "SL(2,3)"]


def _small_tables():
    return [parse_group(s).table() for s in SMALL_CATALOG]


# ---------------------------------------------------------------------------

def suite_hamidoune(seed: int, trials: int) -> dict:
    """Random (G, X, r) meeting the covering lemma's preconditions."""
    rnd = random.Random(seed)
    tables = _small_tables()
    passes = failures = 0
    for _ in range(trials):
        t = rnd.choice(tables)
        size = rnd.randrange(max(2, t.n // 12), t.n + 1)
        ids = {0}
        while len(ids) < size:
            ids.add(rnd.randrange(t.n))
        X = ElementSet.from_ids(t, ids)
        if int(t.closure(X.ids()).sum()) != t.n:
            continue
        r = -(-t.n // X.size())           # ceil
        r += rnd.randrange(0, 3)
        if hamidoune_check(t, X, r):
            passes += 1
        else:
            failures += 1
    return {"suite": "lemma-2.2", "trials": passes + failures,
            "passes": passes, "failures": failures, "ok": failures == 0}


def suite_nilp_comm(seed: int, trials: int) -> dict:
    rnd = random.Random(seed)
    specs = ["Heisenberg(3)", "Dihedral(4)", "Dihedral(6)", "Sym(3)",
             "Sym(4)", "Alt(4)"]
    tables = [parse_group(s).table() for s in specs]
    passes = failures = 0
    for _ in range(trials):
        t = rnd.choice(tables)
        full = ElementSet.full(t)
        derived = bracket(t, full, full)
        # random normal H: normal closure of a random element
        h = rnd.randrange(t.n)
        H = ElementSet(t, t.normal_closure([h]))
        # random x-tuple with G = G'<x>
        for _ in range(30):
            m = rnd.randrange(1, 4)
            x = [rnd.randrange(t.n) for _ in range(m)]
            if int(t.closure(x + [int(i) for i in derived.ids()]).sum()) \
                    == t.n:
                break
        else:
            continue
        n = rnd.randrange(1, 4)
        if nilp_comm_check(t, H, x, n):
            passes += 1
        else:
            failures += 1
    return {"suite": "lemma-2.5", "trials": passes + failures,
            "passes": passes, "failures": failures, "ok": failures == 0}


def suite_tau(seed: int, trials: int) -> dict:
    rnd = random.Random(seed)
    tables = _small_tables()
    passes = failures = 0
    for _ in range(trials):
        t = rnd.choice(tables)
        m = rnd.randrange(1, 5)
        g = [rnd.randrange(t.n) for _ in range(m)]
        v = [rnd.randrange(t.n) for _ in range(m)]
        x = [rnd.randrange(t.n) for _ in range(m)]
        if xi_derivative_check(t, g, v, x):
            passes += 1
        else:
            failures += 1
    return {"suite": "lemma-4.3", "trials": trials, "passes": passes,
            "failures": failures, "ok": failures == 0}


def suite_twogensets(seed: int, trials: int) -> dict:
    rnd = random.Random(seed)
    tables = _small_tables()
    passes = failures = 0
    for _ in range(trials):
        t = rnd.choice(tables)
        m = rnd.randrange(1, 4)
        g = [rnd.randrange(t.n) for _ in range(m)]
        v = [rnd.randrange(t.n) for _ in range(m)]
        if twogensets_check(t, g, v):
            passes += 1
        else:
            failures += 1
    return {"suite": "lemma-4.4", "trials": trials, "passes": passes,
            "failures": failures, "ok": failures == 0}


def suite_v_identity(seed: int = 0, trials: int = 0) -> dict:
    """Exhaustive over all (M, y) for the built-in groups."""
    checked = failures = 0
    for spec in ["Alt(5)", "Sym(4)", "Alt(4)"]:
        t = parse_group(spec).table()
        N = ElementSet.full(t)
        for M in maximal_subgroups(t):
            for y in range(t.n):
                checked += 1
                if not v_identity_check(t, M, N, y):
                    failures += 1
    return {"suite": "lemma-5.3", "trials": checked, "passes":
            checked - failures, "failures": failures, "ok": failures == 0}


def suite_subdirect(seed: int, trials: int) -> dict:
    rnd = random.Random(seed)
    bases = ["Sym(3)", "Dihedral(4)", "Alt(4)", "Cyclic(6)", "Sym(4)"]
    tables = [parse_group(s).table() for s in bases]
    passes = failures = 0
    attempts = 0
    while passes + failures < trials and attempts < trials * 20:
        attempts += 1
        A = rnd.choice(tables)
        t_count = rnd.randrange(2, 5)
        if A.n ** t_count > 400_000:
            continue
        perm = list(range(t_count))
        rnd.shuffle(perm)
        rho = np.array(perm, dtype=_DTYPE)
        moved = int((rho != np.arange(t_count)).sum())
        if moved == 0:
            continue
        same_comp = Automorphism.inner(A, rnd.randrange(A.n))
        diag_mode = rnd.random() < 0.3 and t_count >= 3
        if diag_mode:
            comps = [same_comp] * t_count
        else:
            comps = [Automorphism.inner(A, rnd.randrange(A.n))
                     for _ in range(t_count)]
        cfg = SubdirectConfig(A, t_count, rho, comps)
        eps = min(Fraction(moved, t_count), Fraction(1, 2))
        if diag_mode:
            u = ("diagonal", None)
        else:
            # a characteristic-ish subgroup: the derived subgroup works
            B = bracket(A, ElementSet.full(A), ElementSet.full(A))
            if B.size() == A.n:
                B = ElementSet.trivial(A)
            u = ("product", B)
        try:
            rep = subdirect_bound_check(cfg, u, eps)
        except InputError:
            continue
        if rep.passes:
            passes += 1
        else:
            failures += 1
    return {"suite": "lemma-5.5", "trials": passes + failures,
            "passes": passes, "failures": failures, "ok": failures == 0}


def suite_prop51(seed: int = 0, trials: int = 0) -> dict:
    """Exhaustive non-generation counts on the built-in soluble instances."""
    from .instances import alt4_klein, wreath_c3_squared
    rnd = random.Random(seed)
    results = []
    t, q = alt4_klein()
    y3 = next(i for i in range(t.n) if t.order_of(i) == 3)
    results.append(count_nongenerating(
        t, q, [y3, t.conj(y3, 2)], d=2, k=1, eps=Fraction(1, 2)))
    results.append(count_nongenerating(
        t, q, [y3, t.conj(y3, 2), t.conj(y3, 5)], d=2, k=2,
        eps=Fraction(1, 2)))
    t, q = wreath_c3_squared()
    ys = [g for g in range(t.n) if t.order_of(g) == 2][:3]
    results.append(count_nongenerating(t, q, ys, d=2, k=1,
                                       eps=Fraction(1, 2)))
    failures = sum(0 if r.passes else 1 for r in results)
    return {"suite": "prop-5.1", "trials": len(results),
            "passes": len(results) - failures, "failures": failures,
            "counts": [r.count for r in results], "ok": failures == 0}


def suite_prop71(seed: int = 0, trials: int = 0,
                 instance=None) -> dict:
    """Fibre reports on the three built-in instances, all kappa in K."""
    from .instances import (alt4_klein, extraspecial_with_c5,
                            heisenberg_case3, heisenberg_case3_waiver)
    from .structure import QmnReport
    rnd = random.Random(seed)
    cases = []
    if instance is not None:
        cases.append(instance + (False,))
    else:
        t, q = alt4_klein()
        cases.append((t, q, 2, False))
        t, q = extraspecial_with_c5()
        cases.append((t, q, 3, False))
        t, q = heisenberg_case3()
        cases.append((t, q, 3, False))
        t, N, Z = heisenberg_case3_waiver()
        cases.append((t, QmnReport(N=N, Z=Z, kind="soluble-nonabelian",
                                   p=3), 3, True))
    checked = failures = 0
    details = []
    for t, q, m, waiver in cases:
        K = q.N if q.kind == "soluble-abelian" else bracket(t, q.N, q.N)
        kids = [int(i) for i in K.ids()]
        xts = []
        for _ in range(3):
            while True:
                xt = [rnd.randrange(t.n) for _ in range(m)]
                if int(t.closure(xt + kids).sum()) == t.n:
                    xts.append(xt)
                    break
        for kap in kids:
            checked += 1
            res = phi_fibres(t, q, xts, kap, d=2, brute_force=waiver)
            if res.decomposition is None:
                failures += 1
            details.append({"case": res.case, "kappa": kap,
                            "found": res.decomposition is not None})
    return {"suite": "prop-7.1", "trials": checked,
            "passes": checked - failures, "failures": failures,
            "details": details, "ok": failures == 0}


# ---------------------------------------------------------------------------
# random legal words for the section-8 suite

def random_legal_gamma_word(m, n, gamma_names, rnd, num_params=2):
    """Balanced word with colour type <= L_n by construction."""
    def rexp():
        return gexp_reduce(tuple((rnd.choice(gamma_names),
                                  rnd.choice([1, -1]))
                                 for _ in range(rnd.randrange(3))))

    blocks = {b: {c: [] for c in range(1, m + 1)} for b in range(n)}
    for c in range(1, m + 1):
        v = rnd.randrange(1, n)
        syms = [GSym(f"x{c}.{i}", colour=c) for i in range(v)]
        pos_items = [[GLetter(s, 1, rexp())] for s in syms]
        negs = [GLetter(s, -1, rexp()) for s in syms]
        rnd.shuffle(negs)
        max_runs = min(n - v, v)
        nruns = rnd.randrange(1, max_runs + 1) if max_runs >= 1 else 1
        runs = []
        per, extra = divmod(v, nruns)
        idx = 0
        for j in range(nruns):
            cnt = per + (1 if j < extra else 0)
            runs.append(negs[idx:idx + cnt])
            idx += cnt
        items = pos_items + runs
        rnd.shuffle(items)
        for b, it in zip(sorted(rnd.sample(range(n), len(items))), items):
            blocks[b][c] = it
    letters = []
    for b in range(n):
        for c in range(1, m + 1):
            letters.extend(blocks[b][c])
    for j in range(num_params):
        p = GSym(f"k{j + 1}", "param")
        letters.insert(rnd.randrange(len(letters) + 1),
                       GLetter(p, rnd.choice([1, -1]), rexp()))
    return GammaWord(letters)


def suite_section8(seed: int, trials: int, evaluations: int = 0) -> dict:
    """Random extractions: equality, support drop, colour bound, parameter
    multiplicities; optionally concrete evaluation cross-checks."""
    rnd = random.Random(seed)
    t5 = parse_group("Alt(5)").table()
    ts5 = parse_group("Sym(5)").table()
    gammas = {"g": Automorphism.inner(t5, 5),
              "h": Automorphism.inner(t5, 17)}
    outer = _outer_a5(t5)
    gammas["w"] = outer
    done = failures = evals = 0
    while done < trials:
        m = rnd.randrange(2, 4)
        n = rnd.randrange(2, 5)
        V = random_legal_gamma_word(m, n, list(gammas), rnd)
        w = hat(V)
        if is_trivial_in_F(w):
            continue
        k = (len(support(w)) - n) // 2
        if k < 1:
            continue
        done += 1
        try:
            ext = extract_k_twisted(V, k, m, n)
        except Exception:
            failures += 1
            continue
        if len(support(hat(ext.residual))) != len(support(w)) - 2 * k:
            failures += 1
            continue
        if evals < evaluations:
            evals += 1
            assign = GammaAssignment(
                t5, {l.sym.name: rnd.randrange(60) for l in V}, gammas)
            if assign.eval(V) != assign.eval(ext.product_word()):
                failures += 1
    return {"suite": "section-8", "trials": done, "passes": done - failures,
            "failures": failures, "evaluations": evals, "ok": failures == 0}


def _outer_a5(t5):
    from .perm import parse_cycles
    c = parse_cycles("(0 1)", 5)
    ci = c.inverse()
    imgs = np.empty(t5.n, dtype=_DTYPE)
    for i in range(t5.n):
        imgs[i] = t5.lookup(ci * t5.element(i) * c)
    return Automorphism(t5, imgs, provenance=("ambient", "(0 1)"),
                        validate=False)


# ---------------------------------------------------------------------------
# semisimple solver suites

def prop91_configuration():
    """The fixed Alt(5)^2 swap family meeting the cycle-count condition."""
    t5 = parse_group("Alt(5)").table()
    swap = np.array([1, 0], dtype=_DTYPE)
    outer = _outer_a5(t5)
    comps = [(0, 0), (5, 0), (0, 17), (3, 7), (11, 2), (29, 41)]
    actors = [Actor(t5, swap, [Automorphism.inner(t5, a),
                               Automorphism.inner(t5, b)])
              for a, b in comps[:5]]
    actors.append(Actor(t5, swap, [outer, Automorphism.inner(t5, 41)]))
    return SemisimpleAction(t5, 2, actors)


def suite_prop91(seed: int, trials: int, exhaustive: bool = False) -> dict:
    rnd = random.Random(seed)
    act = prop91_configuration()
    g_ids = list(range(6))
    n = act.S.n
    if exhaustive:
        kappas = [np.array([a, b], dtype=_DTYPE)
                  for a in range(n) for b in range(n)]
    else:
        kappas = [np.array([rnd.randrange(n), rnd.randrange(n)],
                           dtype=_DTYPE) for _ in range(trials)]
    failures = 0
    for kap in kappas:
        try:
            solve_commutator_equation(act, g_ids, kap, d_eff=1)
        except Exception:
            failures += 1
    return {"suite": "prop-9.1", "trials": len(kappas),
            "passes": len(kappas) - failures, "failures": failures,
            "ok": failures == 0}


def suite_prop102(seed: int, trials: int) -> dict:
    """Power-equation configurations for q in {2, 3}, r in {1, 2}."""
    rnd = random.Random(seed)
    t5 = parse_group("Alt(5)").table()
    M, dbar = 2, 6
    failures = total = 0
    for q, r in ((2, 1), (2, 2), (3, 2)):
        m = M * dbar * (q + dbar)
        if r == 1:
            actors = [Actor(t5, np.array([0], dtype=_DTYPE),
                            [Automorphism.inner(t5, rnd.randrange(60))])
                      for _ in range(m)]
        else:
            swap = np.array([1, 0], dtype=_DTYPE)
            actors = [Actor(t5, swap,
                            [Automorphism.inner(t5, rnd.randrange(60)),
                             Automorphism.inner(t5, rnd.randrange(60))])
                      for _ in range(m)]
        act = SemisimpleAction(t5, r, actors)
        for _ in range(trials):
            total += 1
            kap = np.array([rnd.randrange(60) for _ in range(r)],
                           dtype=_DTYPE)
            try:
                solve_power_equation(act, list(range(m)), q, kap,
                                     dbar=dbar, M=M, seed=seed)
            except Exception:
                failures += 1
    return {"suite": "prop-10.2", "trials": total,
            "passes": total - failures, "failures": failures,
            "ok": failures == 0}


def suite_prop111(seed: int, trials: int) -> dict:
    rnd = random.Random(seed)
    t5 = parse_group("Alt(5)").table()
    outer = _outer_a5(t5)
    swap = np.array([1, 0], dtype=_DTYPE)
    ident = np.array([0, 1], dtype=_DTYPE)
    alpha1 = Actor(t5, swap, [outer, Automorphism.identity(t5)])
    beta1 = Actor(t5, ident, [Automorphism.inner(t5, 13), outer])
    alpha2 = Actor(t5, ident,
                   [outer.compose(Automorphism.inner(t5, 8)),
                    Automorphism.inner(t5, 21)])
    beta2 = Actor.identity(t5, 2)
    act = SemisimpleAction(t5, 2, [])
    pairs = [(alpha1, beta1), (alpha2, beta2)]
    failures = 0
    for _ in range(trials):
        kap = np.array([rnd.randrange(60), rnd.randrange(60)],
                       dtype=_DTYPE)
        try:
            solve_twisted_system(act, pairs, kap)
        except Exception:
            failures += 1
    return {"suite": "prop-11.1", "trials": trials,
            "passes": trials - failures, "failures": failures,
            "ok": failures == 0}


SUITES = {
    "lemma-2.2": suite_hamidoune,
    "hamidoune": suite_hamidoune,
    "lemma-2.5": suite_nilp_comm,
    "lemma-4.3": suite_tau,
    "lemma-4.4": suite_twogensets,
    "lemma-5.3": suite_v_identity,
    "lemma-5.5": suite_subdirect,
    "prop-5.1": suite_prop51,
    "prop-7.1": suite_prop71,
    "section-8": lambda seed, trials: suite_section8(
        seed, trials, evaluations=min(trials, 500)),
    "prop-9.1": suite_prop91,
    "prop-10.2": suite_prop102,
    "prop-11.1": suite_prop111,
}


def run_suite(name: str, seed: int, trials: int) -> dict:
    if name not in SUITES:
        raise InputError(f"unknown suite {name!r}")
    if trials == 0:
        out = {"suite": name, "trials": 0, "passes": 0, "failures": 0,
               "ok": True, "warning": "vacuous pass: zero trials"}
        if name in ("lemma-5.3", "prop-5.1", "prop-7.1"):
            return SUITES[name](seed, trials)
        return out
    return SUITES[name](seed, trials)
