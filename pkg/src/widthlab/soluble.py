"""Counting verifiers for lifting-generator bounds and the soluble-case
fibre machinery: F_p-module views, exhaustive non-generation counts,
centralizer-intersection identities, subdirect bounds, commutator-map
fibre reports, the F_2 quadratic-form route, group-ring rearrangement
identities, and q-power generation of abelian groups.

All inequalities with rational exponents are decided by integer
cross-multiplication; nothing goes through floating point."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Optional

import numpy as np

from .errors import CapacityError, InputError, InvariantFailure
from .perm import _DTYPE
from .groups import (
    ElementSet,
    ElementTable,
    bracket,
    is_abelian_set,
    is_normal,
    mu,
    subgroup_table,
)
from .structure import QmnReport
from .words import leq_power_product

FIBRE_CAP = 10_000_000


# ---------------------------------------------------------------------------
# F_p module views of elementary abelian sections

@dataclass
class FpModuleView:
    """N/Z as an F_p-space with coordinates and action matrices."""

    table: ElementTable          # ambient group
    N: ElementSet
    Z: ElementSet
    p: int
    dim: int
    sub: ElementTable            # N as its own table
    embed: np.ndarray            # sub id -> ambient id
    back: dict                   # ambient id -> sub id
    quotient: object             # Quotient of sub by Z
    basis: list                  # quotient ids of the chosen basis
    coords: dict                 # quotient id -> coordinate tuple

    def coord_of_ambient(self, g: int):
        q = self.quotient.project(self.back[g])
        return self.coords[q]

    def lift_coords(self, vec) -> int:
        """Ambient id of a lift of the coordinate vector."""
        acc = 0
        for c, b in zip(vec, self.basis):
            if c:
                lifted = int(self.embed[self.quotient.lift(b)])
                step = lifted
                for _ in range(c - 1):
                    step = self.table.mul(step, lifted)
                acc = self.table.mul(acc, step)
        return acc

    def action_matrix(self, g: int) -> np.ndarray:
        """Matrix of conjugation by g, columns = images of basis vectors."""
        cols = []
        for b in self.basis:
            amb = int(self.embed[self.quotient.lift(b)])
            conj = self.table.conj(amb, g)
            cols.append(self.coord_of_ambient(conj))
        return np.array(cols, dtype=np.int64).T % self.p


def module_view(table: ElementTable, N: ElementSet, Z: ElementSet,
                p: int) -> FpModuleView:
    from .groups import Quotient
    sub, embed = subgroup_table(table, N)
    back = {int(e): i for i, e in enumerate(embed)}
    zbits = np.zeros(sub.n, dtype=bool)
    for z in Z.ids():
        zbits[back[int(z)]] = True
    quot = Quotient(sub, ElementSet(sub, zbits))
    qt = quot.table
    order = qt.n
    dim = 0
    while p ** dim < order:
        dim += 1
    if p ** dim != order:
        raise InputError("section is not a p-power order")
    basis, coords = [], {0: ()}
    for cand in range(qt.n):
        if cand in coords:
            continue
        # extend the span by cand
        old = dict(coords)
        basis.append(cand)
        for val, vec in old.items():
            acc = val
            for c in range(1, p):
                acc = qt.mul(acc, cand)
                coords[acc] = vec + (c,)
        for val in old:
            coords[val] = old[val] + (0,)
        if len(basis) == dim:
            break
    if len(coords) != qt.n:
        raise InvariantFailure("basis construction failed to span")
    width = len(basis)
    coords = {v: tuple(vec) + (0,) * (width - len(vec))
              for v, vec in coords.items()}
    return FpModuleView(table=table, N=N, Z=Z, p=p, dim=dim, sub=sub,
                        embed=embed, back=back, quotient=quot,
                        basis=basis, coords=coords)


def _rank_mod_p(mat, p):
    m = [[int(x) % p for x in row] for row in mat]
    rows, cols = len(m), len(m[0]) if m else 0
    rank, r = 0, 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] % p), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        r += 1
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# fixed-point / fixed-space properties

def fixed_point_property(group, y_perms, k: int, eps: Fraction):
    """At least k of the y's move >= eps * n points (transitive action)."""
    eps = Fraction(eps)
    n = group.degree
    if n < 2:
        raise InputError("action must have n >= 2 points")
    if not _transitive(group):
        raise InputError("fixed-point mode needs a transitive action")
    witnesses = [i for i, y in enumerate(y_perms)
                 if y.moved_points() * eps.denominator >= eps.numerator * n]
    return len(witnesses) >= k, witnesses


def _transitive(group):
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for g in group.generators:
            for pt in frontier:
                q = int(g.images[pt])
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
                qi = int(np.nonzero(g.images == pt)[0][0])
                if qi not in seen:
                    seen.add(qi)
                    nxt.append(qi)
        frontier = nxt
    return len(seen) == group.degree


def fixed_space_property(view: FpModuleView, y_ids, k: int, eps: Fraction):
    """At least k of the y's have dim C_V(y) <= (1 - eps) n."""
    eps = Fraction(eps)
    n = view.dim
    if n < 1:
        raise InputError("module must be nontrivial")
    witnesses = []
    ident = np.eye(n, dtype=np.int64)
    for i, y in enumerate(y_ids):
        mat = view.action_matrix(int(y))
        fixed_dim = n - _rank_mod_p((mat - ident) % view.p, view.p)
        if (n - fixed_dim) * eps.denominator >= eps.numerator * n:
            witnesses.append(i)
    return len(witnesses) >= k, witnesses


def fixed_properties(action, y, k: int, eps):
    """Evaluate both (k, eps) properties where they apply.

    `action` is a Group (permutation mode) or FpModuleView (module mode);
    returns (fixed_point, fixed_space, witnesses)."""
    if isinstance(action, FpModuleView):
        ok, wit = fixed_space_property(action, y, k, eps)
        return None, ok, wit
    ok, wit = fixed_point_property(action, y, k, eps)
    return ok, None, wit


# ---------------------------------------------------------------------------
# exhaustive non-generation counts

@dataclass
class NonGenReport:
    count: int
    total: int
    bound_factors: list
    passes: bool
    property_held: Optional[bool] = None


def count_nongenerating(table: ElementTable, qmn: QmnReport, y, d: int,
                        k: int, eps, C0: int = 1,
                        cap: int = FIBRE_CAP) -> NonGenReport:
    """|{a in N^m : <y_1^{a_1},...> != G}| against the lifting bound."""
    eps = Fraction(eps)
    N = qmn.N
    m = len(y)
    nn = N.size()
    if nn ** m > cap:
        raise CapacityError(f"|N|^m = {nn ** m} exceeds cap {cap}")
    if int(table.closure([int(v) for v in y]
                         + [int(i) for i in N.ids()]).sum()) != table.n:
        raise InputError("G = <y> N fails")
    nz = nn // qmn.Z.size()
    nids = N.ids()
    conj = []
    for yi in y:
        # a -> y^a for a running over N
        vals = np.array([table.conj(int(yi), int(a)) for a in nids],
                        dtype=_DTYPE)
        conj.append(vals)
    cache = {}
    count = 0
    idx = [0] * m
    while True:
        key = tuple(int(conj[j][idx[j]]) for j in range(m))
        hit = cache.get(key)
        if hit is None:
            hit = int(table.closure(list(key)).sum()) == table.n
            cache[key] = hit
        if not hit:
            count += 1
        j = m - 1
        while j >= 0:
            idx[j] += 1
            if idx[j] < nn:
                break
            idx[j] = 0
            j -= 1
        if j < 0:
            break
    if qmn.kind.startswith("soluble"):
        factors = [(nn, m), (nz, Fraction(d) - k * eps)]
        passes = leq_power_product(count, factors)
        view = module_view(table, qmn.N, qmn.Z, qmn.p)
        held, _ = fixed_space_property(view, y, k, eps)
    else:
        sfac, _ = subgroup_table(qmn.quotient.table, qmn.factors[0])
        muv = mu(sfac)
        nf = len(qmn.factors)
        t = k * eps / 2 - max(d + 1, C0)
        if muv.at_most_half():
            # mu'(N) = mu(S): |N/Z|^mu = min_index^nf exactly
            factors = [(nn, m), (nz, 1), (muv.min_index, -t * nf)]
        else:
            factors = [(nn, m), (nz, 1 - t / 2)]
        passes = count < nn ** m and leq_power_product(count, factors)
        held = None
    return NonGenReport(count=count, total=nn ** m, bound_factors=factors,
                        passes=passes, property_held=held)


# ---------------------------------------------------------------------------
# the centralizer-intersection identity

def v_identity_check(table: ElementTable, M: ElementSet, N: ElementSet,
                     y: int) -> bool:
    """v(M;y) = |C_N(y)| * |[y^b, N] cap D| for every valid b."""
    if not M.is_subgroup() or M.size() >= table.n:
        raise InputError("M must be a proper subgroup")
    inter = (M & N).size()
    if M.size() * N.size() != table.n * inter:
        raise InputError("M must supplement N")
    if not _is_maximal(table, M):
        raise InputError("M must be maximal")
    nids = N.ids()
    direct = 0
    valid_b = []
    for a in nids:
        if table.conj(y, int(a)) in M:
            direct += 1
            valid_b.append(int(a))
    if not valid_b:
        return direct == 0
    cn = sum(1 for a in nids if table.mul(int(a), y) == table.mul(y, int(a)))
    D = M & N
    for b in valid_b:
        yb = table.conj(y, b)
        comm_vals = {table.comm(int(yb), int(a)) for a in nids}
        # [y^b, N] = {[y^b, a]}; the set convention of the source swaps the
        # commutator order, but the set sizes agree: use {[y^b, a] : a in N}
        inter_count = sum(1 for v in comm_vals if v in D)
        if cn * inter_count != direct:
            return False
    return True


def _is_maximal(table, M):
    gens = table.subgroup_generators(M.bits)
    for e in range(table.n):
        if M.bits[e]:
            continue
        bits = table.closure(gens + [e])
        if int(bits.sum()) < table.n:
            return False
    return True


# ---------------------------------------------------------------------------
# subdirect product bounds

@dataclass
class SubdirectConfig:
    """V = A^t with an automorphism permuting the factors."""

    A: ElementTable
    t: int
    rho: np.ndarray              # factor permutation: ^g i = rho[i]
    comps: list                  # Automorphisms of A, one per factor

    def moved_factors(self) -> int:
        return int((self.rho != np.arange(self.t)).sum())


@dataclass
class SubdirectReport:
    lhs: int
    rhs_factors: list
    passes: bool
    centralizer: int
    comm_cap: int


def subdirect_bound_check(cfg: SubdirectConfig, U, eps) -> SubdirectReport:
    """|C_V(g)| |[g,V] cap U| <= |V| |V:U|^{-eps/2}, exhaustively.

    U is ('product', B_elemset_of_A) or ('diagonal', None); the diagonal
    case requires t >= 3 and equal components."""
    eps = Fraction(eps)
    if eps > Fraction(1, 2) or eps < 0:
        raise InputError("eps must lie in [0, 1/2]")
    A, t = cfg.A, cfg.t
    if cfg.moved_factors() * eps.denominator < eps.numerator * t:
        raise InputError("g must move at least eps * t factors")
    kind, B = U
    if kind == "diagonal":
        if t < 3:
            raise InputError("diagonal case requires t >= 3")
        fp = cfg.comps[0].fingerprint()
        if any(c.fingerprint() != fp for c in cfg.comps):
            raise InputError("plain diagonal needs equal components")
        u_order = A.n
    elif kind == "product":
        for i, c in enumerate(cfg.comps):
            img = {int(c.element_images[b]) for b in B.ids()}
            if img != {int(b) for b in B.ids()}:
                raise InputError("U is not invariant under g")
        u_order = B.size() ** t
    else:
        raise InputError(f"unknown U kind {kind!r}")
    total = A.n ** t
    if total > FIBRE_CAP:
        raise CapacityError(f"|V| = {total} exceeds cap")
    tuples = _all_tuples(A.n, t)
    vg = np.empty_like(tuples)
    for i in range(t):
        vg[:, i] = cfg.comps[i].element_images[tuples[:, int(cfg.rho[i])]]
    cent = int((vg == tuples).all(axis=1).sum())
    # [g, v] = (v^g)^-1 * v, componentwise
    mt = _mul_table(A)
    w = np.empty_like(tuples)
    for i in range(t):
        w[:, i] = mt[A.inverses[vg[:, i]], tuples[:, i]]
    if kind == "product":
        mask = np.ones(total, dtype=bool)
        bbits = B.bits
        for i in range(t):
            mask &= bbits[w[:, i]]
    else:
        mask = np.ones(total, dtype=bool)
        for i in range(1, t):
            mask &= w[:, i] == w[:, 0]
    enc = np.zeros(total, dtype=np.int64)
    for i in range(t):
        enc = enc * A.n + w[:, i]
    comm_cap = int(np.unique(enc[mask]).size)
    lhs = cent * comm_cap
    index = total // u_order
    rhs_factors = [(total, 1), (index, -eps / 2)]
    passes = leq_power_product(lhs, rhs_factors)
    return SubdirectReport(lhs=lhs, rhs_factors=rhs_factors, passes=passes,
                           centralizer=cent, comm_cap=comm_cap)


def _all_tuples(n, t):
    out = np.empty((n ** t, t), dtype=_DTYPE)
    for i in range(t):
        reps = n ** (t - 1 - i)
        tile = n ** i
        out[:, i] = np.tile(np.repeat(np.arange(n, dtype=_DTYPE), reps),
                            tile)
    return out


def _mul_table(A: ElementTable):
    mt = np.empty((A.n, A.n), dtype=_DTYPE)
    for b in range(A.n):
        mt[:, b] = A.right_col(b)
    return mt


# ---------------------------------------------------------------------------
# commutator-map fibre reports

@dataclass
class FibreReport:
    map_index: int
    histogram: np.ndarray        # ambient-id indexed fibre sizes
    bound_num: tuple             # (|N|, m)
    bound_den: tuple             # (|M|, d+1)
    passes: bool
    case: str
    hypothesis_failures: list = field(default_factory=list)


@dataclass
class PhiFibreResult:
    reports: list
    decomposition: Optional[tuple]
    kappa: int
    case: str
    hypothesis_failures: list


def phi_fibres(table: ElementTable, qmn: QmnReport, x_tuples, kappa: int,
               d: int, brute_force: bool = False,
               cap: int = FIBRE_CAP) -> PhiFibreResult:
    """Exhaustive fibre histograms of the three commutator maps, plus a
    decomposition kappa_1 kappa_2 kappa_3 = kappa meeting the bound."""
    N, Z = qmn.N, qmn.Z
    failures = []
    if not qmn.kind.startswith("soluble"):
        raise InputError("phi_fibres needs a soluble section")
    G = ElementSet.full(table)
    if bracket(table, Z, G).size() != 1:
        msg = "[Z,G] != 1"
        if not brute_force:
            raise InputError(msg)
        failures.append(msg)
    abelian = is_abelian_set(table, N)
    K = N if abelian else bracket(table, N, N)
    if kappa not in K:
        raise InputError("kappa must lie in K")
    m = len(x_tuples[0])
    if N.size() ** m > cap:
        raise CapacityError(f"|N|^m = {N.size() ** m} exceeds cap {cap}")
    kgens = [int(i) for i in K.ids()]
    for xt in x_tuples:
        if int(table.closure(list(xt) + kgens).sum()) != table.n:
            raise InputError("K<x_i1..x_im> = G fails")
    msize = N.size() // Z.size()
    case = "case1" if abelian else (
        "case2" if K.size() == 2 else "case3-brute")
    reports = []
    for i, xt in enumerate(x_tuples):
        hist = _phi_histogram(table, N, xt)
        if int(hist.sum()) != N.size() ** m:
            raise InvariantFailure("fibre histogram does not sum to |N|^m")
        zsize = Z.size() ** m
        nonzero = hist[hist > 0]
        if (nonzero % zsize).any():
            raise InvariantFailure("fibres are not unions of Z^m cosets")
        reports.append(FibreReport(
            map_index=i, histogram=hist,
            bound_num=(N.size(), m), bound_den=(msize, d + 1),
            passes=True, case=case, hypothesis_failures=list(failures)))
    decomposition = _decompose_kappa(table, N, reports, kappa, d)
    for rep in reports:
        rep.passes = decomposition is not None
    return PhiFibreResult(reports=reports, decomposition=decomposition,
                          kappa=kappa, case=case,
                          hypothesis_failures=failures)


def _phi_histogram(table, N, xt):
    nids = N.ids()
    nn = len(nids)
    m = len(xt)
    comm = []
    for x in xt:
        vals = np.array([table.comm(int(a), int(x)) for a in nids],
                        dtype=_DTYPE)
        comm.append(vals)
    hist = np.zeros(table.n, dtype=np.int64)
    idx = [0] * (m - 1)
    while True:
        c = 0
        for j in range(m - 1):
            c = table.mul(c, int(comm[j][idx[j]]))
        vec = table.left_col(c)[comm[m - 1]]
        np.add.at(hist, vec, 1)
        j = m - 2
        while j >= 0:
            idx[j] += 1
            if idx[j] < nn:
                break
            idx[j] = 0
            j -= 1
        if j < 0 or m == 1:
            break
    return hist


def _fibre_ok(rep: FibreReport, value: int) -> bool:
    base_n, m = rep.bound_num
    base_m, e = rep.bound_den
    return int(rep.histogram[value]) * base_m ** e >= base_n ** m


def _decompose_kappa(table, N, reports, kappa, d):
    # the trivial-first convention, then exhaustive over N x N
    cands = [(kappa, 0)]
    nids = [int(i) for i in N.ids()]
    for k1 in nids:
        for k2 in nids:
            cands.append((k1, k2))
    seen = set()
    for k1, k2 in cands:
        if (k1, k2) in seen:
            continue
        seen.add((k1, k2))
        k3 = table.mul(table.inv(table.mul(k1, k2)), kappa)
        if k3 not in N:
            continue
        if (_fibre_ok(reports[0], k1) and _fibre_ok(reports[1], k2)
                and _fibre_ok(reports[2], k3)):
            return (k1, k2, k3)
    return None


# ---------------------------------------------------------------------------
# the F_2 quadratic-form route

@dataclass
class BilinearReport:
    kernel_dim: int
    bilinear_ok: bool
    symmetric_ok: bool
    quadratic_ok: bool
    fibre_sizes: tuple
    fibre_bound_ok: bool


def bilinear_extract(table: ElementTable, qmn: QmnReport,
                     x_tuple) -> BilinearReport:
    """Case-2 machinery: B from the double-commutator formula, checked
    bilinear; phi restricted to ker(phi-tilde) checked quadratic; fibre
    bound |V|/4 checked exactly."""
    N, Z = qmn.N, qmn.Z
    if qmn.p != 2:
        raise InputError("the quadratic-form route needs p = 2")
    Np = bracket(table, N, N)
    if Np.size() != 2:
        raise InputError("needs |N'| = 2")
    view = module_view(table, N, Z, 2)
    m = len(x_tuple)
    dimM = view.dim
    # phi-tilde: M^m -> N/N' is linear; compute its matrix over the basis
    wview = module_view(table, N, Np, 2)
    cols = []
    for j, x in enumerate(x_tuple):
        for b in view.basis:
            amb = int(view.embed[view.quotient.lift(b)])
            val = table.comm(amb, int(x))
            cols.append(wview.coord_of_ambient(val))
    mat = np.array(cols, dtype=np.int64).T % 2
    kernel = _kernel_mod2(mat)
    kdim = len(kernel)
    npz = int(Np.ids()[1]) if int(Np.ids()[0]) == 0 else int(Np.ids()[0])

    def lift_tuple(vec):
        """Lift a kernel coordinate vector (length m*dimM) to N^m."""
        return [view.lift_coords(vec[j * dimM:(j + 1) * dimM])
                for j in range(m)]

    def phi(lifts):
        acc = 0
        for a, x in zip(lifts, x_tuple):
            acc = table.mul(acc, table.comm(int(a), int(x)))
        return acc

    def b_form(uvec, vvec):
        # sum_j [[u_j,x_j],v_j] + cross terms; with left-to-right products
        # the cross terms pair j with the earlier l (exponent 2 kills the
        # orientation anyway)
        u = lift_tuple(uvec)
        v = lift_tuple(vvec)
        acc = 0
        for j in range(m):
            acc = table.mul(acc, table.comm(table.comm(u[j], int(
                x_tuple[j])), v[j]))
        for j in range(m):
            for l in range(j):
                acc = table.mul(acc, table.comm(
                    table.comm(u[j], int(x_tuple[j])),
                    table.comm(v[l], int(x_tuple[l]))))
        return 0 if acc == 0 else 1

    def q_form(vec):
        return 0 if phi(lift_tuple(vec)) == 0 else 1

    bilinear_ok = True
    symmetric_ok = True
    for i in range(kdim):
        for j in range(kdim):
            bij = b_form(kernel[i], kernel[j])
            if bij != b_form(kernel[j], kernel[i]):
                symmetric_ok = False
            for l in range(kdim):
                s = tuple((a + b) % 2 for a, b in zip(kernel[i], kernel[j]))
                if b_form(s, kernel[l]) != (
                        b_form(kernel[i], kernel[l])
                        + b_form(kernel[j], kernel[l])) % 2:
                    bilinear_ok = False
    # quadratic: q(u+v) = q(u) + q(v) + B(u,v) over the whole kernel space
    quadratic_ok = True
    fibres = [0, 0]
    space = _span_mod2(kernel)
    for vec in space:
        fibres[q_form(vec)] += 1
    for i in range(kdim):
        for j in range(kdim):
            u, v = kernel[i], kernel[j]
            s = tuple((a + b) % 2 for a, b in zip(u, v))
            if q_form(s) != (q_form(u) + q_form(v) + b_form(u, v)) % 2:
                quadratic_ok = False
    vsize = 2 ** kdim
    bound_ok = (fibres[0] + fibres[1] == vsize
                and all(f == 0 or f >= vsize // 4 for f in fibres)
                and (fibres[1] == 0 or min(fibres) >= vsize // 4))
    return BilinearReport(kernel_dim=kdim, bilinear_ok=bilinear_ok,
                          symmetric_ok=symmetric_ok,
                          quadratic_ok=quadratic_ok,
                          fibre_sizes=tuple(fibres),
                          fibre_bound_ok=bound_ok)


def _kernel_mod2(mat):
    rows, cols = mat.shape
    m = mat.copy() % 2
    pivots = {}
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c]), None)
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        for i in range(rows):
            if i != r and m[i][c]:
                m[i] = (m[i] + m[r]) % 2
        pivots[c] = r
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [0] * cols
        vec[fc] = 1
        for c, pr in pivots.items():
            if m[pr][fc]:
                vec[c] = 1
        basis.append(tuple(vec))
    return basis


def _span_mod2(basis):
    if not basis:
        return [()]
    cols = len(basis[0])
    out = []
    for mask in range(1 << len(basis)):
        vec = [0] * cols
        mm = mask
        i = 0
        while mm:
            if mm & 1:
                vec = [(a + b) % 2 for a, b in zip(vec, basis[i])]
            mm >>= 1
            i += 1
        out.append(tuple(vec))
    return out


# ---------------------------------------------------------------------------
# group-ring rearrangement identities

def psi_identity_check(table: ElementTable, relation, A: ElementSet):
    """Emit the bubble-sort witness for psi(a) = prod [a^{h_i}, a^{k_i}]
    and verify it on every a in A.  relation = [(sign, g_id), ...]."""
    pos = sorted(g for s, g in relation if s == 1)
    neg = sorted(g for s, g in relation if s == -1)
    if pos != neg:
        raise InputError("relation does not sum to zero in the group ring")
    aids = [int(i) for i in A.ids()]
    for _, g in relation:
        col_ids = {table.conj(a, int(g)) for a in aids}
        if col_ids != set(aids):
            raise InputError("A is not invariant under the acting elements")
    Ap = bracket(table, A, A)
    for c in Ap.ids():
        for a in aids:
            if table.mul(int(c), a) != table.mul(a, int(c)):
                raise InputError("A is not nilpotent of class <= 2")
        for _, g in relation:
            if table.conj(int(c), int(g)) != int(c):
                raise InputError("[A', acting group] != 1 fails")
    witness = _bubble_witness(relation)
    for a in aids:
        lhs = 0
        for sgn, g in relation:
            v = table.conj(a, int(g))
            lhs = table.mul(lhs, v if sgn == 1 else table.inv(v))
        rhs = 0
        for h, kk in witness:
            rhs = table.mul(rhs, table.comm(table.conj(a, h),
                                            table.conj(a, kk)))
        if lhs != rhs:
            raise InvariantFailure("rearrangement identity failed")
    return witness


def _bubble_witness(relation):
    items = list(relation)
    out = []
    while items:
        s0, g0 = items[0]
        j = next(i for i in range(1, len(items))
                 if items[i] == (-s0, g0))
        # move items[j] left to position 1 via adjacent swaps
        for t in range(j, 1, -1):
            su, gu = items[t - 1]
            sm, gm = items[t]
            if su * sm == 1:
                out.append((gu, gm))
            else:
                out.append((gm, gu))
            items[t - 1], items[t] = items[t], items[t - 1]
        items = items[2:]
    return out


# ---------------------------------------------------------------------------
# q-power generation of abelian groups

def abelian_q_generation(table: ElementTable, H: ElementSet, X, q: int,
                         r: int):
    """Return (ys, x_sublist) with H = <y_1^q, ..., y_r^q, x-sublist> and
    |x_sublist| <= r * (number of distinct primes of q)."""
    if not is_abelian_set(table, H):
        raise InputError("H must be abelian")
    X = [int(x) for x in X]
    if not (table.closure(X) == H.bits).all():
        raise InputError("X must generate H")
    order = H.size()
    if _min_generators_abelian(table, H) > r:
        raise InputError("H is not r-generated")
    exp = 1
    for h in H.ids():
        exp = lcm(exp, table.order_of(int(h)))
    primes_q = _prime_list(q)
    sublist = []
    for p in primes_q:
        if order % p:
            continue
        ep = exp
        while ep % p == 0:
            ep //= p
        # p-parts x^{ep} generate the Sylow p-subgroup
        syl = table.closure([table.power(h, ep) for h in
                             [int(i) for i in H.ids()]])
        frat = table.closure([table.power(int(s), p)
                              for s in np.nonzero(syl)[0]])
        chosen = []
        span = frat.copy()
        for x in X:
            xp = table.power(x, ep)
            if not span[xp]:
                chosen.append(x)
                span = table.closure([int(i) for i in np.nonzero(span)[0]]
                                     + [xp])
        if len(chosen) > r:
            raise InvariantFailure("needed more than r slots for a prime")
        sublist.extend(chosen)
    # Hall q'-part: kill the q-primes from the exponent
    eq = 1
    tmp = exp
    for p in primes_q:
        while tmp % p == 0:
            tmp //= p
            eq *= p
    hall = table.closure([table.power(int(h), eq) for h in H.ids()])
    hgens = table.subgroup_generators(hall)
    hall_order = int(hall.sum())
    ys = []
    if hall_order > 1:
        qinv = pow(q, -1, _exponent_of_set(table, hall))
        ys = [table.power(g, qinv) for g in hgens]
    while len(ys) < r:
        ys.append(0)
    regen = table.closure([table.power(yv, q) for yv in ys] + sublist)
    if not (regen == H.bits).all():
        raise InvariantFailure("q-generation identity failed to verify")
    return ys, sublist


def _min_generators_abelian(table, H):
    d = 0
    order = H.size()
    for p in _prime_list(order):
        pw = table.closure([table.power(int(h), p) for h in H.ids()])
        quot = order // int(pw.sum())
        dim = 0
        while p ** dim < quot:
            dim += 1
        d = max(d, dim)
    return d


def _exponent_of_set(table, bits):
    e = 1
    for h in np.nonzero(bits)[0]:
        e = lcm(e, table.order_of(int(h)))
    return e


def _prime_list(n):
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out
