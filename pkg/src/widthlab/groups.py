"""Finite permutation-group engine: element tables, closures, subgroup and
normal-subgroup machinery, quotients and automorphisms.

Elements live in an ElementTable: a deterministic BFS enumeration of the
group, with id 0 the identity.  Subsets are ElementSets (boolean masks over
ids).  Bulk arithmetic goes through translation columns (the regular
representation) so product-set BFS stays vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import log
from typing import Optional

import numpy as np

from .errors import CapacityError, InputError
from .perm import Permutation, _DTYPE

ENUM_LIMIT = 2_000_000
LATTICE_LIMIT = 10_000
_FULL_COLUMN_CACHE = 5200  # cache every translation column below this order


@dataclass
class Group:
    """A finite permutation group given by generators."""

    degree: int
    generators: list
    spec: str = ""
    _table: Optional["ElementTable"] = field(default=None, repr=False)

    def __post_init__(self):
        for g in self.generators:
            if g.degree != self.degree:
                raise InputError("generator degree mismatch")

    def table(self, limit: int = ENUM_LIMIT) -> "ElementTable":
        if self._table is None:
            self._table = enumerate_group(self, limit=limit)
        return self._table


class ElementTable:
    """Indexed enumeration of a finite group, closed under the operations."""

    def __init__(self, group, images, index, parent, genix, layers):
        self.group = group
        self.images = images          # (n, degree) int32, row i = element i
        self.index = index            # bytes(images row) -> id
        self.parent = parent          # BFS parent id (identity: -1)
        self.genix = genix            # generator index used from parent
        self.layers = layers          # BFS layer sizes
        self.n = images.shape[0]
        self.gen_ids = [self.lookup(g) for g in group.generators]
        self._rcols = {0: np.arange(self.n, dtype=_DTYPE)}
        self._lcols = {0: np.arange(self.n, dtype=_DTYPE)}
        self._gen_rcols = None
        self._gen_lcols = None
        self._inverses = None
        self._class_ids = None
        self._class_reps = None

    # -- basic lookups ----------------------------------------------------

    def lookup(self, perm: Permutation) -> int:
        key = perm.images.tobytes()
        if key not in self.index:
            raise InputError("element does not belong to this table")
        return self.index[key]

    def contains(self, perm: Permutation) -> bool:
        return perm.images.tobytes() in self.index

    def element(self, i: int) -> Permutation:
        return Permutation(self.images[i])

    def lookup_rows(self, rows) -> np.ndarray:
        """Map a (k, degree) matrix of image rows to ids."""
        idx = self.index
        out = np.empty(rows.shape[0], dtype=_DTYPE)
        for j in range(rows.shape[0]):
            out[j] = idx[rows[j].tobytes()]
        return out

    def mul(self, a: int, b: int) -> int:
        prod = self.images[b][self.images[a]]
        return self.index[prod.tobytes()]

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def conj(self, a: int, b: int) -> int:
        """a^b = b^-1 a b."""
        return self.mul(self.mul(self.inv(b), a), b)

    def comm(self, a: int, b: int) -> int:
        """[a, b] = a^-1 b^-1 a b."""
        return self.mul(self.inv(self.mul(b, a)), self.mul(a, b))

    def power(self, a: int, k: int) -> int:
        if k < 0:
            return self.power(self.inv(a), -k)
        acc, base = 0, a
        while k:
            if k & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            k >>= 1
        return acc

    def order_of(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.mul(x, a)
            k += 1
        return k

    @property
    def inverses(self) -> np.ndarray:
        if self._inverses is None:
            inv_rows = np.empty_like(self.images)
            ar = np.arange(self.group.degree, dtype=_DTYPE)
            for i in range(self.n):
                inv_rows[i, self.images[i]] = ar
            self._inverses = self.lookup_rows(inv_rows)
        return self._inverses

    # -- translation columns ----------------------------------------------

    def _gen_right_columns(self):
        if self._gen_rcols is None:
            cols = np.empty((len(self.gen_ids), self.n), dtype=_DTYPE)
            for j, gid in enumerate(self.gen_ids):
                # (e * g)(i) = g(e(i))
                prod = self.images[gid][self.images]
                cols[j] = self.lookup_rows(prod)
            self._gen_rcols = cols
        return self._gen_rcols

    def _gen_left_columns(self):
        if self._gen_lcols is None:
            cols = np.empty((len(self.gen_ids), self.n), dtype=_DTYPE)
            for j, gid in enumerate(self.gen_ids):
                # (g * e)(i) = e(g(i))
                prod = self.images[:, self.images[gid]]
                cols[j] = self.lookup_rows(np.ascontiguousarray(prod))
            self._gen_lcols = cols
        return self._gen_lcols

    def right_col(self, x: int) -> np.ndarray:
        """Column R_x with R_x[i] = id(e_i * x)."""
        col = self._rcols.get(x)
        if col is not None:
            return col
        gcols = self._gen_right_columns()
        # unwind the BFS factorization x = (((g..)g..)g..)
        chain = []
        y = x
        while y not in self._rcols:
            chain.append(self.genix[y])
            y = self.parent[y]
        col = self._rcols[y]
        for j in reversed(chain):
            col = gcols[j][col]
        if self.n <= _FULL_COLUMN_CACHE or len(self._rcols) < 512:
            self._rcols[x] = col
        return col

    def left_col(self, x: int) -> np.ndarray:
        """Column L_x with L_x[i] = id(x * e_i)."""
        col = self._lcols.get(x)
        if col is not None:
            return col
        gcols = self._gen_left_columns()
        chain = []
        y = x
        while y not in self._lcols:
            chain.append(self.genix[y])
            y = self.parent[y]
        # x = y * g_{j_{k-1}} * ... * g_{j_0}: L_x = L_y o L_{j_{k-1}} o ...
        col = self._lcols[y]
        for j in reversed(chain):
            col = col[gcols[j]]
        if self.n <= _FULL_COLUMN_CACHE or len(self._lcols) < 512:
            self._lcols[x] = col
        return col

    def mul_vec_scalar(self, vec: np.ndarray, b: int) -> np.ndarray:
        return self.right_col(b)[vec]

    def mul_scalar_vec(self, a: int, vec: np.ndarray) -> np.ndarray:
        return self.left_col(a)[vec]

    def mul_vec_vec(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        rows = np.take_along_axis(self.images[v], self.images[u], axis=1)
        return self.lookup_rows(rows)

    # -- conjugacy machinery ------------------------------------------------

    def _conj_gen_cols(self):
        cols = []
        for gid in self.gen_ids:
            col = self.right_col(gid)[self.left_col(self.inv(gid))]
            cols.append(col)
        return cols

    def conjugacy_classes(self):
        """Class id per element plus one representative (least id) per class."""
        if self._class_ids is None:
            cols = self._conj_gen_cols()
            cls = np.full(self.n, -1, dtype=_DTYPE)
            reps = []
            for start in range(self.n):
                if cls[start] >= 0:
                    continue
                cid = len(reps)
                reps.append(start)
                cls[start] = cid
                frontier = [start]
                while frontier:
                    nxt = []
                    for col in cols:
                        imgs = col[np.asarray(frontier, dtype=_DTYPE)]
                        for e in imgs:
                            if cls[e] < 0:
                                cls[e] = cid
                                nxt.append(int(e))
                    frontier = nxt
            self._class_ids = cls
            self._class_reps = reps
        return self._class_ids, self._class_reps

    def commutator_set(self) -> "ElementSet":
        """The set of commutators [g, x] over all pairs, via class closure."""
        cls, reps = self.conjugacy_classes()
        touched = np.zeros(len(reps), dtype=bool)
        ids = np.arange(self.n, dtype=_DTYPE)
        for rep in reps:
            members = ids[cls == cls[rep]]
            prods = self.left_col(self.inv(rep))[members]
            touched[cls[prods]] = True
        bits = touched[cls]
        return ElementSet(self, bits)

    # -- set-level operations ----------------------------------------------

    def set_mul(self, sbits: np.ndarray, tids) -> np.ndarray:
        """Bits of {s * t : s in S, t in T} given T as an id array."""
        out = np.zeros(self.n, dtype=bool)
        sidx = np.nonzero(sbits)[0]
        for t in tids:
            out[self.right_col(int(t))[sidx]] = True
        return out

    def closure(self, seed_ids, extra_cols=(), limit=None) -> np.ndarray:
        """Subgroup closure of seeds; extra_cols add e.g. conjugation moves."""
        bits = np.zeros(self.n, dtype=bool)
        bits[0] = True
        muls = []
        for s in set(int(x) for x in seed_ids):
            muls.append(self.right_col(s))
            muls.append(self.right_col(self.inv(s)))
        frontier = np.array([0], dtype=_DTYPE)
        while frontier.size:
            new = np.zeros(self.n, dtype=bool)
            for col in muls:
                new[col[frontier]] = True
            for col in extra_cols:
                new[col[frontier]] = True
            new &= ~bits
            bits |= new
            frontier = np.nonzero(new)[0].astype(_DTYPE)
            if limit is not None and int(bits.sum()) > limit:
                raise CapacityError(
                    f"closure exceeded limit {limit}", partial=int(bits.sum()))
        return bits

    def normal_closure(self, seed_ids) -> np.ndarray:
        """Smallest subgroup containing seeds normalized by the whole group."""
        conj_cols = self._conj_gen_cols()
        inv_gens = [self.inv(g) for g in self.gen_ids]
        conj_cols += [self.right_col(self.inv(g))[self.left_col(g)]
                      for g in inv_gens]
        seeds = set(int(x) for x in seed_ids)
        while True:
            bits = self.closure(seeds, extra_cols=conj_cols)
            # conjugation closure of a subgroup needs recheck: conj images of
            # products may fall outside; closure() already interleaves both
            # moves per level, so bits is closed under both. Verify cheaply.
            idx = np.nonzero(bits)[0]
            ok = True
            for col in conj_cols:
                if not bits[col[idx]].all():
                    ok = False
                    break
            if ok:
                return bits
            seeds = set(int(x) for x in idx)

    def subgroup_generators(self, bits: np.ndarray) -> list:
        """Small deterministic generating set for a subgroup mask."""
        gens = []
        have = np.zeros(self.n, dtype=bool)
        have[0] = True
        members = np.nonzero(bits)[0]
        for e in members:
            if not have[e]:
                gens.append(int(e))
                have = self.closure(gens)
        return gens


class ElementSet:
    """Subset of a group as a boolean mask over its element table."""

    __slots__ = ("table", "bits")

    def __init__(self, table: ElementTable, bits):
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (table.n,):
            raise InputError("bitset shape does not match table")
        bits.setflags(write=False)
        self.table = table
        self.bits = bits

    @staticmethod
    def from_ids(table, ids) -> "ElementSet":
        bits = np.zeros(table.n, dtype=bool)
        for i in ids:
            bits[int(i)] = True
        return ElementSet(table, bits)

    @staticmethod
    def full(table) -> "ElementSet":
        return ElementSet(table, np.ones(table.n, dtype=bool))

    @staticmethod
    def trivial(table) -> "ElementSet":
        return ElementSet.from_ids(table, [0])

    def ids(self) -> np.ndarray:
        return np.nonzero(self.bits)[0]

    def size(self) -> int:
        return int(self.bits.sum())

    def __len__(self):
        return self.size()

    def __contains__(self, i):
        return bool(self.bits[int(i)])

    def __eq__(self, other):
        return (isinstance(other, ElementSet) and self.table is other.table
                and bool((self.bits == other.bits).all()))

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __or__(self, other):
        return ElementSet(self.table, self.bits | other.bits)

    def __and__(self, other):
        return ElementSet(self.table, self.bits & other.bits)

    def issubset(self, other) -> bool:
        return bool((self.bits <= other.bits).all())

    def is_subgroup(self) -> bool:
        t = self.table
        if not self.bits[0]:
            return False
        ids = self.ids()
        gens = t.subgroup_generators(self.bits)
        return bool((t.closure(gens) == self.bits).all())


# ---------------------------------------------------------------------------
# enumeration

def enumerate_group(group: Group, limit: int = ENUM_LIMIT) -> ElementTable:
    """Deterministic BFS closure over the generators (layer, then gen index)."""
    degree = group.degree
    ident = Permutation.identity(degree)
    gens = group.generators
    images = [ident.images]
    index = {ident.images.tobytes(): 0}
    parent = [-1]
    genix = [-1]
    layers = [1]
    frontier = [0]
    while frontier:
        nxt = []
        for e in frontier:
            row = images[e]
            for j, g in enumerate(gens):
                prod = g.images[row]
                key = prod.tobytes()
                if key not in index:
                    if len(images) >= limit:
                        raise CapacityError(
                            f"enumeration limit {limit} exceeded "
                            f"({len(images)} elements reached)",
                            partial=len(images))
                    index[key] = len(images)
                    images.append(prod)
                    parent.append(e)
                    genix.append(j)
                    nxt.append(index[key])
        if nxt:
            layers.append(len(nxt))
        frontier = nxt
    table = ElementTable(
        group,
        np.array(images, dtype=_DTYPE),
        index,
        np.array(parent, dtype=_DTYPE),
        np.array(genix, dtype=_DTYPE),
        layers,
    )
    return table


# ---------------------------------------------------------------------------
# subgroup operations

def subgroup(table: ElementTable, seeds: ElementSet,
             mode: str = "generated") -> ElementSet:
    """Subgroup (or G-normal closure) generated by the seed set."""
    if not seeds.bits[0] and seeds.size() == 0:
        return ElementSet.trivial(table)
    ids = seeds.ids()
    if mode == "generated":
        return ElementSet(table, table.closure(ids))
    if mode == "normal_closure":
        return ElementSet(table, table.normal_closure(ids))
    raise InputError(f"unknown subgroup mode {mode!r}")


def bracket(table: ElementTable, H: ElementSet, K: ElementSet,
            n: int = 1) -> ElementSet:
    """[H, _n K]: iterated commutator subgroup, via generator commutators."""
    if not H.is_subgroup() or not K.is_subgroup():
        raise InputError("bracket arguments must be subgroups")
    cur = H
    for _ in range(n):
        cur = _bracket_once(table, cur, K)
    return cur


def _bracket_once(table, H, K):
    hg = table.subgroup_generators(H.bits)
    kg = table.subgroup_generators(K.bits)
    if not hg or not kg:
        return ElementSet.trivial(table)
    comms = {table.comm(a, b) for a in hg for b in kg}
    comms.discard(0)
    if not comms:
        return ElementSet.trivial(table)
    # [H,K] = normal closure of generator commutators in <H, K>
    ambient_gens = hg + kg
    bits = _closure_normalized_by(table, comms, ambient_gens)
    return ElementSet(table, bits)


def _closure_normalized_by(table, seeds, norm_gens):
    cols = []
    for g in norm_gens:
        cols.append(table.right_col(g)[table.left_col(table.inv(g))])
        gi = table.inv(g)
        cols.append(table.right_col(gi)[table.left_col(g)])
    seeds = set(int(s) for s in seeds)
    while True:
        bits = table.closure(seeds, extra_cols=cols)
        idx = np.nonzero(bits)[0]
        if all(bits[c[idx]].all() for c in cols):
            return bits
        seeds = set(int(x) for x in idx)


def bracket_omega(table: ElementTable, H: ElementSet,
                  K: ElementSet) -> ElementSet:
    """[H, _omega K]: the stable limit of the iterated bracket."""
    prev = H
    while True:
        nxt = _bracket_once(table, prev, K)
        if nxt == prev:
            return nxt
        prev = nxt


def normal_subgroups(table: ElementTable,
                     limit: int = LATTICE_LIMIT) -> list:
    """All normal subgroups, via joins of class normal closures, by size."""
    if table.n > limit:
        raise CapacityError(
            f"normal subgroup lattice needs |G| <= {limit}, got {table.n}")
    cls, reps = table.conjugacy_classes()
    atoms = []
    seen = set()
    for rep in reps:
        if rep == 0:
            continue
        bits = table.normal_closure([rep])
        key = bits.tobytes()
        if key not in seen:
            seen.add(key)
            atoms.append(bits)
    normals = {ElementSet.trivial(table).bits.tobytes():
               ElementSet.trivial(table)}
    work = [ElementSet.trivial(table)]
    while work:
        cur = work.pop()
        for a in atoms:
            joined = cur.bits | a
            if joined.tobytes() in normals:
                continue
            nb = table.closure(table.subgroup_generators(joined))
            # join of normal subgroups is their product; closure of union
            es = ElementSet(table, nb)
            key = nb.tobytes()
            if key not in normals:
                normals[key] = es
                work.append(es)
    out = sorted(normals.values(), key=lambda s: (s.size(), s.bits.tobytes()))
    return out


def is_normal(table: ElementTable, H: ElementSet) -> bool:
    idx = H.ids()
    for g in table.gen_ids:
        col = table.right_col(g)[table.left_col(table.inv(g))]
        if not H.bits[col[idx]].all():
            return False
    return True


def centralizer_size(table: ElementTable, bits: np.ndarray, y: int) -> int:
    """|C_S(y)| for S the subgroup mask (S must contain the centralizing els)."""
    ids = np.nonzero(bits)[0]
    conj = table.right_col(y)[ids]          # a * y
    conj2 = table.left_col(y)[ids]          # y * a
    return int((conj == conj2).sum())


# ---------------------------------------------------------------------------
# subgroup lattice, maximal subgroups

def all_subgroups(table: ElementTable, limit: int = LATTICE_LIMIT,
                  max_subgroups: int = 50_000) -> list:
    """Every subgroup, by closing subgroups against single elements."""
    if table.n > limit:
        raise CapacityError(
            f"subgroup lattice needs |G| <= {limit}, got {table.n}")
    found = {}
    triv = ElementSet.trivial(table)
    found[triv.bits.tobytes()] = triv
    work = []
    for e in range(1, table.n):
        bits = table.closure([e])
        key = bits.tobytes()
        if key not in found:
            es = ElementSet(table, bits)
            found[key] = es
            work.append(es)
    while work:
        cur = work.pop()
        cur_ids = set(int(i) for i in cur.ids())
        gens = table.subgroup_generators(cur.bits)
        for e in range(1, table.n):
            if e in cur_ids:
                continue
            bits = table.closure(gens + [e])
            key = bits.tobytes()
            if key not in found:
                es = ElementSet(table, bits)
                found[key] = es
                if es.size() < table.n:
                    work.append(es)
                if len(found) > max_subgroups:
                    raise CapacityError(
                        f"subgroup lattice exceeded {max_subgroups} subgroups")
    return sorted(found.values(), key=lambda s: (s.size(), s.bits.tobytes()))


def maximal_subgroups(table: ElementTable,
                      limit: int = LATTICE_LIMIT) -> list:
    """All maximal proper subgroups (exhaustive lattice)."""
    subs = [s for s in all_subgroups(table, limit=limit)
            if s.size() < table.n]
    maximal = []
    for s in subs:
        if any(s.size() < t.size() and s.issubset(t) for t in subs
               if t is not s):
            continue
        maximal.append(s)
    return maximal


@dataclass(frozen=True)
class MuValue:
    """mu(S) = log(min maximal index) / log |S|, kept exact as a pair."""

    min_index: int
    order: int

    @property
    def value(self) -> float:
        if self.order == 1:
            return 1.0
        return log(self.min_index) / log(self.order)

    def at_most_half(self) -> bool:
        """mu <= 1/2, i.e. min_index^2 <= order."""
        return self.min_index ** 2 <= self.order


def mu(table: ElementTable, limit: int = LATTICE_LIMIT) -> MuValue:
    maxs = maximal_subgroups(table, limit=limit)
    if not maxs:
        return MuValue(1, 1)
    min_index = min(table.n // m.size() for m in maxs)
    return MuValue(min_index, table.n)


# ---------------------------------------------------------------------------
# quotients and coset actions

class Quotient:
    """G/H materialized as the regular permutation action on right cosets."""

    def __init__(self, table: ElementTable, H: ElementSet):
        if not is_normal(table, H):
            raise InputError("quotient requires a normal subgroup")
        self.parent = table
        self.kernel = H
        reps, coset_of = _coset_partition(table, H.bits)
        self.reps = reps
        self.coset_of = coset_of          # element id -> coset point
        k = len(reps)
        gens = []
        for g in table.gen_ids:
            col = table.right_col(g)
            imgs = np.array([coset_of[col[r]] for r in reps], dtype=_DTYPE)
            p = Permutation(imgs)
            if not p.is_identity():
                gens.append(p)
        if not gens:
            gens = [Permutation.identity(k)]
        self.group = Group(k, gens, spec=f"quotient({table.n}/{H.size()})")
        self.table = self.group.table()
        # regular action: quotient element <-> image of base point 0
        self._by_point = np.empty(k, dtype=_DTYPE)
        for qid in range(self.table.n):
            self._by_point[self.table.images[qid][0]] = qid

    def project(self, g: int) -> int:
        """Image of a parent element id in the quotient table."""
        return int(self._by_point[self.coset_of[g]])

    def project_set(self, S: ElementSet) -> ElementSet:
        bits = np.zeros(self.table.n, dtype=bool)
        for i in S.ids():
            bits[self.project(int(i))] = True
        return ElementSet(self.table, bits)

    def lift(self, qid: int) -> int:
        """Least parent id mapping onto the given quotient element."""
        pt = int(self.table.images[qid][0])
        return int(self.reps[pt])


def _coset_partition(table, hbits):
    coset_of = np.full(table.n, -1, dtype=_DTYPE)
    reps = []
    hidx = np.nonzero(hbits)[0]
    for e in range(table.n):
        if coset_of[e] >= 0:
            continue
        members = table.left_col(e)[hidx] if e else hidx
        cid = len(reps)
        reps.append(int(members.min()))
        coset_of[members] = cid
    return np.array(reps, dtype=_DTYPE), coset_of


def coset_action(table: ElementTable, H: ElementSet) -> Group:
    """Transitive action of G on the right cosets of a subgroup H."""
    if not H.is_subgroup():
        raise InputError("coset action needs a subgroup")
    coset_of = np.full(table.n, -1, dtype=_DTYPE)
    reps = []
    hidx = np.nonzero(H.bits)[0]
    for e in range(table.n):
        if coset_of[e] >= 0:
            continue
        members = table.right_col(e)[hidx] if e else hidx
        cid = len(reps)
        reps.append(int(members.min()))
        coset_of[members] = cid
    k = len(reps)
    gens = []
    for g in table.gen_ids:
        col = table.right_col(g)
        imgs = np.array([coset_of[col[r]] for r in reps], dtype=_DTYPE)
        gens.append(Permutation(imgs))
    if not gens:
        gens = [Permutation.identity(k)]
    return Group(k, gens, spec=f"cosets({table.n}:{H.size()})")


def subgroup_table(table: ElementTable, H: ElementSet):
    """Re-enumerate a subgroup as its own table; returns (table, embed ids)."""
    gens = table.subgroup_generators(H.bits)
    if not gens:
        g = Group(table.group.degree,
                  [Permutation.identity(table.group.degree)], spec="trivial")
    else:
        g = Group(table.group.degree, [table.element(i) for i in gens],
                  spec=f"subgroup({H.size()})")
    sub = g.table()
    embed = np.array([table.lookup(sub.element(i)) for i in range(sub.n)],
                     dtype=_DTYPE)
    return sub, embed


# ---------------------------------------------------------------------------
# structural predicates

def is_soluble_set(table: ElementTable, H: ElementSet) -> bool:
    cur = H
    while cur.size() > 1:
        nxt = _bracket_once(table, cur, cur)
        if nxt == cur:
            return False
        cur = nxt
    return True


def is_abelian_set(table: ElementTable, H: ElementSet) -> bool:
    gens = table.subgroup_generators(H.bits)
    return all(table.comm(a, b) == 0 for a in gens for b in gens)


def is_simple_table(t: ElementTable) -> bool:
    """Non-abelian simple test by exhaustive class-closure check."""
    if t.n == 1:
        return False
    if is_abelian_set(t, ElementSet.full(t)):
        return False
    cls, reps = t.conjugacy_classes()
    for rep in reps:
        if rep == 0:
            continue
        if int(t.normal_closure([rep]).sum()) != t.n:
            return False
    return True


def exponent_of(table: ElementTable) -> int:
    from math import lcm
    _, reps = table.conjugacy_classes()
    e = 1
    for r in reps:
        e = lcm(e, table.order_of(int(r)))
    return e
