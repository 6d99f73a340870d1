"""Quasi-minimal normal subgroups, acceptability, and automorphisms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError, InvariantFailure
from .perm import Permutation, _DTYPE
from .groups import (
    ElementSet,
    ElementTable,
    Quotient,
    bracket,
    is_abelian_set,
    is_normal,
    is_simple_table,
    is_soluble_set,
    normal_subgroups,
    subgroup_table,
)


class Automorphism:
    """Automorphism of a table-backed group, as a permutation of element ids."""

    __slots__ = ("table", "element_images", "provenance")

    def __init__(self, table: ElementTable, element_images, provenance=None,
                 validate=True):
        imgs = np.asarray(element_images, dtype=_DTYPE)
        if imgs.shape != (table.n,):
            raise InputError("automorphism image array has wrong length")
        self.table = table
        self.element_images = imgs
        self.provenance = provenance or ("explicit",)
        if validate:
            self._validate()

    def _validate(self):
        t, f = self.table, self.element_images
        if f[0] != 0:
            raise InputError("automorphism must fix the identity")
        if len(np.unique(f)) != t.n:
            raise InputError("automorphism images are not a bijection")
        for a in t.gen_ids:
            for b in t.gen_ids:
                if f[t.mul(a, b)] != t.mul(int(f[a]), int(f[b])):
                    raise InputError(
                        "map is not multiplicative on generator pairs")
        # spot-check beyond the generators
        rng = np.random.default_rng(0)
        k = min(t.n, 40)
        xs = rng.integers(0, t.n, size=k)
        ys = rng.integers(0, t.n, size=k)
        for a, b in zip(xs, ys):
            if f[t.mul(int(a), int(b))] != t.mul(int(f[a]), int(f[b])):
                raise InputError("map fails product preservation on sample")

    @staticmethod
    def identity(table) -> "Automorphism":
        return Automorphism(table, np.arange(table.n, dtype=_DTYPE),
                            provenance=("identity",), validate=False)

    @staticmethod
    def inner(table, g: int) -> "Automorphism":
        col = table.right_col(g)[table.left_col(table.inv(g))]
        return Automorphism(table, col, provenance=("inner", g),
                            validate=False)

    def apply(self, x: int) -> int:
        return int(self.element_images[x])

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self then other (matching exponent notation x^(ab) = (x^a)^b)."""
        return Automorphism(self.table,
                            other.element_images[self.element_images],
                            provenance=("composed",), validate=False)

    def inverse(self) -> "Automorphism":
        inv = np.empty(self.table.n, dtype=_DTYPE)
        inv[self.element_images] = np.arange(self.table.n, dtype=_DTYPE)
        return Automorphism(self.table, inv, provenance=("inverse",),
                            validate=False)

    def is_identity(self) -> bool:
        return bool((self.element_images
                     == np.arange(self.table.n)).all())

    def fingerprint(self) -> bytes:
        return self.element_images.tobytes()

    def __eq__(self, other):
        return (isinstance(other, Automorphism)
                and self.table is other.table
                and bool((self.element_images == other.element_images).all()))

    def __hash__(self):
        return hash(self.element_images.tobytes())

    def check_full(self) -> bool:
        """Exhaustive product preservation (desk scale only)."""
        t, f = self.table, self.element_images
        for a in range(t.n):
            col = t.right_col(a)
            # f(b * a) == f(b) * f(a) for all b, vectorized over b
            lhs = f[col]
            rhs = t.right_col(int(f[a]))[f]
            if not (lhs == rhs).all():
                return False
        return True


def automorphism_from_ambient(ambient: ElementTable, N: ElementSet,
                              conjugator: Permutation) -> Automorphism:
    """Automorphism of the subgroup N induced by an ambient conjugation."""
    c = ambient.lookup(conjugator)
    sub, embed = subgroup_table(ambient, N)
    ci = ambient.inv(c)
    imgs = np.empty(sub.n, dtype=_DTYPE)
    back = {int(e): i for i, e in enumerate(embed)}
    for i in range(sub.n):
        conj = ambient.mul(ambient.mul(ci, int(embed[i])), c)
        if conj not in back:
            raise InputError("conjugator does not normalize the subgroup")
        imgs[i] = back[conj]
    return Automorphism(sub, imgs, provenance=("ambient", str(conjugator)))


def automorphism_on_set(table: ElementTable, N: ElementSet,
                        conjugator_id: int):
    """Id-level conjugation map of N by a table element; None if not normal-
    izing.  Returns an array over the full table restricted use on N."""
    ci = table.inv(conjugator_id)
    col = table.right_col(conjugator_id)[table.left_col(ci)]
    if not N.bits[col[N.ids()]].all():
        return None
    return col


def automorphism_from_images(table: ElementTable, gen_images: dict,
                             ) -> Automorphism:
    """Extend generator images (id -> id) to the table by BFS factorization."""
    imgs = np.full(table.n, -1, dtype=_DTYPE)
    imgs[0] = 0
    for i in range(1, table.n):
        p, j = int(table.parent[i]), int(table.genix[i])
        gid = table.gen_ids[j]
        if gid not in gen_images:
            raise InputError("missing image for a generator")
        imgs[i] = table.mul(int(imgs[p]), int(gen_images[gid]))
    return Automorphism(table, imgs, provenance=("images", dict(gen_images)))


# ---------------------------------------------------------------------------
# quasi-minimal normal subgroups

@dataclass
class QmnReport:
    """A quasi-minimal normal subgroup with its unique maximal sub-normal."""

    N: ElementSet
    Z: ElementSet
    kind: str                      # soluble-abelian | soluble-nonabelian |
    #                                quasi-semisimple
    p: Optional[int] = None        # prime for soluble kind
    module_dim: Optional[int] = None
    quotient: Optional[Quotient] = None      # N/Z as its own group
    factors: Optional[list] = None           # simple factors of N/Z (qss)

    @property
    def n_factors(self):
        return len(self.factors) if self.factors else None


def find_qmn(table: ElementTable, H: ElementSet) -> QmnReport:
    """Deterministic quasi-minimal normal subgroup of G inside H."""
    G = ElementSet.full(table)
    if H.size() <= 1:
        raise InputError("H must be nontrivial")
    if not is_normal(table, H):
        raise InputError("H must be normal")
    if bracket(table, H, G) != H:
        raise InputError("H must satisfy H = [H, G]")
    normals = normal_subgroups(table)
    candidates = []
    for N in normals:
        if N.size() <= 1 or not N.issubset(H):
            continue
        if bracket(table, N, G) == N:
            candidates.append(N)
    minimal = [N for N in candidates
               if not any(M is not N and M.issubset(N) and M.size() < N.size()
                          for M in candidates)]
    minimal.sort(key=lambda s: (s.size(), s.bits.tobytes()))
    N = minimal[0]
    below = [M for M in normals if M.issubset(N) and M.size() < N.size()]
    Z = max(below, key=lambda s: s.size())
    for M in below:
        if not M.issubset(Z):
            raise InvariantFailure("Z_N is not unique-maximal below N")
    return _classify_qmn(table, N, Z)


def _classify_qmn(table, N, Z):
    quot = _section_quotient(table, N, Z)
    if is_soluble_set(table, N):
        qt = quot.table
        order = qt.n
        p = _least_prime_factor(order)
        # N/Z must be elementary abelian p
        full = ElementSet.full(qt)
        if not is_abelian_set(qt, full) or p ** _intlog(order, p) != order:
            raise InvariantFailure("soluble QMN has non-elementary section")
        kind = ("soluble-abelian" if is_abelian_set(table, N)
                else "soluble-nonabelian")
        return QmnReport(N=N, Z=Z, kind=kind, p=p,
                         module_dim=_intlog(order, p), quotient=quot)
    factors = _semisimple_factors(quot.table)
    return QmnReport(N=N, Z=Z, kind="quasi-semisimple", quotient=quot,
                     factors=factors)


def _section_quotient(table, N, Z) -> Quotient:
    sub, embed = subgroup_table(table, N)
    zbits = np.zeros(sub.n, dtype=bool)
    back = {int(e): i for i, e in enumerate(embed)}
    for z in Z.ids():
        zbits[back[int(z)]] = True
    q = Quotient(sub, ElementSet(sub, zbits))
    return q


def _semisimple_factors(qt: ElementTable) -> list:
    """Minimal normal subgroups of a semisimple quotient: its simple factors."""
    normals = normal_subgroups(qt)
    mins = []
    for N in normals:
        if N.size() <= 1:
            continue
        if not any(M.size() > 1 and M.size() < N.size() and M.issubset(N)
                   for M in normals):
            mins.append(N)
    total = 1
    for m in mins:
        total *= m.size()
    if total != qt.n:
        raise InvariantFailure("semisimple section does not factor")
    return mins


def _least_prime_factor(n):
    for p in range(2, n + 1):
        if n % p == 0:
            return p
    return n


def _intlog(n, p):
    k = 0
    while n % p == 0 and n > 1:
        n //= p
        k += 1
    if n != 1:
        raise InvariantFailure("order is not a prime power")
    return k


def is_acceptable(table: ElementTable, H: ElementSet):
    """Acceptability: H = [H,G] and no normal section in H is S or S x S."""
    if not is_normal(table, H):
        raise InputError("H must be normal")
    G = ElementSet.full(table)
    if H.size() > 1 and bracket(table, H, G) != H:
        return False, (None, H)
    normals = [N for N in normal_subgroups(table) if N.issubset(H)]
    for N in normals:
        if N.size() <= 1:
            continue
        for Z in normals:
            if Z.size() >= N.size() or not Z.issubset(N):
                continue
            if _section_is_s_or_ss(table, N, Z):
                return False, (Z, N)
    return True, None


def _section_is_s_or_ss(table, N, Z):
    quot = _section_quotient(table, N, Z)
    qt = quot.table
    if is_simple_table(qt):
        return True
    # S x S: exactly two proper nontrivial normals, both simple, same order,
    # trivial intersection, product everything
    normals = normal_subgroups(qt)
    proper = [M for M in normals if 1 < M.size() < qt.n]
    if len(proper) != 2:
        return False
    A, B = proper
    if A.size() != B.size() or (A & B).size() != 1:
        return False
    if A.size() * B.size() != qt.n:
        return False
    At, _ = subgroup_table(qt, A)
    return is_simple_table(At)
