"""Built-in group instances for the counting and fibre suites.

These construct small groups with designated normal sections: the Klein
four section of Alt(4), a wreath-like product with a C3 x C3 section, an
extraspecial 2-group of minus type with an order-5 twist (the |N'| = 2
quadratic-form case), and Heisenberg groups twisted by elements of GL_2(3)
(the |N'| > 2 case, with and without a central twist)."""

from __future__ import annotations

from itertools import product as iproduct

import numpy as np

from .errors import InputError, InvariantFailure
from .perm import Permutation, parse_cycles, _DTYPE
from .groups import ElementSet, Group, subgroup
from .catalog import parse_group
from .structure import find_qmn


def alt4_klein():
    """(table, qmn) for the Klein four subgroup of Alt(4)."""
    t = parse_group("Alt(4)").table()
    v = subgroup(t, ElementSet.from_ids(
        t, [t.lookup(parse_cycles("(0 1)(2 3)", 4))]), "normal_closure")
    return t, find_qmn(t, v)


def wreath_c3_squared():
    """S3 wr C2 with its C3 x C3 quasi-minimal normal subgroup."""
    g = parse_group(
        "FromGenerators(6; (0 1 2), (0 1), (0 3)(1 4)(2 5))")
    t = g.table()
    if t.n != 72:
        raise InvariantFailure("wreath instance has wrong order")
    n = subgroup(t, ElementSet.from_ids(
        t, [t.lookup(parse_cycles("(0 1 2)", 6)),
            t.lookup(parse_cycles("(3 4 5)", 6))]), "generated")
    return t, find_qmn(t, n)


# ---------------------------------------------------------------------------
# extraspecial 2-group of minus type with a C5 twist

def _q0(v):
    """Minus-type quadratic form on F_2^4."""
    return (v[0] + v[0] * v[1] + v[1] + v[2] * v[3]) % 2


def _beta_form(u, v):
    """Bilinear beta with beta(v,v) = q0(v); polar form is symplectic."""
    return (u[0] * v[0] + u[0] * v[1] + u[1] * v[1] + u[2] * v[3]) % 2


def _polar(u, v):
    return (_beta_form(u, v) + _beta_form(v, u)) % 2


def extraspecial_minus_32():
    """The extraspecial group of order 32 and minus type, as pairs (v, c)
    with product twisted by the beta form; encoded on 32 points."""
    def idx(v, c):
        return ((v[0] * 2 + v[1]) * 2 + v[2]) * 4 + v[3] * 2 + c

    def mul(a, b):
        va, ca = a
        vb, cb = b
        v = tuple((x + y) % 2 for x, y in zip(va, vb))
        return v, (ca + cb + _beta_form(va, vb)) % 2

    elements = [(tuple(v), c) for v in iproduct(range(2), repeat=4)
                for c in range(2)]
    eidx = {e: i for i, e in enumerate(elements)}

    def right_perm(b):
        imgs = np.empty(32, dtype=_DTYPE)
        for e in elements:
            imgs[eidx[e]] = eidx[mul(e, b)]
        return Permutation(imgs)

    return elements, eidx, mul, right_perm


def _find_order5_orthogonal():
    """An order-5 matrix in GL_4(2) preserving the minus-type form."""
    vecs = [tuple(v) for v in iproduct(range(2), repeat=4)]
    basis = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]

    def apply(mat, v):
        out = [0, 0, 0, 0]
        for i in range(4):
            if v[i]:
                out = [(a + b) % 2 for a, b in zip(out, mat[i])]
        return tuple(out)

    for rows in iproduct(vecs, repeat=4):
        mat = list(rows)
        imgs = {v: apply(mat, v) for v in vecs}
        if len(set(imgs.values())) != 16:
            continue
        if any(_q0(imgs[v]) != _q0(v) for v in vecs):
            continue
        # order 5: A^5 = I, A != I
        cur = {v: v for v in vecs}
        order = 0
        for k in range(1, 6):
            cur = {v: imgs[cur[v]] for v in vecs}
            if all(cur[v] == v for v in vecs):
                order = k
                break
        if order == 5:
            return mat
    raise InvariantFailure("no order-5 orthogonal matrix found")


def extraspecial_with_c5():
    """G = 2^{1+4}_- : C5 on 32 points; returns (table, qmn) with the
    extraspecial N as a quasi-minimal normal subgroup, |N'| = 2."""
    elements, eidx, mul, right_perm = extraspecial_minus_32()
    A = _find_order5_orthogonal()

    def apply(mat, v):
        out = [0, 0, 0, 0]
        for i in range(4):
            if v[i]:
                out = [(a + b) % 2 for a, b in zip(out, mat[i])]
        return tuple(out)

    # q_A from the alternating defect of beta under A
    def b_defect(u, v):
        return (_beta_form(apply(A, u), apply(A, v)) + _beta_form(u, v)) % 2

    basis = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    coeff = {}
    for i in range(4):
        for j in range(i + 1, 4):
            coeff[(i, j)] = b_defect(basis[i], basis[j])

    def q_A(v):
        s = 0
        for (i, j), c in coeff.items():
            s += c * v[i] * v[j]
        return s % 2

    def alpha(e):
        v, c = e
        return apply(A, v), (c + q_A(v)) % 2

    # sanity: alpha is an automorphism
    for e1 in elements:
        for e2 in elements:
            if alpha(mul(e1, e2)) != mul(alpha(e1), alpha(e2)):
                raise InvariantFailure("order-5 twist is not a morphism")
    imgs = np.empty(32, dtype=_DTYPE)
    for e in elements:
        imgs[eidx[e]] = eidx[alpha(e)]
    twist = Permutation(imgs)
    gens = [right_perm(((1, 0, 0, 0), 0)), right_perm(((0, 1, 0, 0), 0)),
            right_perm(((0, 0, 1, 0), 0)), right_perm(((0, 0, 0, 1), 0)),
            twist]
    g = Group(32, gens, spec="Extraspecial32MinusC5")
    t = g.table()
    if t.n != 160:
        raise InvariantFailure(f"expected order 160, got {t.n}")
    nbits = np.zeros(t.n, dtype=bool)
    for e in elements:
        nbits[t.lookup(right_perm(e))] = True
    N = ElementSet(t, nbits)
    return t, find_qmn(t, N)


# ---------------------------------------------------------------------------
# Heisenberg(3) with GL_2(3) twists

def _heisenberg3_points():
    p = 3
    elements = [(a, b, c) for a in range(p) for b in range(p)
                for c in range(p)]
    eidx = {e: i for i, e in enumerate(elements)}

    def mul(x, y):
        return ((x[0] + y[0]) % p, (x[1] + y[1]) % p,
                (x[2] + y[2] + x[0] * y[1]) % p)

    def right_perm(b):
        imgs = np.empty(27, dtype=_DTYPE)
        for e in elements:
            imgs[eidx[e]] = eidx[mul(e, b)]
        return Permutation(imgs)

    return elements, eidx, mul, right_perm


def heisenberg_twist(matrix, expect_order):
    """Heisenberg(3) : <matrix> with matrix in GL_2(3) acting on (a, b) and
    by det on the centre; returns the (table, N ElementSet)."""
    elements, eidx, mul, right_perm = _heisenberg3_points()
    p = 3
    (m00, m01), (m10, m11) = matrix
    det = (m00 * m11 - m01 * m10) % p
    if det == 0:
        raise InputError("twist matrix must be invertible")

    def phi(e):
        a, b, c = e
        na = (a * m00 + b * m10) % p
        nb = (a * m01 + b * m11) % p
        # correction keeping phi multiplicative: quadratic in (a, b)
        corr = (m00 * m01 * a * (a - 1) // 2 + m10 * m11 * b * (b - 1) // 2
                + m01 * m10 * a * b) % p
        return na, nb, (c * det + corr) % p

    for e1 in elements:
        for e2 in elements:
            if phi(mul(e1, e2)) != mul(phi(e1), phi(e2)):
                raise InputError("matrix does not lift to an automorphism")
    imgs = np.empty(27, dtype=_DTYPE)
    for e in elements:
        imgs[eidx[e]] = eidx[phi(e)]
    twist = Permutation(imgs)
    gens = [right_perm((1, 0, 0)), right_perm((0, 1, 0)), twist]
    g = Group(27, gens, spec=f"Heisenberg3Twist{expect_order}")
    t = g.table()
    if t.n != 27 * expect_order:
        raise InvariantFailure(
            f"expected order {27 * expect_order}, got {t.n}")
    nbits = np.zeros(t.n, dtype=bool)
    for e in elements:
        nbits[t.lookup(right_perm(e))] = True
    zbits = np.zeros(t.n, dtype=bool)
    for c in range(3):
        zbits[t.lookup(right_perm((0, 0, c)))] = True
    return t, ElementSet(t, nbits), ElementSet(t, zbits)


def heisenberg_case3():
    """Order-4 twist with determinant 1: [Z,G] = 1, |N'| = 3 (clean case)."""
    t, N, _ = heisenberg_twist(((0, 2), (1, 0)), 4)
    return t, find_qmn(t, N)


def heisenberg_case3_waiver():
    """Order-8 Singer twist: [Z,G] != 1, so only brute-force mode applies."""
    # multiplication by x on F_9 = F_3[x]/(x^2 - x - 1): order 8, det = -1
    t, N, Z = heisenberg_twist(((0, 1), (1, 1)), 8)
    return t, N, Z
