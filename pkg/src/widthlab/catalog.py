"""Group-spec grammar and the built-in catalog.

Grammar (whitespace-insensitive): Sym(n), Alt(n), Cyclic(n), Dihedral(n),
SL(2,q) acting on the q^2-1 nonzero vectors, Heisenberg(p) in its regular
action, Direct(spec, ...), FromGenerators(degree; cycles, ...).
"""

from __future__ import annotations

import re

import numpy as np

from .errors import InputError
from .perm import Permutation, parse_cycles, _DTYPE
from .groups import Group


def sym(n: int) -> Group:
    if n < 1:
        raise InputError("Sym(n) needs n >= 1")
    if n == 1:
        return Group(1, [Permutation.identity(1)], spec="Sym(1)")
    gens = [Permutation.from_cycles([tuple(range(n))], n)]
    if n > 2:
        gens.append(Permutation.from_cycles([(0, 1)], n))
    return Group(n, gens, spec=f"Sym({n})")


def alt(n: int) -> Group:
    if n < 1:
        raise InputError("Alt(n) needs n >= 1")
    if n <= 2:
        return Group(max(n, 1), [Permutation.identity(max(n, 1))],
                     spec=f"Alt({n})")
    if n == 3:
        return Group(3, [Permutation.from_cycles([(0, 1, 2)], 3)],
                     spec="Alt(3)")
    gens = [Permutation.from_cycles([(0, 1, 2)], n)]
    if n % 2:
        gens.append(Permutation.from_cycles([tuple(range(n))], n))
    else:
        gens.append(Permutation.from_cycles([tuple(range(1, n))], n))
    return Group(n, gens, spec=f"Alt({n})")


def cyclic(n: int) -> Group:
    if n < 1:
        raise InputError("Cyclic(n) needs n >= 1")
    if n == 1:
        return Group(1, [Permutation.identity(1)], spec="Cyclic(1)")
    return Group(n, [Permutation.from_cycles([tuple(range(n))], n)],
                 spec=f"Cyclic({n})")


def dihedral(n: int) -> Group:
    """Dihedral group of order 2n."""
    if n < 1:
        raise InputError("Dihedral(n) needs n >= 1")
    if n == 1:
        return Group(2, [Permutation.from_cycles([(0, 1)], 2)],
                     spec="Dihedral(1)")
    if n == 2:
        return Group(4, [Permutation.from_cycles([(0, 1)], 4),
                         Permutation.from_cycles([(2, 3)], 4)],
                     spec="Dihedral(2)")
    rot = Permutation.from_cycles([tuple(range(n))], n)
    refl = Permutation(np.array([(n - i) % n for i in range(n)],
                                dtype=_DTYPE))
    return Group(n, [rot, refl], spec=f"Dihedral({n})")


def heisenberg(p: int) -> Group:
    """Upper unitriangular 3x3 group over F_p (order p^3), regular action."""
    if p < 2 or any(p % k == 0 for k in range(2, p)):
        raise InputError("Heisenberg(p) needs p prime")
    n = p ** 3

    def idx(a, b, c):
        return (a * p + b) * p + c

    def right_mul(a2, b2, c2):
        imgs = np.empty(n, dtype=_DTYPE)
        for a in range(p):
            for b in range(p):
                for c in range(p):
                    imgs[idx(a, b, c)] = idx(
                        (a + a2) % p, (b + b2) % p, (c + c2 + a * b2) % p)
        return Permutation(imgs)

    return Group(n, [right_mul(1, 0, 0), right_mul(0, 1, 0)],
                 spec=f"Heisenberg({p})")


# -- small finite fields -----------------------------------------------------

class SmallField:
    """F_q for modest prime powers, elements encoded as ints 0..q-1."""

    def __init__(self, q: int):
        p, k = _prime_power(q)
        self.q, self.p, self.k = q, p, k
        if k == 1:
            self.modpoly = None
        else:
            self.modpoly = _find_irreducible(p, k)
        self._mul = {}

    def add(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        return _poly_addenc(a, b, self.p, self.k)

    def neg(self, a):
        if self.k == 1:
            return (-a) % self.p
        digs = _digits(a, self.p, self.k)
        return _enc([(-d) % self.p for d in digs], self.p)

    def mul(self, a, b):
        key = (a, b)
        v = self._mul.get(key)
        if v is None:
            if self.k == 1:
                v = (a * b) % self.p
            else:
                v = _poly_mulenc(a, b, self.p, self.k, self.modpoly)
            self._mul[key] = v
        return v

    def one(self):
        return 1 % self.q if self.k == 1 else 1

    def generator(self):
        """A multiplicative generator (only needed for k > 1: x itself works
        as an additive-spanning element; search for a primitive one)."""
        for cand in range(1, self.q):
            seen = set()
            x = cand
            while x not in seen:
                seen.add(x)
                x = self.mul(x, cand)
            if len(seen) == self.q - 1:
                return cand
        raise InputError("no field generator found")


def _prime_power(q):
    for p in range(2, q + 1):
        if q % p == 0:
            k = 0
            m = q
            while m % p == 0:
                m //= p
                k += 1
            if m != 1:
                raise InputError(f"{q} is not a prime power")
            return p, k
    raise InputError(f"{q} is not a prime power")


def _digits(a, p, k):
    out = []
    for _ in range(k):
        out.append(a % p)
        a //= p
    return out


def _enc(digs, p):
    v = 0
    for d in reversed(digs):
        v = v * p + d
    return v


def _poly_addenc(a, b, p, k):
    da, db = _digits(a, p, k), _digits(b, p, k)
    return _enc([(x + y) % p for x, y in zip(da, db)], p)


def _poly_mulenc(a, b, p, k, modpoly):
    da, db = _digits(a, p, k), _digits(b, p, k)
    prod = [0] * (2 * k - 1)
    for i, x in enumerate(da):
        if not x:
            continue
        for j, y in enumerate(db):
            prod[i + j] = (prod[i + j] + x * y) % p
    # reduce by modpoly (monic, coefficients of x^0..x^{k-1} stored)
    for i in range(2 * k - 2, k - 1, -1):
        c = prod[i]
        if c:
            prod[i] = 0
            for j, m in enumerate(modpoly):
                prod[i - k + j] = (prod[i - k + j] - c * m) % p
    return _enc(prod[:k], p)


def _find_irreducible(p, k):
    """Lexicographically first monic irreducible of degree k over F_p."""
    from itertools import product as iproduct
    for coeffs in iproduct(range(p), repeat=k):
        if _is_irreducible(list(coeffs), p, k):
            return list(coeffs)
    raise InputError("no irreducible polynomial found")


def _is_irreducible(coeffs, p, k):
    # poly = x^k + sum coeffs[j] x^j; trial division by monic polys of
    # degree <= k/2
    from itertools import product as iproduct
    if coeffs[0] == 0:
        return False
    full = coeffs + [1]
    for d in range(1, k // 2 + 1):
        for lower in iproduct(range(p), repeat=d):
            div = list(lower) + [1]
            if _poly_divides(div, full, p):
                return False
    return True


def _poly_divides(div, poly, p):
    rem = poly[:]
    dd = len(div) - 1
    for i in range(len(rem) - 1, dd - 1, -1):
        c = rem[i]
        if c:
            for j in range(dd + 1):
                rem[i - dd + j] = (rem[i - dd + j] - c * div[j]) % p
    return all(c == 0 for c in rem[:dd])


def special_linear_2(q: int) -> Group:
    """SL(2, q) acting on the q^2 - 1 nonzero row vectors of F_q^2."""
    F = SmallField(q)
    points = [(a, b) for a in range(q) for b in range(q) if (a, b) != (0, 0)]
    pid = {v: i for i, v in enumerate(points)}

    def mat_perm(m):
        (a, b), (c, d) = m
        imgs = np.empty(len(points), dtype=_DTYPE)
        for i, (x, y) in enumerate(points):
            nx = F.add(F.mul(x, a), F.mul(y, c))
            ny = F.add(F.mul(x, b), F.mul(y, d))
            imgs[i] = pid[(nx, ny)]
        return Permutation(imgs)

    one = F.one()
    gens = [mat_perm(((one, one), (0, one))),
            mat_perm(((one, 0), (one, one)))]
    if F.k > 1:
        lam = F.generator()
        gens.append(mat_perm(((one, lam), (0, one))))
        gens.append(mat_perm(((one, 0), (lam, one))))
    return Group(len(points), gens, spec=f"SL(2,{q})")


def direct(groups) -> Group:
    degree = sum(g.degree for g in groups)
    gens = []
    off = 0
    for g in groups:
        for p in g.generators:
            imgs = np.arange(degree, dtype=_DTYPE)
            imgs[off:off + g.degree] = p.images + off
            gens.append(Permutation(imgs))
        off += g.degree
    spec = "Direct(" + ",".join(g.spec or "?" for g in groups) + ")"
    return Group(degree, gens, spec=spec)


def from_generators(degree: int, cycle_texts) -> Group:
    gens = [parse_cycles(t, degree) for t in cycle_texts]
    if not gens:
        gens = [Permutation.identity(degree)]
    spec = f"FromGenerators({degree}; " + ", ".join(cycle_texts) + ")"
    return Group(degree, gens, spec=spec)


# -- grammar -----------------------------------------------------------------

_NAME_RE = re.compile(r"[A-Za-z]+")


def parse_group(text: str) -> Group:
    """Parse a group spec; see the module docstring for the grammar."""
    s = text.strip()
    g, rest = _parse_one(s)
    if rest.strip():
        raise InputError(f"trailing text in group spec: {rest!r}")
    return g


def _parse_one(s: str):
    s = s.lstrip()
    m = _NAME_RE.match(s)
    if not m:
        raise InputError(f"expected group name at {s[:30]!r}")
    name = m.group(0)
    rest = s[m.end():].lstrip()
    if not rest.startswith("("):
        raise InputError(f"expected '(' after {name}")
    body, rest = _matching_paren(rest)
    lname = name.lower()
    if lname == "sym":
        return sym(_int(body)), rest
    if lname == "alt":
        return alt(_int(body)), rest
    if lname == "cyclic":
        return cyclic(_int(body)), rest
    if lname == "dihedral":
        return dihedral(_int(body)), rest
    if lname == "heisenberg":
        return heisenberg(_int(body)), rest
    if lname == "sl":
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 2 or _int(parts[0]) != 2:
            raise InputError("only SL(2,q) is supported")
        return special_linear_2(_int(parts[1])), rest
    if lname == "direct":
        subs, inner = [], body
        while inner.strip():
            g, inner = _parse_one(inner)
            subs.append(g)
            inner = inner.lstrip()
            if inner.startswith(","):
                inner = inner[1:]
            elif inner.strip():
                raise InputError(f"expected ',' in Direct at {inner[:20]!r}")
        if not subs:
            raise InputError("Direct(...) needs at least one factor")
        return direct(subs), rest
    if lname == "fromgenerators":
        if ";" not in body:
            raise InputError("FromGenerators needs 'degree; generators'")
        deg_text, gen_text = body.split(";", 1)
        degree = _int(deg_text)
        gen_parts = _split_cycle_list(gen_text)
        return from_generators(degree, gen_parts), rest
    raise InputError(f"unknown group constructor {name!r}")


def _matching_paren(s: str):
    assert s.startswith("(")
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return s[1:i], s[i + 1:]
    raise InputError(f"unbalanced parentheses in {s[:40]!r}")


def _split_cycle_list(text: str):
    """Split 'cyc, cyc, ...' at commas that sit outside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail:
        parts.append(tail)
    return [p for p in parts if p]


def _int(s: str) -> int:
    try:
        return int(s.strip())
    except ValueError:
        raise InputError(f"expected an integer, got {s!r}") from None


# -- the built-in catalog ----------------------------------------------------

CATALOG = [
    "Cyclic(1)", "Cyclic(2)", "Cyclic(6)", "Cyclic(12)",
    "Sym(3)", "Sym(4)", "Sym(5)", "Sym(6)", "Sym(7)",
    "Alt(4)", "Alt(5)", "Alt(6)", "Alt(7)",
    "Dihedral(4)", "Dihedral(6)", "Dihedral(10)",
    "Heisenberg(3)", "Heisenberg(5)",
    "SL(2,3)", "SL(2,5)", "SL(2,7)",
    "Direct(Alt(5),Cyclic(2))", "Direct(Sym(3),Sym(3))",
    "Direct(Alt(5),Alt(5))",
]


def catalog_groups(max_order=None):
    """Instantiate the catalog, optionally filtered by order."""
    out = []
    for spec in CATALOG:
        g = parse_group(spec)
        t = g.table()
        if max_order is None or t.n <= max_order:
            out.append(g)
    return out
