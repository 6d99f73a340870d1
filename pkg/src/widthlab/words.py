"""Word ASTs, value sets, verbal subgroups and exact width computation.

Width is measured by product-set BFS: levels S_{k+1} = S_k * X until the
chain stabilizes at the target subgroup.  The bound-constant calculator
keeps everything in exact integer/rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import CapacityError, InputError, InvariantFailure
from .perm import _DTYPE
from .groups import ElementSet, ElementTable

EVAL_BUDGET = 100_000_000


# ---------------------------------------------------------------------------
# word AST

@dataclass(frozen=True)
class Word:
    """Group word over variables x1..xk."""

    op: str                      # var | prod | inv | pow | comm
    var: int = 0
    args: tuple = ()
    exp: int = 1

    @property
    def arity(self) -> int:
        if self.op == "var":
            return self.var
        return max((a.arity for a in self.args), default=0)

    def __str__(self):
        return format_word(self)


def w_var(i):
    return Word("var", var=i)


def w_prod(*args):
    flat = []
    for a in args:
        if a.op == "prod":
            flat.extend(a.args)
        else:
            flat.append(a)
    if len(flat) == 1:
        return flat[0]
    return Word("prod", args=tuple(flat))


def w_pow(a, e):
    if a.op == "pow":
        a, e = a.args[0], a.exp * e
    if e == 1:
        return a
    return Word("pow", args=(a,), exp=e)


def w_comm(a, b):
    return Word("comm", args=(a, b))


def gamma_word(n):
    """Simple commutator [x1, ..., xn] (left-normed)."""
    if n < 2:
        raise InputError("gamma word needs n >= 2")
    w = w_comm(w_var(1), w_var(2))
    for i in range(3, n + 1):
        w = w_comm(w, w_var(i))
    return w


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise InputError(f"word syntax error at {self.pos}: {msg}")

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_word(self):
        parts = [self.parse_term()]
        while self.peek() and self.peek() not in ",])":
            parts.append(self.parse_term())
        return w_prod(*parts)

    def parse_term(self):
        atom = self.parse_atom()
        if self.peek() == "^":
            self.pos += 1
            return w_pow(atom, self.parse_int())
        return atom

    def parse_atom(self):
        ch = self.peek()
        if ch == "x":
            self.pos += 1
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("expected variable index after 'x'")
            return w_var(int(self.text[start:self.pos]))
        if ch == "[":
            self.pos += 1
            lhs = self.parse_word()
            if self.peek() != ",":
                self.error("expected ',' in commutator")
            self.pos += 1
            rhs = self.parse_word()
            if self.peek() != "]":
                self.error("expected ']'")
            self.pos += 1
            return w_comm(lhs, rhs)
        if ch == "(":
            self.pos += 1
            inner = self.parse_word()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return inner
        self.error(f"unexpected character {ch!r}")

    def parse_int(self):
        self.peek()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or self.text[start:self.pos] == "-":
            self.error("expected integer exponent")
        return int(self.text[start:self.pos])


def parse_word(text: str) -> Word:
    p = _Parser(text)
    w = p.parse_word()
    if p.peek():
        p.error("trailing input")
    return w


def format_word(w: Word) -> str:
    if w.op == "var":
        return f"x{w.var}"
    if w.op == "prod":
        return " ".join(_format_factor(a) for a in w.args)
    if w.op == "pow":
        return f"{_format_factor(w.args[0])}^{w.exp}"
    if w.op == "comm":
        return f"[{format_word(w.args[0])},{format_word(w.args[1])}]"
    raise InputError(f"unknown word op {w.op}")


def _format_factor(w):
    if w.op in ("prod", "pow"):
        return "(" + format_word(w) + ")"
    return format_word(w)


# ---------------------------------------------------------------------------
# evaluation

def eval_word(table: ElementTable, w: Word, assignment) -> int:
    """Evaluate on a tuple of element ids (index 0 = x1)."""
    if w.op == "var":
        return int(assignment[w.var - 1])
    if w.op == "prod":
        acc = 0
        for a in w.args:
            acc = table.mul(acc, eval_word(table, a, assignment))
        return acc
    if w.op == "pow":
        return table.power(eval_word(table, w.args[0], assignment), w.exp)
    if w.op == "comm":
        u = eval_word(table, w.args[0], assignment)
        v = eval_word(table, w.args[1], assignment)
        return table.comm(u, v)
    raise InputError(f"unknown word op {w.op}")


def _eval_mixed(table, w, scalars, k):
    """Evaluate with x1..x_{k-1} scalar and x_k ranging over the table.

    Returns ('s', id) or ('v', ndarray over all ids in table order)."""
    if w.op == "var":
        if w.var == k:
            return ("v", np.arange(table.n, dtype=_DTYPE))
        return ("s", int(scalars[w.var - 1]))
    if w.op == "prod":
        acc = ("s", 0)
        for a in w.args:
            acc = _mixed_mul(table, acc, _eval_mixed(table, a, scalars, k))
        return acc
    if w.op == "pow":
        base = _eval_mixed(table, w.args[0], scalars, k)
        e = w.exp
        if e < 0:
            base = _mixed_inv(table, base)
            e = -e
        acc = ("s", 0)
        while e:
            if e & 1:
                acc = _mixed_mul(table, acc, base)
            e >>= 1
            if e:
                base = _mixed_mul(table, base, base)
        return acc
    if w.op == "comm":
        u = _eval_mixed(table, w.args[0], scalars, k)
        v = _eval_mixed(table, w.args[1], scalars, k)
        ui, vi = _mixed_inv(table, u), _mixed_inv(table, v)
        return _mixed_mul(table, _mixed_mul(table, ui, vi),
                          _mixed_mul(table, u, v))
    raise InputError(f"unknown word op {w.op}")


def _mixed_mul(table, a, b):
    ka, va = a
    kb, vb = b
    if ka == "s" and kb == "s":
        return ("s", table.mul(va, vb))
    if ka == "s":
        return ("v", table.mul_scalar_vec(va, vb))
    if kb == "s":
        return ("v", table.mul_vec_scalar(va, vb))
    return ("v", table.mul_vec_vec(va, vb))


def _mixed_inv(table, a):
    ka, va = a
    if ka == "s":
        return ("s", table.inv(va))
    return ("v", table.inverses[va])


def value_set(table: ElementTable, w: Word,
              budget: int = EVAL_BUDGET) -> ElementSet:
    """All w-values and their inverses (always contains the identity)."""
    k = w.arity
    if k == 0:
        return ElementSet.trivial(table)
    if table.n ** k > budget:
        raise CapacityError(
            f"value_set needs {table.n ** k} evaluations > budget {budget}; "
            "consider value_set_sampled")
    bits = np.zeros(table.n, dtype=bool)
    if k == 1:
        kind, v = _eval_mixed(table, w, (), 1)
        if kind == "s":
            bits[v] = True
        else:
            bits[v] = True
    else:
        scalars = [0] * (k - 1)
        while True:
            kind, v = _eval_mixed(table, w, scalars, k)
            if kind == "s":
                bits[v] = True
            else:
                bits[v] = True
            i = k - 2
            while i >= 0:
                scalars[i] += 1
                if scalars[i] < table.n:
                    break
                scalars[i] = 0
                i -= 1
            if i < 0:
                break
    bits[table.inverses[np.nonzero(bits)[0]]] = True
    bits[0] = True
    return ElementSet(table, bits)


def value_set_sampled(table: ElementTable, w: Word, samples: int,
                      seed: int) -> ElementSet:
    """Seeded uniform sample of w-values; a lower bound for the value set."""
    k = max(w.arity, 1)
    rng = np.random.default_rng(seed)
    bits = np.zeros(table.n, dtype=bool)
    for _ in range(samples):
        tup = rng.integers(0, table.n, size=k)
        bits[eval_word(table, w, tup)] = True
    bits[table.inverses[np.nonzero(bits)[0]]] = True
    bits[0] = True
    return ElementSet(table, bits)


# ---------------------------------------------------------------------------
# width BFS

@dataclass
class WidthReport:
    """Result of an exact product-set width computation."""

    group: str
    word: Optional[str]
    value_set_size: int
    frontier_sizes: list
    width: int
    truncated: bool = False
    witness: Optional[list] = None


def width(table: ElementTable, X: ElementSet, target: ElementSet,
          word_text: Optional[str] = None, deadline=None,
          want_witness: Optional[int] = None) -> WidthReport:
    """Minimal n with X^{*n} = target; X must contain 1 and generate target."""
    if not X.bits[0]:
        raise InputError("width requires the identity in X")
    gen = table.closure(X.ids())
    if not (gen == target.bits).all():
        raise InputError("target must equal the subgroup generated by X")
    reached = np.zeros(table.n, dtype=bool)
    reached[0] = True
    sizes = [1]
    xids = X.ids()
    xcols = [table.right_col(int(x)) for x in xids]
    prev = np.full(table.n, -1, dtype=_DTYPE)
    via = np.full(table.n, -1, dtype=_DTYPE)
    level = 0
    frontier = np.array([0], dtype=_DTYPE)
    import time
    while not (reached == target.bits).all():
        if deadline is not None and time.monotonic() > deadline:
            return WidthReport(table.group.spec, word_text, X.size(),
                               sizes, level, truncated=True)
        level += 1
        new = np.zeros(table.n, dtype=bool)
        for xi, col in zip(xids, xcols):
            imgs = col[frontier]
            fresh_mask = ~(reached[imgs] | new[imgs])
            fresh = imgs[fresh_mask]
            if fresh.size:
                new[fresh] = True
                prev[fresh] = frontier[fresh_mask]
                via[fresh] = xi
        reached |= new
        size = int(reached.sum())
        if size == sizes[-1]:
            raise InvariantFailure("width BFS stalled below target")
        sizes.append(size)
        frontier = np.nonzero(new)[0].astype(_DTYPE)
    witness = None
    if want_witness is not None:
        witness = _unwind_witness(table, want_witness, prev, via)
    return WidthReport(table.group.spec, word_text, X.size(), sizes,
                       level, witness=witness)


def _unwind_witness(table, target_id, prev, via):
    out = []
    cur = target_id
    while cur != 0:
        if via[cur] < 0:
            return None
        out.append(int(via[cur]))
        cur = int(prev[cur])
    return list(reversed(out))


def verbal_subgroup(table: ElementTable, w: Word,
                    budget: int = EVAL_BUDGET) -> ElementSet:
    vs = value_set(table, w, budget=budget)
    return ElementSet(table, table.closure(vs.ids()))


def word_width(table: ElementTable, w: Word,
               budget: int = EVAL_BUDGET, deadline=None) -> WidthReport:
    """Width of a word: BFS from its value set to its verbal subgroup."""
    vs = value_set(table, w, budget=budget)
    target = ElementSet(table, table.closure(vs.ids()))
    return width(table, vs, target, word_text=format_word(w),
                 deadline=deadline)


# ---------------------------------------------------------------------------
# Hamidoune's lemma

def hamidoune_check(table: ElementTable, X: ElementSet, r: int) -> bool:
    """Check G = X^{*2r} under 1 in X, <X> = G, |G| <= r |X|."""
    if not X.bits[0]:
        raise InputError("hamidoune_check requires 1 in X")
    if table.n > r * X.size():
        raise InputError("hamidoune_check requires |G| <= r|X|")
    gen = table.closure(X.ids())
    if int(gen.sum()) != table.n:
        raise InputError("hamidoune_check requires X to generate G")
    reached = np.zeros(table.n, dtype=bool)
    reached[0] = True
    frontier = np.array([0], dtype=_DTYPE)
    xids = X.ids()
    for _ in range(2 * r):
        new = np.zeros(table.n, dtype=bool)
        for x in xids:
            new[table.right_col(int(x))[frontier]] = True
        new &= ~reached
        reached |= new
        if reached.all():
            return True
        frontier = np.nonzero(new)[0].astype(_DTYPE)
        if not frontier.size:
            break
    return bool(reached.all())


# ---------------------------------------------------------------------------
# tau chains and the derivative identity

def tau_chain(table: ElementTable, g, v):
    """tau_j(g, v) = v_j [g_{j-1}, v_{j-1}] ... [g_1, v_1] for each j."""
    if len(g) != len(v):
        raise InputError("tau_chain needs equal-length tuples")
    m = len(g)
    taus = []
    suffix = 0  # [g_{j-1}, v_{j-1}] ... [g_1, v_1], built up as j grows
    for j in range(m):
        taus.append(table.mul(v[j], suffix))
        suffix = table.mul(table.comm(g[j], v[j]), suffix)
    return taus


def xi_derivative_check(table: ElementTable, g, v, x) -> bool:
    """Xi(x.v) = Xi'_v(x) Xi(v) with Xi'_v(x) = prod [x_j,g_j]^{tau_j}."""
    if not (len(g) == len(v) == len(x)):
        raise InputError("length mismatch")
    m = len(g)
    taus = tau_chain(table, g, v)

    def xi(vec):
        acc = 0
        for j in range(m):
            acc = table.mul(acc, table.comm(vec[j], g[j]))
        return acc

    xv = [table.mul(x[j], v[j]) for j in range(m)]
    lhs = xi(xv)
    rhs = 0
    for j in range(m):
        rhs = table.mul(rhs, table.conj(table.comm(x[j], g[j]), taus[j]))
    rhs = table.mul(rhs, xi(v))
    return lhs == rhs


def twogensets_check(table: ElementTable, g, v) -> bool:
    """<g_j^{tau_j(v)}>^{g_1..g_m} equals <g_j^{v_j g_j ... g_m}>."""
    if len(g) != len(v):
        raise InputError("length mismatch")
    m = len(g)
    taus = tau_chain(table, g, v)
    conj_all = 0
    for j in range(m):
        conj_all = table.mul(conj_all, g[j])
    left_gens = [table.conj(table.conj(g[j], taus[j]), conj_all)
                 for j in range(m)]
    right_gens = []
    for j in range(m):
        c = v[j]
        for i in range(j, m):
            c = table.mul(c, g[i])
        right_gens.append(table.conj(g[j], c))
    left = table.closure(left_gens)
    right = table.closure(right_gens)
    return bool((left == right).all())


# ---------------------------------------------------------------------------
# Lemma on nilpotent-correction commutator decompositions

def nilp_comm_check(table: ElementTable, H: ElementSet, x, n: int) -> bool:
    """Set equality [H,G] = [H,x_1]...[H,x_m] [H,_n G], checked exhaustively.

    Requires H normal and G = G' <x_1,...,x_m>."""
    from .groups import bracket, is_normal
    if not is_normal(table, H):
        raise InputError("H must be normal")
    G = ElementSet.full(table)
    derived = bracket(table, G, G)
    if int(table.closure(list(x) + list(derived.ids())).sum()) != table.n:
        raise InputError("G = G'<x_1..x_m> fails")
    lhs = bracket(table, H, G)
    hids = H.ids()
    acc = np.zeros(table.n, dtype=bool)
    acc[0] = True
    for xi in x:
        # commutator set [H, xi]
        cs = np.zeros(table.n, dtype=bool)
        col = table.right_col(int(xi))[table.left_col(table.inv(int(xi)))]
        conj = col[hids]
        for h, hc in zip(hids, conj):
            cs[table.mul(table.inv(int(h)), int(hc))] = True
        acc = table.set_mul(acc, np.nonzero(cs)[0])
    hn = bracket(table, H, G, n=n)
    acc = table.set_mul(acc, hn.ids())
    return bool((acc == lhs.bits).all())


# ---------------------------------------------------------------------------
# the constants calculator

@dataclass(frozen=True)
class Constants:
    """User-supplied constants; the headline ones are non-constructive."""

    D: int = 1
    C0: int = 1
    C_of_q: int = 1
    M_of_q: int = 1
    mu_of_q: Fraction = Fraction(1, 2)
    epsilon_of_c: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if self.D < 1 or self.C0 < 1 or self.C_of_q < 1 or self.M_of_q < 1:
            raise InputError("constants must be strictly positive")
        if not (0 < self.mu_of_q <= Fraction(1, 2)):
            raise InputError("mu_of_q must lie in (0, 1/2]")
        if not (0 < self.epsilon_of_c <= Fraction(1, 2)):
            raise InputError("epsilon_of_c must lie in (0, 1/2]")


def constants(d: int, q: int, c: Constants) -> dict:
    """The eight derived bound constants, in exact integer arithmetic."""
    if d < 2 or q < 1:
        raise InputError("need d >= 2 and q >= 1")
    D, C0 = c.D, c.C0
    mu_q = Fraction(c.mu_of_q)
    eps_c = Fraction(c.epsilon_of_c)
    base = Fraction(8 * D + 2)

    k = 1 + math.ceil(d * max(base / mu_q + 2 * d + 2,
                              base / mu_q + 2 * C0))
    dbar = 4 + 2 * D
    z = c.M_of_q * dbar * (q + dbar)
    k_plain = 1 + math.ceil(d * max(2 * d + 4, 2 * C0 + 2))
    k_prime = 1 + math.ceil(d * max(base / eps_c + 2 * d + 2,
                                    base / eps_c + 2 * C0))
    return {
        "k": k,
        "h1": 3 * k,
        "z": z,
        "Dbar": dbar,
        "k_plain": k_plain,
        "h2": 3 * k_plain,
        "k_prime": k_prime,
        "h3": 3 * k_prime,
    }


def _ceil_fraction(f: Fraction) -> int:
    return -((-f.numerator) // f.denominator)


# ---------------------------------------------------------------------------
# exact rational-exponent comparisons

def leq_power_product(count: int, factors) -> bool:
    """count <= prod base_i^{e_i} with rational e_i, compared exactly."""
    D = 1
    for _, e in factors:
        D = D * Fraction(e).denominator // math.gcd(
            D, Fraction(e).denominator)
    lhs = count ** D
    rhs = 1
    for base, e in factors:
        e = Fraction(e)
        num = e.numerator * (D // e.denominator)
        if num >= 0:
            rhs *= base ** num
        else:
            lhs *= base ** (-num)
    return lhs <= rhs
