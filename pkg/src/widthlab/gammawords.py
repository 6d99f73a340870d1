"""Free Gamma-group rewriting: balanced words, colour types, and the
constructive twisted-commutator extractions.

Words are unreduced monoid words over the alphabet {y^(+-g)} where y is a
variable or parameter symbol and g a freely reduced word over abstract
Gamma-generator names.  Equality "=_F" means equality in the free group on
the alphabet {y^g}; it is decided by free reduction.  Extractions rewrite a
word V with balanced hat-image as V =_F T_{a,b}(xi, eta) * V1 and carry an
explicit change-of-basis certificate (invariance and exchange moves).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import InputError, InvariantFailure


# ---------------------------------------------------------------------------
# Gamma exponents: freely reduced words over abstract generator names

def gexp(*pairs) -> tuple:
    return gexp_reduce(tuple(pairs))


def gexp_reduce(seq) -> tuple:
    out = []
    for name, e in seq:
        if e not in (1, -1):
            raise InputError("gamma exponent entries must be +-1")
        if out and out[-1][0] == name and out[-1][1] == -e:
            out.pop()
        else:
            out.append((name, e))
    return tuple(out)


def gexp_mul(a, b) -> tuple:
    return gexp_reduce(tuple(a) + tuple(b))


def gexp_inv(a) -> tuple:
    return tuple((name, -e) for name, e in reversed(a))


# ---------------------------------------------------------------------------
# letters and words

@dataclass(frozen=True)
class GSym:
    """Variable or parameter symbol; colour only on variables."""

    name: str
    kind: str = "var"
    colour: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("var", "param"):
            raise InputError(f"bad symbol kind {self.kind!r}")
        if self.kind == "param" and self.colour is not None:
            raise InputError("parameters carry no colour")


@dataclass(frozen=True)
class GLetter:
    sym: GSym
    sign: int = 1
    exp: tuple = ()
    block: Optional[object] = None

    def inv(self) -> "GLetter":
        return GLetter(self.sym, -self.sign, self.exp, self.block)

    def twist(self, g) -> "GLetter":
        return GLetter(self.sym, self.sign, gexp_mul(self.exp, g), self.block)


class GammaWord:
    """Unreduced monoid word over the twisted alphabet."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        self.letters = tuple(letters)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return GammaWord(self.letters[i])
        return self.letters[i]

    def __eq__(self, other):
        return isinstance(other, GammaWord) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __mul__(self, other):
        return GammaWord(self.letters + other.letters)

    def inv(self) -> "GammaWord":
        return GammaWord(tuple(l.inv() for l in reversed(self.letters)))

    def twist(self, g) -> "GammaWord":
        return GammaWord(tuple(l.twist(g) for l in self.letters))

    def tag(self, block) -> "GammaWord":
        return GammaWord(tuple(
            GLetter(l.sym, l.sign, l.exp, block) for l in self.letters))

    def __repr__(self):
        return f"GammaWord({format_gamma(self)!r})"

    def __str__(self):
        return format_gamma(self)


def gw(*letters) -> GammaWord:
    return GammaWord(letters)


def letter(sym, sign=1, exp=()) -> GLetter:
    return GLetter(sym, sign, gexp_reduce(exp))


def hat(U: GammaWord) -> GammaWord:
    """Delete parameter letters, erase exponents, keep signs and colours."""
    return GammaWord(tuple(GLetter(l.sym, l.sign, (), l.block)
                           for l in U if l.sym.kind == "var"))


def support(w: GammaWord):
    return {l.sym for l in w}


def is_balanced(w: GammaWord) -> bool:
    """Each support symbol occurs exactly once with each sign."""
    counts = {}
    for l in w:
        key = (l.sym, l.sign)
        counts[key] = counts.get(key, 0) + 1
    syms = {l.sym for l in w}
    return all(counts.get((s, 1), 0) == 1 and counts.get((s, -1), 0) == 1
               for s in syms)


def reduce_free(U: GammaWord) -> tuple:
    """Normal form in the free group on the alphabet {y^g}."""
    stack = []
    for l in U:
        key = (l.sym, l.exp)
        if stack and stack[-1][0] == key and stack[-1][1] == -l.sign:
            stack.pop()
        else:
            stack.append((key, l.sign))
    return tuple(stack)


def equals_in_F(U: GammaWord, V: GammaWord) -> bool:
    return reduce_free(U) == reduce_free(V)


def is_trivial_in_F(U: GammaWord) -> bool:
    return not reduce_free(U)


# ---------------------------------------------------------------------------
# colour types

def colour_sequence(w: GammaWord):
    out = []
    for l in w:
        if l.sym.kind != "var":
            continue
        if l.sym.colour is None:
            raise InputError(f"uncoloured letter {l.sym.name}")
        out.append(l.sym.colour * l.sign)
    return out


def colour_type(w: GammaWord):
    """Contract runs of equal negative entries, then take absolute values."""
    seq = colour_sequence(w)
    out = []
    for c in seq:
        if c < 0 and out and out[-1] == c:
            continue
        out.append(c)
    return [abs(c) for c in out]


def contract_type(seq):
    out = []
    for c in seq:
        if c < 0 and out and out[-1] == c:
            continue
        out.append(c)
    return [abs(c) for c in out]


def leq_Ln(t, m: int, n: int) -> bool:
    """Greedy subsequence test against n repetitions of (1..m)."""
    pos = 0          # next unused index into L_n
    total = m * n
    for c in t:
        if not 1 <= c <= m:
            return False
        # next index >= pos congruent to c-1 mod m
        block, off = divmod(pos, m)
        idx = block * m + (c - 1) if c - 1 >= off else (block + 1) * m + (c - 1)
        if idx >= total:
            return False
        pos = idx + 1
    return True


# ---------------------------------------------------------------------------
# text format

_LETTER_RE = re.compile(
    r"([A-Za-z]+[0-9.()]*)(?:\^\{(-?)([^}]*)\})?")
_GTERM_RE = re.compile(r"([A-Za-z][A-Za-z0-9]*)(?:\^(-?\d+))?$")


def parse_gamma(text: str) -> GammaWord:
    """Parse 'x3^{g1*g2^-1} k2^{-g1} x1' style words."""
    letters = []
    for tok in text.split():
        m = _LETTER_RE.fullmatch(tok)
        if not m:
            raise InputError(f"bad gamma letter {tok!r}")
        name, neg, body = m.group(1), m.group(2), m.group(3)
        sign = -1 if neg else 1
        exp = ()
        if body is not None and body not in ("", "1"):
            parts = body.split("*")
            acc = []
            for part in parts:
                gm = _GTERM_RE.fullmatch(part)
                if not gm:
                    raise InputError(f"bad gamma exponent term {part!r}")
                e = int(gm.group(2)) if gm.group(2) else 1
                acc.extend([(gm.group(1), 1 if e > 0 else -1)] * abs(e))
            exp = gexp_reduce(acc)
        kind = "param" if name[0] in "ku" else "var"
        letters.append(GLetter(GSym(name, kind), sign, exp))
    return GammaWord(letters)


def format_gamma(w: GammaWord) -> str:
    toks = []
    for l in w:
        if not l.exp and l.sign == 1:
            toks.append(l.sym.name)
            continue
        body = "*".join(n if e == 1 else f"{n}^-1" for n, e in l.exp)
        if not body:
            body = "1"
        neg = "-" if l.sign == -1 else ""
        toks.append(f"{l.sym.name}^{{{neg}{body}}}")
    return " ".join(toks)


# ---------------------------------------------------------------------------
# Lemma-level pattern search: w = A x^-1 B y^-1 C x D y E

@dataclass
class Pattern:
    """Positions (q1 < q2 < q3 < q4) in the hat word with w[q3] = w[q1]^-1
    and w[q4] = w[q2]^-1; the pattern letters are x = w[q3], y = w[q4]."""

    q1: int
    q2: int
    q3: int
    q4: int


def find_pattern(w: GammaWord,
                 accept: Optional[Callable] = None) -> Pattern:
    """Deterministic pattern search (minimal gap, then leftmost); an
    optional predicate can reject candidate patterns."""
    if not is_balanced(w):
        raise InputError("pattern search needs a balanced word")
    if is_trivial_in_F(w):
        raise InputError("word is trivial in F")
    pos = {}
    for i, l in enumerate(w):
        pos.setdefault(l.sym, {})[l.sign] = i
    pairs = []
    for sym, d in pos.items():
        p1, p2 = d[-1], d[1]
        if p1 > p2:
            p1, p2 = p2, p1
        if p2 - p1 >= 2:
            pairs.append((p2 - p1, p1, p2))
    pairs.sort()
    for _, p1, p2 in pairs:
        for px in range(p1 + 1, p2):
            partner = _partner_pos(pos, w[px])
            if p1 < partner < p2:
                continue
            if partner < p1:
                pat = Pattern(partner, p1, px, p2)
            else:
                pat = Pattern(p1, px, p2, partner)
            if _pattern_ok(w, pat) and (accept is None or accept(pat)):
                return pat
    raise InvariantFailure("no extraction pattern found in nontrivial word")


def _partner_pos(pos, l: GLetter) -> int:
    return pos[l.sym][-l.sign]


def _pattern_ok(w, pat):
    a, b = w[pat.q3], w[pat.q4]
    c, d = w[pat.q1], w[pat.q2]
    return (c.sym == a.sym and c.sign == -a.sign
            and d.sym == b.sym and d.sign == -b.sign
            and a.sym != b.sym)


def decompose_nontrivial(w: GammaWord):
    """Split a balanced, F-nontrivial word as (A, x, B, y, C, D, E parts).

    Returns (A, B, C, D, E, x_letter, y_letter) with
    w = A x^-1 B y^-1 C x D y E letter-for-letter."""
    pat = find_pattern(w)
    return split_by_pattern(w, pat)


def split_by_pattern(w: GammaWord, pat: Pattern):
    A = w[:pat.q1]
    B = w[pat.q1 + 1:pat.q2]
    C = w[pat.q2 + 1:pat.q3]
    D = w[pat.q3 + 1:pat.q4]
    E = w[pat.q4 + 1:]
    return A, B, C, D, E, w[pat.q3], w[pat.q4]


# ---------------------------------------------------------------------------
# twisted commutator extraction

def twisted_commutator(a, b, xi: GammaWord, eta: GammaWord) -> GammaWord:
    """T_{a,b}(xi, eta) = xi^-1 eta^-1 xi^a eta^b as a word."""
    return xi.inv() * eta.inv() * xi.twist(a) * eta.twist(b)


@dataclass
class ExtractionStep:
    """One application of the single-extraction proposition."""

    a: tuple
    b: tuple
    xi: GammaWord
    eta: GammaWord
    residual: GammaWord
    x_letter: GLetter          # pattern letter x (carries sym and sign)
    y_letter: GLetter
    e: tuple                   # exponent of the first x occurrence
    f: tuple
    U1: GammaWord
    U2: GammaWord
    A: GammaWord               # V-segments (with parameters)
    B: GammaWord
    moves: list = field(default_factory=list)


def extract_twisted(V: GammaWord,
                    accept: Optional[Callable] = None) -> ExtractionStep:
    """Rewrite V =_F T_{a,b}(xi, eta) * V1 for a balanced nontrivial hat."""
    w = hat(V)
    # map hat positions back to V positions
    vpos = [i for i, l in enumerate(V) if l.sym.kind == "var"]
    pat = find_pattern(w, accept=accept)
    q1, q2, q3, q4 = (vpos[pat.q1], vpos[pat.q2], vpos[pat.q3], vpos[pat.q4])
    Ap = V[:q1]
    Bp = V[q1 + 1:q2]
    Cp = V[q2 + 1:q3]
    Dp = V[q3 + 1:q4]
    Ep = V[q4 + 1:]
    lx_neg, ly_neg, lx_pos, ly_pos = V[q1], V[q2], V[q3], V[q4]
    e, f = lx_neg.exp, ly_neg.exp
    a = gexp_mul(gexp_inv(e), lx_pos.exp)
    b = gexp_mul(gexp_inv(f), ly_pos.exp)
    ai, bi = gexp_inv(a), gexp_inv(b)
    U1 = Ap.twist(gexp_mul(a, bi)) * Dp.twist(bi)
    U2 = U1.twist(ai) * Cp.twist(ai)
    x_letter = lx_pos  # pattern letter "x" with V's sign
    xi = U2 * gw(GLetter(x_letter.sym, x_letter.sign, e)) * Ap.inv()
    eta = (U1 * gw(GLetter(ly_pos.sym, ly_pos.sign, f)) * Bp.inv()
           * U2.inv())
    V1 = (Ap.twist(gexp_mul(gexp_mul(a, bi), gexp_mul(ai, b)))
          * Dp.twist(gexp_mul(bi, gexp_mul(ai, b)))
          * Cp.twist(gexp_mul(ai, b))
          * Bp.twist(b)
          * Ep)
    step = ExtractionStep(
        a=a, b=b, xi=xi, eta=eta, residual=V1,
        x_letter=x_letter, y_letter=ly_pos, e=e, f=f,
        U1=U1, U2=U2, A=Ap, B=Bp,
        moves=[("invariance", x_letter.sym.name, e),
               ("exchange", x_letter.sym.name, U2, Ap.inv()),
               ("invariance", ly_pos.sym.name, f),
               ("exchange", ly_pos.sym.name, U1, Bp.inv() * U2.inv())])
    _verify_step(V, step)
    return step


def _verify_step(V, step):
    recon = twisted_commutator(step.a, step.b, step.xi, step.eta) \
        * step.residual
    if not equals_in_F(V, recon):
        raise InvariantFailure("extraction does not reproduce V in F")
    if not _param_multiplicities_match(V, step.residual):
        raise InvariantFailure("parameter multiplicities changed")
    _check_certificate(step)


def _param_multiplicities_match(V, V1):
    def counts(w):
        c = {}
        for l in w:
            if l.sym.kind == "param":
                key = (l.sym.name, l.sign)
                c[key] = c.get(key, 0) + 1
        return c
    return counts(V) == counts(V1)


def _check_certificate(step):
    """Exchange moves may only reference symbols that stay in the basis."""
    removed = {step.x_letter.sym.name, step.y_letter.sym.name}
    for mv in step.moves:
        if mv[0] == "exchange":
            _, name, P, Q = mv
            for w in (P, Q):
                for l in w:
                    if l.sym.kind == "var" and l.sym.name in removed:
                        raise InvariantFailure(
                            "exchange move references a replaced symbol")


@dataclass
class KExtraction:
    steps: list
    residual: GammaWord
    twists: list               # [(a_i, b_i)] convenience view

    def product_word(self) -> GammaWord:
        acc = GammaWord()
        for s in self.steps:
            acc = acc * twisted_commutator(s.a, s.b, s.xi, s.eta)
        return acc * self.residual


def extract_k_twisted(V: GammaWord, k: int, m: int, n: int) -> KExtraction:
    """Extract k twisted commutators, keeping the colour-type bound.

    Preconditions: hat(V) balanced, tau(hat V) <= L_n, |sup| >= n + 2k."""
    w = hat(V)
    if not is_balanced(w):
        raise InputError("hat(V) must be balanced")
    if not leq_Ln(colour_type(w), m, n):
        raise InputError("colour type exceeds L_n")
    if len(support(w)) < n + 2 * k:
        raise InputError(
            f"need |sup| >= n + 2k = {n + 2 * k}, have {len(support(w))}")
    steps = []
    cur = V
    for i in range(k):
        wcur = hat(cur)

        def bound_kept(pat, wcur=wcur):
            Aw, Bw, Cw, Dw, Ew, _, _ = split_by_pattern(wcur, pat)
            w0 = Aw * Dw * Cw * Bw * Ew
            return is_balanced(w0) and leq_Ln(colour_type(w0), m, n)

        step = extract_twisted(cur, accept=bound_kept)
        steps.append(step)
        cur = step.residual
        wnext = hat(cur)
        if not is_balanced(wnext):
            raise InvariantFailure("residual lost balance")
        if not leq_Ln(colour_type(wnext), m, n):
            raise InvariantFailure("residual violates the colour-type bound")
        if len(support(wnext)) != len(support(w)) - 2 * (i + 1):
            raise InvariantFailure("support did not drop by 2")
    out = KExtraction(steps=steps, residual=cur,
                      twists=[(s.a, s.b) for s in steps])
    if not equals_in_F(V, out.product_word()):
        raise InvariantFailure("k-fold extraction does not reproduce V")
    return out


# ---------------------------------------------------------------------------
# evaluation against a concrete group

class GammaAssignment:
    """Concrete values for symbols plus automorphisms for Gamma generators."""

    def __init__(self, table, values: dict, gamma: dict):
        self.table = table
        self.values = dict(values)
        self.gamma = dict(gamma)
        self._gamma_inv = {}

    def auto(self, name, e):
        if e == 1:
            return self.gamma[name]
        if name not in self._gamma_inv:
            self._gamma_inv[name] = self.gamma[name].inverse()
        return self._gamma_inv[name]

    def apply_exp(self, x: int, exp) -> int:
        for name, e in exp:
            x = self.auto(name, e).apply(x)
        return x

    def unapply_exp(self, x: int, exp) -> int:
        for name, e in reversed(exp):
            x = self.auto(name, -e).apply(x)
        return x

    def letter_value(self, l: GLetter) -> int:
        v = self.values[l.sym.name]
        v = self.apply_exp(v, l.exp)
        return v if l.sign == 1 else self.table.inv(v)

    def eval(self, w: GammaWord) -> int:
        acc = 0
        for l in w:
            acc = self.table.mul(acc, self.letter_value(l))
        return acc


def back_solve_step(step: ExtractionStep, assign: GammaAssignment,
                    xi_val: int, eta_val: int):
    """Given target values for (xi, eta), derive values of the original
    pattern symbols so that the assignment realizes them."""
    t = assign.table
    u2 = assign.eval(step.U2)
    a_val = assign.eval(step.A)
    # xi = U2 * x^e * A^-1
    xv = t.mul(t.mul(t.inv(u2), xi_val), a_val)
    xv = assign.unapply_exp(xv, step.e)
    if step.x_letter.sign == -1:
        xv = t.inv(xv)
    assign.values[step.x_letter.sym.name] = xv
    u1 = assign.eval(step.U1)
    u2 = assign.eval(step.U2)
    b_val = assign.eval(step.B)
    # eta = U1 * y^f * B^-1 * U2^-1
    yv = t.mul(t.mul(t.mul(t.inv(u1), eta_val), u2), b_val)
    yv = assign.unapply_exp(yv, step.f)
    if step.y_letter.sign == -1:
        yv = t.inv(yv)
    assign.values[step.y_letter.sym.name] = yv
    # confirm
    if assign.eval(step.xi) != xi_val or assign.eval(step.eta) != eta_val:
        raise InvariantFailure("back-substitution failed to hit targets")
