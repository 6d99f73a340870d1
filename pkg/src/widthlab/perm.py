"""Permutations on {0..degree-1} with exact group arithmetic.

Composition is left-to-right: (a * b)(i) = b(a(i)), so conjugation
x ** y = y^-1 * x * y and commutators [x, y] = x^-1 * y^-1 * x * y follow
the usual right-action conventions.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import InputError

_DTYPE = np.int32


class Permutation:
    """Immutable permutation given by its image array."""

    __slots__ = ("images", "_hash")

    def __init__(self, images):
        arr = np.asarray(images, dtype=_DTYPE)
        if arr.ndim != 1:
            raise InputError("permutation images must be a flat sequence")
        n = arr.shape[0]
        seen = np.zeros(n, dtype=bool)
        if n and (arr.min() < 0 or arr.max() >= n):
            raise InputError("permutation images out of range")
        seen[arr] = True
        if not seen.all():
            raise InputError("permutation images are not a bijection")
        arr.setflags(write=False)
        self.images = arr
        self._hash = hash(arr.tobytes())

    @property
    def degree(self) -> int:
        return self.images.shape[0]

    @staticmethod
    def identity(degree: int) -> "Permutation":
        return Permutation(np.arange(degree, dtype=_DTYPE))

    @staticmethod
    def from_cycles(cycles, degree: int) -> "Permutation":
        imgs = np.arange(degree, dtype=_DTYPE)
        for cyc in cycles:
            if len(cyc) < 2:
                continue
            for a, b in zip(cyc, cyc[1:]):
                _check_point(a, degree)
                imgs[a] = b
            _check_point(cyc[-1], degree)
            imgs[cyc[-1]] = cyc[0]
        return Permutation(imgs)

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.degree != other.degree:
            raise InputError(
                f"degree mismatch: {self.degree} vs {other.degree}")
        return Permutation(other.images[self.images])

    def inverse(self) -> "Permutation":
        inv = np.empty(self.degree, dtype=_DTYPE)
        inv[self.images] = np.arange(self.degree, dtype=_DTYPE)
        return Permutation(inv)

    def conjugate(self, other: "Permutation") -> "Permutation":
        """self ** other = other^-1 * self * other."""
        return other.inverse() * self * other

    def commutator(self, other: "Permutation") -> "Permutation":
        """[self, other] = self^-1 * other^-1 * self * other."""
        return self.inverse() * other.inverse() * self * other

    def moved_points(self) -> int:
        return int((self.images != np.arange(self.degree)).sum())

    def is_identity(self) -> bool:
        return bool((self.images == np.arange(self.degree)).all())

    def cycles(self):
        """Nontrivial cycles, each starting at its least point."""
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            p = int(self.images[start])
            while p != start:
                cyc.append(p)
                seen[p] = True
                p = int(self.images[p])
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def __eq__(self, other):
        return (isinstance(other, Permutation)
                and self.degree == other.degree
                and bool((self.images == other.images).all()))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Permutation({format_cycles(self)!r}, degree={self.degree})"

    def __str__(self):
        return format_cycles(self)


def _check_point(p, degree):
    if not 0 <= p < degree:
        raise InputError(f"point {p} out of range for degree {degree}")


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> Permutation:
    """Parse cycle notation like '(0 1 2)(3 4)'; 'id' and '()' are identity."""
    text = text.strip()
    if text in ("id", "()", "e", "1", ""):
        return Permutation.identity(degree)
    pos = 0
    cycles = []
    for m in _CYCLE_RE.finditer(text):
        if text[pos:m.start()].strip():
            raise InputError(f"unexpected text in cycles: {text!r}")
        body = m.group(1).replace(",", " ").split()
        try:
            cyc = [int(x) for x in body]
        except ValueError:
            raise InputError(f"bad cycle entry in {text!r}") from None
        if len(set(cyc)) != len(cyc):
            raise InputError(f"repeated point in cycle {m.group(0)}")
        cycles.append(cyc)
        pos = m.end()
    if text[pos:].strip():
        raise InputError(f"unexpected trailing text in cycles: {text!r}")
    flat = [p for c in cycles for p in c]
    if len(set(flat)) != len(flat):
        raise InputError(f"cycles are not disjoint in {text!r}")
    return Permutation.from_cycles(cycles, degree)


def format_cycles(perm: Permutation) -> str:
    cycles = perm.cycles()
    if not cycles:
        return "id"
    return "".join("(" + " ".join(str(p) for p in c) + ")" for c in cycles)
