"""
Symbolic traces of free-group words in the Magnus coordinates.

``trace_of_word`` rewrites ``tr(rho(W))`` into a polynomial in
``a, b, c, x, y, z, d`` (traces of ``A, B, C, AB, BC, CA, ABC``) using only
SL(2) identities:

1. cyclic reduction, and ``tr(W) = tr(W^-1)`` for the memo key;
2. an inverse syllable ``g^-m`` is removed via Cayley-Hamilton,
   ``g^-m = tr(g) g^(1-m) - g^(2-m)``;
3. a power ``g^m`` (m >= 2) via ``g^m = tr(g) g^(m-1) - g^(m-2)``;
4. a positive word with a repeated letter, ``W = gP gQ``, via
   ``tr(gP gQ) = tr(gP) tr(gQ) - tr(P Q^-1)``;
5. what is left is one of ``A, B, C, AB, BC, CA, ABC, ACB`` up to rotation,
   and ``tr(ACB) = ay + bz + cx - abc - d``.

Each rule strictly lowers (length, number of inverse letters, excess
exponent) lexicographically, so the recursion terminates.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .polynomial import VARS, TracePolynomial, eval_poly
from .words import EndoF3, Word, apply_endo, as_word, parse

_P = TracePolynomial
_a, _b, _c, _x, _y, _z, _d = (_P.var(v) for v in VARS)

# Words whose traces are the seven coordinates, in VARS order.
COORDINATE_WORDS: tuple[Word, ...] = tuple(
    parse(s) for s in ("A", "B", "C", "AB", "BC", "CA", "ABC")
)

# Degrees stay below the word length; the packed exponent range is 255.
MAX_WORD_LENGTH = 255

_BASE: dict[tuple, TracePolynomial] = {}


def _key(letters) -> tuple:
    """Canonical representative of the cyclic class of ``W`` and ``W^-1``.

    The orientation with fewer inverse letters wins, so that taking the key
    never undoes inverse elimination.
    """
    if not letters:
        return ()
    inv = tuple((g, -e) for g, e in reversed(letters))
    neg = sum(1 for _, e in letters if e < 0)
    n = len(letters)
    if 2 * neg < n:
        cands = (letters,)
    elif 2 * neg > n:
        cands = (inv,)
    else:
        cands = (letters, inv)
    return min(min(w[i:] + w[:i] for i in range(n)) for w in cands)


for _text, _poly in {
    "A": _a,
    "B": _b,
    "C": _c,
    "AB": _x,
    "BC": _y,
    "CA": _z,
    "ABC": _d,
    "ACB": _a * _y + _b * _z + _c * _x - _a * _b * _c - _d,
}.items():
    _BASE[_key(parse(_text).letters)] = _poly


class _Memo:
    """Lock-protected memo table shared by all threads."""

    def __init__(self):
        self.table: dict[tuple, TracePolynomial] = {(): _P.constant(2), **_BASE}
        self.lock = threading.Lock()

    def get(self, key):
        with self.lock:
            return self.table.get(key)

    def put(self, key, value):
        with self.lock:
            return self.table.setdefault(key, value)

    def __len__(self):
        return len(self.table)


_memo = _Memo()


def _syllables(letters):
    """Cyclic syllables ``[(g, exponent), ...]`` of a cyclically reduced word."""
    n = len(letters)
    # rotate so the word does not start inside a syllable
    start = 0
    while start < n and letters[start - 1] == letters[start]:
        start += 1
    if start == n:  # a single generator power
        g, e = letters[0]
        return [(g, e * n)]
    w = letters[start:] + letters[:start]
    out = []
    for g, e in w:
        if out and out[-1][0] == g and (out[-1][1] > 0) == (e > 0):
            out[-1] = (g, out[-1][1] + e)
        else:
            out.append((g, e))
    return out


def _expand(sylls) -> tuple:
    letters = []
    for g, e in sylls:
        letters.extend([(g, 1 if e > 0 else -1)] * abs(e))
    return tuple(letters)


def _word_trace(letters) -> TracePolynomial:
    letters = Word(letters).cyclic_reduce().letters
    key = _key(letters)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    return _memo.put(key, _reduce(key))


def _power_trace(g: int, n: int) -> TracePolynomial:
    # Chebyshev recursion tr(g^n) = tr(g) tr(g^(n-1)) - tr(g^(n-2))
    n = abs(n)
    t = _BASE[_key(((g, 1),))]
    prev, cur = _P.constant(2), t
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, t * cur - prev
    return cur


def _reduce(letters) -> TracePolynomial:
    sylls = _syllables(letters)
    if len(sylls) == 1:
        g, n = sylls[0]
        return _power_trace(g, n)

    for i, (g, e) in enumerate(sylls):
        if e < 0:
            rest = sylls[i + 1 :] + sylls[:i]
            tg = _BASE[_key(((g, 1),))]
            one = _word_trace(_expand([(g, e + 1)] + rest))
            two = _word_trace(_expand([(g, e + 2)] + rest))
            return tg * one - two

    for i, (g, e) in enumerate(sylls):
        if e >= 2:
            rest = sylls[i + 1 :] + sylls[:i]
            tg = _BASE[_key(((g, 1),))]
            one = _word_trace(_expand([(g, e - 1)] + rest))
            two = _word_trace(_expand([(g, e - 2)] + rest))
            return tg * one - two

    # positive, square-free cyclic word with a repeated generator
    n = len(letters)
    seen: dict[int, int] = {}
    for j, (g, _) in enumerate(letters):
        if g in seen:
            i = seen[g]
            w = letters[i:] + letters[:i]
            k = j - i
            gp, gq = w[:k], w[k:]
            p, q = gp[1:], gq[1:]
            q_inv = tuple((h, -f) for h, f in reversed(q))
            return _word_trace(gp) * _word_trace(gq) - _word_trace(p + q_inv)
        seen[g] = j
    raise AssertionError(f"irreducible word outside the trace basis: {Word(letters)}")


def trace_of_word(w) -> TracePolynomial:
    """Polynomial ``P`` with ``P(coords(rho)) = tr(rho(w))`` for every rho.

    >>> str(trace_of_word("Ab"))
    'a*b - x'
    """
    w = as_word(w)
    if w.max_generator() > 2:
        raise ValueError("trace_of_word handles words in three generators A, B, C")
    if len(w) > MAX_WORD_LENGTH:
        raise ValueError(f"words longer than {MAX_WORD_LENGTH} letters are not supported")
    return _word_trace(w.letters)


def memo_size() -> int:
    return len(_memo)


def fricke_polynomial() -> TracePolynomial:
    """The relation satisfied by the seven coordinates of any representation."""
    a, b, c, x, y, z, d = _a, _b, _c, _x, _y, _z, _d
    return (
        a**2 + b**2 + c**2 + d**2 + x**2 + y**2 + z**2
        - ((a * b + c * d) * x + (b * c + d * a) * y + (c * a + b * d) * z)
        + x * y * z
        + a * b * c * d
        - 4
    )


@dataclass(frozen=True)
class CoordinateMap:
    """Seven polynomials giving the image of each coordinate."""

    polys: tuple[TracePolynomial, ...]

    def __getitem__(self, name: str) -> TracePolynomial:
        return self.polys[VARS.index(name)]

    def as_dict(self) -> dict[str, TracePolynomial]:
        return dict(zip(VARS, self.polys))

    def __call__(self, point, dtype=np.float64) -> np.ndarray:
        """Image coordinates; last axis of the result has length 7."""
        return np.stack([eval_poly(p, point, dtype=dtype) for p in self.polys], axis=-1)

    def is_identity(self) -> bool:
        return all(p == _P.var(v) for p, v in zip(self.polys, VARS))


def induced_map(phi: EndoF3) -> CoordinateMap:
    """Coordinate map of ``phi``: traces of the images of A, B, C, AB, BC, CA, ABC."""
    if phi.rank != 3:
        raise ValueError("induced_map needs an endomorphism of F3")
    return CoordinateMap(tuple(trace_of_word(apply_endo(phi, w)) for w in COORDINATE_WORDS))


def coordinate_names() -> Mapping[str, Word]:
    return dict(zip(VARS, COORDINATE_WORDS))
