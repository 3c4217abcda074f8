"""
Free-group words, evaluation in SU(2), and the built-in twist automorphisms.

Text syntax: an uppercase letter is a generator (``A`` is index 0, ``B`` is
1, ...), the matching lowercase letter is its inverse.  The parser also
accepts ``X^n`` / ``X^{n}`` powers and parenthesised groups with an
optional power, so formulas like ``(B^{-1}A^{-1}CA)B(A^{-1}C^{-1}AB)`` can be
entered as printed.  Whitespace is ignored.  Printing always uses the
upper/lowercase form, which parses back to the same word.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ArityError, WordSyntaxError
from .su2 import IDENTITY, RENORM_EVERY, normalize, qinv, qmul

Letter = tuple[int, int]  # (generator index, +1 or -1)


def free_reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    out: list[Letter] = []
    for g, e in letters:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", free_reduce(self.letters))

    @classmethod
    def generator(cls, index: int, exponent: int = 1) -> "Word":
        e = 1 if exponent > 0 else -1
        return cls(((index, e),) * abs(exponent))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return Word(base.letters * abs(n))

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def conjugate(self, by: "Word") -> "Word":
        """``by * self * by^-1``."""
        return by * self * by.inverse()

    def cyclic_reduce(self) -> "Word":
        lt = list(self.letters)
        while len(lt) >= 2 and lt[0][0] == lt[-1][0] and lt[0][1] == -lt[-1][1]:
            lt = lt[1:-1]
        return Word(tuple(lt))

    def max_generator(self) -> int:
        return max((g for g, _ in self.letters), default=-1)

    def __str__(self):
        return "".join(
            chr(ord("A") + g) if e > 0 else chr(ord("a") + g) for g, e in self.letters
        )

    def __repr__(self):
        return f"Word({str(self)!r})"


EMPTY = Word()


class _Parser:
    def __init__(self, text: str):
        self.s = "".join(text.split())
        self.i = 0

    def error(self, msg):
        raise WordSyntaxError(f"{msg} at position {self.i} in {self.s!r}")

    def peek(self):
        return self.s[self.i] if self.i < len(self.s) else ""

    def parse(self) -> Word:
        w = self.sequence()
        if self.i != len(self.s):
            self.error(f"unexpected {self.peek()!r}")
        return w

    def sequence(self) -> Word:
        letters: list[Letter] = []
        while self.i < len(self.s) and self.peek() != ")":
            letters.extend(self.factor().letters)
        return Word(tuple(letters))

    def factor(self) -> Word:
        ch = self.peek()
        if ch == "(":
            self.i += 1
            w = self.sequence()
            if self.peek() != ")":
                self.error("unbalanced parenthesis")
            self.i += 1
        elif ch.isascii() and ch.isalpha():
            self.i += 1
            idx = ord(ch.upper()) - ord("A")
            w = Word.generator(idx, 1 if ch.isupper() else -1)
        elif ch == "1":
            # identity placeholder, e.g. "1" for the trivial word
            self.i += 1
            w = EMPTY
        else:
            self.error(f"unknown symbol {ch!r}")
        if self.peek() == "^":
            self.i += 1
            w = w ** self.exponent()
        return w

    def exponent(self) -> int:
        braced = self.peek() == "{"
        if braced:
            self.i += 1
        start = self.i
        if self.peek() in "+-":
            self.i += 1
        while self.peek().isdigit():
            self.i += 1
        token = self.s[start : self.i]
        if token in ("", "+", "-"):
            self.error("malformed exponent")
        if braced:
            if self.peek() != "}":
                self.error("unclosed exponent brace")
            self.i += 1
        return int(token)


def parse(text: str) -> Word:
    """Parse word text into a freely reduced ``Word``.

    >>> str(parse("ABa"))
    'ABa'
    >>> len(parse("Aa"))
    0
    """
    return _Parser(text).parse()


def as_word(w) -> Word:
    return w if isinstance(w, Word) else parse(w)


def evaluate(w, rep) -> np.ndarray:
    """Image of ``w`` under a representation array.

    ``rep`` has shape ``(..., k, 4)``: generator ``i`` maps to ``rep[..., i, :]``.
    Returns quaternions of shape ``(..., 4)``.
    """
    w = as_word(w)
    rep = np.asarray(rep, dtype=float)
    if w.max_generator() >= rep.shape[-2]:
        raise ArityError(
            f"word {w} uses generator {w.max_generator()} but the representation "
            f"has only {rep.shape[-2]} generators"
        )
    out = np.broadcast_to(IDENTITY, rep.shape[:-2] + (4,)).copy()
    for n, (g, e) in enumerate(w.letters, 1):
        x = rep[..., g, :]
        out = qmul(out, x if e > 0 else qinv(x))
        if n % RENORM_EVERY == 0:
            out = normalize(out)
    return normalize(out)


@dataclass(frozen=True)
class EndoF3:
    """Endomorphism of a free group given by generator images.

    ``inverse_images`` are supplied by hand; ``is_automorphism`` certifies
    that both compositions reduce to the identity on generators.
    """

    name: str
    images: tuple[Word, ...]
    inverse_images: tuple[Word, ...]

    @classmethod
    def from_text(cls, name: str, images: Sequence[str], inverse_images: Sequence[str]):
        return cls(name, tuple(map(parse, images)), tuple(map(parse, inverse_images)))

    @property
    def rank(self) -> int:
        return len(self.images)

    def inverse(self) -> "EndoF3":
        return EndoF3(self.name + "^-1", self.inverse_images, self.images)

    def __call__(self, w) -> Word:
        return apply_endo(self, w)

    def is_automorphism(self) -> bool:
        inv = EndoF3("", self.inverse_images, self.images)
        for i in range(self.rank):
            g = Word.generator(i)
            if apply_endo(self, apply_endo(inv, g)) != g:
                return False
            if apply_endo(inv, apply_endo(self, g)) != g:
                return False
        return True

    def pullback(self, rep) -> np.ndarray:
        """Representation ``rho o phi``: generator ``i`` goes to ``rho(phi(g_i))``."""
        return np.stack([evaluate(im, rep) for im in self.images], axis=-2)


def identity_endo(rank: int = 3) -> EndoF3:
    gens = tuple(Word.generator(i) for i in range(rank))
    return EndoF3("id", gens, gens)


def apply_endo(phi: EndoF3, w) -> Word:
    w = as_word(w)
    letters: list[Letter] = []
    for g, e in w.letters:
        if g >= phi.rank:
            raise ArityError(f"generator {g} outside rank {phi.rank}")
        img = phi.images[g] if e > 0 else phi.images[g].inverse()
        letters.extend(img.letters)
    return Word(tuple(letters))


SURFACES = ("N22", "N13", "N31")

# Boundary curves of each surface, in the presentations
# N22: <A,B,C,K | A^2 B^2 C K^-1>, N13: <A,B,C,K | A^2 B C K^-1>,
# N31: <A,B,C,K | A^2 B^2 C^2 K^-1>.
BOUNDARY_WORDS: Mapping[str, Mapping[str, Word]] = {
    "N22": {"c": parse("C"), "k": parse("AABBC")},
    "N13": {"b": parse("B"), "c": parse("C"), "k": parse("AABC")},
    "N31": {"k": parse("AABBCC")},
}

# Curve supporting each twist; its trace is the rotation parameter.
TWIST_CURVES: Mapping[str, Mapping[str, Word]] = {
    "N22": {"U": parse("BBC")},
    "N13": {"T": parse("AAB"), "U": parse("CAA"), "W": parse("CAB^{-1}A^{-1}")},
    "N31": {"U": parse("AACC")},
}

_TWIST_TEXT = {
    "N22": {
        "U": (
            ["A", "BBCBC^{-1}B^{-1}B^{-1}", "BBCB^{-1}B^{-1}"],
            # conjugation by (BBC)^-1 on B and C
            ["A", "(BBC)^{-1}B(BBC)", "(BBC)^{-1}C(BBC)"],
        ),
    },
    "N13": {
        "T": (
            ["AABAB^{-1}A^{-1}A^{-1}", "AABA^{-1}A^{-1}", "C"],
            ["(AAB)^{-1}A(AAB)", "(AAB)^{-1}B(AAB)", "C"],
        ),
        "U": (
            ["CAC^{-1}", "B", "CAACA^{-1}A^{-1}C^{-1}"],
            ["(CAA)^{-1}A(CAA)", "B", "(CAA)^{-1}C(CAA)"],
        ),
        "W": (
            [
                "CAB^{-1}A^{-1}C^{-1}AB",
                "(B^{-1}A^{-1}CA)B(A^{-1}C^{-1}AB)",
                "CAB^{-1}A^{-1}CABA^{-1}C^{-1}",
            ],
            # C -> W^-1 C W, then CA and AB are kept fixed
            [
                "(CAB^{-1}A^{-1})^{-1}C^{-1}(CAB^{-1}A^{-1})CA",
                "((CAB^{-1}A^{-1})^{-1}C^{-1}(CAB^{-1}A^{-1})CA)^{-1}AB",
                "(CAB^{-1}A^{-1})^{-1}C(CAB^{-1}A^{-1})",
            ],
        ),
    },
    "N31": {
        "U": (
            ["A", "A^{-2}C^{-2}BC^2A^2", "C"],
            ["A", "C^2A^2BA^{-2}C^{-2}", "C"],
        ),
    },
}


def builtin_twists(surface: str) -> dict[str, EndoF3]:
    """Dehn twist automorphisms of the given surface, keyed by curve name."""
    from .errors import DomainError

    if surface not in _TWIST_TEXT:
        raise DomainError(f"unknown surface {surface!r}; expected one of {SURFACES}")
    return {
        name: EndoF3.from_text(f"{surface}.tau_{name}", images, inverses)
        for name, (images, inverses) in _TWIST_TEXT[surface].items()
    }


def random_word(rng: np.random.Generator, length: int, rank: int = 3) -> Word:
    """A uniformly random freely reduced word of exactly ``length`` letters."""
    letters: list[Letter] = []
    while len(letters) < length:
        g = int(rng.integers(rank))
        e = 1 if rng.integers(2) else -1
        if letters and letters[-1] == (g, -e):
            continue
        letters.append((g, e))
    return Word(tuple(letters))


def random_representations(rng: np.random.Generator, n=None, rank: int = 3) -> np.ndarray:
    """Haar-random representations of the free group, shape ``(n, rank, 4)``."""
    from .su2 import haar_sample

    size = (rank,) if n is None else (n, rank)
    return haar_sample(rng, size)
