"""
Goldman circle actions on representations and their relation to Dehn twists.

For a two-sided circle ``gamma`` with ``rho(gamma) != +-I`` let
``zeta_t = exp(t F(rho(gamma)))``, a one-parameter subgroup of the
centralizer of ``rho(gamma)``.

* Separating circle: generators on the A side are kept, generators on the
  B side are conjugated by ``zeta_t``.  The flow is pi-periodic on
  characters (``zeta_pi = -I``).
* Non-separating circle (HNN): the A-side generators are kept and the stable
  letter is left-multiplied by ``zeta_t``; 2 pi-periodic.

The Dehn twist about ``gamma`` is the flow at time ``angle(rho(gamma))``.
``twist_equals_flow`` checks this against a word-level twist automorphism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .su2 import angle, exp_scaled, qinv, qmul, trace, variation
from .twists import coords_from_rep
from .words import EndoF3, Word, apply_endo, as_word, evaluate

GLUE_TOL = 1e-10


@dataclass(frozen=True)
class SeparatingDecomposition:
    """Generators split by a separating circle ``gamma`` (a word in A-side generators)."""

    a_side: tuple[int, ...]
    b_side: tuple[int, ...]
    gamma: Word
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_word(self.gamma))
        if set(self.a_side) & set(self.b_side):
            raise ValueError("A side and B side share a generator")
        outside = {g for g, _ in self.gamma.letters} - set(self.a_side)
        if outside:
            raise ValueError(f"gamma uses generators {sorted(outside)} outside the A side")

    @property
    def rank(self) -> int:
        return len(self.a_side) + len(self.b_side)

    def twist_endo(self) -> EndoF3:
        """Word-level Dehn twist: conjugate B-side generators by gamma."""
        images, inverses = [], []
        for i in range(self.rank):
            g = Word.generator(i)
            if i in self.b_side:
                images.append(g.conjugate(self.gamma))
                inverses.append(g.conjugate(self.gamma.inverse()))
            else:
                images.append(g)
                inverses.append(g)
        return EndoF3(f"twist[{self.gamma}]", tuple(images), tuple(inverses))


@dataclass(frozen=True)
class HNNDecomposition:
    """HNN splitting along a non-separating circle.

    Local letters are ``h_0 .. h_{m-1}`` (generators of the cut surface A)
    followed by the stable letter ``beta`` at index ``m``.  ``embedding``
    gives each local letter as a word in the ambient generators,
    ``rebuild`` gives each ambient generator as a word in local letters,
    and ``gamma_minus``, ``gamma_plus`` are words in ``h``.  The relator
    ``gamma_minus * beta * gamma_plus * beta^-1`` must be trivial.
    The flow generator is ``gamma = gamma_minus^-1``.
    """

    embedding: tuple[Word, ...]
    rebuild: tuple[Word, ...]
    gamma_minus: Word
    gamma_plus: Word
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "embedding", tuple(map(as_word, self.embedding)))
        object.__setattr__(self, "rebuild", tuple(map(as_word, self.rebuild)))
        object.__setattr__(self, "gamma_minus", as_word(self.gamma_minus))
        object.__setattr__(self, "gamma_plus", as_word(self.gamma_plus))
        m = self.beta
        for w in (self.gamma_minus, self.gamma_plus):
            if any(g >= m for g, _ in w.letters):
                raise ValueError("attaching words must avoid the stable letter")

    @property
    def beta(self) -> int:
        return len(self.embedding) - 1

    @property
    def a_side(self) -> tuple[int, ...]:
        return tuple(range(self.beta))

    @property
    def gamma(self) -> Word:
        return self.gamma_minus.inverse()

    def _to_ambient(self, w: Word) -> Word:
        emb = EndoF3("embed", self.embedding, self.embedding)
        return apply_endo(emb, w)

    def relator_word(self) -> Word:
        b = Word.generator(self.beta)
        local = self.gamma_minus * b * self.gamma_plus * b.inverse()
        return self._to_ambient(local)

    def is_consistent(self) -> bool:
        """The relator is trivial and ``rebuild`` inverts ``embedding``."""
        if len(self.relator_word()) != 0:
            return False
        emb = EndoF3("embed", self.embedding, self.embedding)
        for i, w in enumerate(self.rebuild):
            if apply_endo(emb, w) != Word.generator(i):
                return False
        return True

    def local(self, rep) -> np.ndarray:
        """Images of the local letters, shape ``(..., m + 1, 4)``."""
        return np.stack([evaluate(w, rep) for w in self.embedding], axis=-2)

    def ambient(self, local) -> np.ndarray:
        return np.stack([evaluate(w, local) for w in self.rebuild], axis=-2)

    def twist_endo(self) -> EndoF3:
        """Word-level Dehn twist ``beta -> gamma beta`` written on ambient generators."""
        b = Word.generator(self.beta)
        images = [Word.generator(i) for i in self.a_side] + [self.gamma * b]
        inv = [Word.generator(i) for i in self.a_side] + [self.gamma.inverse() * b]
        local_tw = EndoF3("local", tuple(images), tuple(inv))
        local_inv = EndoF3("local", tuple(inv), tuple(images))

        def lift(phi):
            return tuple(
                self._to_ambient(apply_endo(phi, w)) for w in self.rebuild
            )

        return EndoF3(f"twist[{self._to_ambient(self.gamma)}]", lift(local_tw), lift(local_inv))


def _zeta(rep, gamma: Word, t, local=None):
    g = evaluate(gamma, rep if local is None else local)
    u = variation(g)
    t = np.asarray(t, dtype=float)
    return exp_scaled(u, np.broadcast_to(t, u.shape[:-1]))


def flow_separating(dec: SeparatingDecomposition, rep, t) -> np.ndarray:
    """A side fixed, B side conjugated by ``zeta_t``."""
    rep = np.asarray(rep, dtype=float)
    z = _zeta(rep, dec.gamma, t)
    out = rep.copy()
    for i in dec.b_side:
        out[..., i, :] = qmul(qmul(z, rep[..., i, :]), qinv(z))
    return out


def flow_hnn(dec: HNNDecomposition, rep, t) -> np.ndarray:
    """A side fixed, stable letter left-multiplied by ``zeta_t``."""
    loc = dec.local(np.asarray(rep, dtype=float))
    z = _zeta(None, dec.gamma, t, local=loc)
    loc = loc.copy()
    loc[..., dec.beta, :] = qmul(z, loc[..., dec.beta, :])
    return dec.ambient(loc)


def flow(dec, rep, t) -> np.ndarray:
    if isinstance(dec, SeparatingDecomposition):
        return flow_separating(dec, rep, t)
    if isinstance(dec, HNNDecomposition):
        return flow_hnn(dec, rep, t)
    raise TypeError(f"not a decomposition: {type(dec).__name__}")


def gamma_image(dec, rep) -> np.ndarray:
    rep = np.asarray(rep, dtype=float)
    if isinstance(dec, HNNDecomposition):
        return evaluate(dec.gamma, dec.local(rep))
    return evaluate(dec.gamma, rep)


def character(rep) -> np.ndarray:
    """Trace coordinates of a three-generator representation."""
    return coords_from_rep(rep)


@dataclass(frozen=True)
class FlowTwistReport:
    name: str
    samples: int
    max_deviation: float
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol

    def as_dict(self) -> dict:
        return {"name": self.name, "samples": self.samples,
                "max_deviation": self.max_deviation, "tol": self.tol, "passed": self.passed}


def twist_equals_flow(dec, rep, tol: float = 1e-9) -> FlowTwistReport:
    """Compare the flow at time ``f(rho(gamma))`` with the word-level twist."""
    rep = np.asarray(rep, dtype=float)
    t = angle(gamma_image(dec, rep))
    by_flow = character(flow(dec, rep, t))
    by_words = character(dec.twist_endo().pullback(rep))
    dev = float(np.max(np.abs(by_flow - by_words))) if by_flow.size else 0.0
    n = int(np.prod(rep.shape[:-2])) if rep.ndim > 2 else 1
    return FlowTwistReport(dec.name or repr(dec.gamma), n, dev, tol)


@dataclass(frozen=True)
class GluingResult:
    glues: bool
    solvable: bool
    residual: float
    trace_gap: float


def check_gluing(dec: HNNDecomposition, rho_a, b, tol: float = GLUE_TOL) -> GluingResult:
    """Does ``rho_A(gamma_-)^-1 = b rho_A(gamma_+) b^-1`` hold?

    ``rho_a`` holds images of the A-side letters, shape ``(..., m, 4)``.
    ``solvable`` reports whether some ``b`` could work, i.e. whether the
    two attaching elements have equal traces.
    """
    rho_a = np.asarray(rho_a, dtype=float)
    gm = evaluate(dec.gamma_minus, rho_a)
    gp = evaluate(dec.gamma_plus, rho_a)
    b = np.asarray(b, dtype=float)
    lhs = qinv(gm)
    rhs = qmul(qmul(b, gp), qinv(b))
    res = float(np.max(np.abs(lhs - rhs)))
    gap = float(np.max(np.abs(trace(gm) - trace(gp))))
    return GluingResult(res < tol, gap < tol, res, gap)


# --------------------------------------------------------------------------
# decompositions used by the experiments


def n22_hnn() -> HNNDecomposition:
    """Two-holed Klein bottle cut along ``X = AB``.

    A-side letters ``h0 = AB``, ``h1 = B^-1 A B B``, ``h2 = C``; stable
    letter ``beta = B``; ``gamma_- = h0^-1``, ``gamma_+ = h1``.
    """
    return HNNDecomposition(
        embedding=("AB", "bABB", "C", "B"),
        rebuild=("Ad", "D", "C"),  # A = h0 beta^-1, B = beta, C = h2
        gamma_minus="a",
        gamma_plus="B",
        name="N22/X=AB",
    )


def separating_a2() -> SeparatingDecomposition:
    """Circle ``A^2`` cutting off the Moebius band around A."""
    return SeparatingDecomposition((0,), (1, 2), "AA", name="A^2")


def separating_a2b2() -> SeparatingDecomposition:
    """Circle ``A^2 B^2`` cutting off the one-holed Klein bottle in N22."""
    return SeparatingDecomposition((0, 1), (2,), "AABB", name="A^2B^2")


BUILTIN_DECOMPOSITIONS = {
    "N22/X=AB": n22_hnn,
    "A^2": separating_a2,
    "A^2B^2": separating_a2b2,
}
