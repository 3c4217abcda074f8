"""
Orbit statistics: equidistribution of single-twist orbits on their ellipse
and time-versus-space averages for multi-twist orbits on a relative fiber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError
from .measures import batch_means, project_to_fiber, sample_relative, space_moments
from .polynomial import TracePolynomial, eval_poly
from .su2 import derive_streams
from .twists import TWIST_NAMES, ellipse_form, orbit, random_program

RATIONAL_QMAX = 50
RATIONAL_TOL = 1e-6

DICTIONARY = ("a", "x", "y", "z", "d", "a^2", "x^2", "z^2", "d^2", "a*x", "x*z", "a*d")


# --------------------------------------------------------------------------
# discrepancy


def star_discrepancy(u) -> float:
    """``D*_N`` of points in ``[0, 1)``: ``sup_t |#{u_i < t}/N - t|``."""
    u = np.sort(np.asarray(u, dtype=float).ravel())
    n = len(u)
    if n == 0:
        raise ValueError("no points")
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def ks_distance(u) -> float:
    """Kolmogorov-Smirnov distance to the uniform law on ``[0, 1]``."""
    return float(stats.kstest(np.asarray(u, dtype=float).ravel(), "uniform").statistic)


def rational_approximation(value: float, qmax: int = RATIONAL_QMAX,
                           tol: float = RATIONAL_TOL) -> Fraction | None:
    """Best continued-fraction approximation ``p/q`` with ``q <= qmax``, if
    it lies within ``tol`` of ``value``."""
    fr = Fraction(float(value)).limit_denominator(qmax)
    return fr if abs(float(fr) - value) < tol else None


def rotation_sequence(start: float, step: float, n: int) -> np.ndarray:
    """``start + i * step`` modulo 1 for ``i = 0 .. n``."""
    i = np.arange(n + 1, dtype=float)
    return np.mod(start + i * step, 1.0)


def loglog_slope(ns: Sequence[int], ds: Sequence[float]) -> float:
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(ds, float)), 1)[0])


@dataclass
class EquidistributionReport:
    surface: str
    twist: str
    n: int
    nu: float
    rotation: float  # signed angle per step, radians
    nu_over_pi: Fraction | None
    rotation_number: Fraction | None
    discrepancy: float
    ks: float
    reference_discrepancy: float
    distinct_points: int
    slope: float
    max_residual: float
    phases: np.ndarray = field(repr=False)

    @property
    def screened(self) -> bool:
        return self.nu_over_pi is None and self.rotation_number is None

    @property
    def resonant(self) -> bool:
        return self.rotation_number is not None

    @property
    def tracks_reference(self) -> bool:
        return self.discrepancy <= 2 * self.reference_discrepancy

    def as_dict(self) -> dict:
        return {
            "surface": self.surface,
            "twist": self.twist,
            "n": self.n,
            "nu": self.nu,
            "rotation": self.rotation,
            "nu_over_pi": None if self.nu_over_pi is None else str(self.nu_over_pi),
            "rotation_number": None if self.rotation_number is None else str(self.rotation_number),
            "screened": self.screened,
            "resonant": self.resonant,
            "star_discrepancy": self.discrepancy,
            "ks_distance": self.ks,
            "reference_discrepancy": self.reference_discrepancy,
            "tracks_reference": self.tracks_reference,
            "distinct_points": self.distinct_points,
            "loglog_slope": self.slope,
            "max_quadric_residual": self.max_residual,
        }


def equidistribution(surface: str, twist: str, pt, n: int) -> EquidistributionReport:
    """Single-twist orbit of length ``n`` read as phases on its ellipse.

    The orbit is compared with the pure rotation ``phase_0 + i * rho`` of
    the same signed angle.  Both ``nu / pi`` and the rotation number
    ``rho = rotation / 2 pi`` go through the continued-fraction screen.
    """
    if n < 1:
        raise ValueError("n must be positive")
    form = ellipse_form(surface, twist, pt)
    orb = orbit(surface, (twist,), pt, n)
    ph = form.phase(orb.points)
    resid = float(np.max(np.abs(np.asarray(form.residual(orb.points), dtype=float))))
    nu = float(form.nu)
    rot = float(form.rotation)
    rho = rot / (2 * math.pi)
    ref = rotation_sequence(float(ph[0]), rho, n)
    grid = [g for g in (n // 8, n // 4, n // 2, n) if g >= 16]
    slope = loglog_slope(grid, [star_discrepancy(ph[:g]) for g in grid]) if len(grid) >= 2 else float("nan")
    distinct = len(np.unique(np.round(ph, 9) % 1.0))
    return EquidistributionReport(
        surface, twist, n, nu, rot,
        rational_approximation(nu / math.pi), rational_approximation(rho % 1.0),
        star_discrepancy(ph), ks_distance(ph), star_discrepancy(ref),
        distinct, slope, resid, ph,
    )


def screened_start(surface: str, twist: str, rng: np.random.Generator, tries: int = 1000):
    """First Haar-random character point that passes the rational screen and
    has a non-degenerate ellipse."""
    from .errors import DegenerateEllipse
    from .twists import coords_from_rep
    from .words import random_representations

    for _ in range(tries):
        pt = coords_from_rep(random_representations(rng))
        try:
            form = ellipse_form(surface, twist, pt)
        except DegenerateEllipse:
            continue
        rho = float(form.rotation) / (2 * math.pi)
        if rational_approximation(float(form.nu) / math.pi) is None and \
                rational_approximation(rho % 1.0) is None:
            return pt
    raise ConfigError(f"no screened start point for {surface}.{twist} in {tries} tries")


# --------------------------------------------------------------------------
# ergodicity


@dataclass
class ErgodicityReport:
    surface: str
    program: tuple[str, ...]
    n: int
    functions: tuple[str, ...]
    time_mean: np.ndarray
    time_se: np.ndarray
    space_mean: np.ndarray
    space_se: np.ndarray
    space_batch_means: np.ndarray
    acceptance: float
    start: np.ndarray

    @property
    def z(self) -> np.ndarray:
        return (self.time_mean - self.space_mean) / np.hypot(self.time_se, self.space_se)

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z)))

    def flagged(self, threshold: float = 3.0) -> list[str]:
        return [f for f, z in zip(self.functions, self.z) if abs(z) > threshold]

    def as_dict(self) -> dict:
        rows = []
        for i, f in enumerate(self.functions):
            rows.append({
                "function": f,
                "time_mean": float(self.time_mean[i]),
                "time_se": float(self.time_se[i]),
                "space_mean": float(self.space_mean[i]),
                "space_se": float(self.space_se[i]),
                "z": float(self.z[i]),
            })
        return {
            "surface": self.surface,
            "twists": sorted(set(self.program)),
            "n": self.n,
            "acceptance": self.acceptance,
            "start": [float(v) for v in self.start],
            "max_abs_z": self.max_abs_z,
            "flagged": self.flagged(),
            "functions": rows,
        }


def _features(points: np.ndarray, functions: Sequence[str]) -> np.ndarray:
    polys = [TracePolynomial.from_str(f) for f in functions]
    return np.stack([np.asarray(eval_poly(p, points), dtype=float) for p in polys], axis=-1)


@dataclass
class ErgodicityExperiment:
    """Multi-twist orbit on a boundary fiber against relative Haar samples.

    The orbit starts exactly on the fiber ``targets`` (a window sample
    projected by Gauss-Newton) so that the comparison carries no first-order
    window bias.  Time errors use batch means; space errors use the pooled
    variance of the i.i.d. samples.
    """

    surface: str
    targets: tuple
    width: float
    twists: tuple[str, ...]
    n: int
    seed: int
    space_batches: int = 16
    space_per_batch: int = 8000
    time_batches: int = 100
    functions: tuple[str, ...] = DICTIONARY

    def __post_init__(self):
        if self.surface not in TWIST_NAMES:
            raise ConfigError(f"unknown surface {self.surface!r}")
        for t in self.twists:
            if t not in TWIST_NAMES[self.surface]:
                raise ConfigError(f"{self.surface} has no twist {t!r}; available {TWIST_NAMES[self.surface]}")
        if self.n < 1:
            raise ConfigError("orbit length must be positive")
        if self.n < self.time_batches:
            raise ConfigError(f"orbit length {self.n} is shorter than {self.time_batches} batches")

    def _streams(self):
        return derive_streams(self.seed, 2 + self.space_batches)

    def space(self):
        streams = self._streams()
        feats, props, acc = [], 0, 0
        for b in range(self.space_batches):
            s = sample_relative(self.surface, self.targets, self.width,
                                streams[2 + b], self.space_per_batch)
            feats.append(_features(s.points, self.functions))
            props += s.proposals
            acc += len(s.reps)
        return np.concatenate(feats), acc / props

    def start(self) -> np.ndarray:
        from .twists import coords_from_rep

        rng = self._streams()[0]
        s = sample_relative(self.surface, self.targets, self.width, rng, 1)
        return coords_from_rep(project_to_fiber(self.surface, s.reps[0], self.targets))

    def program(self) -> tuple[str, ...]:
        if len(self.twists) == 1:
            return self.twists
        return random_program(self._streams()[1], self.twists, self.n)

    def run(self, space=None) -> ErgodicityReport:
        if space is None:
            space = self.space()
        sfeat, acceptance = space
        smean, sse, sbm = space_moments(sfeat, self.space_batches)
        start = self.start()
        prog = self.program()
        orb = orbit(self.surface, prog, start, self.n)
        tfeat = _features(orb.points[1:], self.functions)
        tmean, tse = batch_means(tfeat, self.time_batches)
        return ErgodicityReport(self.surface, tuple(prog), self.n, tuple(self.functions),
                                tmean, tse, smean, sse, sbm, acceptance, start)


def ergodicity(surface: str, targets, width: float, twists: Sequence[str], n: int,
               seed: int, control: str | None = None, **kw):
    """Run the multi-twist experiment and, if ``control`` names a twist, the
    single-twist negative control on the same space samples and start."""
    if len(set(twists)) < 2:
        raise ConfigError("the ergodicity experiment needs at least two distinct twists")
    exp = ErgodicityExperiment(surface, tuple(targets), width, tuple(twists), n, seed, **kw)
    space = exp.space()
    main = exp.run(space)
    ctrl = None
    if control is not None:
        cexp = ErgodicityExperiment(surface, tuple(targets), width, (control,), n, seed, **kw)
        ctrl = cexp.run(space)
    return main, ctrl
