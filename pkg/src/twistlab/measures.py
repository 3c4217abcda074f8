"""
Haar push-forward measures on SU(2) representation spaces.

Haar measure has total mass 1 throughout.  The density at the identity of
the push-forward of Haar measure on ``SU(2)^k`` under ``x -> x_1^2 ... x_k^2``
has the character expansion

    f_k(1) = sum_n  s(n)^k  n^(2-k),   s(n) = +1 (n odd), -1 (n even),

where ``s(n)`` is the Frobenius-Schur indicator of the ``n``-dimensional
irrep.  It converges for ``k >= 4``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np
from scipy import integrate

from .errors import DivergentSeries, QuadratureUnresolved, WindowTooTight
from .su2 import haar_sample, normalize, qmul, weyl_density
from .twists import boundary_names, boundary_traces, coords_from_rep
from .words import BOUNDARY_WORDS, evaluate

CHUNK = 1_000_000
MIN_ACCEPTANCE = 1e-6


# --------------------------------------------------------------------------
# Frobenius-Schur indicators


def character(n: int, theta):
    """``chi_n`` at the class of angle ``theta``: ``sin(n theta) / sin(theta)``."""
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta)
    small = np.abs(s) < 1e-12
    safe = np.where(small, 1.0, s)
    # at theta = 0 or pi the limit is n or (-1)^(n-1) n
    lim = n * np.where(np.cos(theta) > 0, 1.0, (-1.0) ** (n - 1))
    return np.where(small, lim, np.sin(n * theta) / safe)


def fs_indicator(n: int) -> int:
    """Frobenius-Schur indicator of the ``n``-dimensional irrep by quadrature.

    ``int chi_n(w^2) dw``: squaring doubles the angle, so the integrand is
    ``chi_n(2 theta)`` against the Weyl density.
    """
    if n < 1:
        raise ValueError("irrep dimension must be >= 1")
    raw, _ = integrate.quad(
        lambda t: float(character(n, 2 * t)) * float(weyl_density(t)),
        0.0, np.pi, limit=200 + 20 * n,
    )
    best = min((-1, 0, 1), key=lambda v: abs(raw - v))
    if abs(raw - best) > 0.1:
        raise QuadratureUnresolved(f"n={n}: quadrature value {raw:.6f} is not near -1, 0 or 1")
    return best


# --------------------------------------------------------------------------
# volume series


@dataclass(frozen=True)
class VolumeSeriesResult:
    """Partial sum of ``f_k(1)`` with an integral-test bracket on the tail.

    The limit lies in ``value +- truncation_bound`` where
    ``value = partial_sum + tail_correction``.
    """

    k: int
    partial_sum: float
    term_count: int
    truncation_bound: float
    tail_correction: float

    @property
    def value(self) -> float:
        return self.partial_sum + self.tail_correction

    @property
    def bracket(self) -> tuple[float, float]:
        return (self.value - self.truncation_bound, self.value + self.truncation_bound)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["value"] = self.value
        return d


def _tail_integral(m: int, offset: int, s: int) -> float:
    """``int_m^inf (2t - offset)^-s dt``."""
    return (2 * m - offset) ** (1 - s) / (2 * (s - 1))


def volume_series(k: int, tol: float = 1e-10) -> VolumeSeriesResult:
    """``f_k(1) = sum (2n-1)^(2-k) + (-1)^k sum (2n)^(2-k)``.

    Each parity class is a decreasing positive series, so its tail past ``M``
    terms lies between the integrals from ``M + 1`` and from ``M``.  The
    midpoint is added as ``tail_correction`` and half the gap is the bound.
    """
    if k < 4:
        raise DivergentSeries(f"the volume series diverges for k={k} < 4")
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = k - 2
    sign = 1 if k % 2 == 0 else -1

    def bracket(m):
        lo = _tail_integral(m + 1, 1, s) + _tail_integral(m + 1, 0, s)
        hi = _tail_integral(m, 1, s) + _tail_integral(m, 0, s)
        return lo, hi

    m = 8
    while True:
        lo, hi = bracket(m)
        if (hi - lo) / 2 <= tol:
            break
        m *= 2
    n = np.arange(1, m + 1, dtype=float)
    odd = math.fsum((2 * n - 1) ** (-s))
    even = math.fsum((2 * n) ** (-s))
    partial = odd + sign * even
    todd = (_tail_integral(m + 1, 1, s) + _tail_integral(m, 1, s)) / 2
    teven = (_tail_integral(m + 1, 0, s) + _tail_integral(m, 0, s)) / 2
    return VolumeSeriesResult(k, partial, 2 * m, (hi - lo) / 2, todd + sign * teven)


def ball_volume(eps: float) -> float:
    """Haar mass of ``{g : angle(g) < eps}``: ``(2/pi) int_0^eps sin^2``."""
    return (eps - math.sin(eps) * math.cos(eps)) / math.pi


def smeared_density(k: int, eps: float, terms: int = 400_000) -> float:
    """Exact mean of the ball estimator: ``f_k`` averaged over the eps-ball.

    Termwise ``int_ball chi_n = (2/pi) int_0^eps sin(n t) sin(t) dt``.  The
    difference from ``f_k(1)`` is the smoothing bias of the estimator; it is
    first order in ``eps`` for ``k = 4``.
    """
    if k < 4:
        raise DivergentSeries(f"the volume series diverges for k={k} < 4")
    n = np.arange(2, terms + 1, dtype=float)
    inner = 0.5 * (np.sin((n - 1) * eps) / (n - 1) - np.sin((n + 1) * eps) / (n + 1))
    sgn = np.where(n % 2 == 1, 1.0, (-1.0) ** k)
    first = 0.5 * (eps - math.sin(2 * eps) / 2)
    total = first + math.fsum(sgn * n ** (1 - k) * inner)
    return (2 / math.pi) * total / ball_volume(eps)


# --------------------------------------------------------------------------
# Monte Carlo density at the identity


@dataclass(frozen=True)
class DensityEstimate:
    k: int
    epsilon: float
    samples: int
    estimate: float
    std_error: float
    series_value: float
    seed: int
    smeared_value: float  # exact expectation of the estimator at this epsilon

    @property
    def bias(self) -> float:
        return self.smeared_value - self.series_value

    @property
    def combined_sigma(self) -> float:
        return math.hypot(self.std_error, self.bias)

    def agrees(self, nsigma: float = 3.0) -> bool:
        return abs(self.estimate - self.series_value) <= nsigma * self.combined_sigma

    def agrees_debiased(self, nsigma: float = 3.0) -> bool:
        return abs(self.estimate - self.smeared_value) <= nsigma * self.std_error

    def as_record(self) -> dict:
        return {
            "k": self.k,
            "epsilon": self.epsilon,
            "samples": self.samples,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "series_value": self.series_value,
            "seed": self.seed,
        }

    def as_dict(self) -> dict:
        d = self.as_record()
        d.update(smeared_value=self.smeared_value, bias=self.bias,
                 combined_sigma=self.combined_sigma, agrees=self.agrees(),
                 agrees_debiased=self.agrees_debiased())
        return d


def square_word_image(x: np.ndarray) -> np.ndarray:
    """``x_1^2 ... x_k^2`` for ``x`` of shape ``(..., k, 4)``."""
    sq = np.empty_like(x)
    w, v = x[..., :1], x[..., 1:]
    sq[..., :1] = 2 * w * w - 1
    sq[..., 1:] = 2 * w * v
    out = sq[..., 0, :]
    for i in range(1, x.shape[-2]):
        out = qmul(out, sq[..., i, :])
    return normalize(out)


def _count_hits(args) -> int:
    k, eps, m, seed_seq, conj = args
    rng = np.random.default_rng(seed_seq)
    x = haar_sample(rng, (m, k))
    q = square_word_image(x)
    if conj:
        g = haar_sample(rng, m)
        q = qmul(qmul(g, q), np.concatenate([g[:, :1], -g[:, 1:]], axis=1))
    return int(np.count_nonzero(q[:, 0] > math.cos(eps)))


def mc_identity_density(k: int, epsilon: float, samples: int, seed: int = 0,
                        workers: int = 1, conjugate: bool = False) -> DensityEstimate:
    """Ball-kernel estimate of ``f_k(1)``.

    ``P(angle(q(x)) < eps) / ball_volume(eps)`` with a binomial standard
    error.  Work is split into fixed chunks of ``CHUNK`` samples, each with
    its own stream from ``SeedSequence(seed).spawn``, so the result does not
    depend on ``workers``.  ``conjugate=True`` replaces ``q(x)`` by
    ``g q(x) g^-1`` with an independent Haar ``g``.
    """
    if k < 4:
        raise DivergentSeries(f"the volume series diverges for k={k} < 4")
    if not 0 < epsilon < math.pi / 4:
        raise ValueError("epsilon must lie in (0, pi/4)")
    if samples < 1:
        raise ValueError("samples must be positive")
    nchunk = -(-samples // CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(nchunk)
    jobs = [(k, epsilon, min(CHUNK, samples - i * CHUNK), seqs[i], conjugate)
            for i in range(nchunk)]
    if workers > 1 and nchunk > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            hits = sum(ex.map(_count_hits, jobs))
    else:
        hits = sum(map(_count_hits, jobs))
    vol = ball_volume(epsilon)
    p = hits / samples
    se = math.sqrt(max(p * (1 - p), 1.0 / samples) / samples) / vol
    return DensityEstimate(k, float(epsilon), int(samples), p / vol, se,
                           volume_series(k).value, int(seed),
                           smeared_density(k, epsilon))


def richardson(est_h: float, est_h2: float, order: float = 1.0) -> float:
    """Extrapolate estimates at bandwidths ``h`` and ``h/2`` to zero bandwidth."""
    r = 2.0 ** order
    return (r * est_h2 - est_h) / (r - 1)


# --------------------------------------------------------------------------
# relative sampling


def sample_trace_window(rng: np.random.Generator, n: int, target: float, width: float) -> np.ndarray:
    """Haar elements conditioned on ``|tr - target| <= width``.

    The angle is drawn from the Weyl density restricted to the window by
    rejection against a uniform proposal; the axis is uniform.  Haar is
    conjugation invariant, so this is the exact conditional law.
    """
    lo = math.acos(min(1.0, max(-1.0, (target + width) / 2)))
    hi = math.acos(min(1.0, max(-1.0, (target - width) / 2)))
    if hi <= lo:
        raise WindowTooTight(f"trace window [{target - width}, {target + width}] misses [-2, 2]")
    peak = 1.0 if lo <= math.pi / 2 <= hi else max(math.sin(lo), math.sin(hi)) ** 2
    out = np.empty(0)
    while out.size < n:
        m = max(2 * (n - out.size), 64)
        th = rng.uniform(lo, hi, m)
        keep = rng.uniform(0.0, peak, m) < np.sin(th) ** 2
        out = np.concatenate([out, th[keep]])
    th = out[:n]
    axis = rng.standard_normal((n, 3))
    axis /= np.linalg.norm(axis, axis=1, keepdims=True)
    return np.concatenate([np.cos(th)[:, None], np.sin(th)[:, None] * axis], axis=1)


@dataclass
class RelativeSample:
    surface: str
    targets: dict
    width: float
    reps: np.ndarray  # (n, 3, 4)
    proposals: int

    @property
    def acceptance(self) -> float:
        return len(self.reps) / self.proposals if self.proposals else 0.0

    @property
    def points(self) -> np.ndarray:
        return coords_from_rep(self.reps)


def _normalize_targets(surface: str, targets) -> dict:
    names = boundary_names(surface)
    if isinstance(targets, Mapping):
        missing = set(names) - set(targets)
        if missing:
            raise ValueError(f"missing boundary targets {sorted(missing)} for {surface}")
        return {n: float(targets[n]) for n in names}
    vals = list(targets)
    if len(vals) != len(names):
        raise ValueError(f"{surface} has boundary traces {names}, got {len(vals)} targets")
    return dict(zip(names, map(float, vals)))


def _generator_boundaries(surface: str) -> dict[str, int]:
    """Boundary curves that are a single generator, mapped to its index."""
    out = {}
    for name, w in BOUNDARY_WORDS[surface].items():
        if len(w) == 1 and w.letters[0][1] == 1:
            out[name] = w.letters[0][0]
    return out


def sample_relative(surface: str, targets, width: float, rng: np.random.Generator,
                    n: int = 1, batch: int = 100_000) -> RelativeSample:
    """Haar on ``SU(2)^3`` conditioned on every boundary trace lying within
    ``width`` of its target.

    Boundaries that are single generators are sampled exactly from their
    conditional law; the others are enforced by rejection.  Raises
    ``WindowTooTight`` if a trial batch accepts less than ``1e-6``.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    tg = _normalize_targets(surface, targets)
    direct = _generator_boundaries(surface)
    rejected = [name for name in tg if name not in direct]
    words = BOUNDARY_WORDS[surface]
    kept: list[np.ndarray] = []
    total, proposals = 0, 0
    while total < n:
        reps = haar_sample(rng, (batch, 3))
        for name, g in direct.items():
            reps[:, g, :] = sample_trace_window(rng, batch, tg[name], width)
        ok = np.ones(batch, dtype=bool)
        for name in rejected:
            tr = 2 * evaluate(words[name], reps)[:, 0]
            ok &= np.abs(tr - tg[name]) <= width
        proposals += batch
        hits = int(np.count_nonzero(ok))
        if proposals == batch and hits < MIN_ACCEPTANCE * batch:
            raise WindowTooTight(
                f"{surface}: acceptance {hits / batch:.2e} below {MIN_ACCEPTANCE:g} "
                f"for targets {tg} and width {width}"
            )
        kept.append(reps[ok])
        total += hits
    reps = np.concatenate(kept)
    # proposals are counted up to the batch that completed the request
    return RelativeSample(surface, tg, float(width), reps[:n], proposals)


def project_to_fiber(surface: str, rep, targets, tol: float = 1e-13,
                     max_iter: int = 50) -> np.ndarray:
    """Move a representation so its boundary traces equal ``targets`` exactly.

    Gauss-Newton with minimum-norm steps ``rep_i -> exp(delta_i) rep_i`` on
    the 9 Lie-algebra parameters.
    """
    from .su2 import exp_scaled

    tg = _normalize_targets(surface, targets)
    goal = np.array(list(tg.values()))
    rep = np.array(rep, dtype=float).reshape(3, 4)

    def resid(r):
        bt = boundary_traces(surface, coords_from_rep(r)).values
        return np.array([float(bt[k]) for k in tg]) - goal

    def moved(r, delta):
        out = r.copy()
        for i in range(3):
            v = delta[3 * i:3 * i + 3]
            nrm = np.linalg.norm(v)
            if nrm > 0:
                out[i] = qmul(exp_scaled(v / nrm, nrm), r[i])
        return normalize(out)

    h = 1e-7
    for _ in range(max_iter):
        f = resid(rep)
        if np.max(np.abs(f)) <= tol:
            return rep
        J = np.empty((len(goal), 9))
        for j in range(9):
            e = np.zeros(9)
            e[j] = h
            J[:, j] = (resid(moved(rep, e)) - resid(moved(rep, -e))) / (2 * h)
        step = -np.linalg.lstsq(J, f, rcond=None)[0]
        rep = moved(rep, step)
    f = resid(rep)
    if np.max(np.abs(f)) > 1e3 * tol:
        raise WindowTooTight(f"projection to the boundary fiber did not converge (residual {f})")
    return rep


def space_moments(samples: np.ndarray, n_batches: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean, standard error and per-batch means of i.i.d. rows.

    The error uses the pooled sample variance; batch means are kept for
    reporting only.
    """
    samples = np.asarray(samples, dtype=float)
    n = len(samples)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(n)
    per = n // n_batches
    bm = samples[: per * n_batches].reshape(n_batches, per, -1).mean(axis=1)
    return mean, se, bm


def batch_means(series: np.ndarray, n_batches: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean and batch-means standard error of a correlated time series."""
    series = np.asarray(series, dtype=float)
    per = len(series) // n_batches
    if per < 1:
        raise ValueError("series shorter than the number of batches")
    bm = series[: per * n_batches].reshape(n_batches, per, -1).mean(axis=1)
    return series.mean(axis=0), bm.std(axis=0, ddof=1) / math.sqrt(n_batches)
