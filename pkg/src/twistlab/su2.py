"""
SU(2) arithmetic on unit quaternions.

An element ``q0 + q1 i + q2 j + q3 k`` is stored as a float array of shape
``(..., 4)``; every function here broadcasts over leading axes so that
batches of representations are handled without Python loops.  The
``SU2Element`` class is a small immutable wrapper for single elements.

Under the usual identification ``i -> [[i, 0], [0, -i]]`` the matrix trace
of a unit quaternion is ``2 q0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CentralElement

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])
MINUS_IDENTITY = -IDENTITY

# Renormalize accumulated products every RENORM_EVERY multiplications.
RENORM_EVERY = 64
CENTRAL_TOL = 1e-10


def qmul(p, q):
    """Hamilton product of quaternion arrays (broadcasting)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, p1, p2, p3 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    q0, q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def qinv(q):
    """Inverse of a unit quaternion (its conjugate)."""
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def multiply(g, h):
    """Group law: renormalized quaternion product."""
    return normalize(qmul(g, h))


def conjugate_by(h, g):
    """Return ``h g h^-1``."""
    return qmul(qmul(h, g), qinv(h))


def trace(g):
    return 2.0 * np.asarray(g, dtype=float)[..., 0]


def angle(g):
    """``arccos(tr(g)/2)`` in ``[0, pi]``; the class function used by the flow."""
    return np.arccos(np.clip(np.asarray(g, dtype=float)[..., 0], -1.0, 1.0))


def variation(g, tol=CENTRAL_TOL):
    """Unit pure-imaginary axis ``u`` with ``g = cos(f) + sin(f) u``.

    Returns an array of shape ``(..., 3)``.  Raises ``CentralElement`` if any
    element has imaginary part of norm below ``tol``.

    The sign convention matches the diagonal normal form: for
    ``g = cos(theta) + sin(theta) i`` with ``theta`` in ``(0, pi)`` the
    result is ``+i``.  Under the matrix identification this is
    ``diag(i, -i)``; any fixed convention gives the same flow on
    characters.
    """
    g = np.asarray(g, dtype=float)
    im = g[..., 1:]
    norm = np.linalg.norm(im, axis=-1, keepdims=True)
    if np.any(norm < tol):
        raise CentralElement(
            f"variation undefined: imaginary norm {float(np.min(norm)):.3e} < {tol}"
        )
    return im / norm


def exp_scaled(u, t):
    """``exp(t u) = cos(t) + sin(t) u`` for unit pure-imaginary ``u``."""
    u = np.asarray(u, dtype=float)
    t = np.asarray(t, dtype=float)
    c = np.cos(t)[..., None]
    s = np.sin(t)[..., None]
    ones = np.ones(u.shape[:-1] + (1,))
    return np.concatenate([c * ones, s * u], axis=-1)


def haar_sample(rng: np.random.Generator, size=None):
    """Haar-distributed elements: normalized 4-d standard normals.

    ``size`` is the batch shape; ``None`` returns a single ``(4,)`` array.
    """
    shape = (4,) if size is None else tuple(np.atleast_1d(size)) + (4,)
    return normalize(rng.standard_normal(shape))


def derive_streams(seed: int, n: int) -> list[np.random.Generator]:
    """Deterministic child generators for ``n`` workers.

    Stream ``i`` is ``default_rng(SeedSequence(seed).spawn(n)[i])``, so the
    derivation depends only on ``(seed, n, i)``.
    """
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def weyl_density(theta):
    """Density of the angle ``theta = arccos(tr/2)`` under normalized Haar."""
    return (2.0 / np.pi) * np.sin(theta) ** 2


def weyl_angle_cdf(theta):
    """CDF of the Haar angle on ``[0, pi]``."""
    theta = np.asarray(theta, dtype=float)
    return (theta - np.sin(theta) * np.cos(theta)) / np.pi


@dataclass(frozen=True, eq=False)
class SU2Element:
    """A single unit quaternion; thin wrapper over the array functions."""

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(4)
        n = np.linalg.norm(q)
        if abs(n - 1.0) > 1e-12:
            q = q / n
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @classmethod
    def identity(cls) -> "SU2Element":
        return cls(IDENTITY)

    @classmethod
    def haar(cls, rng: np.random.Generator) -> "SU2Element":
        return cls(haar_sample(rng))

    @classmethod
    def from_axis_angle(cls, axis, theta: float) -> "SU2Element":
        return cls(exp_scaled(normalize(axis), theta))

    def __mul__(self, other: "SU2Element") -> "SU2Element":
        return SU2Element(multiply(self.q, other.q))

    def inverse(self) -> "SU2Element":
        return SU2Element(qinv(self.q))

    def __neg__(self) -> "SU2Element":
        return SU2Element(-self.q)

    @property
    def trace(self) -> float:
        return float(trace(self.q))

    @property
    def angle(self) -> float:
        return float(angle(self.q))

    def variation(self) -> np.ndarray:
        return variation(self.q)

    def allclose(self, other: "SU2Element", atol=1e-10) -> bool:
        return bool(np.allclose(self.q, other.q, atol=atol, rtol=0))

    def __repr__(self):
        return "SU2Element(%s)" % np.array2string(self.q, precision=6)
