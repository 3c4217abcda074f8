"""
Dehn twists acting on trace coordinates, their ellipse normal forms, and orbits.

Each built-in twist fixes a set of coordinates and moves a two-dimensional
slice affinely; on that slice it is a rotation about a center that depends
only on the fixed coordinates.  Points are arrays whose last axis holds
``(a, b, c, x, y, z, d)``; single points may also be ``CharacterPoint``.

Two implementations of every map ship:

* ``method="closed"``: short hand-written formulas (the default, and the
  only path used inside orbits);
* ``method="induced"``: polynomials generated by ``traces.induced_map`` from
  the automorphism's generator images.

Tests pin the two together and against the word-level oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DegenerateEllipse, DomainError, OrbitBlowUp
from .polynomial import VARS, TracePolynomial, eval_poly
from .su2 import trace
from .traces import COORDINATE_WORDS, induced_map
from .words import SURFACES, builtin_twists, evaluate

NU_MARGIN = 1e-6
DENOM_MIN = 1e-8
FRICKE_GUARD = 1e-6

TWIST_NAMES: Mapping[str, tuple[str, ...]] = {
    "N22": ("U",),
    "N13": ("T", "U", "W"),
    "N31": ("U",),
}

# coordinates each twist leaves untouched (boundary traces included)
INVARIANT_COORDS: Mapping[tuple[str, str], tuple[str, ...]] = {
    ("N22", "U"): ("a", "b", "c", "y"),
    ("N13", "T"): ("a", "b", "c", "x"),
    ("N13", "U"): ("a", "b", "c", "z"),
    ("N13", "W"): ("b", "c", "x", "z"),
    ("N31", "U"): ("a", "b", "c", "z"),
}


def _check(surface: str, twist: str) -> None:
    if surface not in TWIST_NAMES:
        raise DomainError(f"unknown surface {surface!r}; expected one of {SURFACES}")
    if twist not in TWIST_NAMES[surface]:
        raise DomainError(
            f"surface {surface} has no twist {twist!r}; available: {TWIST_NAMES[surface]}"
        )


# --------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class CharacterPoint:
    a: float
    b: float
    c: float
    x: float
    y: float
    z: float
    d: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.x, self.y, self.z, self.d])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(VARS, self.as_tuple()))

    def as_tuple(self) -> tuple[float, ...]:
        return (self.a, self.b, self.c, self.x, self.y, self.z, self.d)

    @classmethod
    def from_array(cls, arr) -> "CharacterPoint":
        arr = np.asarray(arr, dtype=float).reshape(7)
        return cls(*(float(v) for v in arr))

    @classmethod
    def identity(cls) -> "CharacterPoint":
        return cls(2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0)

    def fricke_residual(self) -> float:
        return float(fricke_residual(self.as_tuple()))


def _as_array(pt) -> np.ndarray:
    if isinstance(pt, CharacterPoint):
        return pt.as_array()
    arr = np.asarray(pt, dtype=float)
    if arr.shape[-1] != 7:
        raise ValueError(f"character points have 7 coordinates, got shape {arr.shape}")
    return arr


def coords_from_rep(rep) -> np.ndarray:
    """Trace coordinates of representations of shape ``(..., 3, 4)``."""
    rep = np.asarray(rep, dtype=float)
    return np.stack([trace(evaluate(w, rep)) for w in COORDINATE_WORDS], axis=-1)


def fricke_residual(pt):
    """Fricke polynomial evaluated at ``pt`` (0 on representation points)."""
    a, b, c, x, y, z, d = _unpack(pt)
    return (
        a * a + b * b + c * c + d * d + x * x + y * y + z * z
        - ((a * b + c * d) * x + (b * c + d * a) * y + (c * a + b * d) * z)
        + x * y * z + a * b * c * d - 4
    )


def _unpack(pt):
    if isinstance(pt, CharacterPoint):
        return pt.as_tuple()
    if isinstance(pt, tuple):
        return pt
    arr = np.asarray(pt)
    if arr.dtype != np.longdouble:
        arr = arr.astype(float)
    return tuple(arr[..., i] for i in range(7))


# --------------------------------------------------------------------------
# boundary traces


def _k_n22(a, b, c, x, y, z, d):
    return a * b * d - a * z - b * y + c


def _k_n13(a, b, c, x, y, z, d):
    return a * d - y


def _k_n31(a, b, c, x, y, z, d):
    return a * b * c * d - b * c * y - a * c * z - a * b * x + a * a + b * b + c * c - 2


_BOUNDARY: Mapping[str, Mapping[str, Callable]] = {
    "N22": {"c": lambda a, b, c, x, y, z, d: c, "k": _k_n22},
    "N13": {
        "b": lambda a, b, c, x, y, z, d: b,
        "c": lambda a, b, c, x, y, z, d: c,
        "k": _k_n13,
    },
    "N31": {"k": _k_n31},
}


@dataclass(frozen=True)
class BoundaryTraces:
    surface: str
    values: Mapping[str, float]

    def as_tuple(self) -> tuple:
        return tuple(self.values[k] for k in _BOUNDARY[self.surface])


def boundary_traces(surface: str, pt) -> BoundaryTraces:
    if surface not in _BOUNDARY:
        raise DomainError(f"unknown surface {surface!r}")
    cols = _unpack(pt)
    return BoundaryTraces(surface, {name: f(*cols) for name, f in _BOUNDARY[surface].items()})


def boundary_names(surface: str) -> tuple[str, ...]:
    return tuple(_BOUNDARY[surface])


# --------------------------------------------------------------------------
# closed-form twist maps; each works on floats and on arrays alike


def _n22_u(a, b, c, x, y, z, d):
    x1 = (
        b * b * x * y * y + b * b * y * z - b ** 3 * d * y - a * b * y * y + b * b * c * d
        + c * c * x - 2 * b * c * x * y + 2 * b * d * y - b * c * z + a * c * y - y * z
        - c * d + a * b - x
    )
    d1 = b * b * d - b * x * y - b * z + c * x + a * y - d
    z1 = b * d1 - b * d + z
    return a, b, c, x1, y, z1, d1


def _n13_t(a, b, c, x, y, z, d):
    k = a * d - y
    z1 = (
        a * a * x * x * z - a * a * k * x + a * b * k - 2 * a * b * x * z - a * c * x * x
        + a * c + a * d * x + b * b * z + b * c * x - b * d + k * x - z
    )
    d1 = a * k - a * x * z + c * x + b * z - d
    return a, b, c, x, a * d1 - k, z1, d1


def _n13_u(a, b, c, x, y, z, d):
    k = a * d - y
    x1 = a * b - z * y + c * d - x
    d1 = (
        a * a * d * z * z - a * a * b * z + a * b * c - 2 * a * c * d * z - a * k * z * z
        + a * k + a * x * z + b * z + c * c * d + c * k * z - c * x - d
    )
    return a, b, c, x1, a * d1 - k, z, d1


def _n13_w(a, b, c, x, y, z, d):
    k = a * d - y
    w = x * z - k
    a1 = w * (x * c - d) - (x * (c * w - b) - (z * c - a))
    d1 = w * (d * w - (z * c - a)) - (x * (w * b - c) - (z * b - d))
    return a1, b, c, x, a1 * d1 - k, z, d1


def _n31_u(a, b, c, x, y, z, d):
    a2, c2 = a * a, c * c
    x1 = c2 * c * d - c2 * y * z - c2 * x - 2 * c * d + c * b * z + c * a * y + x
    y1 = (
        a2 * a2 * y + a2 * a * b * z + a2 * a * c2 * d - a2 * a * c * x - 2 * a2 * a * c * y * z
        - a2 * a * d - a2 * b * c * z * z - a2 * c2 * c * d * z + a2 * c2 * x * z
        + a2 * c2 * y * z * z + a2 * c2 * y + 2 * a2 * c * d * z - a2 * x * z - 3 * a2 * y
        + a * b * c2 * z - a * b * z + a * c2 * c2 * d - a * c2 * c * x - a * c2 * c * y * z
        - 4 * a * c2 * d + 3 * a * c * x + 2 * a * c * y * z + 2 * a * d + y
    )
    d1 = (
        a2 * a * y + a2 * b * z + a2 * c2 * d - a2 * c * x - 2 * a2 * c * y * z - a2 * d
        - a * b * c * z * z - a * c2 * c * d * z + a * c2 * x * z + a * c2 * y * z * z
        + a * c2 * y + 2 * a * c * d * z - a * x * z - 2 * a * y + b * c2 * z
        + c2 * c2 * d - c2 * c * x - c2 * c * y * z - 3 * c2 * d + 2 * c * x + c * y * z + d
    )
    return a, b, c, x1, y1, z, d1


_CLOSED: Mapping[tuple[str, str], Callable] = {
    ("N22", "U"): _n22_u,
    ("N13", "T"): _n13_t,
    ("N13", "U"): _n13_u,
    ("N13", "W"): _n13_w,
    ("N31", "U"): _n31_u,
}


def closed_form(surface: str, twist: str) -> Callable:
    """The hand-written map ``(a,...,d) -> (a',...,d')`` on scalars or arrays."""
    _check(surface, twist)
    return _CLOSED[(surface, twist)]


@lru_cache(maxsize=None)
def induced(surface: str, twist: str):
    """Coordinate map generated from the generator images by the trace engine."""
    _check(surface, twist)
    return induced_map(builtin_twists(surface)[twist])


def apply_twist(surface: str, twist: str, pt, method: str = "closed"):
    """Image of ``pt`` under the twist; keeps the input type.

    Invariant coordinates are returned unchanged (bit for bit) by the
    closed-form path.
    """
    _check(surface, twist)
    single = isinstance(pt, CharacterPoint)
    arr = _as_array(pt)
    if method == "closed":
        out = np.stack(
            np.broadcast_arrays(*_CLOSED[(surface, twist)](*_unpack(arr))), axis=-1
        )
    elif method == "induced":
        out = induced(surface, twist)(arr)
    else:
        raise ValueError(f"unknown method {method!r}")
    return CharacterPoint.from_array(out) if single else out


# Maps as printed, with k standing for the boundary trace; kept verbatim so
# that the record of what was checked is explicit.
PRINTED_MAPS: Mapping[tuple[str, str], Mapping[str, str]] = {
    ("N22", "U"): {
        "x": "b^2*x*y^2 + b^2*y*z - b^3*d*y - a*b*y^2 + b^2*c*d + c^2*x - 2*b*c*x*y"
        " + 2*b*d*y - b*c*z + a*c*y - y*z - c*d + a*b - x",
        "d": "b^2*d - b*x*y - b*z + c*x + a*y - d",
        "z": "b*(b^2*d - b*x*y - b*z + c*x + a*y - d) - b*d + z",
    },
    ("N13", "T"): {
        "z": "a^2*x^2*z - a^2*k*x - a^2*c*x + b^2*z - 2*a*b*x*z + a*x*d + b*c*x + a*b*k"
        " + k*x - b*c + a*c - z",
        "d": "a*k - a*x*z + c*x + b*z - d",
    },
    ("N13", "U"): {
        "x": "a*b - z*y + c*d - x",
        "d": "a*d - a*y + a*b*c - a*c*x + a*b*z - a*x*z + a*c*d*z - a*c*y*z + a^2*d"
        " + a*c^2*d - a*y*z^2",
    },
    ("N13", "W"): {
        "a": "(x*z - k)*(x*c - d) - (x*(c*(x*z - k) - b) - (z*c - a))",
        "d": "(x*z - k)*(d*(x*z - k) - (z*c - a)) - (x*((x*z - k)*b - c) - (z*b - d))",
    },
    ("N31", "U"): {
        "x": "c^3*d - c^2*y*z - c^2*x - 2*c*d + c*b*z + c*a*y + x",
        "y": "-a^4*b*c^3 + a^4*b*c + a^4*c^2*y + a^3*b*c^4*z - a^3*b*c^2*z + a^3*c^3*x"
        " - a^3*c^3*y*z - a^3*c^2*d - 2*a^3*c*x + a^3*d - a^2*b*c^5 - a^2*b*c^3*z^2"
        " + 4*a^2*b*c^3 + a^2*b*c*z^2 - 2*a^2*b*c - a^2*c^4*x*z + a^2*c^4*y"
        " + a^2*c^3*d*z + 3*a^2*c^2*x*z + a^2*c^2*y*z^2 - 3*a^2*c^2*y - 2*a^2*c*d*z"
        " - a^2*x*z - a^2*y + a*b*c^4*z - 3*a*b*c^2*z + a*b*z + a*c^5*x - a*c^4*d"
        " - 5*a*c^3*x - a*c^3*y*z + 4*a*c^2*d + 5*a*c*x + 2*a*c*y*z - 2*a*d + y",
        "d": "-a^3*b*c^3 + a^3*b*c + a^3*c^2*y + a^2*b*c^4*z - a^2*b*c^2*z + a^2*c^3*x"
        " - a^2*c^3*y*z - a^2*c^2*d - 2*a^2*c*x + a^2*d - a*b*c^5 - a*b*c^3*z^2"
        " + 3*a*b*c^3 + a*b*c*z^2 - a*b*c - a*c^4*x*z + a*c^4*y + a*c^3*d*z"
        " + 3*a*c^2*x*z + a*c^2*y*z^2 - 2*a*c^2*y - 2*a*c*d*z - a*x*z - a*y + b*c^4*z"
        " - 2*b*c^2*z + b*z + c^5*x - c^4*d - 4*c^3*x - c^3*y*z + 3*c^2*d + 3*c*x"
        " + c*y*z - d",
    },
}

_K_TEXT = {
    "N22": "(a*b*d - a*z - b*y + c)",
    "N13": "(a*d - y)",
    "N31": "(a*b*c*d - b*c*y - a*c*z - a*b*x + a^2 + b^2 + c^2 - 2)",
}


@lru_cache(maxsize=None)
def printed_polynomials(surface: str, twist: str) -> dict[str, TracePolynomial]:
    """The printed component formulas as polynomials (k replaced by its
    boundary polynomial)."""
    _check(surface, twist)
    out = {}
    for name, text in PRINTED_MAPS[(surface, twist)].items():
        out[name] = TracePolynomial.from_str(text.replace("k", _K_TEXT[surface]))
    return out


def printed_deviation(surface: str, twist: str, pts) -> dict[str, float]:
    """Max |printed - closed form| per printed component over ``pts``."""
    arr = _as_array(pts)
    img = apply_twist(surface, twist, arr)
    return {
        name: float(np.max(np.abs(eval_poly(p, arr) - img[..., VARS.index(name)])))
        for name, p in printed_polynomials(surface, twist).items()
    }


# --------------------------------------------------------------------------
# ellipse normal forms


def rotation_matrix(surface: str, twist: str, nu):
    """Linear part of the twist on its moving plane, as ``(2, 2, ...)``."""
    _check(surface, twist)
    nu = np.asarray(nu)
    if nu.dtype != np.longdouble:
        nu = nu.astype(float)
    one = np.ones_like(nu)
    if (surface, twist) in (("N13", "U"), ("N22", "U")):
        rows = [[nu * nu - 1, nu], [-nu, -one]]
    else:
        rows = [[-one, -nu], [nu, nu * nu - 1]]
    return np.array(rows)


# matrices in the form they are printed, for the record
PRINTED_MATRICES: Mapping[tuple[str, str], Callable] = {
    ("N22", "U"): lambda u: np.array([[u * u - 1, u], [-u, -1.0]]),
    ("N13", "T"): lambda t: np.array([[-1.0, -t], [t, t * t - 1]]),
    ("N13", "U"): lambda u: np.array([[-1.0, -u], [u, u * u - 1]]),
    ("N13", "W"): lambda w: np.array([[-1.0, -w], [w, w * w - 1]]),
    ("N31", "U"): lambda u: np.array([[-1.0, -u], [u * u - 1, u]]),
}


def q_form(eta, zeta, nu):
    """``(eta^2 + zeta^2 - nu eta zeta) / (4 - nu^2)``."""
    return (eta * eta + zeta * zeta - nu * eta * zeta) / (4 - nu * nu)


@dataclass(frozen=True)
class EllipseForm:
    """Invariant ellipse of one twist through a point (or a batch of points).

    The moving plane has coordinates ``p = (pt[plane[0]] / scales[0],
    pt[plane[1]] / scales[1])``.  With ``G = [[1, nu/2], [nu/2, 1]]`` the
    points of the ellipse satisfy ``q_form(2 G (p - center)) = R``, i.e.
    ``(p - center)^T G (p - center) = R``.
    """

    surface: str
    twist: str
    nu: np.ndarray
    center: np.ndarray  # shape (2, ...)
    R: np.ndarray
    factors: tuple[np.ndarray, np.ndarray]
    plane: tuple[str, str]
    scales: tuple = field(default=(1.0, 1.0))

    def plane_coords(self, pt) -> np.ndarray:
        cols = _unpack(_as_array(pt).astype(np.longdouble))
        i, j = (VARS.index(n) for n in self.plane)
        return np.array([cols[i] / self.scales[0], cols[j] / self.scales[1]])

    def offset(self, pt) -> np.ndarray:
        """``p - center``; a single-point form broadcasts over a batch of points."""
        p = self.plane_coords(pt)
        c = self.center.reshape(self.center.shape + (1,) * (p.ndim - self.center.ndim))
        return p - c

    def quadric(self, pt):
        e, f = self.offset(pt)
        h = self.nu / 2
        return q_form(2 * (e + h * f), 2 * (h * e + f), self.nu)

    def residual(self, pt):
        return self.quadric(pt) - self.R

    @property
    def angle(self):
        """Unsigned rotation angle ``2 arccos(nu / 2)``."""
        return 2 * np.arccos(self.nu / 2)

    def _normalizer(self):
        h = self.nu / 2
        s1, s2 = np.sqrt((1 + h) / 2), np.sqrt((1 - h) / 2)
        return s1, s2

    def phase(self, pt):
        """Position on the ellipse as a fraction of a turn in ``[0, 1)``."""
        e, f = self.offset(pt)
        s1, s2 = self._normalizer()
        ph = np.arctan2(s2 * (e - f), s1 * (e + f)) / (2 * np.pi)
        return np.mod(ph.astype(float), 1.0)

    @property
    def rotation(self):
        """Signed rotation angle in the phase coordinate, in radians."""
        M = rotation_matrix(self.surface, self.twist, self.nu)
        s1, s2 = self._normalizer()
        # image of the phase-0 direction e = f, scaled to unit length
        e0 = 1 / (2 * s1)
        v = M[:, 0] * e0 + M[:, 1] * e0
        return np.arctan2(s2 * (v[0] - v[1]), s1 * (v[0] + v[1]))


def _nu_and_plane(surface, twist, a, b, c, x, y, z, d):
    if surface == "N13":
        k = a * d - y
        if twist == "T":
            nu = a * x - b
            P, Q = a * k + c * x, a * c + k * x
            f1 = (nu * nu + c * c + k * k - nu * c * k - 4)
            f2 = (a * a + b * b + x * x - a * b * x - 4)
            return nu, (P, Q), (f1, f2), 1.0, ("d", "z"), (1.0, 1.0)
        if twist == "U":
            nu = a * z - c
            P, Q = a * k + b * z, a * b + k * z
            f1 = (nu * nu + b * b + k * k - nu * b * k - 4)
            f2 = (a * a + c * c + z * z - a * c * z - 4)
            return nu, (P, Q), (f1, f2), 1.0, ("d", "x"), (1.0, 1.0)
        nu = x * z - k
        P, Q = b * x + c * z, b * z + c * x
        f1 = (x * x + z * z + k * k - x * z * k - 4)
        f2 = (b * b + c * c + nu * nu - b * c * nu - 4)
        return nu, (P, Q), (f1, f2), 1.0, ("a", "d"), (1.0, 1.0)
    raise AssertionError


def degenerate_mask(surface: str, twist: str, pts) -> np.ndarray:
    """True where ``ellipse_form`` would raise ``DegenerateEllipse``."""
    _check(surface, twist)
    a, b, c, x, y, z, d = _unpack(_as_array(pts))
    nu = _conserved_trace(surface, twist, a, b, c, x, y, z, d)
    bad = np.abs(nu) >= 2 - NU_MARGIN
    if surface == "N22":
        bad |= (np.abs(a) < DENOM_MIN) | (np.abs(b) < DENOM_MIN)
    elif surface == "N31":
        bad |= (np.abs(a) < DENOM_MIN) | (np.abs(b) < DENOM_MIN) | (np.abs(c) < DENOM_MIN)
    return np.asarray(bad)


def _conserved_trace(surface, twist, a, b, c, x, y, z, d):
    if surface == "N22":
        return b * y - c
    if surface == "N31":
        return a * c * z - a * a - c * c + 2
    k = a * d - y
    return {"T": a * x - b, "U": a * z - c, "W": x * z - k}[twist]


def conserved_trace(surface: str, twist: str, pt):
    """Trace of the twisting curve: t, u or w."""
    _check(surface, twist)
    return _conserved_trace(surface, twist, *_unpack(_as_array(pt)))


def ellipse_form(surface: str, twist: str, pt) -> EllipseForm:
    """Center, residual and plane of the twist's invariant ellipse through ``pt``.

    Raises ``DegenerateEllipse`` when the conserved trace is within 1e-6 of
    +-2 or a coordinate the form divides by is below 1e-8 in size.
    """
    _check(surface, twist)
    # extended precision: the centers divide by (4 - nu^2) and by a, b, c
    arr = _as_array(pt).astype(np.longdouble)
    bad = degenerate_mask(surface, twist, arr)
    if np.any(bad):
        raise DegenerateEllipse(
            f"{surface}.{twist}: {int(np.count_nonzero(bad))} point(s) with |nu| >= 2 - "
            f"{NU_MARGIN} or a vanishing denominator"
        )
    a, b, c, x, y, z, d = _unpack(arr)
    if surface == "N13":
        nu, (P, Q), (f1, f2), den, plane, scales = _nu_and_plane(
            surface, twist, a, b, c, x, y, z, d
        )
        center = np.array([2 * P - nu * Q, 2 * Q - nu * P]) / (4 - nu * nu)
    elif surface == "N22":
        k = _k_n22(a, b, c, x, y, z, d)
        nu = b * y - c
        D = (a * a * b * b - c * c + c * k + b * c * y) / (-2 * a * b)
        E1 = ((b * b - 2) * (b * y + k - c) + a * a * b * y) / (-2 * a * b)
        h = nu / 2
        center = -np.array([D - h * E1, E1 - h * D]) / (1 - h * h)
        f1 = b * b + c * c + y * y - b * c * y - 4
        s = a * a - 2
        f2 = s * s + nu * nu + k * k - s * nu * k - 4
        den = a * a
        plane, scales = ("x", "z"), (1.0, b)
    else:
        k = _k_n31(a, b, c, x, y, z, d)
        u = nu = a * c * z - a * a - c * c + 2
        a2, b2, c2 = a * a, b * b, c * c
        x0 = (
            -a2 * a2 * u + a2 * a * c * u * z - a2 * b2 * u - a2 * c2 * u + 2 * a2 * c2
            + a2 * k * u + 4 * a2 * u - 4 * a2 + a * b2 * c * u * z - 2 * a * b2 * c * z
            - 2 * a * c2 * c * z - 2 * a * c * u * z + 4 * a * c * z + 2 * b2 * c2
            + 2 * b2 * u - 4 * b2 + 2 * c2 * c2 - 2 * c2 * k + 2 * c2 * u - 8 * c2
            - 2 * k * u + 4 * k - 4 * u + 8
        ) / (a * b * c * (u * u - 4))
        y0 = (
            2 * a2 * a2 - 2 * a2 * a * c * z + 2 * a2 * b2 - a2 * c2 * u + 2 * a2 * c2
            - 2 * a2 * k + 2 * a2 * u - 8 * a2 + a * b2 * c * u * z - 2 * a * b2 * c * z
            + a * c2 * c * u * z - 2 * a * c * u * z + 4 * a * c * z - b2 * c2 * u
            + 2 * b2 * u - 4 * b2 - c2 * c2 * u + c2 * k * u + 4 * c2 * u - 4 * c2
            - 2 * k * u + 4 * k - 4 * u + 8
        ) / (a * b * c * (u * u - 4))
        center = np.array([x0, y0])
        f1 = a2 + c2 + z * z - a * c * z - 4
        s = b2 - 2
        f2 = s * s + u * u + k * k - s * u * k - 4
        den = b2
        plane, scales = ("x", "y"), (c, a)
    R = f1 * f2 / (den * (4 - nu * nu))
    return EllipseForm(surface, twist, np.asarray(nu), center, np.asarray(R),
                       (np.asarray(f1), np.asarray(f2)), plane, scales)


@dataclass(frozen=True)
class RotationReport:
    surface: str
    twist: str
    points: int
    max_prediction_error: float
    max_det_error: float
    max_trace_error: float
    max_eigen_error: float
    max_quadric_error: float
    min_R: float
    max_factor: float
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return (
            self.max_prediction_error < self.tol
            and self.max_det_error < 1e-12
            and self.max_trace_error < 1e-12
            and self.max_eigen_error < 1e-9
            and self.max_quadric_error < self.tol
            and self.min_R >= -1e-12
            and self.max_factor <= 1e-12
        )

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["passed"] = self.passed
        return out


def rotation_check(surface: str, twist: str, pt, tol: float = 1e-8) -> RotationReport:
    """Compare the twist with ``center + M(nu) (p - center)`` on its plane.

    Also checks ``det M = 1``, ``tr M = nu^2 - 2``, that the eigenvalues are
    ``exp(+-i 2 arccos(nu/2))``, the quadric identity, ``R >= 0`` and the sign
    of both Fricke-type factors of R.
    """
    arr = np.atleast_2d(_as_array(pt))
    form = ellipse_form(surface, twist, arr)
    p = form.plane_coords(arr)
    M = rotation_matrix(surface, twist, form.nu)
    pred = form.center + np.einsum("ij...,j...->i...", M, p - form.center)
    img = apply_twist(surface, twist, arr).astype(np.longdouble)
    i, j = (VARS.index(n) for n in form.plane)
    actual = np.array([img[..., i], img[..., j]])
    scale = np.array([np.broadcast_to(s, form.nu.shape) for s in form.scales])
    err = np.abs(pred * scale - actual)

    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    tr = M[0, 0] + M[1, 1]
    theta = 2 * np.arccos(form.nu / 2)
    mats = np.moveaxis(M, (0, 1), (-2, -1)).reshape(-1, 2, 2).astype(float)
    eig = np.sort_complex(np.linalg.eigvals(mats))
    th = theta.ravel().astype(float)
    want = np.sort_complex(np.stack([np.exp(1j * th), np.exp(-1j * th)], axis=-1))
    return RotationReport(
        surface,
        twist,
        points=int(np.size(form.nu)),
        max_prediction_error=float(err.max()),
        max_det_error=float(np.abs(det - 1).max()),
        max_trace_error=float(np.abs(tr - (form.nu ** 2 - 2)).max()),
        max_eigen_error=float(np.abs(eig - want).max()),
        max_quadric_error=float(np.abs(form.residual(arr)).max()),
        min_R=float(np.min(form.R)),
        max_factor=float(max(np.max(form.factors[0]), np.max(form.factors[1]))),
        tol=tol,
    )


# --------------------------------------------------------------------------
# orbits


@dataclass(frozen=True)
class Orbit:
    surface: str
    program: tuple[str, ...]
    points: np.ndarray  # (n + 1, 7)
    fricke: np.ndarray  # (n + 1,)

    def __len__(self):
        return len(self.points)

    def as_points(self) -> list[CharacterPoint]:
        return [CharacterPoint.from_array(p) for p in self.points]


def _fricke_scalar(a, b, c, x, y, z, d):
    return (
        a * a + b * b + c * c + d * d + x * x + y * y + z * z
        - ((a * b + c * d) * x + (b * c + d * a) * y + (c * a + b * d) * z)
        + x * y * z + a * b * c * d - 4
    )


def orbit(surface: str, program: Sequence[str], pt, n: int,
          guard: float = FRICKE_GUARD) -> Orbit:
    """Iterate twists: step ``i`` applies ``program[i % len(program)]``.

    Returns all ``n + 1`` points including the start.  Raises ``OrbitBlowUp``
    if the Fricke residual of any point leaves ``guard``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    program = tuple(program)
    if not program and n > 0:
        raise ValueError("empty twist program")
    for name in set(program):
        _check(surface, name)
    maps = [_CLOSED[(surface, name)] for name in program]
    cur = tuple(float(v) for v in _as_array(pt).reshape(7))
    pts = np.empty((n + 1, 7))
    fr = np.empty(n + 1)
    pts[0] = cur
    fr[0] = _fricke_scalar(*cur)
    m = len(maps)
    for i in range(1, n + 1):
        cur = maps[(i - 1) % m](*cur)
        r = _fricke_scalar(*cur)
        if not abs(r) <= guard:
            raise OrbitBlowUp(
                f"Fricke residual {r:.3e} exceeds {guard:g} at step {i} "
                f"(twist {program[(i - 1) % m]}, point {cur})"
            )
        pts[i] = cur
        fr[i] = r
    return Orbit(surface, program, pts, fr)


def random_program(rng: np.random.Generator, twists: Sequence[str], n: int) -> tuple[str, ...]:
    """An i.i.d. uniform sequence of ``n`` twist names."""
    idx = rng.integers(len(twists), size=n)
    return tuple(twists[i] for i in idx)
