"""
Sparse integer polynomials in the seven trace coordinates.

Monomials are exponent 7-tuples over the variables ``a, b, c, x, y, z, d``
(in that order); coefficients are Python ints, so arithmetic is exact.
Internally each exponent vector is packed into one int, 8 bits per
variable, so multiplying monomials is a single integer addition.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

VARS = ("a", "b", "c", "x", "y", "z", "d")
NVARS = len(VARS)
_ZERO_EXP = (0,) * NVARS
_BITS = 8
_MASK = (1 << _BITS) - 1
_MAX_EXP = _MASK

Monomial = tuple[int, ...]


def _pack(m: Monomial) -> int:
    key = 0
    for i, e in enumerate(m):
        if not 0 <= e <= _MAX_EXP:
            raise OverflowError(f"exponent {e} outside [0, {_MAX_EXP}]")
        key |= e << (_BITS * i)
    return key


def _unpack(key: int) -> Monomial:
    return tuple((key >> (_BITS * i)) & _MASK for i in range(NVARS))


_NUMPY_PRODUCT_MIN = 4096


def _numpy_product(a: dict[int, int], b: dict[int, int]):
    """Vectorized product of packed term dicts, or None if int64 could overflow."""
    ca = np.fromiter(a.values(), dtype=object, count=len(a))
    cb = np.fromiter(b.values(), dtype=object, count=len(b))
    bound = max(abs(c) for c in a.values()) * max(abs(c) for c in b.values())
    if bound * min(len(a), len(b)) >= 2**62:
        return None
    if max(a) >= 2**62 or max(b) >= 2**62:
        return None
    ka = np.fromiter(a.keys(), dtype=np.int64, count=len(a))
    kb = np.fromiter(b.keys(), dtype=np.int64, count=len(b))
    keys = (ka[:, None] + kb[None, :]).ravel()
    coef = (ca.astype(np.int64)[:, None] * cb.astype(np.int64)[None, :]).ravel()
    uniq, inv = np.unique(keys, return_inverse=True)
    sums = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(sums, inv, coef)
    nz = sums != 0
    return dict(zip(uniq[nz].tolist(), sums[nz].tolist()))


class TracePolynomial:
    __slots__ = ("_t", "_compiled")

    def __init__(self, terms: Mapping[Monomial, int] | None = None):
        self._t: dict[int, int] = {}
        if terms:
            for m, c in terms.items():
                if len(m) != NVARS:
                    raise ValueError(f"monomial {m} must have {NVARS} exponents")
                if c:
                    k = _pack(tuple(m))
                    self._t[k] = self._t.get(k, 0) + int(c)
            self._t = {k: c for k, c in self._t.items() if c}
        self._compiled = None

    @property
    def terms(self) -> dict[Monomial, int]:
        return {_unpack(k): c for k, c in self._t.items()}

    @classmethod
    def constant(cls, c: int) -> "TracePolynomial":
        return cls._new({0: int(c)} if c else {})

    @classmethod
    def var(cls, name: str) -> "TracePolynomial":
        return cls._new({1 << (_BITS * VARS.index(name)): 1})

    @classmethod
    def from_str(cls, text: str) -> "TracePolynomial":
        """Parse an integer polynomial in a..d written with ``+ - * ^ **``."""
        import ast

        node = ast.parse(text.replace("^", "**"), mode="eval").body
        return _from_ast(node)

    @classmethod
    def _new(cls, packed: dict[int, int]) -> "TracePolynomial":
        p = cls.__new__(cls)
        p._t = packed
        p._compiled = None
        return p

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self._t)
        for m, c in other._t.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                del out[m]
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({m: -c for m, c in self._t.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return TracePolynomial()
            return self._new({m: c * other for m, c in self._t.items()})
        other = _coerce(other)
        a, b = self._t, other._t
        if len(a) < len(b):
            a, b = b, a
        if len(a) * len(b) >= _NUMPY_PRODUCT_MIN:
            out = _numpy_product(a, b)
            if out is not None:
                return self._new(out)
        out: dict[int, int] = {}
        get = out.get
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                m = m1 + m2
                out[m] = get(m, 0) + c1 * c2
        return self._new({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = TracePolynomial.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = TracePolynomial.constant(other)
        if not isinstance(other, TracePolynomial):
            return NotImplemented
        return self._t == other._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def __len__(self):
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    @property
    def degree(self) -> int:
        return max((sum(_unpack(m)) for m in self._t), default=0)

    def l1_norm(self) -> int:
        return sum(abs(c) for c in self._t.values())

    def substitute(self, images: Mapping[str, "TracePolynomial"]) -> "TracePolynomial":
        """Compose: replace each variable by a polynomial (missing ones kept)."""
        vals = [images.get(v, TracePolynomial.var(v)) for v in VARS]
        out = TracePolynomial()
        cache: dict[tuple[int, int], TracePolynomial] = {}
        for m, c in self.terms.items():
            term = TracePolynomial.constant(c)
            for i, e in enumerate(m):
                if e:
                    key = (i, e)
                    if key not in cache:
                        cache[key] = vals[i] ** e
                    term = term * cache[key]
            out = out + term
        return out

    def _compile(self):
        if self._compiled is None:
            mons = sorted(self.terms.items())
            exps = np.array([m for m, _ in mons], dtype=np.int64).reshape(-1, NVARS)
            coef = [c for _, c in mons]
            self._compiled = (exps, coef)
        return self._compiled

    def __call__(self, point, dtype=np.float64):
        return eval_poly(self, point, dtype=dtype)

    def sorted_terms(self):
        """Terms in graded order: total degree descending, then exponent
        vectors compared lexicographically in ``a, b, c, x, y, z, d`` order,
        descending."""
        return sorted(self.terms.items(), key=lambda mc: (sum(mc[0]), mc[0]), reverse=True)

    def __str__(self):
        if not self._t:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = [v if e == 1 else f"{v}^{e}" for v, e in zip(VARS, m) if e]
            mono = "*".join(factors)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"TracePolynomial({str(self)!r})"


def _coerce(p) -> TracePolynomial:
    if isinstance(p, TracePolynomial):
        return p
    if isinstance(p, int):
        return TracePolynomial.constant(p)
    raise TypeError(f"cannot use {type(p).__name__} as a polynomial")


def _from_ast(node) -> TracePolynomial:
    import ast

    if isinstance(node, ast.BinOp):
        left, right = _from_ast(node.left), node.right
        if isinstance(node.op, ast.Pow):
            if not (isinstance(right, ast.Constant) and isinstance(right.value, int)):
                raise ValueError("exponents must be integer literals")
            return left ** right.value
        r = _from_ast(right)
        if isinstance(node.op, ast.Add):
            return left + r
        if isinstance(node.op, ast.Sub):
            return left - r
        if isinstance(node.op, ast.Mult):
            return left * r
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        p = _from_ast(node.operand)
        return -p if isinstance(node.op, ast.USub) else p
    elif isinstance(node, ast.Constant) and isinstance(node.value, int):
        return TracePolynomial.constant(node.value)
    elif isinstance(node, ast.Name) and node.id in VARS:
        return TracePolynomial.var(node.id)
    raise ValueError(f"unsupported polynomial syntax: {ast.dump(node)}")


def as_columns(point) -> np.ndarray:
    """Coordinates as an array of shape ``(7, ...)``.

    Accepts a ``CharacterPoint``-like object with ``as_array()``, a mapping
    keyed by variable name, or an array whose last axis has length 7.
    """
    if hasattr(point, "as_array"):
        point = point.as_array()
    if isinstance(point, Mapping):
        return np.stack([np.asarray(point[v], dtype=float) for v in VARS])
    arr = np.asarray(point, dtype=float)
    if arr.shape[-1] != NVARS:
        raise ValueError(f"expected last axis of length {NVARS}, got {arr.shape}")
    return np.moveaxis(arr, -1, 0)


def eval_poly(p: TracePolynomial, point, dtype=np.float64):
    """Evaluate at one point or a batch (last axis = the 7 coordinates).

    Powers are tabulated once per variable; monomials are formed from the
    table and summed with the integer coefficients.  ``dtype=np.longdouble``
    gives extra headroom for high-degree polynomials.
    """
    cols = as_columns(point).astype(dtype)
    batch = cols.shape[1:]
    if p.is_zero():
        return np.zeros(batch, dtype=dtype)[()] if batch else dtype(0)
    exps, coef = p._compile()
    maxdeg = int(exps.max())
    flat = cols.reshape(NVARS, -1)
    powers = np.empty((NVARS, maxdeg + 1, flat.shape[1]), dtype=dtype)
    powers[:, 0] = 1
    for e in range(1, maxdeg + 1):
        powers[:, e] = powers[:, e - 1] * flat
    coef_arr = np.array(coef, dtype=object)
    if all(abs(c) < 2**52 for c in coef):
        coef_arr = coef_arr.astype(dtype)
    else:
        coef_arr = np.array([dtype(c) for c in coef], dtype=dtype)
    total = np.zeros(flat.shape[1], dtype=dtype)
    chunk = max(1, 2_000_000 // max(1, flat.shape[1]))
    for s in range(0, len(coef_arr), chunk):
        e = exps[s : s + chunk]
        mono = powers[0, e[:, 0]]
        for j in range(1, NVARS):
            mono = mono * powers[j, e[:, j]]
        total += coef_arr[s : s + chunk] @ mono
    out = total.reshape(batch)
    return out[()] if not batch else out
