"""Finite-dimensional Euclidean Jordan algebras.

Four variants are supported, each acting on plain coordinate vectors:

``Diagonal(n)``
    R^n with the entrywise product.
``Spin(n)``
    The spin factor R^n (+) R, coordinates ``(v_1..v_n, lambda)``.
``SymMatrix(n)``
    Real symmetric n x n matrices with ``X o Y = (XY + YX)/2``; stored as the
    packed upper triangle, row-major, each off-diagonal entry stored once.
``DirectSum(summands)``
    Concatenation of the summands' coordinates in declaration order.

Every descriptor method accepts arrays of shape ``(..., dim)`` so the same
code path serves single elements and batches. The trace form is normalized
so that every primitive idempotent has trace one.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import ClassVar, Sequence

import numpy as np

from . import kernels
from .errors import AlgebraMismatch, InvalidDescriptor, InvalidElement
from .tolerances import TOL_IDEM


def working_dtype(x) -> type:
    """``np.longdouble`` for extended-precision input, ``np.float64`` otherwise."""
    return np.longdouble if np.asarray(x).dtype == np.longdouble else np.float64


def real_array(x) -> np.ndarray:
    """``x`` as a real array, keeping extended precision when present."""
    return np.asarray(x, dtype=working_dtype(x))


class AlgebraDescriptor:
    """Common interface of the algebra variants."""

    variant: ClassVar[str] = ""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def rank(self) -> int:
        raise NotImplementedError

    def unit_coords(self) -> np.ndarray:
        raise NotImplementedError

    def weights(self) -> np.ndarray:
        """Diagonal of the trace-form Gram matrix in coordinates."""
        raise NotImplementedError

    def product(self, x, y):
        raise NotImplementedError

    def quad(self, y, x):
        """``U_y x = 2 y o (y o x) - y^2 o x``."""
        yx = self.product(y, x)
        return 2.0 * self.product(y, yx) - self.product(self.product(y, y), x)

    def frame(self, x):
        """Jordan frame decomposition ``x = sum_k lam_k c_k``.

        Returns ``(lam, c)`` with ``lam`` of shape ``(..., rank)`` in
        ascending order and ``c`` of shape ``(..., rank, dim)`` holding
        pairwise orthogonal primitive idempotents summing to the unit.
        """
        raise NotImplementedError

    def eigvals(self, x):
        return self.frame(x)[0]

    def inner(self, x, y):
        return np.sum(self.weights() * np.asarray(x) * np.asarray(y), axis=-1)

    def trace(self, x):
        return self.inner(x, self.unit_coords())

    def simple_summands(self) -> tuple["AlgebraDescriptor", ...]:
        return (self,)

    def to_json(self) -> dict:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.short_name()

    def short_name(self) -> str:
        raise NotImplementedError


def _check_n(name: str, n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidDescriptor(f"{name}: n must be an integer, got {n!r}")
    if n < 2:
        raise InvalidDescriptor(f"{name}: n must be >= 2, got {n}")
    return int(n)


@dataclass(frozen=True)
class Diagonal(AlgebraDescriptor):
    n: int
    variant: ClassVar[str] = "diagonal"

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n("Diagonal", self.n))

    @property
    def dim(self):
        return self.n

    @property
    def rank(self):
        return self.n

    def unit_coords(self):
        return np.ones(self.n)

    def weights(self):
        return np.ones(self.n)

    def product(self, x, y):
        return np.asarray(x) * np.asarray(y)

    def quad(self, y, x):
        y = np.asarray(y)
        return y * y * np.asarray(x)

    def frame(self, x):
        x = real_array(x)
        order = np.argsort(x, axis=-1, kind="stable")
        lam = np.take_along_axis(x, order, axis=-1)
        return lam, np.eye(self.n)[order]

    def eigvals(self, x):
        return np.sort(real_array(x), axis=-1)

    def to_json(self):
        return {"variant": "diagonal", "n": self.n}

    def short_name(self):
        return f"diag{self.n}"


@dataclass(frozen=True)
class Spin(AlgebraDescriptor):
    """Spin factor over R^n; total dimension n + 1."""

    n: int
    variant: ClassVar[str] = "spin"

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n("Spin", self.n))

    @property
    def dim(self):
        return self.n + 1

    @property
    def rank(self):
        return 2

    def unit_coords(self):
        e = np.zeros(self.n + 1)
        e[-1] = 1.0
        return e

    def weights(self):
        return np.full(self.n + 1, 2.0)

    def product(self, x, y):
        x = real_array(x)
        y = real_array(y)
        u, a = x[..., :-1], x[..., -1:]
        v, b = y[..., :-1], y[..., -1:]
        vec = b * u + a * v
        scal = np.sum(u * v, axis=-1, keepdims=True) + a * b
        return np.concatenate([vec, scal], axis=-1)

    def quad(self, y, x):
        """``U_y x`` through the Peirce decomposition of ``x`` relative to the frame of ``y``.

        With ``y = lam_- c_- + lam_+ c_+`` and ``x = a c_+ + b c_- + w``
        (``w`` in the Peirce 1/2 space), ``U_y x = lam_+^2 a c_+ + lam_-^2 b c_- +
        lam_+ lam_- w``. Unlike the product formula this never cancels.
        """
        lam, c = self.frame(y)
        lm, lp = lam[..., 0], lam[..., 1]
        d = 2.0 * c[..., 1, :-1]
        x = real_array(x)
        u, s = x[..., :-1], x[..., -1:]
        du = np.sum(d * u, axis=-1, keepdims=True)
        a, b = s + du, s - du
        w = u - du * d
        lp, lm = lp[..., None], lm[..., None]
        vec = 0.5 * (lp * lp * a - lm * lm * b) * d + lp * lm * w
        scal = 0.5 * (lp * lp * a + lm * lm * b)
        return np.concatenate([vec, scal], axis=-1)

    def frame(self, x):
        x = real_array(x)
        v, lam0 = x[..., :-1], x[..., -1]
        r = np.linalg.norm(v, axis=-1)
        safe = np.where(r > 0.0, r, 1.0)[..., None]
        d = np.where(r[..., None] > 0.0, v / safe, np.eye(self.n)[0])
        half = np.full(d.shape[:-1] + (1,), 0.5)
        c_minus = np.concatenate([-0.5 * d, half], axis=-1)
        c_plus = np.concatenate([0.5 * d, half], axis=-1)
        lam = np.stack([lam0 - r, lam0 + r], axis=-1)
        return lam, np.stack([c_minus, c_plus], axis=-2)

    def eigvals(self, x):
        x = real_array(x)
        r = np.linalg.norm(x[..., :-1], axis=-1)
        return np.stack([x[..., -1] - r, x[..., -1] + r], axis=-1)

    def to_json(self):
        return {"variant": "spin", "n": self.n}

    def short_name(self):
        return f"spin{self.n}"


@dataclass(frozen=True)
class SymMatrix(AlgebraDescriptor):
    """Real symmetric n x n matrices, packed upper triangle."""

    n: int
    variant: ClassVar[str] = "sym"

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n("SymMatrix", self.n))
        iu, ju = np.triu_indices(self.n)
        object.__setattr__(self, "_iu", iu)
        object.__setattr__(self, "_ju", ju)

    @property
    def dim(self):
        return self.n * (self.n + 1) // 2

    @property
    def rank(self):
        return self.n

    def unit_coords(self):
        return self.pack(np.eye(self.n))

    def weights(self):
        return np.where(self._iu == self._ju, 1.0, 2.0)

    def pack(self, m):
        m = real_array(m)
        return m[..., self._iu, self._ju]

    def unpack(self, x):
        x = real_array(x)
        m = np.zeros(x.shape[:-1] + (self.n, self.n), dtype=x.dtype)
        m[..., self._iu, self._ju] = x
        m[..., self._ju, self._iu] = x
        return m

    def product(self, x, y):
        a, b = self.unpack(x), self.unpack(y)
        ab = a @ b
        return self.pack(0.5 * (ab + np.swapaxes(ab, -1, -2)))

    def quad(self, y, x):
        a, b = self.unpack(y), self.unpack(x)
        aba = a @ b @ a
        return self.pack(0.5 * (aba + np.swapaxes(aba, -1, -2)))

    def frame(self, x):
        w, v = kernels.sym_eigh(self.unpack(x))
        # c_k = q_k q_k^T for eigenvector columns q_k
        vk = np.swapaxes(v, -1, -2)
        outer = vk[..., :, :, None] * vk[..., :, None, :]
        return w, outer[..., self._iu, self._ju]

    def eigvals(self, x):
        return kernels.sym_eigh(self.unpack(x))[0]

    def to_json(self):
        return {"variant": "sym", "n": self.n}

    def short_name(self):
        return f"sym{self.n}"


@dataclass(frozen=True)
class DirectSum(AlgebraDescriptor):
    summands: tuple
    variant: ClassVar[str] = "sum"
    offsets: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        summands = tuple(self.summands)
        if not summands:
            raise InvalidDescriptor("DirectSum needs at least one summand")
        for s in summands:
            if not isinstance(s, AlgebraDescriptor):
                raise InvalidDescriptor(f"not a descriptor: {s!r}")
        object.__setattr__(self, "summands", summands)
        offs = [0]
        for s in summands:
            offs.append(offs[-1] + s.dim)
        object.__setattr__(self, "offsets", tuple(offs))

    @property
    def dim(self):
        return self.offsets[-1]

    @property
    def rank(self):
        return sum(s.rank for s in self.summands)

    def block(self, x, i):
        return np.asarray(x)[..., self.offsets[i]:self.offsets[i + 1]]

    def _map(self, fn, *args):
        parts = []
        for i, s in enumerate(self.summands):
            parts.append(fn(s, *(self.block(a, i) for a in args)))
        return np.concatenate(parts, axis=-1)

    def unit_coords(self):
        return np.concatenate([s.unit_coords() for s in self.summands])

    def weights(self):
        return np.concatenate([s.weights() for s in self.summands])

    def product(self, x, y):
        return self._map(lambda s, a, b: s.product(a, b), x, y)

    def quad(self, y, x):
        return self._map(lambda s, a, b: s.quad(a, b), y, x)

    def frame(self, x):
        x = real_array(x)
        lams, frames = [], []
        for i, s in enumerate(self.summands):
            lam, c = s.frame(self.block(x, i))
            pad = np.zeros(c.shape[:-1] + (self.dim,), dtype=c.dtype)
            pad[..., self.offsets[i]:self.offsets[i + 1]] = c
            lams.append(lam)
            frames.append(pad)
        lam = np.concatenate(lams, axis=-1)
        c = np.concatenate(frames, axis=-2)
        order = np.argsort(lam, axis=-1, kind="stable")
        lam = np.take_along_axis(lam, order, axis=-1)
        c = np.take_along_axis(c, order[..., None], axis=-2)
        return lam, c

    def eigvals(self, x):
        parts = [s.eigvals(self.block(x, i)) for i, s in enumerate(self.summands)]
        return np.sort(np.concatenate(parts, axis=-1), axis=-1)

    def simple_summands(self):
        out = ()
        for s in self.summands:
            out += s.simple_summands()
        return out

    def to_json(self):
        return {
            "variant": "sum",
            "n": len(self.summands),
            "summands": [s.to_json() for s in self.summands],
        }

    def short_name(self):
        return "+".join(s.short_name() for s in self.summands)


_VARIANTS = {"diagonal": Diagonal, "spin": Spin, "sym": SymMatrix}
_SHORT = {"diag": Diagonal, "diagonal": Diagonal, "spin": Spin, "sym": SymMatrix}


def descriptor_from_json(obj) -> AlgebraDescriptor:
    if not isinstance(obj, dict) or "variant" not in obj:
        raise InvalidDescriptor(f"descriptor must be an object with 'variant': {obj!r}")
    variant = obj["variant"]
    if variant == "sum":
        return DirectSum(tuple(descriptor_from_json(s) for s in obj.get("summands", [])))
    if variant not in _VARIANTS:
        raise InvalidDescriptor(f"unknown variant {variant!r}")
    if "n" not in obj:
        raise InvalidDescriptor(f"variant {variant!r} needs 'n'")
    return _VARIANTS[variant](obj["n"])


def parse_algebra(text: str) -> AlgebraDescriptor:
    """Parse shorthand like ``sym3``, ``spin2`` or ``diag2+spin3``, or JSON."""
    text = text.strip()
    if text.startswith("{"):
        return descriptor_from_json(json.loads(text))
    parts = text.split("+")
    out = []
    for part in parts:
        m = re.fullmatch(r"([a-z]+)\(?(\d+)\)?", part.strip().lower())
        if not m or m.group(1) not in _SHORT:
            raise InvalidDescriptor(f"cannot parse algebra {part!r}")
        out.append(_SHORT[m.group(1)](int(m.group(2))))
    return out[0] if len(out) == 1 else DirectSum(tuple(out))


@dataclass(frozen=True, eq=False)
class Element:
    """A point (or a batch of points) of an algebra.

    ``coords`` has shape ``(dim,)`` for a single element or ``(..., dim)``
    for a batch; arithmetic broadcasts over the leading axes.
    """

    algebra: AlgebraDescriptor
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=working_dtype(self.coords))
        if c.ndim == 0 or c.shape[-1] != self.algebra.dim:
            raise InvalidElement(
                f"coords of shape {c.shape} do not match dimension {self.algebra.dim}"
            )
        if not np.all(np.isfinite(c)):
            raise InvalidElement("coords must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def batch_shape(self) -> tuple:
        return self.coords.shape[:-1]

    @property
    def is_batch(self) -> bool:
        return self.coords.ndim > 1

    def __len__(self):
        if not self.is_batch:
            raise TypeError("single element has no length")
        return self.coords.shape[0]

    def __getitem__(self, idx):
        if not self.is_batch:
            raise TypeError("single element is not indexable")
        return Element(self.algebra, self.coords[idx])

    def _wrap(self, c):
        return Element(self.algebra, c)

    def _other(self, other):
        if isinstance(other, Element):
            _same(self, other)
            return other.coords
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.coords + o)

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.coords - o)

    def __neg__(self):
        return self._wrap(-self.coords)

    def __mul__(self, s):
        if isinstance(s, Element):
            return NotImplemented
        s = np.asarray(s, dtype=float)
        if s.ndim:
            s = s[..., None]
        return self._wrap(self.coords * s)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / np.asarray(s, dtype=float))

    def __repr__(self):
        return f"Element({self.algebra.short_name()}, {np.array2string(self.coords, precision=6)})"

    def to_json(self) -> dict:
        return {"algebra": self.algebra.to_json(),
                "coords": self.coords.astype(np.float64).tolist()}

    @classmethod
    def from_json(cls, obj) -> "Element":
        if not isinstance(obj, dict) or "algebra" not in obj or "coords" not in obj:
            raise InvalidElement("element JSON needs 'algebra' and 'coords'")
        return cls(descriptor_from_json(obj["algebra"]), obj["coords"])


def _same(*els: Element) -> AlgebraDescriptor:
    alg = els[0].algebra
    for el in els[1:]:
        if el.algebra != alg:
            raise AlgebraMismatch(f"{alg} vs {el.algebra}")
    return alg


def element(algebra: AlgebraDescriptor, coords: Sequence[float]) -> Element:
    return Element(algebra, coords)


def unit(algebra: AlgebraDescriptor) -> Element:
    return Element(algebra, algebra.unit_coords())


def jordan_product(x: Element, y: Element) -> Element:
    alg = _same(x, y)
    return Element(alg, alg.product(x.coords, y.coords))


def triple_product(x: Element, y: Element, z: Element) -> Element:
    """``{x,y,z} = (x o y) o z + (z o y) o x - (x o z) o y``."""
    alg = _same(x, y, z)
    p = alg.product
    a, b, c = x.coords, y.coords, z.coords
    return Element(alg, p(p(a, b), c) + p(p(c, b), a) - p(p(a, c), b))


def quadratic_rep(y: Element, x: Element) -> Element:
    """``U_y x = {y, x, y}``."""
    alg = _same(y, x)
    return Element(alg, alg.quad(y.coords, x.coords))


def trace_inner_product(x: Element, y: Element):
    alg = _same(x, y)
    out = alg.inner(x.coords, y.coords)
    return float(out) if np.ndim(out) == 0 else out


def trace(x: Element):
    out = x.algebra.trace(x.coords)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Projection:
    """An idempotent element with its rank (its trace)."""

    element: Element
    rank: int
    is_atom: bool

    @classmethod
    def from_element(cls, x: Element, tol: float = TOL_IDEM) -> "Projection":
        if x.is_batch:
            raise InvalidElement("Projection wraps a single element")
        alg = x.algebra
        defect = alg.product(x.coords, x.coords) - x.coords
        err = float(np.max(np.abs(alg.eigvals(defect))))
        if err > tol:
            raise InvalidElement(f"not idempotent: ||p o p - p|| = {err:.3e}")
        rank = int(round(alg.trace(x.coords)))
        return cls(x, rank, rank == 1)

    @property
    def algebra(self):
        return self.element.algebra

    @property
    def coords(self):
        return self.element.coords

    def complement(self) -> "Projection":
        alg = self.algebra
        r = alg.rank - self.rank
        return Projection(Element(alg, alg.unit_coords() - self.coords), r, r == 1)

    def to_json(self) -> dict:
        return self.element.to_json()
