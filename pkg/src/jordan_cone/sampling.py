"""Seeded random generators for elements, projections and Jordan isomorphisms.

All sampling goes through ``numpy.random.Generator`` (PCG64). Property
streams are split from a master seed with :func:`derive_seed`, so the order
in which properties run never changes their samples.
"""

from __future__ import annotations

import zlib

import numpy as np

from .algebra import AlgebraDescriptor, DirectSum, Element, Projection, Spin, SymMatrix
from .spectral import exp_el

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, name: str) -> int:
    """Per-stream seed: ``master XOR crc32(name)``, kept in 64 bits."""
    return (int(master) ^ zlib.crc32(name.encode("utf-8"))) & _MASK64


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def _shape(algebra: AlgebraDescriptor, size) -> tuple:
    if size is None:
        return (algebra.dim,)
    if isinstance(size, int):
        return (size, algebra.dim)
    return tuple(size) + (algebra.dim,)


def sample_element(algebra: AlgebraDescriptor, rng: np.random.Generator, size=None,
                   dtype=np.float64) -> Element:
    """Coordinatewise standard-normal element(s)."""
    return Element(algebra, rng.standard_normal(_shape(algebra, size)).astype(dtype))


def sample_interior(algebra: AlgebraDescriptor, rng: np.random.Generator, size=None,
                    dtype=np.float64) -> Element:
    """``exp`` of a standard-normal element; always in the cone interior.

    ``dtype=np.longdouble`` draws the same normals but carries out the
    exponential, and everything downstream, in extended precision.
    """
    return exp_el(sample_element(algebra, rng, size, dtype))


def _projection_coords(algebra, rng, x):
    lam, c = algebra.frame(x)
    r = algebra.rank
    k = r // 2
    if r % 2 and rng.random() < 0.5:
        k += 1
    # the top-k eigenvalues lie above the median (the middle one joins on a coin flip)
    return np.sum(c[r - k:], axis=0), k


def sample_projection(algebra: AlgebraDescriptor, rng: np.random.Generator, size=None):
    """Nontrivial projection(s) from thresholding a random element at its median eigenvalue."""
    if size is None:
        x = rng.standard_normal(algebra.dim)
        coords, k = _projection_coords(algebra, rng, x)
        return Projection(Element(algebra, coords), k, k == 1)
    return [sample_projection(algebra, rng) for _ in range(int(size))]


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def sample_jordan_iso(algebra: AlgebraDescriptor, rng: np.random.Generator):
    """A random Jordan automorphism of ``algebra``.

    Permutations on the diagonal algebra, Haar-orthogonal factors for spin
    and symmetric-matrix algebras, and for direct sums a random permutation
    among isomorphic summands combined with random component automorphisms.
    """
    from .isometry import JordanIsomorphism

    if isinstance(algebra, DirectSum):
        summands = algebra.summands
        smap = list(range(len(summands)))
        groups: dict = {}
        for i, s in enumerate(summands):
            groups.setdefault(s, []).append(i)
        for idx in groups.values():
            shuffled = list(rng.permutation(idx))
            for i, j in zip(idx, shuffled):
                smap[i] = int(j)
        comps = tuple(sample_jordan_iso(s, rng) for s in summands)
        return JordanIsomorphism.direct_sum(algebra, algebra, tuple(smap), comps)
    if isinstance(algebra, (Spin, SymMatrix)):
        return JordanIsomorphism.orthogonal(algebra, random_orthogonal(algebra.n, rng))
    return JordanIsomorphism.permutation(algebra, tuple(int(i) for i in rng.permutation(algebra.n)))
