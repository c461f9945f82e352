"""Independent brute-force oracles used by the property suites and tests.

None of these share code paths with the closed forms they check.
"""

from __future__ import annotations

import itertools

import numpy as np

from .algebra import Diagonal, Element

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def quotient_norm_bruteforce(x: Element, iters: int = 120) -> np.ndarray:
    """``min_mu ||x - mu e||`` by golden-section search, batched over ``x``.

    Each step evaluates the order-unit norm of the shifted element through
    a fresh eigenvalue computation.
    """
    alg = x.algebra
    coords = np.atleast_2d(x.coords)
    e = alg.unit_coords()

    def norm_at(mu):
        shifted = coords - mu[:, None] * e
        return np.max(np.abs(alg.eigvals(shifted)), axis=-1)

    bound = np.max(np.abs(alg.eigvals(coords)), axis=-1)
    lo, hi = -bound, bound.copy()
    for _ in range(iters):
        a = hi - _GOLDEN * (hi - lo)
        b = lo + _GOLDEN * (hi - lo)
        left = norm_at(a) < norm_at(b)
        hi = np.where(left, b, hi)
        lo = np.where(left, lo, a)
    out = norm_at(0.5 * (lo + hi))
    return out if x.is_batch else out[0]


def dual_norm_bruteforce(representer: np.ndarray) -> float:
    """``max phi(2p - e)`` over all ``2^n`` projections of ``Diagonal(n)``."""
    a = np.asarray(representer, dtype=float)
    best = -np.inf
    for bits in itertools.product((0.0, 1.0), repeat=len(a)):
        best = max(best, float(np.dot(a, 2.0 * np.array(bits) - 1.0)))
    return best


def dual_slice_vertices(n: int, tol: float = 1e-9) -> np.ndarray:
    """Vertices of ``{a : sum a = 0, sum |a_i| <= 2}`` in ``R^n`` by exhaustive enumeration.

    The polytope is cut out by the ``2^n`` inequalities ``s . a <= 2``
    (``s`` a sign vector) inside the hyperplane ``sum a = 0``. Every choice
    of ``n - 1`` inequalities made active, together with the hyperplane, is
    solved; feasible solutions are the vertices.
    """
    if n > 4:
        raise ValueError("vertex enumeration is limited to n <= 4")
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    found = []
    for rows in itertools.combinations(range(len(signs)), n - 1):
        m = np.vstack([signs[list(rows)], np.ones(n)])
        if abs(np.linalg.det(m)) < 1e-12:
            continue
        rhs = np.concatenate([np.full(n - 1, 2.0), [0.0]])
        v = np.linalg.solve(m, rhs)
        if np.max(signs @ v) <= 2.0 + tol:
            if not any(np.max(np.abs(v - w)) <= tol for w in found):
                found.append(v)
    return np.array(found)


def inversion_r2(x: np.ndarray) -> np.ndarray:
    """``(lam, mu) -> (lam mu)^{-1} (mu, lam)`` on the interior of the ``R^2`` cone."""
    x = np.asarray(x)
    lam, mu = x[..., 0], x[..., 1]
    return np.stack([mu, lam], axis=-1) / (lam * mu)[..., None]


def inversion_spin(x: np.ndarray) -> np.ndarray:
    """``(v, lam) -> (lam^2 - <v, v>)^{-1} (-v, lam)`` on the spin-factor cone."""
    x = np.asarray(x)
    v, lam = x[..., :-1], x[..., -1:]
    det = lam * lam - np.sum(v * v, axis=-1, keepdims=True)
    return np.concatenate([-v, lam], axis=-1) / det


def is_diagonal(alg) -> bool:
    return isinstance(alg, Diagonal)
