"""The symmetric cone, its rays, and Hilbert's projective metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraDescriptor, Element, unit
from .errors import BoundaryError, NonPositive
from .spectral import eigenvalues, exp_el, log_el, power
from .tolerances import TOL_BOUNDARY, TOL_RAY


def in_cone_interior(x: Element):
    out = eigenvalues(x)[..., 0] > TOL_BOUNDARY
    return bool(out) if np.ndim(out) == 0 else out


def _require_interior(x: Element, name: str = "element"):
    lam_min = eigenvalues(x)[..., 0]
    if np.any(lam_min <= TOL_BOUNDARY):
        raise BoundaryError(f"{name} is not in the cone interior (min eigenvalue {np.min(lam_min):.3e})")


def _as_element(x) -> Element:
    return x.representative if isinstance(x, Ray) else x


def _gauge(x: Element, y_inv_sqrt: Element):
    alg = x.algebra
    z = alg.quad(y_inv_sqrt.coords, x.coords)
    return alg.eigvals(z)[..., -1]


def upper_gauge(x, y):
    """``M(x/y) = inf{beta > 0 : x <= beta y}`` for interior ``y``.

    Computed as the largest eigenvalue of ``U_{y^{-1/2}} x``.
    """
    x, y = _as_element(x), _as_element(y)
    _require_interior(y, "y")
    out = _gauge(x, power(y, -0.5))
    return float(out) if np.ndim(out) == 0 else out


def hilbert_distance(x, y):
    """``d_H(x, y) = log M(x/y) + log M(y/x)`` on the cone interior.

    Accepts elements or rays (single or batched). The two gauges are
    computed independently and summed, so the result is exactly symmetric.
    """
    x, y = _as_element(x), _as_element(y)
    _require_interior(x, "x")
    _require_interior(y, "y")
    mxy = _gauge(x, power(y, -0.5))
    myx = _gauge(y, power(x, -0.5))
    d = np.maximum(np.log(mxy) + np.log(myx), 0.0)
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True)
class Ray:
    """A ray of the open cone, normalized so ``<x, e> = <e, e>``."""

    representative: Element

    @property
    def algebra(self) -> AlgebraDescriptor:
        return self.representative.algebra

    def __getitem__(self, idx):
        return Ray(self.representative[idx])

    def __len__(self):
        return len(self.representative)

    def to_json(self) -> dict:
        return self.representative.to_json()


def ray_of(x: Element) -> Ray:
    alg = x.algebra
    tr = alg.trace(x.coords)
    if np.any(tr <= 0.0):
        raise NonPositive("element has non-positive trace")
    _require_interior(x)
    scale = alg.rank / np.asarray(tr)
    return Ray(x * scale)


def ray_equal(r1: Ray, r2: Ray, tol: float = TOL_RAY):
    lam = eigenvalues(r1.representative - r2.representative)
    out = np.max(np.abs(lam), axis=-1) <= tol
    return bool(out) if np.ndim(out) == 0 else out


def _trace_free(x: Element) -> Element:
    alg = x.algebra
    shift = alg.trace(x.coords) / alg.rank
    return Element(alg, x.coords - np.asarray(shift)[..., None] * alg.unit_coords())


def log_ray(r: Ray) -> Element:
    """The quotient class ``[log x]``, returned as its trace-free representative."""
    return _trace_free(log_el(r.representative))


def exp_class(q: Element) -> Ray:
    return ray_of(exp_el(q))


def inversion(r: Ray) -> Ray:
    return ray_of(power(r.representative, -1))


def _cone_span_residual(target, a, b, weights):
    """Relative residual of the best fit ``target ~ alpha a + beta b`` and the coefficients."""
    w = np.sqrt(weights)
    m = np.stack([a * w, b * w], axis=-1)
    t = target * w
    coef = np.einsum("...ij,...j->...i", np.linalg.pinv(m), t)
    fit = np.einsum("...ij,...j->...i", m, coef)
    res = np.linalg.norm(t - fit, axis=-1) / np.linalg.norm(t, axis=-1)
    return res, coef


def inversion_is_linear_up_to_scale(algebra: AlgebraDescriptor, samples: int = 16, seed: int = 0,
                                    tol: float = 1e-8) -> bool:
    """Empirically decide whether ``x -> x^{-1}`` is linear up to positive scalars.

    If ``x^{-1} = c(x) L x`` with ``L`` linear then ``(x+y)^{-1}`` lies in the
    cone spanned by ``x^{-1}`` and ``y^{-1}``; random interior pairs test this.
    On algebras of rank >= 3 the deterministic witness ``f`` with eigenvalues
    1, 2, 3 (for which ``(f+e)^{-1} = alpha f^{-1} + beta e`` has no solution)
    decides regardless of sampling.
    """
    if samples < 3:
        raise ValueError("samples must be >= 3")
    rng = np.random.default_rng(seed)
    wts = algebra.weights()
    x = exp_el(Element(algebra, rng.standard_normal((samples, algebra.dim))))
    y = exp_el(Element(algebra, rng.standard_normal((samples, algebra.dim))))
    ix, iy, ixy = power(x, -1), power(y, -1), power(x + y, -1)
    res, coef = _cone_span_residual(ixy.coords, ix.coords, iy.coords, wts)
    linear = bool(np.all(res <= tol) and np.all(coef > 0))

    if algebra.rank >= 3:
        _, c = algebra.frame(rng.standard_normal(algebra.dim))
        e = algebra.unit_coords()
        f = c[0] + 2.0 * c[1] + 3.0 * (e - c[0] - c[1])
        fe = Element(algebra, f)
        r_w, _ = _cone_span_residual(
            power(fe + unit(algebra), -1).coords, power(fe, -1).coords, e, wts
        )
        linear = linear and bool(r_w <= tol)
    return linear
