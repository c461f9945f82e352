"""Spectral decomposition, functional calculus and the three norms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import Element, Projection
from .errors import DomainError, InvalidElement
from .tolerances import TOL_BOUNDARY, TOL_CLUSTER


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues (ascending) with their spectral idempotents."""

    eigenvalues: np.ndarray
    idempotents: tuple

    def reconstruct(self) -> Element:
        alg = self.idempotents[0].algebra
        coords = sum(lam * p.coords for lam, p in zip(self.eigenvalues, self.idempotents))
        return Element(alg, coords)

    def to_json(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "idempotents": [p.element.to_json() for p in self.idempotents],
        }


def _single(x: Element, what: str):
    if x.is_batch:
        raise InvalidElement(f"{what} needs a single element, got batch {x.batch_shape}")


def eigenvalues(x: Element) -> np.ndarray:
    """Eigenvalues with multiplicity, ascending; works on batches."""
    return x.algebra.eigvals(x.coords)


def spectral_decomposition(x: Element) -> SpectralDecomposition:
    _single(x, "spectral_decomposition")
    alg = x.algebra
    lam, c = alg.frame(x.coords)
    tol = TOL_CLUSTER * max(1.0, float(np.max(np.abs(lam))))
    groups = [[0]]
    for k in range(1, len(lam)):
        if lam[k] - lam[groups[-1][-1]] <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    values, idems = [], []
    for g in groups:
        values.append(np.mean(lam[g]))
        p = Element(alg, np.sum(c[g], axis=0))
        idems.append(Projection(p, len(g), len(g) == 1))
    return SpectralDecomposition(np.array(values, dtype=lam.dtype), tuple(idems))


def spectrum(x: Element) -> np.ndarray:
    return spectral_decomposition(x).eigenvalues


def _apply(f: Callable, lam: np.ndarray) -> np.ndarray:
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(f(lam), dtype=lam.dtype)
        if vals.shape == lam.shape:
            return vals
    except (TypeError, ValueError):
        pass
    try:
        flat = [float(f(float(v))) for v in lam.ravel()]
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise DomainError(str(exc)) from exc
    return np.array(flat, dtype=lam.dtype).reshape(lam.shape)


def _calculus(x: Element, vals: np.ndarray, c: np.ndarray) -> Element:
    return Element(x.algebra, np.einsum("...k,...kd->...d", vals, c))


def functional_calculus(x: Element, f: Callable[[float], float]) -> Element:
    """``sum_i f(lam_i) c_i`` over the spectral decomposition of ``x``."""
    lam, c = x.algebra.frame(x.coords)
    vals = _apply(f, lam)
    if not np.all(np.isfinite(vals)):
        raise DomainError("function is undefined on part of the spectrum")
    return _calculus(x, vals, c)


def exp_el(x: Element) -> Element:
    lam, c = x.algebra.frame(x.coords)
    return _calculus(x, np.exp(lam), c)


def log_el(x: Element) -> Element:
    lam, c = x.algebra.frame(x.coords)
    if np.any(lam <= TOL_BOUNDARY):
        raise DomainError(f"log needs eigenvalues > {TOL_BOUNDARY}, min is {lam.min():.3e}")
    return _calculus(x, np.log(lam), c)


def power(x: Element, alpha: float) -> Element:
    lam, c = x.algebra.frame(x.coords)
    nonneg_int = float(alpha).is_integer() and alpha >= 0
    if not nonneg_int and np.any(lam <= TOL_BOUNDARY):
        raise DomainError(f"power {alpha} needs a positive spectrum, min is {lam.min():.3e}")
    return _calculus(x, lam ** float(alpha), c)


def inverse(x: Element) -> Element:
    lam, c = x.algebra.frame(x.coords)
    if np.any(np.abs(lam) <= TOL_BOUNDARY):
        raise DomainError("element is not invertible: 0 is in the spectrum")
    return _calculus(x, 1.0 / lam, c)


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def order_unit_norm(x: Element):
    """``max |lam|``, the JB-norm."""
    return _scalar(np.max(np.abs(eigenvalues(x)), axis=-1))


def variation_seminorm(x: Element):
    """Diameter of the spectrum."""
    lam = eigenvalues(x)
    return _scalar(lam[..., -1] - lam[..., 0])


def quotient_norm(x: Element):
    """``inf_mu ||x - mu e||`` in closed form ``(max sigma + max(-sigma)) / 2``."""
    lam = eigenvalues(x)
    return _scalar(0.5 * (lam[..., -1] + (-lam[..., 0])))


def classes_equal(a: Element, b: Element, tol: float = 1e-9):
    """Equality in the quotient by the span of the unit."""
    return variation_seminorm(a - b) <= tol
