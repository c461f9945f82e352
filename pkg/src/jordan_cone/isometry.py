"""Jordan isomorphisms, Hilbert-metric and variation-norm isometries.

Construction, application and verification of the structured maps, plus the
factorization engine that recovers ``(epsilon, J)`` from a black-box
variation isometry and ``(epsilon, y, J)`` from a black-box Hilbert-metric
isometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .algebra import (AlgebraDescriptor, Diagonal, DirectSum, Element, Spin, SymMatrix,
                      descriptor_from_json, real_array, working_dtype)
from .cone import Ray, _require_interior, hilbert_distance, log_ray, ray_of
from .dual import Functional
from .errors import (AlgebraMismatch, EvaluationBudgetExceeded, FactorizationFailed,
                     InvalidDescriptor, NotAnIsometry)
from .sampling import make_rng, sample_interior
from .spectral import exp_el, power

PROJECTIVITIES_ONLY = "ProjectivitiesOnly"
SEMIDIRECT_WITH_C2 = "SemidirectWithC2"

TOL_ORTH = 1e-9
TOL_FACTOR = 1e-6
TOL_LINEAR = 1e-7
TOL_PRESERVE = 1e-8
TOL_ROUND = 1e-6
FACTOR_SAMPLES = 1000


def _var(alg: AlgebraDescriptor, x):
    lam = alg.eigvals(x)
    return lam[..., -1] - lam[..., 0]


def _sup(alg: AlgebraDescriptor, x):
    return np.max(np.abs(alg.eigvals(x)), axis=-1)


# ---------------------------------------------------------------- Jordan isomorphisms


@dataclass(frozen=True, eq=False)
class JordanIsomorphism:
    """A Jordan isomorphism ``source -> target``.

    Exactly one representation is populated, according to the variant:

    * ``perm`` (Diagonal): ``(Jx)[perm[i]] = x[i]``, 0-based.
    * ``orth`` (Spin): ``(v, lam) -> (O v, lam)``.
    * ``orth`` (SymMatrix): ``X -> O X O^T``.
    * ``summand_map`` and ``components`` (DirectSum): summand ``i`` of the
      source goes to summand ``summand_map[i]`` of the target through
      ``components[i]``.
    """

    source: AlgebraDescriptor
    target: AlgebraDescriptor
    perm: Optional[tuple] = None
    orth: Optional[np.ndarray] = None
    summand_map: Optional[tuple] = None
    components: Optional[tuple] = None

    # constructors -------------------------------------------------------

    @classmethod
    def identity(cls, algebra: AlgebraDescriptor) -> "JordanIsomorphism":
        if isinstance(algebra, DirectSum):
            comps = tuple(cls.identity(s) for s in algebra.summands)
            return cls.direct_sum(algebra, algebra, tuple(range(len(comps))), comps)
        if isinstance(algebra, Diagonal):
            return cls.permutation(algebra, tuple(range(algebra.n)))
        return cls.orthogonal(algebra, np.eye(algebra.n))

    @classmethod
    def permutation(cls, algebra: Diagonal, perm) -> "JordanIsomorphism":
        if not isinstance(algebra, Diagonal):
            raise InvalidDescriptor("permutations act on Diagonal algebras")
        perm = tuple(int(i) for i in perm)
        if sorted(perm) != list(range(algebra.n)):
            raise InvalidDescriptor(f"{perm} is not a permutation of 0..{algebra.n - 1}")
        return cls(algebra, algebra, perm=perm)

    @classmethod
    def orthogonal(cls, algebra, orth) -> "JordanIsomorphism":
        if not isinstance(algebra, (Spin, SymMatrix)):
            raise InvalidDescriptor("orthogonal actions need Spin or SymMatrix")
        o = np.array(orth, dtype=float)
        if o.shape != (algebra.n, algebra.n):
            raise InvalidDescriptor(f"orth must be {algebra.n}x{algebra.n}, got {o.shape}")
        if np.max(np.abs(o @ o.T - np.eye(algebra.n))) > TOL_ORTH:
            raise InvalidDescriptor("orth is not orthogonal")
        o.setflags(write=False)
        return cls(algebra, algebra, orth=o)

    @classmethod
    def direct_sum(cls, source: DirectSum, target: DirectSum, summand_map, components):
        if not isinstance(source, DirectSum) or not isinstance(target, DirectSum):
            raise InvalidDescriptor("direct_sum needs DirectSum source and target")
        smap = tuple(int(j) for j in summand_map)
        if sorted(smap) != list(range(len(target.summands))) or len(smap) != len(source.summands):
            raise InvalidDescriptor(f"summand_map {smap} is not a bijection")
        comps = tuple(components)
        for i, j in enumerate(smap):
            if source.summands[i] != target.summands[j]:
                raise InvalidDescriptor(f"summand {i} ({source.summands[i]}) cannot map to "
                                        f"summand {j} ({target.summands[j]})")
            if comps[i].source != source.summands[i] or comps[i].target != target.summands[j]:
                raise InvalidDescriptor(f"component {i} has the wrong algebras")
        return cls(source, target, summand_map=smap, components=comps)

    # action --------------------------------------------------------------

    def apply_coords(self, x):
        x = real_array(x)
        src = self.source
        if isinstance(src, DirectSum):
            parts = [None] * len(self.summand_map)
            for i, j in enumerate(self.summand_map):
                parts[j] = self.components[i].apply_coords(src.block(x, i))
            return np.concatenate(parts, axis=-1)
        if isinstance(src, Diagonal):
            inv = np.argsort(self.perm)
            return x[..., inv]
        o = self.orth.astype(x.dtype)
        if isinstance(src, Spin):
            v = np.einsum("ij,...j->...i", o, x[..., :-1])
            return np.concatenate([v, x[..., -1:]], axis=-1)
        m = src.unpack(x)
        return src.pack(o @ m @ o.T)

    def __call__(self, x: Element) -> Element:
        if x.algebra != self.source:
            raise AlgebraMismatch(f"J acts on {self.source}, got {x.algebra}")
        return Element(self.target, self.apply_coords(x.coords))

    def matrix(self) -> np.ndarray:
        """Coordinate matrix, shape ``(target.dim, source.dim)``."""
        return self.apply_coords(np.eye(self.source.dim)).T

    def inverse(self) -> "JordanIsomorphism":
        if isinstance(self.source, DirectSum):
            inv_map = [0] * len(self.summand_map)
            comps = [None] * len(self.summand_map)
            for i, j in enumerate(self.summand_map):
                inv_map[j] = i
                comps[j] = self.components[i].inverse()
            return JordanIsomorphism.direct_sum(self.target, self.source, tuple(inv_map), tuple(comps))
        if isinstance(self.source, Diagonal):
            return JordanIsomorphism.permutation(self.source, tuple(int(i) for i in np.argsort(self.perm)))
        return JordanIsomorphism.orthogonal(self.source, self.orth.T)

    def compose(self, other: "JordanIsomorphism") -> "JordanIsomorphism":
        """``self o other``."""
        if other.target != self.source:
            raise AlgebraMismatch("cannot compose: algebras do not chain")
        if isinstance(self.source, DirectSum):
            smap = tuple(self.summand_map[other.summand_map[i]] for i in range(len(other.summand_map)))
            comps = tuple(self.components[other.summand_map[i]].compose(other.components[i])
                          for i in range(len(other.summand_map)))
            return JordanIsomorphism.direct_sum(other.source, self.target, smap, comps)
        if isinstance(self.source, Diagonal):
            perm = tuple(self.perm[other.perm[i]] for i in range(self.source.n))
            return JordanIsomorphism.permutation(self.source, perm)
        return JordanIsomorphism.orthogonal(self.source, self.orth @ other.orth)

    # serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        out = {"variant": self.source.variant, "algebra": self.source.to_json()}
        if isinstance(self.source, DirectSum):
            out["target"] = self.target.to_json()
            out["summand_map"] = list(self.summand_map)
            out["components"] = [c.to_json() for c in self.components]
        elif isinstance(self.source, Diagonal):
            out["perm"] = list(self.perm)
        else:
            out["orth"] = self.orth.tolist()
        return out

    @classmethod
    def from_json(cls, obj) -> "JordanIsomorphism":
        if not isinstance(obj, dict) or "algebra" not in obj:
            raise InvalidDescriptor("jordan_iso JSON needs 'algebra'")
        alg = descriptor_from_json(obj["algebra"])
        if isinstance(alg, DirectSum):
            target = descriptor_from_json(obj.get("target", obj["algebra"]))
            comps = tuple(cls.from_json(c) for c in obj.get("components", []))
            return cls.direct_sum(alg, target, obj.get("summand_map", []), comps)
        if isinstance(alg, Diagonal):
            if "perm" not in obj:
                raise InvalidDescriptor("diagonal jordan_iso needs 'perm'")
            return cls.permutation(alg, obj["perm"])
        if "orth" not in obj:
            raise InvalidDescriptor(f"{alg.variant} jordan_iso needs 'orth'")
        return cls.orthogonal(alg, obj["orth"])


def apply_jordan_iso(J: JordanIsomorphism, x: Element) -> Element:
    return J(x)


def jordan_iso_defect(J: JordanIsomorphism, samples: int = 100, seed: int = 0) -> tuple[float, float]:
    """``(||J e - e||, max ||J(x o y) - Jx o Jy||)`` over random pairs."""
    rng = make_rng(seed)
    a, b = J.source, J.target
    unit_err = float(_sup(b, J.apply_coords(a.unit_coords()) - b.unit_coords()))
    x = rng.standard_normal((samples, a.dim))
    y = rng.standard_normal((samples, a.dim))
    lhs = J.apply_coords(a.product(x, y))
    rhs = b.product(J.apply_coords(x), J.apply_coords(y))
    scale = 1.0 + _sup(a, x) * _sup(a, y)
    hom_err = float(np.max(_sup(b, lhs - rhs) / scale))
    return unit_err, hom_err


def verify_jordan_iso(J: JordanIsomorphism, samples: int = 100, seed: int = 0) -> bool:
    """Unit preservation within 1e-12 and multiplicativity within 1e-9."""
    unit_err, hom_err = jordan_iso_defect(J, samples, seed)
    return unit_err <= 1e-12 and hom_err <= 1e-9


# ---------------------------------------------------------------- structured isometries


@dataclass(frozen=True, eq=False)
class HilbertIsometry:
    """The ray map ``x -> U_y J(x^epsilon)``."""

    epsilon: int
    y: Element
    J: JordanIsomorphism

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            raise ValueError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if self.y.algebra != self.J.target:
            raise AlgebraMismatch("y must live in the target algebra of J")
        _require_interior(self.y, "y")

    @property
    def source(self):
        return self.J.source

    @property
    def target(self):
        return self.J.target

    def __call__(self, r: Ray) -> Ray:
        return apply_hilbert_isometry(self, r)

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "y": self.y.to_json(), "J": self.J.to_json()}

    @classmethod
    def from_json(cls, obj) -> "HilbertIsometry":
        return cls(int(obj["epsilon"]), Element.from_json(obj["y"]),
                   JordanIsomorphism.from_json(obj["J"]))


def apply_hilbert_isometry(f: HilbertIsometry, r: Ray) -> Ray:
    """``ray(U_y J(x^epsilon))`` for the representative ``x`` of ``r``."""
    x = r.representative if isinstance(r, Ray) else r
    if x.algebra != f.source:
        raise AlgebraMismatch(f"isometry acts on {f.source}, got {x.algebra}")
    xe = power(x, f.epsilon)
    jx = f.J.apply_coords(xe.coords)
    out = f.target.quad(f.y.coords, jx)
    return ray_of(Element(f.target, out))


@dataclass(frozen=True, eq=False)
class VariationIsometry:
    """A linear map acting on quotient classes modulo the unit.

    Canonical form ``[x] -> epsilon [J x]`` when ``J`` is set; otherwise a
    black-box coordinate matrix.
    """

    source: AlgebraDescriptor
    target: AlgebraDescriptor
    epsilon: Optional[int] = None
    J: Optional[JordanIsomorphism] = None
    blackbox: Optional[np.ndarray] = None

    @classmethod
    def canonical(cls, epsilon: int, J: JordanIsomorphism) -> "VariationIsometry":
        if epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        return cls(J.source, J.target, epsilon=epsilon, J=J)

    @classmethod
    def from_matrix(cls, matrix, source: AlgebraDescriptor, target: AlgebraDescriptor):
        m = np.array(matrix, dtype=working_dtype(matrix))
        if m.shape != (target.dim, source.dim):
            raise InvalidDescriptor(f"matrix must be {target.dim}x{source.dim}, got {m.shape}")
        m.setflags(write=False)
        return cls(source, target, blackbox=m)

    @property
    def is_canonical(self) -> bool:
        return self.J is not None

    def matrix(self) -> np.ndarray:
        if self.is_canonical:
            return self.epsilon * self.J.matrix()
        return self.blackbox

    def apply_coords(self, x):
        if self.is_canonical:
            return self.epsilon * self.J.apply_coords(x)
        x = real_array(x)
        return np.einsum("ij,...j->...i", self.blackbox.astype(np.result_type(self.blackbox, x)), x)

    def __call__(self, x: Element) -> Element:
        if x.algebra != self.source:
            raise AlgebraMismatch(f"map acts on {self.source}, got {x.algebra}")
        return Element(self.target, self.apply_coords(x.coords))


@dataclass(frozen=True, eq=False)
class AffineVariationIsometry:
    """``T x = epsilon J x + phi(x) e``."""

    epsilon: int
    J: JordanIsomorphism
    phi: Functional

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        if self.phi.algebra != self.J.source:
            raise AlgebraMismatch("phi must act on the source algebra")

    @property
    def source(self):
        return self.J.source

    @property
    def target(self):
        return self.J.target

    def apply_coords(self, x):
        x = real_array(x)
        a = self.phi.representer.coords
        val = self.source.inner(a, x)
        return self.epsilon * self.J.apply_coords(x) + np.asarray(val)[..., None] * self.target.unit_coords()

    def __call__(self, x: Element) -> Element:
        return Element(self.target, self.apply_coords(x.coords))

    def matrix(self) -> np.ndarray:
        w = self.source.weights() * self.phi.representer.coords
        return self.epsilon * self.J.matrix() + np.outer(self.target.unit_coords(), w)

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "J": self.J.to_json(), "phi": self.phi.to_json()}

    @classmethod
    def from_json(cls, obj) -> "AffineVariationIsometry":
        return cls(int(obj["epsilon"]), JordanIsomorphism.from_json(obj["J"]),
                   Functional.from_json(obj["phi"]))


# ---------------------------------------------------------------- black boxes


class BlackBoxRayMap:
    """A ray map given as a callback, with an evaluation budget.

    ``fn`` receives a (possibly batched) Ray and returns a Ray; each ray in
    a batch counts as one evaluation.
    """

    def __init__(self, fn: Callable, source: AlgebraDescriptor, target: AlgebraDescriptor,
                 budget: Optional[int] = None):
        self.fn = fn
        self.source = source
        self.target = target
        self.budget = budget if budget is not None else target.dim ** 2 + 1000
        self.calls = 0

    def __call__(self, r: Ray) -> Ray:
        n = int(np.prod(r.representative.batch_shape)) if r.representative.is_batch else 1
        if self.calls + n > self.budget:
            raise EvaluationBudgetExceeded(f"budget of {self.budget} evaluations exceeded")
        self.calls += n
        out = self.fn(r)
        if not isinstance(out, Ray):
            out = ray_of(out)
        if out.algebra != self.target:
            raise AlgebraMismatch(f"black box returned {out.algebra}, expected {self.target}")
        return out


class BlackBoxLinearMap:
    """A linear map on coordinates given as a callback, with an evaluation budget."""

    def __init__(self, fn: Callable, source: AlgebraDescriptor, target: AlgebraDescriptor,
                 budget: Optional[int] = None):
        self.fn = fn
        self.source = source
        self.target = target
        self.budget = budget if budget is not None else source.dim ** 2 + 1000
        self.calls = 0

    def __call__(self, x):
        x = real_array(x)
        n = int(np.prod(x.shape[:-1])) if x.ndim > 1 else 1
        if self.calls + n > self.budget:
            raise EvaluationBudgetExceeded(f"budget of {self.budget} evaluations exceeded")
        self.calls += n
        return real_array(self.fn(x))

    def matrix(self) -> np.ndarray:
        cols = [self(np.eye(self.source.dim)[k]) for k in range(self.source.dim)]
        return np.stack(cols, axis=-1)


def _as_matrix(S, source, target) -> np.ndarray:
    if isinstance(S, (VariationIsometry, AffineVariationIsometry)):
        return S.matrix()
    if isinstance(S, BlackBoxLinearMap):
        return S.matrix()
    if callable(S):
        return BlackBoxLinearMap(S, source, target).matrix()
    m = real_array(S)
    if m.shape != (target.dim, source.dim):
        raise InvalidDescriptor(f"matrix must be {target.dim}x{source.dim}, got {m.shape}")
    return m


# ---------------------------------------------------------------- factorization


def _summands(alg):
    return alg.summands if isinstance(alg, DirectSum) else None


def _probe_atoms(alg) -> np.ndarray:
    """Atoms whose images determine a Jordan isomorphism on a simple algebra."""
    if isinstance(alg, Diagonal):
        return np.eye(alg.n)
    if isinstance(alg, Spin):
        out = np.zeros((alg.n, alg.dim))
        out[:, :alg.n] = 0.5 * np.eye(alg.n)
        out[:, -1] = 0.5
        return out
    if isinstance(alg, SymMatrix):
        mats = [np.outer(np.eye(alg.n)[i], np.eye(alg.n)[i]) for i in range(alg.n)]
        for j in range(1, alg.n):
            v = np.zeros(alg.n)
            v[0] = v[j] = 1.0
            mats.append(0.5 * np.outer(v, v))
        return alg.pack(np.array(mats))
    raise InvalidDescriptor(f"no probe atoms for {alg}")


def _round_projection(alg: AlgebraDescriptor, x) -> tuple[np.ndarray, int]:
    """Nearest projection to the class of ``x``.

    The representative is shifted to minimum eigenvalue 0, scaled to
    maximum eigenvalue 1, and thresholded at one half.
    """
    lam, c = alg.frame(x)
    spread = lam[-1] - lam[0]
    if spread <= TOL_ROUND:
        raise FactorizationFailed("image of an atom has a trivial class")
    t = (lam - lam[0]) / spread
    if np.max(np.minimum(t, 1.0 - t)) > TOL_ROUND:
        raise FactorizationFailed("image of an atom is not a projection class")
    keep = t > 0.5
    return np.sum(c[keep], axis=0), int(keep.sum())


def _polar(w: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(np.asarray(w, dtype=float))
    return u @ vt


def _assemble(a: AlgebraDescriptor, b: AlgebraDescriptor, theta: Callable) -> JordanIsomorphism:
    """Build ``J: a -> b`` from the atom correspondence ``theta`` (coords in ``a`` to coords in ``b``)."""
    if isinstance(a, DirectSum):
        if not isinstance(b, DirectSum) or len(a.summands) != len(b.summands):
            raise FactorizationFailed(f"{a} and {b} have different summand structure")
        smap, comps = [], []
        for i, s in enumerate(a.summands):
            def pad(u, i=i):
                full = np.zeros(a.dim)
                full[a.offsets[i]:a.offsets[i + 1]] = u
                return full
            img = theta(pad(_first_probe(s)))
            weight = [float(np.max(np.abs(b.block(img, j)))) for j in range(len(b.summands))]
            j = int(np.argmax(weight))
            if b.summands[j] != s or j in smap:
                raise FactorizationFailed(f"summand {i} ({s}) has no matching target summand")
            smap.append(j)

            def theta_i(u, i=i, j=j, pad=pad):
                return b.block(theta(pad(u)), j)
            comps.append(_assemble(s, b.summands[j], theta_i))
        return JordanIsomorphism.direct_sum(a, b, tuple(smap), tuple(comps))
    if a != b:
        raise FactorizationFailed(f"no Jordan isomorphism between {a} and {b} is representable")
    probes = _probe_atoms(a)
    images = np.array([theta(u) for u in probes], dtype=float)
    if isinstance(a, Diagonal):
        perm = tuple(int(i) for i in np.argmax(images, axis=-1))
        if sorted(perm) != list(range(a.n)):
            raise FactorizationFailed("atom images do not form a permutation")
        return JordanIsomorphism.permutation(a, perm)
    if isinstance(a, Spin):
        w = 2.0 * images[:, :-1].T
        return JordanIsomorphism.orthogonal(a, _polar(w))
    n = a.n
    mats = a.unpack(images)
    tops = np.linalg.eigh(mats)[1][..., -1]
    cols = [tops[0]]
    for j in range(1, n):
        b_vec = tops[n - 1 + j]
        s = np.dot(tops[0], b_vec) * np.dot(tops[j], b_vec)
        if abs(s) < 1e-3:
            raise FactorizationFailed("cannot fix relative signs of the frame images")
        cols.append(np.sign(s) * tops[j])
    return JordanIsomorphism.orthogonal(a, _polar(np.stack(cols, axis=-1)))


def _first_probe(alg):
    if isinstance(alg, DirectSum):
        full = np.zeros(alg.dim)
        full[alg.offsets[0]:alg.offsets[1]] = _first_probe(alg.summands[0])
        return full
    return _probe_atoms(alg)[0]


def _all_probes(alg) -> np.ndarray:
    if isinstance(alg, DirectSum):
        rows = []
        for i, s in enumerate(alg.summands):
            for u in _all_probes(s):
                full = np.zeros(alg.dim)
                full[alg.offsets[i]:alg.offsets[i + 1]] = u
                rows.append(full)
        return np.array(rows)
    return _probe_atoms(alg)


def _choose_sign(b: AlgebraDescriptor, ranks: list[int]) -> int:
    r = b.rank
    if r == 2:
        # both encodings are valid on rank-2 algebras; prefer +1
        return 1
    if all(k == 1 for k in ranks):
        return 1
    if all(k == r - 1 for k in ranks):
        return -1
    raise FactorizationFailed(f"atom images have inconsistent ranks {sorted(set(ranks))}")


def factorization_residual(m: np.ndarray, a: AlgebraDescriptor, b: AlgebraDescriptor, epsilon: int,
                           J: JordanIsomorphism, samples: int = FACTOR_SAMPLES, seed: int = 0) -> float:
    """``sup ||S[x] - epsilon [J x]||_v`` over a sampled test set."""
    x = make_rng(seed).standard_normal((samples, a.dim))
    sx = np.einsum("ij,...j->...i", m, x)
    return float(np.max(_var(b, sx - epsilon * J.apply_coords(x))))


def _precheck_variation(m, a, b, samples, seed):
    e_img = m @ a.unit_coords()
    if float(_var(b, e_img)) > TOL_PRESERVE * max(1.0, float(_sup(b, e_img))):
        raise NotAnIsometry("map does not send the unit into span(e)")
    x = make_rng(seed).standard_normal((samples, a.dim))
    vx = _var(a, x)
    vs = _var(b, np.einsum("ij,...j->...i", m, x))
    gap = float(np.max(np.abs(vs - vx) / np.maximum(1.0, vx)))
    if gap > TOL_PRESERVE:
        raise NotAnIsometry(f"variation seminorm not preserved (gap {gap:.3e})")


def factor_variation_isometry(S, algebra_a: AlgebraDescriptor, algebra_b: AlgebraDescriptor | None = None,
                              samples: int = FACTOR_SAMPLES, seed: int = 0,
                              force_sign: Optional[int] = None,
                              tol: float = TOL_FACTOR) -> tuple[int, JordanIsomorphism]:
    """Recover ``(epsilon, J)`` with ``S[x] = epsilon [J x]`` from a variation isometry.

    ``S`` may be a coordinate matrix, a callable (evaluated on the basis),
    or a VariationIsometry / AffineVariationIsometry. ``force_sign`` pins
    epsilon instead of inferring it; the result is still verified, so a sign
    that admits no encoding raises FactorizationFailed.
    """
    b = algebra_a if algebra_b is None else algebra_b
    a = algebra_a
    if a.dim != b.dim:
        raise NotAnIsometry(f"dimensions differ: {a.dim} vs {b.dim}")
    m = _as_matrix(S, a, b)
    _precheck_variation(m, a, b, samples, seed)
    if a.rank != b.rank:
        raise FactorizationFailed(f"ranks differ: {a.rank} vs {b.rank}")

    cache: dict = {}

    def rounded(u):
        key = u.tobytes()
        if key not in cache:
            cache[key] = _round_projection(b, m @ u)
        return cache[key]

    ranks = [rounded(u)[1] for u in _all_probes(a)]
    epsilon = _choose_sign(b, ranks) if force_sign is None else int(force_sign)
    e_b = b.unit_coords()

    def theta(u):
        q, k = rounded(u)
        img, rank = (q, k) if epsilon == 1 else (e_b - q, b.rank - k)
        if rank != 1:
            raise FactorizationFailed(f"sign {epsilon:+d} maps an atom to a rank-{rank} projection")
        return img

    try:
        J = _assemble(a, b, theta)
    except InvalidDescriptor as exc:
        raise FactorizationFailed(str(exc)) from exc
    res = factorization_residual(m, a, b, epsilon, J, samples, seed + 1)
    if not res <= tol:
        raise FactorizationFailed(f"reconstruction residual {res:.3e} exceeds {tol:.1e}")
    return epsilon, J


def _as_ray_map(f, source, target, budget=None) -> BlackBoxRayMap:
    if isinstance(f, BlackBoxRayMap):
        return f
    if isinstance(f, HilbertIsometry):
        return BlackBoxRayMap(f.__call__, f.source, f.target, budget)
    if source is None:
        raise ValueError("a callable ray map needs its source algebra")
    return BlackBoxRayMap(f, source, source if target is None else target, budget)


@dataclass
class _HilbertProbe:
    """Evaluations of a ray map shared by the precheck, the linear certificate and reconstruction."""

    fe: Ray
    rays: Ray
    images: Ray


def _probe_hilbert(f: BlackBoxRayMap, samples: int, seed: int, dtype) -> _HilbertProbe:
    a = f.source
    fe = f(ray_of(Element(a, a.unit_coords().astype(dtype))))
    rays = ray_of(sample_interior(a, make_rng(seed), samples, dtype=dtype))
    return _HilbertProbe(fe, rays, f(rays))


def _unitalizer(fe: Ray):
    """``z -> ray(U_{f(e)^{-1/2}} z)``."""
    h = power(fe.representative, -0.5)

    def g(z: Ray) -> Ray:
        rep = z.representative
        return ray_of(Element(rep.algebra, rep.algebra.quad(h.coords, rep.coords)))
    return g


def _cond(alg, x):
    lam = alg.eigvals(x)
    return lam[..., -1] / lam[..., 0]


def _rounding_allowance(x: Element):
    """``64 eps cond(x)``: forward error of metric quantities at a sampled image."""
    eps = float(np.finfo(x.coords.dtype).eps)
    return 64.0 * eps * _cond(x.algebra, x.coords)


def _hilbert_precheck(probe: _HilbertProbe, tol: float = TOL_PRESERVE):
    """Sampled d_H preservation on consecutive pairs, with a rounding allowance.

    Images are often badly conditioned, and rounding their coordinates
    perturbs d_H by about ``eps * cond``; the allowance absorbs exactly that.
    """
    r, fr = probe.rays.representative, probe.images.representative
    d0 = np.asarray(hilbert_distance(r[:-1], r[1:]))
    d1 = np.asarray(hilbert_distance(fr[:-1], fr[1:]))
    slack = _rounding_allowance(fr)
    allowance = tol + slack[:-1] + slack[1:]
    if np.any(np.abs(d1 - d0) > allowance):
        worst = float(np.max(np.abs(d1 - d0)))
        raise NotAnIsometry(f"Hilbert metric not preserved (gap {worst:.3e})")


def _variation_from_probe(f: BlackBoxRayMap, probe: _HilbertProbe, dtype) -> np.ndarray:
    a, b = f.source, f.target
    g = _unitalizer(probe.fe)
    basis = Element(a, np.eye(a.dim, dtype=dtype))
    cols = log_ray(g(f(ray_of(exp_el(basis))))).coords
    m = np.array(cols.T)
    # certificate: the columns must reproduce log o g o exp on the samples
    lhs = log_ray(g(probe.images)).coords
    q = log_ray(probe.rays).coords
    rhs = np.einsum("ij,...j->...i", m, q)
    allowance = TOL_LINEAR + _rounding_allowance(probe.images.representative)
    resid = _var(b, lhs - rhs)
    if np.any(resid > allowance):
        raise NotAnIsometry(f"log o g o exp is not linear (residual {float(np.max(resid)):.3e})")
    gap = np.abs(_var(b, rhs) - _var(a, q))
    if np.any(gap > allowance):
        raise NotAnIsometry(f"variation seminorm not preserved (gap {float(np.max(gap)):.3e})")
    return m


def variation_isometry_from_hilbert(f, source: AlgebraDescriptor | None = None,
                                    target: AlgebraDescriptor | None = None,
                                    samples: int = FACTOR_SAMPLES, seed: int = 0,
                                    dtype=np.float64) -> VariationIsometry:
    """The linear map ``S = log o g o exp`` with ``g = U_{f(e)^{-1/2}} o f``, as a black box.

    Columns come from evaluating ``f`` on ``exp`` of the coordinate basis;
    linearity and variation preservation are certified on sampled rays.
    """
    f = _as_ray_map(f, source, target)
    probe = _probe_hilbert(f, samples, seed, dtype)
    m = _variation_from_probe(f, probe, dtype)
    return VariationIsometry.from_matrix(m, f.source, f.target)


def ray_distance(r1: Ray, r2: Ray):
    """Order-unit distance between normalized representatives."""
    x, y = r1.representative, r2.representative
    out = _sup(x.algebra, x.coords - y.coords)
    return float(out) if np.ndim(out) == 0 else out


def factor_hilbert_isometry(f, source: AlgebraDescriptor | None = None,
                            target: AlgebraDescriptor | None = None,
                            samples: int = FACTOR_SAMPLES, seed: int = 0, dtype=np.float64,
                            tol: float = TOL_FACTOR) -> HilbertIsometry:
    """Recover ``(epsilon, y, J)`` from a black-box Hilbert-metric isometry.

    Uses ``1 + dim + samples`` evaluations of ``f``: the unit, the
    exponentiated coordinate basis, and the sampled rays (reused for the
    isometry precheck, the linearity certificate and reconstruction).
    """
    f = _as_ray_map(f, source, target)
    probe = _probe_hilbert(f, samples, seed, dtype)
    _hilbert_precheck(probe)
    m = _variation_from_probe(f, probe, dtype)
    epsilon, J = factor_variation_isometry(m, f.source, f.target, samples, seed)
    y = power(probe.fe.representative, 0.5)
    rec = HilbertIsometry(epsilon, y, J)
    dist = float(np.max(ray_distance(rec(probe.rays), probe.images)))
    if not dist <= tol:
        raise FactorizationFailed(f"reconstruction differs by {dist:.3e}")
    return rec


def hamhalter_decompose(T, algebra_a: AlgebraDescriptor, algebra_b: AlgebraDescriptor | None = None,
                        samples: int = FACTOR_SAMPLES, seed: int = 0,
                        tol: float = TOL_LINEAR) -> AffineVariationIsometry:
    """Write a variation isometry ``T`` as ``x -> epsilon J x + phi(x) e``.

    ``phi(x)`` is the ``e``-coefficient of ``(T - epsilon J) x``; its
    representer solves ``W a = M^T W_b e / rank`` for the trace-form weights.
    """
    a = algebra_a
    b = algebra_a if algebra_b is None else algebra_b
    m = _as_matrix(T, a, b)
    epsilon, J = factor_variation_isometry(m, a, b, samples, seed)
    rest = m - epsilon * J.matrix()
    e_b = b.unit_coords()
    rep = rest.T @ (b.weights() * e_b) / (b.rank * a.weights())
    phi = Functional(Element(a, rep))
    out = AffineVariationIsometry(epsilon, J, phi)
    x = make_rng(seed + 2).standard_normal((samples, a.dim))
    resid = float(np.max(_sup(b, np.einsum("ij,...j->...i", m, x) - out.apply_coords(x))
                         / np.maximum(1.0, _sup(a, x))))
    if resid > tol:
        raise NotAnIsometry(f"T - epsilon J does not map into span(e) (residual {resid:.3e})")
    return out


def conjugated_projectivity(tau: HilbertIsometry) -> HilbertIsometry:
    """``iota o tau o iota`` for a projectivity ``tau = (+1, y, J)``: the projectivity ``(+1, y^{-1}, J)``."""
    if tau.epsilon != 1:
        raise ValueError("conjugated_projectivity needs epsilon = +1")
    return HilbertIsometry(1, power(tau.y, -1), tau.J)


# ---------------------------------------------------------------- isometry group


def classify_isometry_group(algebra: AlgebraDescriptor) -> str:
    """``ProjectivitiesOnly`` exactly on the rank-2 algebras (R^2 and the spin factors)."""
    return PROJECTIVITIES_ONLY if algebra.rank == 2 else SEMIDIRECT_WITH_C2


def _peirce_one_dim(alg: AlgebraDescriptor, p) -> int:
    """``dim U_p(A)`` as the numerical rank of ``U_p`` on the coordinate basis."""
    basis = np.eye(alg.dim)
    img = alg.quad(np.broadcast_to(p, basis.shape), basis)
    s = np.linalg.svd(img, compute_uv=False)
    return int(np.sum(s > 1e-9 * max(1.0, s[0])))


def has_atom_with_atomic_complement(algebra: AlgebraDescriptor, seed: int = 0) -> bool:
    """Whether some atom ``u`` has ``e - u`` also an atom, tested through ``dim U_p(A) = 1``.

    Every frame atom of a random element is tried, which covers each summand.
    """
    rng = make_rng(seed)
    _, c = algebra.frame(rng.standard_normal(algebra.dim))
    e = algebra.unit_coords()
    for u in c:
        if _peirce_one_dim(algebra, u) == 1 and _peirce_one_dim(algebra, e - u) == 1:
            return True
    return False
