"""Property-suite runner: module invariants and acceptance criteria.

Each property draws from its own generator, seeded by
``derive_seed(master, property name + algebra name)``, so properties are
independent of execution order. Residuals are compared against documented
tolerances multiplied by ``tol_scale``; agreement checks count
disagreements against a tolerance of zero.

Metric-sensitive properties run in extended precision (``np.longdouble``)
by default: images ``U_y J x`` of sampled rays are conditioned up to
``~1e10``, which swamps the 1e-8 tolerances in double precision.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import (AlgebraDescriptor, Diagonal, DirectSum, Element, Projection, Spin, SymMatrix,
                      unit)
from .cone import (exp_class, hilbert_distance, inversion, inversion_is_linear_up_to_scale, log_ray,
                   ray_equal, ray_of)
from .dual import (FaceDescriptor, Functional, _support_coords, diameter_witness, dual_norm,
                   extreme_point_check, face_diameter_le_2, functionals_orthogonal, in_face,
                   maximal_face, norming_class_of_face, orthogonal_by_norm,
                   orthogonal_decomposition, sample_face_states, attains_norm_on_face)
from .errors import FactorizationFailed, NotAnIsometry, UnknownSuite, VerificationError
from .isometry import (AffineVariationIsometry, BlackBoxRayMap, HilbertIsometry, VariationIsometry,
                       _unitalizer, classify_isometry_group, conjugated_projectivity,
                       factor_hilbert_isometry, factor_variation_isometry, factorization_residual,
                       hamhalter_decompose, has_atom_with_atomic_complement, jordan_iso_defect,
                       ray_distance, variation_isometry_from_hilbert, PROJECTIVITIES_ONLY)
from .oracles import (dual_norm_bruteforce, dual_slice_vertices, inversion_r2, inversion_spin,
                      quotient_norm_bruteforce)
from .sampling import (derive_seed, make_rng, sample_element, sample_interior, sample_jordan_iso,
                       sample_projection)
from .spectral import exp_el, log_el, power
from .tolerances import TOL_RAY

PRECISIONS = {"double": np.float64, "extended": np.longdouble}


def default_algebras() -> list[AlgebraDescriptor]:
    return ([Diagonal(n) for n in range(2, 6)] + [Spin(n) for n in range(2, 5)]
            + [SymMatrix(n) for n in range(2, 5)]
            + [DirectSum((Diagonal(2), Spin(3))), DirectSum((SymMatrix(2), SymMatrix(2)))])


@dataclass
class PropertyRecord:
    name: str
    samples: int
    max_residual: float
    tolerance: float
    passed: bool
    worst_algebra: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "samples": self.samples, "max_residual": self.max_residual,
                "tolerance": self.tolerance, "pass": self.passed, "worst_algebra": self.worst_algebra}


@dataclass
class SuiteReport:
    suite: str
    seed: int
    records: list = field(default_factory=list)
    wall_time_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def to_json(self, include_time: bool = True) -> dict:
        out = {"suite": self.suite, "seed": self.seed, "pass": self.passed,
               "properties": [r.to_json() for r in self.records]}
        if include_time:
            out["wall_time_ms"] = self.wall_time_ms
        return out

    def dumps(self, include_time: bool = True) -> str:
        return json.dumps(self.to_json(include_time), indent=2)

    def summary(self) -> str:
        lines = []
        for r in self.records:
            mark = "PASS" if r.passed else "FAIL"
            where = f" [{r.worst_algebra}]" if r.worst_algebra else ""
            lines.append(f"{mark}  {r.name}: residual {r.max_residual:.3e} <= {r.tolerance:.1e}"
                         f" ({r.samples} samples){where}")
        n_fail = sum(not r.passed for r in self.records)
        lines.append(f"{self.suite}: {len(self.records) - n_fail}/{len(self.records)} properties pass"
                     f" in {self.wall_time_ms:.0f} ms")
        return "\n".join(lines)


class _Ctx:
    def __init__(self, algebras, samples, seed, tol_scale, dtype):
        self.algebras = list(algebras)
        self.samples = samples
        self.seed = int(seed)
        self.tol_scale = float(tol_scale)
        self.dtype = dtype

    def rng(self, name: str, alg: AlgebraDescriptor | None = None) -> np.random.Generator:
        key = name if alg is None else f"{name}/{alg.short_name()}"
        return make_rng(derive_seed(self.seed, key))

    def n(self, default: int) -> int:
        return default if self.samples is None else int(self.samples)


class _Acc:
    """Accumulates the worst residual of one property across algebras."""

    def __init__(self, ctx: _Ctx, name: str, tol: float):
        self.ctx, self.name, self.tol = ctx, name, tol
        self.samples, self.worst, self.where = 0, 0.0, ""

    def add(self, residual, samples: int, where: str = ""):
        residual = float(residual)
        self.samples += int(samples)
        if not residual <= self.worst:  # also catches nan
            self.worst, self.where = residual, where

    def record(self) -> PropertyRecord:
        tol = self.tol * self.ctx.tol_scale
        return PropertyRecord(self.name, self.samples, self.worst, tol,
                              bool(self.worst <= tol), self.where)


def _sup(alg, x):
    return np.max(np.abs(alg.eigvals(x)), axis=-1)


def _var(alg, x):
    lam = alg.eigvals(x)
    return lam[..., -1] - lam[..., 0]


def _rays(alg, rng, n, dtype):
    return ray_of(sample_interior(alg, rng, n, dtype=dtype))


def _random_hilbert(alg, rng, dtype, epsilon=None):
    J = sample_jordan_iso(alg, rng)
    eps = int(rng.choice([-1, 1])) if epsilon is None else epsilon
    return HilbertIsometry(eps, sample_interior(alg, rng, dtype=dtype), J)


# ---------------------------------------------------------------- algebra-core


def _p_jordan_identity(ctx):
    acc = _Acc(ctx, "algebra.jordan_identity", 1e-10)
    comm = _Acc(ctx, "algebra.commutativity", 1e-14)
    for alg in ctx.algebras:
        rng = ctx.rng("algebra.jordan_identity", alg)
        n = ctx.n(1000)
        x = rng.standard_normal((n, alg.dim))
        y = rng.standard_normal((n, alg.dim))
        p = alg.product
        x2 = p(x, x)
        lhs, rhs = p(x, p(y, x2)), p(p(x, y), x2)
        scale = 1.0 + _sup(alg, x) ** 3 * _sup(alg, y)
        acc.add(np.max(_sup(alg, lhs - rhs) / scale), n, alg.short_name())
        comm.add(np.max(np.abs(p(x, y) - p(y, x))), n, alg.short_name())
    return [acc.record(), comm.record()]


def _p_norm_axioms(ctx):
    acc = _Acc(ctx, "algebra.norm_axioms", 1e-9)
    for alg in ctx.algebras:
        rng = ctx.rng("algebra.norm_axioms", alg)
        n = ctx.n(1000)
        x = rng.standard_normal((n, alg.dim))
        y = rng.standard_normal((n, alg.dim))
        nx, ny = _sup(alg, x), _sup(alg, y)
        x2, y2 = alg.product(x, x), alg.product(y, y)
        r1 = np.maximum(0.0, _sup(alg, alg.product(x, y)) - nx * ny) / (1.0 + nx * ny)
        r2 = np.abs(_sup(alg, x2) - nx ** 2) / (1.0 + nx ** 2)
        r3 = np.maximum(0.0, _sup(alg, x2) - _sup(alg, x2 + y2)) / (1.0 + nx ** 2)
        acc.add(max(r1.max(), r2.max(), r3.max()), n, alg.short_name())
    return [acc.record()]


def _p_quadratic(ctx):
    auto = _Acc(ctx, "algebra.cone_automorphism", 0.0)
    fund = _Acc(ctx, "algebra.fundamental_identity", 1e-9)
    trip = _Acc(ctx, "algebra.triple_product", 1e-12)
    for alg in ctx.algebras:
        rng = ctx.rng("algebra.quadratic", alg)
        n = ctx.n(1000)
        y = sample_interior(alg, rng, n).coords
        x = sample_interior(alg, rng, n).coords
        auto.add(np.sum(alg.eigvals(alg.quad(y, x))[..., 0] <= 0.0), n, alg.short_name())
        a, b, c = (rng.standard_normal((n, alg.dim)) for _ in range(3))
        lhs = alg.quad(alg.quad(a, b), c)
        rhs = alg.quad(a, alg.quad(b, alg.quad(a, c)))
        fund.add(np.max(_sup(alg, lhs - rhs) / (1.0 + _sup(alg, rhs))), n, alg.short_name())
        e = np.broadcast_to(alg.unit_coords(), a.shape)
        p = alg.product

        def triple(u, v, w):
            return p(p(u, v), w) + p(p(w, v), u) - p(p(u, w), v)
        r = max(np.max(_sup(alg, triple(e, a, e) - a)),
                np.max(_sup(alg, triple(a, e, a) - p(a, a)) / (1.0 + _sup(alg, a) ** 2)))
        if isinstance(alg, SymMatrix):
            ma, mb = alg.unpack(a), alg.unpack(b)
            r = max(r, np.max(_sup(alg, triple(a, b, a) - alg.pack(ma @ mb @ ma))
                              / (1.0 + _sup(alg, a) ** 2 * _sup(alg, b))))
        trip.add(r, n, alg.short_name())
    return [auto.record(), fund.record(), trip.record()]


# ---------------------------------------------------------------- spectral


def _p_reconstruction(ctx):
    rec = _Acc(ctx, "spectral.reconstruction", 1e-8)
    frm = _Acc(ctx, "spectral.idempotents", 1e-9)
    for alg in ctx.algebras:
        rng = ctx.rng("spectral.reconstruction", alg)
        n = ctx.n(1000)
        x = rng.standard_normal((n, alg.dim))
        lam, c = alg.frame(x)
        back = np.einsum("...k,...kd->...d", lam, c)
        rec.add(np.max(_sup(alg, back - x) / (1.0 + _sup(alg, x))), n, alg.short_name())
        complete = _sup(alg, np.sum(c, axis=-2) - alg.unit_coords())
        worst = float(np.max(complete))
        for i, j in itertools.combinations(range(alg.rank), 2):
            worst = max(worst, float(np.max(_sup(alg, alg.product(c[:, i], c[:, j])))))
        frm.add(worst, n, alg.short_name())
    return [rec.record(), frm.record()]


def _p_norms(ctx):
    ident = _Acc(ctx, "spectral.quotient_closed_form", 1e-10)
    shift = _Acc(ctx, "spectral.variation_shift_invariance", 1e-12)
    dom = _Acc(ctx, "spectral.variation_le_twice_norm", 1e-12)
    for alg in ctx.algebras:
        rng = ctx.rng("spectral.norms", alg)
        n = ctx.n(1000)
        x = rng.standard_normal((n, alg.dim))
        lam = alg.eigvals(x)
        v = lam[..., -1] - lam[..., 0]
        q = 0.5 * (lam[..., -1] + (-lam[..., 0]))
        ident.add(np.max(np.abs(2 * q - v)), n, alg.short_name())
        mu = 10.0 * rng.standard_normal(n)
        vs = _var(alg, x + mu[:, None] * alg.unit_coords())
        shift.add(np.max(np.abs(vs - v) / (1.0 + np.abs(mu) + _sup(alg, x))), n, alg.short_name())
        dom.add(np.max(np.maximum(0.0, v - 2 * _sup(alg, x))), n, alg.short_name())
    return [ident.record(), shift.record(), dom.record()]


def _p_calculus(ctx):
    pw = _Acc(ctx, "spectral.power_spectrum", 1e-9)
    le = _Acc(ctx, "spectral.log_exp_roundtrip", 1e-8)
    for alg in ctx.algebras:
        rng = ctx.rng("spectral.calculus", alg)
        n = ctx.n(1000)
        x = sample_interior(alg, rng, n)
        lam = alg.eigvals(x.coords)
        worst = 0.0
        for a in (0.5, -1.0, 2.0, 1.0 / 3.0):
            got = alg.eigvals(power(x, a).coords)
            want = np.sort(lam ** a, axis=-1)
            worst = max(worst, float(np.max(np.abs(got - want) / np.max(np.abs(want), axis=-1, keepdims=True))))
        pw.add(worst, n, alg.short_name())
        z = sample_element(alg, rng, n)
        back = log_el(exp_el(z))
        le.add(np.max(_sup(alg, back.coords - z.coords)), n, alg.short_name())
    return [pw.record(), le.record()]


# ---------------------------------------------------------------- cone geometry


def _metric_axioms(ctx, prefix, count):
    sym = _Acc(ctx, f"{prefix}.symmetry", 0.0)
    neg = _Acc(ctx, f"{prefix}.nonnegativity", 0.0)
    ind = _Acc(ctx, f"{prefix}.indiscernibles", 0.0)
    tri = _Acc(ctx, f"{prefix}.triangle", 1e-9)
    for alg in ctx.algebras:
        rng = ctx.rng(prefix, alg)
        n = ctx.n(count)
        x, y, z = (_rays(alg, rng, n, ctx.dtype) for _ in range(3))
        dxy, dyx = hilbert_distance(x, y), hilbert_distance(y, x)
        dyz, dxz = hilbert_distance(y, z), hilbert_distance(x, z)
        sym.add(np.max(np.abs(dxy - dyx)), n, alg.short_name())
        neg.add(np.sum(np.concatenate([dxy, dyz, dxz]) < 0.0), n, alg.short_name())
        tri.add(np.max(np.maximum(0.0, dxz - dxy - dyz)), n, alg.short_name())
        # same ray through a rescaled representative, and distinct rays
        scale = np.exp(rng.standard_normal(n)).astype(ctx.dtype)
        x_scaled = ray_of(x.representative * scale)
        d_same = hilbert_distance(x, x_scaled)
        bad = np.sum((d_same <= TOL_RAY) != ray_equal(x, x_scaled))
        bad += np.sum((dxy <= TOL_RAY) != ray_equal(x, y))
        ind.add(bad, 2 * n, alg.short_name())
    return [sym.record(), neg.record(), ind.record(), tri.record()]


def _p_cone_invariance(ctx):
    proj = _Acc(ctx, "cone.projective_invariance", 1e-8)
    inv = _Acc(ctx, "cone.inversion_isometry", 1e-8)
    diag = _Acc(ctx, "cone.diagonal_closed_form", 1e-10)
    rt = _Acc(ctx, "cone.exp_log_roundtrip", TOL_RAY)
    for alg in ctx.algebras:
        rng = ctx.rng("cone.invariance", alg)
        n = ctx.n(1000)
        x, z, w = (sample_interior(alg, rng, n, dtype=ctx.dtype) for _ in range(3))
        d = np.asarray(hilbert_distance(x, z))
        ux = Element(alg, alg.quad(w.coords, x.coords))
        uz = Element(alg, alg.quad(w.coords, z.coords))
        proj.add(np.max(np.abs(hilbert_distance(ux, uz) - d)), n, alg.short_name())
        ix, iz = power(x, -1), power(z, -1)
        inv.add(np.max(np.abs(hilbert_distance(ix, iz) - d)), n, alg.short_name())
        if isinstance(alg, Diagonal):
            ratio = np.log(x.coords / z.coords)
            closed = np.max(ratio, axis=-1) - np.min(ratio, axis=-1)
            diag.add(np.max(np.abs(closed - d)), n, alg.short_name())
        r = ray_of(x)
        back = exp_class(log_ray(r))
        rt.add(np.max(ray_distance(back, r)), n, alg.short_name())
    return [proj.record(), inv.record(), diag.record(), rt.record()]


# ---------------------------------------------------------------- dual space


def _compress(alg, p, w):
    return alg.quad(np.broadcast_to(p, w.shape), w)


def _positive_tuples(alg, rng, n, dtype=np.float64):
    """Positive representers ``(phi, psi, rho)``; ``psi`` and ``rho`` each sit under ``p-perp`` half the time."""
    projs = np.array([sample_projection(alg, rng).coords for _ in range(n)])
    others = np.array([sample_projection(alg, rng).coords for _ in range(2 * n)])
    e = alg.unit_coords()
    w = [sample_interior(alg, rng, n).coords for _ in range(3)]
    phi = _compress(alg, projs, w[0])
    out = [phi]
    for k in range(2):
        under_perp = rng.random(n) < 0.5
        q = np.where(under_perp[:, None], e - projs, others[k * n:(k + 1) * n])
        out.append(_compress(alg, q, w[k + 1]))
    return out


def _p_dual_orthogonality(ctx, prefix="dual", count=1000):
    l24 = _Acc(ctx, f"{prefix}.support_of_sum", 1e-8)
    l26 = _Acc(ctx, f"{prefix}.orthogonal_to_sum", 0.0)
    eqv = _Acc(ctx, f"{prefix}.norm_vs_support_orthogonality", 0.0)
    for alg in ctx.algebras:
        rng = ctx.rng(prefix + ".orthogonality", alg)
        n = ctx.n(count)
        phi, psi, rho = _positive_tuples(alg, rng, n)
        s_phi, _ = _support_coords(alg, phi)
        s_psi, _ = _support_coords(alg, psi)
        s_sum, _ = _support_coords(alg, phi + psi)
        sup_join, _ = _support_coords(alg, s_phi + s_psi)
        r = max(np.max(_sup(alg, alg.product(s_phi, s_sum) - s_phi)),
                np.max(_sup(alg, s_sum - sup_join)))
        l24.add(r, n, alg.short_name())
        f = [Functional(Element(alg, a)) for a in (phi, psi, rho, psi + rho)]
        o_psi = functionals_orthogonal(f[0], f[1])
        o_rho = functionals_orthogonal(f[0], f[2])
        o_sum = functionals_orthogonal(f[0], f[3])
        l26.add(np.sum((o_psi & o_rho) != o_sum), n, alg.short_name())
        bad = 0
        for g, o in ((f[1], o_psi), (f[2], o_rho), (f[3], o_sum)):
            bad += int(np.sum(orthogonal_by_norm(f[0], g) != o))
        eqv.add(bad, 3 * n, alg.short_name())
    return [l24.record(), l26.record(), eqv.record()]


def _p_dual_structure(ctx):
    uniq = _Acc(ctx, "dual.decomposition_uniqueness", 1e-8)
    hyp = _Acc(ctx, "dual.hyperplane_characterization", 0.0)
    supp = _Acc(ctx, "dual.support_minimality", 1e-9)
    orc = _Acc(ctx, "dual.norm_oracle", 1e-12)
    conv = _Acc(ctx, "dual.face_convexity", 0.0)
    for alg in ctx.algebras:
        rng = ctx.rng("dual.structure", alg)
        n = ctx.n(200)
        e = alg.unit_coords()
        projs = np.array([sample_projection(alg, rng).coords for _ in range(n)])
        b = _compress(alg, projs, sample_interior(alg, rng, n).coords)
        c = _compress(alg, e - projs, sample_interior(alg, rng, n).coords)
        plus, minus = orthogonal_decomposition(Functional(Element(alg, b - c)))
        scale = 1.0 + _sup(alg, b) + _sup(alg, c)
        r = np.maximum(_sup(alg, plus.representer.coords - b), _sup(alg, minus.representer.coords - c))
        uniq.add(np.max(r / scale), n, alg.short_name())
        # phi(e) = 0 iff ||phi+|| = ||phi-||
        a = rng.standard_normal((n, alg.dim))
        a_free = a - (alg.trace(a) / alg.rank)[:, None] * e
        bad = 0
        for rep, want in ((a_free, True), (a_free + 0.5 * e, False)):
            p_, m_ = orthogonal_decomposition(Functional(Element(alg, rep)))
            eq = np.abs(np.asarray(dual_norm(p_)) - dual_norm(m_)) <= 1e-9
            bad += int(np.sum(eq != want))
        hyp.add(bad, 2 * n, alg.short_name())
        # support: attains the norm, and dropping any spectral block loses it
        worst = 0.0
        pos = sample_interior(alg, rng, n).coords
        pos = _compress(alg, projs, pos)
        s, _ = _support_coords(alg, pos)
        norms = np.sum(np.abs(alg.eigvals(pos)), axis=-1)
        worst = max(worst, float(np.max(np.abs(alg.inner(pos, s) - norms) / (1.0 + norms))))
        lam, cc = alg.frame(pos)
        keep = lam > 1e-12 * np.maximum(1.0, lam[..., -1:])
        for k in range(alg.rank):
            drop = s - cc[:, k]
            loss = norms - alg.inner(pos, drop)
            # dropping a kept block must lose mass strictly
            fails = keep[:, k] & (loss <= 1e-12 * (1.0 + norms))
            worst = max(worst, float(np.sum(fails)))
        supp.add(worst, n, alg.short_name())
        if isinstance(alg, Diagonal):
            reps = rng.standard_normal((min(n, 100), alg.n))
            err = max(abs(float(dual_norm(Functional(Element(alg, r_)))) - dual_norm_bruteforce(r_))
                      for r_ in reps)
            orc.add(err, len(reps), alg.short_name())
        # convex combinations of sampled face elements stay in the face
        if alg.rank >= 2:
            p = sample_projection(alg, rng)
            fd = maximal_face(p)
            pts = sample_face_states(fd.p, rng, 50) - sample_face_states(fd.q, rng, 50)
            t = rng.random((50, 1))
            mix = t * pts.representer.coords + (1 - t) * pts.representer.coords[::-1]
            ok = in_face(fd, Functional(Element(alg, mix)))
            conv.add(np.sum(~np.asarray(ok)), 50, alg.short_name())
    return [uniq.record(), hyp.record(), supp.record(), orc.record(), conv.record()]


# ---------------------------------------------------------------- isometries


def _hilbert_soundness(ctx, name, triples, pairs):
    acc = _Acc(ctx, name, 1e-8)
    for alg in ctx.algebras:
        rng = ctx.rng(name, alg)
        m = triples if ctx.samples is None else max(1, ctx.samples // 10)
        k = ctx.n(pairs)
        r1 = _rays(alg, rng, m * k, ctx.dtype)
        r2 = _rays(alg, rng, m * k, ctx.dtype)
        d0 = np.asarray(hilbert_distance(r1, r2))
        worst = 0.0
        for t in range(m):
            f = _random_hilbert(alg, rng, ctx.dtype)
            sl = slice(t * k, (t + 1) * k)
            d1 = hilbert_distance(f(r1[sl]), f(r2[sl]))
            worst = max(worst, float(np.max(np.abs(d1 - d0[sl]))))
        acc.add(worst, m * k, alg.short_name())
    return [acc.record()]


def _p_jordan_isos(ctx):
    unit_acc = _Acc(ctx, "isometry.jordan_iso_unit", 1e-12)
    hom = _Acc(ctx, "isometry.jordan_iso_multiplicative", 1e-9)
    var = _Acc(ctx, "isometry.variation_soundness", 1e-10)
    for alg in ctx.algebras:
        rng = ctx.rng("isometry.jordan_isos", alg)
        n = ctx.n(100)
        wu = wh = wv = 0.0
        for _ in range(20):
            J = sample_jordan_iso(alg, rng)
            u, h = jordan_iso_defect(J, n, int(rng.integers(1 << 31)))
            wu, wh = max(wu, u), max(wh, h)
            eps = int(rng.choice([-1, 1]))
            S = VariationIsometry.canonical(eps, J)
            x = rng.standard_normal((n, alg.dim))
            wv = max(wv, float(np.max(np.abs(_var(alg, S.apply_coords(x)) - _var(alg, x)))))
        unit_acc.add(wu, 20, alg.short_name())
        hom.add(wh, 20 * n, alg.short_name())
        var.add(wv, 20 * n, alg.short_name())
    return [unit_acc.record(), hom.record(), var.record()]


def _factor_roundtrips(ctx, prefix, count, test_rays):
    hil = _Acc(ctx, f"{prefix}.hilbert_roundtrip", 1e-6)
    var = _Acc(ctx, f"{prefix}.variation_roundtrip", 1e-6)
    deg = _Acc(ctx, f"{prefix}.rank2_encoding_policy", 0.0)
    rig = _Acc(ctx, f"{prefix}.sign_rigidity", 0.0)
    for alg in ctx.algebras:
        rng = ctx.rng(prefix + ".factor", alg)
        m = count if ctx.samples is None else max(1, ctx.samples // 20)
        worst_h = worst_v = 0.0
        bad_deg = bad_rig = 0
        rays = _rays(alg, rng, test_rays, ctx.dtype)
        for t in range(m):
            eps = -1 if t % 2 else 1
            f = _random_hilbert(alg, rng, ctx.dtype, epsilon=eps)
            try:
                rec = factor_hilbert_isometry(f, samples=test_rays, seed=int(rng.integers(1 << 31)),
                                              dtype=ctx.dtype)
                worst_h = max(worst_h, float(np.max(ray_distance(rec(rays), f(rays)))))
            except (FactorizationFailed, NotAnIsometry):
                worst_h = np.inf
            S = VariationIsometry.canonical(eps, f.J)
            mat = S.matrix()
            try:
                e2, J2 = factor_variation_isometry(mat, alg, samples=test_rays)
                worst_v = max(worst_v, factorization_residual(mat, alg, alg, e2, J2, seed=t))
            except (FactorizationFailed, NotAnIsometry):
                worst_v, e2 = np.inf, None
            alt = -e2 if e2 is not None else -eps
            try:
                factor_variation_isometry(mat, alg, samples=test_rays, force_sign=alt)
                alt_ok = True
            except (FactorizationFailed, NotAnIsometry):
                alt_ok = False
            if alg.rank == 2:
                # both encodings must be valid and the policy picks +1
                bad_deg += int(e2 != 1 or not alt_ok)
            else:
                bad_rig += int(alt_ok or e2 != eps)
        hil.add(worst_h, m, alg.short_name())
        var.add(worst_v, m, alg.short_name())
        if alg.rank == 2:
            deg.add(bad_deg, m, alg.short_name())
        else:
            rig.add(bad_rig, m, alg.short_name())
    return [hil.record(), var.record(), deg.record(), rig.record()]


def _hamhalter(ctx, name, count):
    acc = _Acc(ctx, name, 1e-8)
    for alg in ctx.algebras:
        rng = ctx.rng(name, alg)
        m = count if ctx.samples is None else max(1, ctx.samples // 20)
        worst = 0.0
        x = rng.standard_normal((200, alg.dim))
        for _ in range(m):
            T = AffineVariationIsometry(int(rng.choice([-1, 1])), sample_jordan_iso(alg, rng),
                                        Functional(sample_element(alg, rng)))
            try:
                H = hamhalter_decompose(T.matrix(), alg, samples=200)
                r = _sup(alg, H.apply_coords(x) - T.apply_coords(x)) / (1.0 + _sup(alg, x))
                worst = max(worst, float(np.max(r)))
            except (FactorizationFailed, NotAnIsometry):
                worst = np.inf
        acc.add(worst, m, alg.short_name())
    return [acc.record()]


def _conjugation(ctx, name, count, nrays):
    acc = _Acc(ctx, name, TOL_RAY)
    for alg in ctx.algebras:
        rng = ctx.rng(name, alg)
        m = count if ctx.samples is None else max(1, ctx.samples // 50)
        rays = _rays(alg, rng, ctx.n(nrays), ctx.dtype)
        worst = 0.0
        for _ in range(m):
            tau = _random_hilbert(alg, rng, ctx.dtype, epsilon=1)
            lhs = inversion(tau(inversion(rays)))
            rhs = conjugated_projectivity(tau)(rays)
            worst = max(worst, float(np.max(ray_distance(lhs, rhs))))
        acc.add(worst, m * len(rays), alg.short_name())
    return [acc.record()]


def _correspondence(ctx, name, count, nrays):
    acc = _Acc(ctx, name, 1e-7)
    budget = _Acc(ctx, name.rsplit(".", 1)[0] + ".evaluation_budget", 0.0)
    for alg in ctx.algebras:
        rng = ctx.rng(name, alg)
        m = count if ctx.samples is None else max(1, ctx.samples // 50)
        rays = _rays(alg, rng, ctx.n(nrays), ctx.dtype)
        worst, over = 0.0, 0
        for _ in range(m):
            f = _random_hilbert(alg, rng, ctx.dtype)
            box = BlackBoxRayMap(f.__call__, alg, alg)
            try:
                S = variation_isometry_from_hilbert(box, samples=nrays,
                                                    seed=int(rng.integers(1 << 31)), dtype=ctx.dtype)
            except NotAnIsometry:
                worst = np.inf
                continue
            over += int(box.calls > alg.dim ** 2 + 1000)
            g = _unitalizer(f(ray_of(Element(alg, alg.unit_coords().astype(ctx.dtype)))))
            lhs = exp_class(S(log_ray(rays)))
            rhs = g(f(rays))
            worst = max(worst, float(np.max(ray_distance(lhs, rhs))))
        acc.add(worst, m * len(rays), alg.short_name())
        budget.add(over, m, alg.short_name())
    return [acc.record(), budget.record()]


def _p_dichotomy(ctx, prefix):
    verdict = _Acc(ctx, f"{prefix}.verdicts_agree", 0.0)
    formula = _Acc(ctx, f"{prefix}.inversion_formulas", 1e-10)
    for alg in ctx.algebras:
        rng = ctx.rng(prefix, alg)
        cls = classify_isometry_group(alg) == PROJECTIVITIES_ONLY
        lin = inversion_is_linear_up_to_scale(alg, samples=16, seed=int(rng.integers(1 << 31)))
        atom = has_atom_with_atomic_complement(alg, seed=int(rng.integers(1 << 31)))
        verdict.add(int(not (cls == lin == atom)), 1, alg.short_name())
        oracle = {Diagonal: inversion_r2, Spin: inversion_spin}.get(type(alg))
        if oracle is None or (isinstance(alg, Diagonal) and alg.n != 2):
            continue
        n = ctx.n(1000)
        x = sample_interior(alg, rng, n, dtype=ctx.dtype)
        want = power(x, -1).coords
        got = oracle(x.coords)
        formula.add(np.max(np.abs(got - want)), n, alg.short_name())
    return [verdict.record(), formula.record()]


# ---------------------------------------------------------------- acceptance-only checks


def _quotient_identity(ctx, name):
    acc = _Acc(ctx, name, 1e-6)
    for alg in ctx.algebras:
        rng = ctx.rng(name, alg)
        n = ctx.n(1000)
        x = sample_element(alg, rng, n)
        lam = alg.eigvals(x.coords)
        closed = 0.5 * (lam[..., -1] - lam[..., 0])
        brute = quotient_norm_bruteforce(x)
        acc.add(np.max(np.abs(closed - brute)), n, alg.short_name())
    return [acc.record()]


def _orthogonal_pairs_diag4():
    alg = Diagonal(4)
    out = []
    for labels in itertools.product((0, 1, 2), repeat=4):
        p = np.array([l == 1 for l in labels], dtype=float)
        q = np.array([l == 2 for l in labels], dtype=float)
        if p.sum() and q.sum():
            out.append(FaceDescriptor(Element(alg, p), Element(alg, q)))
    return out


def _face_geometry(ctx, prefix):
    flag = _Acc(ctx, f"{prefix}.diameter_flag", 0.0)
    wit = _Acc(ctx, f"{prefix}.distance4_witness", 1e-12)
    norm = _Acc(ctx, f"{prefix}.norming_class_uniqueness", 0.0)
    rng = ctx.rng(prefix)
    faces = _orthogonal_pairs_diag4()
    sym = SymMatrix(3)
    for _ in range(100):
        p = sample_projection(sym, rng)
        lam, c = sym.frame((sym.unit_coords() - p.coords))
        atoms = c[lam > 0.5]
        q = atoms[0] if (len(atoms) > 1 and rng.random() < 0.5) else np.sum(atoms, axis=0)
        faces.append(FaceDescriptor(p, Element(sym, q)))
    bad, worst_w = 0, 0.0
    for i, fd in enumerate(faces):
        try:
            face_diameter_le_2(fd, samples=60, seed=derive_seed(ctx.seed, f"{prefix}/{i}"))
        except VerificationError:
            bad += 1
        w = diameter_witness(fd)
        if w is not None:
            worst_w = max(worst_w, abs(float(dual_norm(w[0] - w[1])) - 4.0))
    flag.add(bad, len(faces))
    wit.add(worst_w, len(faces))
    # norming class on Diagonal(3): [p] attains 1 on G_p, every other projection class fails
    alg = Diagonal(3)
    projs = [np.array(bits, dtype=float) for bits in itertools.product((0, 1), repeat=3)
             if 0 < sum(bits) < 3]
    bad = 0
    for p in projs:
        fd = maximal_face(Projection.from_element(Element(alg, p)))
        try:
            norming_class_of_face(fd, samples=100, seed=ctx.seed & 0xFFFF)
        except VerificationError:
            bad += 1
        for other in projs:
            if np.array_equal(other, p):
                continue
            vals = attains_norm_on_face(fd, Projection.from_element(Element(alg, other)),
                                        ctx.rng(f"{prefix}.norming"), 100)
            bad += int(np.all(np.abs(vals - 1.0) <= 1e-9))
    norm.add(bad, len(projs) ** 2)
    return [flag.record(), wit.record(), norm.record()]


def _extreme_points(ctx, name):
    acc = _Acc(ctx, name, 0.0)
    alg = Diagonal(3)
    verts = dual_slice_vertices(3)
    expected = {tuple(np.eye(3)[i] - np.eye(3)[j]) for i in range(3) for j in range(3) if i != j}
    found = {tuple(np.round(v, 12) + 0.0) for v in verts}
    bad = int(found != expected)
    # the predicate must be true on every vertex and false on every other sampled point
    rng = ctx.rng(name)
    pts = [v for v in verts]
    for _ in range(ctx.n(1000)):
        a = rng.standard_normal(3)
        a -= a.mean()
        a *= 2.0 * rng.random() / np.abs(a).sum()
        pts.append(a)
    for i in range(len(verts)):  # edge midpoints lie on the boundary but are not vertices
        pts.append(0.5 * (verts[i] + verts[(i + 1) % len(verts)]))
    for a in pts:
        is_vertex = any(np.max(np.abs(a - v)) <= 1e-9 for v in verts)
        bad += int(extreme_point_check(Functional(Element(alg, a))) != is_vertex)
    acc.add(bad, len(pts), alg.short_name())
    return [acc.record()]


# ---------------------------------------------------------------- registry


def _module_suites():
    return {
        "algebra": [_p_jordan_identity, _p_norm_axioms, _p_quadratic],
        "spectral": [_p_reconstruction, _p_norms, _p_calculus],
        "cone": [lambda c: _metric_axioms(c, "cone.metric", 300), _p_cone_invariance,
                 lambda c: _p_dichotomy(c, "cone.dichotomy")],
        "dual": [lambda c: _p_dual_orthogonality(c, "dual", 300), _p_dual_structure],
        "isometry": [_p_jordan_isos,
                     lambda c: _hilbert_soundness(c, "isometry.hilbert_soundness", 3, 1000),
                     lambda c: _factor_roundtrips(c, "isometry", 4, 200),
                     lambda c: _hamhalter(c, "isometry.hamhalter", 4),
                     lambda c: _correspondence(c, "isometry.correspondence", 2, 200)],
    }


ACCEPTANCE: list[tuple[str, Callable]] = [
    ("acceptance.01.metric_axioms", lambda c: _metric_axioms(c, "acceptance.01.metric_axioms", 1000)),
    ("acceptance.02.quotient_identity", lambda c: _quotient_identity(c, "acceptance.02.quotient_identity")),
    ("acceptance.03.isometry_soundness",
     lambda c: _hilbert_soundness(c, "acceptance.03.isometry_soundness", 100, 100)),
    ("acceptance.04.factorization_roundtrip",
     lambda c: _factor_roundtrips(c, "acceptance.04.factorization_roundtrip", 50, 1000)),
    ("acceptance.05.hamhalter_form", lambda c: _hamhalter(c, "acceptance.05.hamhalter_form", 50)),
    ("acceptance.06.dual_orthogonality", lambda c: _p_dual_orthogonality(c, "acceptance.06.dual_orthogonality", 1000)),
    ("acceptance.07.face_geometry", lambda c: _face_geometry(c, "acceptance.07.face_geometry")),
    ("acceptance.08.extreme_points", lambda c: _extreme_points(c, "acceptance.08.extreme_points")),
    ("acceptance.09.dichotomy", lambda c: _p_dichotomy(c, "acceptance.09.dichotomy")),
    ("acceptance.10.conjugation_identity",
     lambda c: _conjugation(c, "acceptance.10.conjugation_identity", 20, 1000)),
    ("acceptance.11.correspondence",
     lambda c: _correspondence(c, "acceptance.11.correspondence", 20, 200)),
]


def suite_names() -> list[str]:
    return list(_module_suites()) + ["acceptance", "all"] + [name for name, _ in ACCEPTANCE]


def _resolve(name: str) -> list[Callable]:
    modules = _module_suites()
    if name in modules:
        return modules[name]
    if name == "acceptance":
        return [fn for _, fn in ACCEPTANCE]
    if name == "all":
        return [fn for fns in modules.values() for fn in fns] + [fn for _, fn in ACCEPTANCE]
    for crit, fn in ACCEPTANCE:
        if name == crit or name == crit.split(".")[1] or name == crit.split(".", 2)[2]:
            return [fn]
    raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(suite_names())}")


def run_suite(name: str, algebras=None, samples: int | None = None, seed: int = 0,
              tol_scale: float = 1.0, precision: str = "extended") -> SuiteReport:
    """Run a named suite and return its report.

    ``name`` is a module suite (algebra, spectral, cone, dual, isometry),
    ``acceptance``, ``all``, or a single acceptance criterion. ``samples``
    overrides the per-property sample counts.
    """
    fns = _resolve(name)
    if precision not in PRECISIONS:
        raise ValueError(f"precision must be one of {sorted(PRECISIONS)}")
    ctx = _Ctx(default_algebras() if algebras is None else algebras, samples, seed, tol_scale,
               PRECISIONS[precision])
    report = SuiteReport(name, int(seed))
    t0 = time.perf_counter()
    with np.errstate(all="ignore"):
        for fn in fns:
            report.records.extend(fn(ctx))
    report.wall_time_ms = (time.perf_counter() - t0) * 1000.0
    return report
