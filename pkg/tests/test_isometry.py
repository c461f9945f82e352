import json

import numpy as np
import pytest

from jordan_cone import (PROJECTIVITIES_ONLY, SEMIDIRECT_WITH_C2, AffineVariationIsometry,
                         AlgebraMismatch, BlackBoxLinearMap, BlackBoxRayMap, Diagonal, DirectSum,
                         EvaluationBudgetExceeded, FactorizationFailed, Functional, HilbertIsometry,
                         InvalidDescriptor, JordanIsomorphism, NotAnIsometry, Spin, SymMatrix,
                         VariationIsometry, apply_hilbert_isometry, apply_jordan_iso,
                         classify_isometry_group, conjugated_projectivity, element, eigenvalues,
                         factor_hilbert_isometry, factor_variation_isometry, functional,
                         hamhalter_decompose, has_atom_with_atomic_complement, hilbert_distance,
                         inversion, power, quadratic_rep, ray_equal, ray_of, unit,
                         variation_isometry_from_hilbert, variation_seminorm, verify_jordan_iso)
from jordan_cone.isometry import factorization_residual, jordan_iso_defect, ray_distance
from jordan_cone.sampling import (make_rng, random_orthogonal, sample_element, sample_interior,
                                  sample_jordan_iso)

from conftest import ALGEBRAS


def quotient_gap(alg, a, b):
    return float(np.max(np.asarray(variation_seminorm(element(alg, a - b)))))


def rotation(t):
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])


# ---------------------------------------------------------------- Jordan isomorphisms


def test_identity_permutation_is_identity(rng):
    d = Diagonal(4)
    J = JordanIsomorphism.permutation(d, (0, 1, 2, 3))
    x = sample_element(d, rng)
    assert np.array_equal(J(x).coords, x.coords)
    assert np.array_equal(J.matrix(), np.eye(4))


def test_permutation_example():
    # the 1-based permutation (2,3,1) sends coordinate i to position sigma(i)
    J = JordanIsomorphism.permutation(Diagonal(3), (1, 2, 0))
    x = element(Diagonal(3), [1, 2, 4])
    assert np.array_equal(apply_jordan_iso(J, x).coords, [4, 1, 2])
    assert np.array_equal(eigenvalues(J(x)), eigenvalues(x))


def test_sym2_rotation_fixes_unit():
    J = JordanIsomorphism.orthogonal(SymMatrix(2), rotation(0.7))
    assert np.allclose(J(unit(SymMatrix(2))).coords, unit(SymMatrix(2)).coords, atol=1e-15)


def test_invalid_isomorphisms():
    with pytest.raises(InvalidDescriptor):
        JordanIsomorphism.permutation(Diagonal(3), (0, 0, 1))
    with pytest.raises(InvalidDescriptor):
        JordanIsomorphism.orthogonal(Spin(2), np.array([[1.0, 1.0], [0.0, 1.0]]))
    s = DirectSum((Diagonal(2), Spin(3)))
    comps = (JordanIsomorphism.identity(Diagonal(2)), JordanIsomorphism.identity(Spin(3)))
    with pytest.raises(InvalidDescriptor):
        JordanIsomorphism.direct_sum(s, s, (1, 0), comps)


def test_sampled_isomorphisms_verify(alg, rng):
    for _ in range(5):
        J = sample_jordan_iso(alg, rng)
        assert verify_jordan_iso(J, samples=100, seed=1)
        unit_err, hom_err = jordan_iso_defect(J, 100, 1)
        assert unit_err <= 1e-12 and hom_err <= 1e-9


def test_inverse_and_compose(alg, rng):
    J, K = sample_jordan_iso(alg, rng), sample_jordan_iso(alg, rng)
    x = sample_element(alg, rng, 20)
    assert np.allclose(J.inverse()(J(x)).coords, x.coords, atol=1e-12)
    assert np.allclose(J.compose(K)(x).coords, J(K(x)).coords, atol=1e-12)
    assert np.allclose(J.matrix() @ x.coords[0], J(x[0]).coords, atol=1e-12)


def test_direct_sum_swaps_isomorphic_summands(rng):
    s = DirectSum((SymMatrix(2), SymMatrix(2)))
    comps = (JordanIsomorphism.identity(SymMatrix(2)),) * 2
    J = JordanIsomorphism.direct_sum(s, s, (1, 0), comps)
    x = sample_element(s, rng)
    assert np.allclose(J(x).coords, np.concatenate([x.coords[3:], x.coords[:3]]))
    assert verify_jordan_iso(J)


def test_jordan_iso_json_roundtrip(alg, rng):
    J = sample_jordan_iso(alg, rng)
    obj = json.loads(json.dumps(J.to_json()))
    assert obj["variant"] == alg.variant
    K = JordanIsomorphism.from_json(obj)
    x = sample_element(alg, rng, 10)
    assert np.allclose(K(x).coords, J(x).coords, atol=1e-15)


def test_jordan_iso_json_keys():
    assert "perm" in JordanIsomorphism.identity(Diagonal(3)).to_json()
    assert "orth" in JordanIsomorphism.identity(Spin(2)).to_json()
    s = DirectSum((Diagonal(2), Spin(3)))
    assert "summand_map" in JordanIsomorphism.identity(s).to_json()


def test_apply_rejects_other_algebra():
    J = JordanIsomorphism.identity(Diagonal(3))
    with pytest.raises(AlgebraMismatch):
        J(unit(Diagonal(4)))


# ---------------------------------------------------------------- Hilbert isometries


def test_hilbert_isometry_examples(alg, rng):
    r = ray_of(sample_interior(alg, rng, 30))
    ident = JordanIsomorphism.identity(alg)
    e = unit(alg)
    assert np.all(ray_equal(apply_hilbert_isometry(HilbertIsometry(1, e, ident), r), r))
    assert np.all(ray_equal(HilbertIsometry(-1, e, ident)(r), inversion(r)))


def test_hilbert_isometry_preserves_distance(alg, rng):
    f = HilbertIsometry(int(rng.choice([-1, 1])), sample_interior(alg, rng), sample_jordan_iso(alg, rng))
    x = ray_of(sample_interior(alg, rng, 1000, dtype=np.longdouble))
    y = ray_of(sample_interior(alg, rng, 1000, dtype=np.longdouble))
    d0 = np.asarray(hilbert_distance(x, y))
    d1 = np.asarray(hilbert_distance(f(x), f(y)))
    assert np.max(np.abs(d1 - d0)) <= 1e-8


def test_hilbert_isometry_validation():
    d = Diagonal(2)
    with pytest.raises(ValueError):
        HilbertIsometry(0, unit(d), JordanIsomorphism.identity(d))
    with pytest.raises(Exception):
        HilbertIsometry(1, element(d, [1, -1]), JordanIsomorphism.identity(d))


def test_hilbert_json_roundtrip(alg, rng):
    f = HilbertIsometry(-1, sample_interior(alg, rng), sample_jordan_iso(alg, rng))
    obj = json.loads(json.dumps(f.to_json()))
    assert set(obj) == {"epsilon", "y", "J"}
    g = HilbertIsometry.from_json(obj)
    r = ray_of(sample_interior(alg, rng, 5))
    assert np.all(ray_equal(g(r), f(r)))


# ---------------------------------------------------------------- variation isometries


def test_canonical_variation_isometry_preserves_seminorm(alg, rng):
    S = VariationIsometry.canonical(-1, sample_jordan_iso(alg, rng))
    x = sample_element(alg, rng, 500)
    v0 = np.asarray(variation_seminorm(x))
    v1 = np.asarray(variation_seminorm(S(x)))
    assert np.max(np.abs(v1 - v0)) <= 1e-10 * max(1, v0.max())


def test_variation_from_hilbert_examples(rng):
    d = Diagonal(4)
    ident = JordanIsomorphism.identity(d)
    x = sample_element(d, rng, 50).coords
    S = variation_isometry_from_hilbert(HilbertIsometry(1, unit(d), ident))
    assert quotient_gap(d, S.apply_coords(x), x) <= 1e-9
    S = variation_isometry_from_hilbert(HilbertIsometry(-1, unit(d), ident))
    assert quotient_gap(d, S.apply_coords(x), -x) <= 1e-9
    P = JordanIsomorphism.permutation(d, (2, 0, 3, 1))
    S = variation_isometry_from_hilbert(HilbertIsometry(1, unit(d), P))
    assert quotient_gap(d, S.apply_coords(x), P.apply_coords(x)) <= 1e-9


def test_variation_from_hilbert_rejects_non_isometry():
    d = Diagonal(3)
    squash = BlackBoxRayMap(lambda r: ray_of(power(r.representative, 0.5)), d, d)
    with pytest.raises(NotAnIsometry):
        variation_isometry_from_hilbert(squash)


def test_factor_variation_examples():
    d = Diagonal(3)
    eps, J = factor_variation_isometry(np.eye(3), d)
    assert eps == 1 and np.allclose(J.matrix(), np.eye(3))
    P = JordanIsomorphism.permutation(d, (1, 0, 2))
    S = VariationIsometry.canonical(-1, P)
    eps, J = factor_variation_isometry(S, d)
    assert eps == -1 and np.array_equal(J.perm, P.perm)
    assert factorization_residual(S.matrix(), d, d, eps, J) <= 1e-10


def test_factor_variation_r2_ambiguity():
    d = Diagonal(2)
    eps, J = factor_variation_isometry(-np.eye(2), d)
    assert eps == 1 and tuple(J.perm) == (1, 0)
    # the other encoding is also valid on R^2
    eps2, J2 = factor_variation_isometry(-np.eye(2), d, force_sign=-1)
    assert eps2 == -1 and tuple(J2.perm) == (0, 1)


def test_factor_variation_spin_ambiguity(rng):
    s = Spin(3)
    J0 = sample_jordan_iso(s, rng)
    S = VariationIsometry.canonical(-1, J0)
    eps, J = factor_variation_isometry(S, s)
    assert eps == 1
    assert factorization_residual(S.matrix(), s, s, eps, J) <= 1e-9
    eps, J = factor_variation_isometry(S, s, force_sign=-1)
    assert factorization_residual(S.matrix(), s, s, eps, J) <= 1e-9


def test_sym2_admits_both_signs(rng):
    # SymMatrix(2) has rank 2, like the spin factors
    alg = SymMatrix(2)
    S = VariationIsometry.canonical(-1, sample_jordan_iso(alg, rng))
    for sign in (1, -1):
        eps, J = factor_variation_isometry(S, alg, force_sign=sign)
        assert eps == sign and factorization_residual(S.matrix(), alg, alg, eps, J) <= 1e-9


@pytest.mark.parametrize("alg", [Diagonal(3), Diagonal(5), SymMatrix(3), SymMatrix(4),
                                 DirectSum((Diagonal(2), Spin(3)))], ids=lambda a: a.short_name())
def test_sign_rigidity(alg):
    rng = make_rng(4)
    for eps in (1, -1):
        S = VariationIsometry.canonical(eps, sample_jordan_iso(alg, rng))
        got, _ = factor_variation_isometry(S, alg)
        assert got == eps
        with pytest.raises(FactorizationFailed):
            factor_variation_isometry(S, alg, force_sign=-eps)


def test_factor_variation_roundtrip(alg, rng):
    for _ in range(5):
        eps = int(rng.choice([-1, 1]))
        S = VariationIsometry.canonical(eps, sample_jordan_iso(alg, rng))
        e2, J = factor_variation_isometry(S, alg)
        assert factorization_residual(S.matrix(), alg, alg, e2, J) <= 1e-6


def test_factor_variation_accepts_callable(rng):
    alg = SymMatrix(3)
    S = VariationIsometry.canonical(1, sample_jordan_iso(alg, rng))
    box = BlackBoxLinearMap(S.apply_coords, alg, alg)
    eps, J = factor_variation_isometry(box, alg)
    assert box.calls == alg.dim
    assert factorization_residual(S.matrix(), alg, alg, eps, J) <= 1e-9


def test_factor_variation_rejects_non_isometries():
    d = Diagonal(3)
    with pytest.raises(NotAnIsometry):
        factor_variation_isometry(2 * np.eye(3), d)
    with pytest.raises(NotAnIsometry):
        factor_variation_isometry(np.eye(4), d, Diagonal(4))
    # dimension matches but the algebras are not isomorphic
    with pytest.raises((FactorizationFailed, NotAnIsometry)):
        factor_variation_isometry(np.eye(3), Diagonal(3), Spin(2))


# ---------------------------------------------------------------- Hilbert factorization


def test_factor_hilbert_quadratic_map(alg, rng):
    w = sample_interior(alg, rng)
    f = BlackBoxRayMap(lambda r: ray_of(quadratic_rep(
        element(alg, np.broadcast_to(w.coords, r.representative.coords.shape)), r.representative)),
        alg, alg)
    rec = factor_hilbert_isometry(f, samples=300)
    assert rec.epsilon == 1
    assert ray_equal(ray_of(rec.y), ray_of(w), tol=1e-6)
    r = ray_of(sample_interior(alg, rng, 50))
    assert np.max(ray_distance(rec(r), f.fn(r))) <= 1e-6


def test_factor_hilbert_inversion():
    d = Diagonal(3)
    rec = factor_hilbert_isometry(HilbertIsometry(-1, unit(d), JordanIsomorphism.identity(d)))
    assert rec.epsilon == -1
    assert ray_equal(ray_of(rec.y), ray_of(unit(d)), tol=1e-9)
    assert tuple(rec.J.perm) == (0, 1, 2)


def test_factor_hilbert_roundtrip(alg, rng):
    f = HilbertIsometry(int(rng.choice([-1, 1])), sample_interior(alg, rng), sample_jordan_iso(alg, rng))
    box = BlackBoxRayMap(f.__call__, alg, alg)
    rec = factor_hilbert_isometry(box, dtype=np.longdouble)
    assert box.calls <= alg.dim ** 2 + 1000
    r = ray_of(sample_interior(alg, rng, 200, dtype=np.longdouble))
    assert np.max(ray_distance(rec(r), f(r))) <= 1e-6


def test_factor_hilbert_budget():
    d = Diagonal(3)
    f = HilbertIsometry(1, unit(d), JordanIsomorphism.identity(d))
    box = BlackBoxRayMap(f.__call__, d, d, budget=50)
    with pytest.raises(EvaluationBudgetExceeded):
        factor_hilbert_isometry(box)


def test_factor_hilbert_rejects_non_isometry():
    d = Diagonal(3)
    box = BlackBoxRayMap(lambda r: ray_of(power(r.representative, 2.0)), d, d)
    with pytest.raises(NotAnIsometry):
        factor_hilbert_isometry(box)


# ---------------------------------------------------------------- affine form


def test_hamhalter_identity():
    d = Diagonal(3)
    T = hamhalter_decompose(np.eye(3), d)
    assert T.epsilon == 1 and tuple(T.J.perm) == (0, 1, 2)
    assert np.allclose(T.phi.representer.coords, 0, atol=1e-12)


def test_hamhalter_trace_example():
    for n in (3, 4):
        d = Diagonal(n)
        m = -np.eye(n) + np.ones((n, n)) / n   # x -> -x + tr(x) e / n
        T = hamhalter_decompose(m, d)
        assert T.epsilon == -1 and tuple(T.J.perm) == tuple(range(n))
        x = np.random.default_rng(0).standard_normal(n)
        assert T.phi(element(d, x)) == pytest.approx(x.sum() / n)


def test_hamhalter_roundtrip(alg, rng):
    for _ in range(5):
        T0 = AffineVariationIsometry(int(rng.choice([-1, 1])), sample_jordan_iso(alg, rng),
                                     Functional(sample_element(alg, rng)))
        T = hamhalter_decompose(T0, alg)
        x = sample_element(alg, rng, 200).coords
        assert np.max(np.abs(T.apply_coords(x) - T0.apply_coords(x))) <= 1e-8 * max(1, np.abs(x).max())


def test_hamhalter_rejects_non_affine():
    d = Diagonal(3)
    m = np.eye(3)
    m[0, 1] = 0.3
    with pytest.raises(NotAnIsometry):
        hamhalter_decompose(m, d)


def test_affine_json_roundtrip(rng):
    alg = SymMatrix(3)
    T = AffineVariationIsometry(-1, sample_jordan_iso(alg, rng), Functional(sample_element(alg, rng)))
    obj = json.loads(json.dumps(T.to_json()))
    assert set(obj) == {"epsilon", "J", "phi"}
    U = AffineVariationIsometry.from_json(obj)
    x = sample_element(alg, rng, 5).coords
    assert np.allclose(U.apply_coords(x), T.apply_coords(x))


# ---------------------------------------------------------------- conjugation and groups


def test_conjugated_projectivity_examples(rng):
    d = Diagonal(3)
    ident = HilbertIsometry(1, unit(d), JordanIsomorphism.identity(d))
    c = conjugated_projectivity(ident)
    assert np.allclose(c.y.coords, 1)
    tau = HilbertIsometry(1, element(d, [1, 2, 4]), JordanIsomorphism.identity(d))
    c = conjugated_projectivity(tau)
    assert np.allclose(c.y.coords, [1, 0.5, 0.25])
    twice = conjugated_projectivity(c)
    assert np.allclose(twice.y.coords, tau.y.coords)
    with pytest.raises(ValueError):
        conjugated_projectivity(HilbertIsometry(-1, unit(d), JordanIsomorphism.identity(d)))


def test_conjugation_identity(alg, rng):
    tau = HilbertIsometry(1, sample_interior(alg, rng, dtype=np.longdouble), sample_jordan_iso(alg, rng))
    r = ray_of(sample_interior(alg, rng, 1000, dtype=np.longdouble))
    lhs = inversion(tau(inversion(r)))
    rhs = conjugated_projectivity(tau)(r)
    assert np.all(ray_equal(lhs, rhs))


@pytest.mark.parametrize("alg,verdict", [
    (Diagonal(2), PROJECTIVITIES_ONLY), (Spin(5), PROJECTIVITIES_ONLY), (Spin(2), PROJECTIVITIES_ONLY),
    (SymMatrix(3), SEMIDIRECT_WITH_C2), (Diagonal(3), SEMIDIRECT_WITH_C2),
    (DirectSum((Spin(2), Diagonal(2))), SEMIDIRECT_WITH_C2)], ids=lambda a: str(a))
def test_classification_examples(alg, verdict):
    assert classify_isometry_group(alg) == verdict
    assert has_atom_with_atomic_complement(alg) == (verdict == PROJECTIVITIES_ONLY)


@pytest.mark.parametrize("alg", ALGEBRAS, ids=lambda a: a.short_name())
def test_classifiers_agree(alg):
    from jordan_cone import inversion_is_linear_up_to_scale
    verdict = classify_isometry_group(alg) == PROJECTIVITIES_ONLY
    assert inversion_is_linear_up_to_scale(alg, 16, 0) == verdict
    assert has_atom_with_atomic_complement(alg) == verdict
