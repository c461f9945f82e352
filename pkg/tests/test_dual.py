import itertools
import json

import numpy as np
import pytest

from jordan_cone import (Diagonal, FaceDescriptor, Functional, InvalidFace, NotInHyperplane,
                         NotPositive, Projection, Spin, StateDescriptor, SymMatrix, dual_norm, element,
                         extreme_point_check, face_diameter_le_2, functional, functionals_orthogonal,
                         maximal_face, norming_class_of_face, orthogonal_by_norm,
                         orthogonal_decomposition, support_projection, unit)
from jordan_cone.dual import (attains_norm_on_face, diameter_witness, in_face, projection_leq,
                              projection_sup, sample_face_states, sampled_face_diameter)
from jordan_cone.oracles import dual_norm_bruteforce, dual_slice_vertices
from jordan_cone.sampling import make_rng, sample_element, sample_interior, sample_projection


def proj(alg, coords):
    return Projection.from_element(element(alg, coords))


# ---------------------------------------------------------------- functionals


def test_functional_evaluation_and_json(alg, rng):
    a, x = sample_element(alg, rng), sample_element(alg, rng)
    phi = Functional(a)
    assert phi(x) == pytest.approx(float(alg.inner(a.coords, x.coords)))
    assert phi.at_unit() == pytest.approx(float(alg.trace(a.coords)))
    back = Functional.from_json(json.loads(json.dumps(phi.to_json())))
    assert np.array_equal(back.representer.coords, a.coords)
    assert set(phi.to_json()) == {"representer"}


def test_dual_norm_examples():
    assert dual_norm(Functional(unit(Diagonal(3)))) == 3
    assert dual_norm(functional(Diagonal(3), [1, -1, 0])) == 2


def test_dual_norm_against_bruteforce(rng):
    for n in (2, 3, 5, 7):
        for _ in range(50):
            a = rng.standard_normal(n)
            assert dual_norm(functional(Diagonal(n), a)) == pytest.approx(dual_norm_bruteforce(a),
                                                                         abs=1e-12)


def test_dual_norm_is_sup_over_unit_ball(alg, rng):
    # |phi(x)| <= ||phi|| ||x||, attained at the sign of the representer
    a = sample_element(alg, rng)
    phi = Functional(a)
    lam, c = alg.frame(a.coords)
    s = element(alg, np.einsum("k,kd->d", np.sign(lam), c))
    assert phi(s) == pytest.approx(dual_norm(phi), rel=1e-10)
    x = sample_element(alg, rng, 200)
    bound = dual_norm(phi) * np.max(np.abs(alg.eigvals(x.coords)), axis=-1)
    assert np.all(np.abs(phi(x)) <= bound + 1e-10)


def test_orthogonal_decomposition_examples():
    plus, minus = orthogonal_decomposition(functional(Diagonal(3), [1, -1, 0]))
    assert np.allclose(plus.representer.coords, [1, 0, 0])
    assert np.allclose(minus.representer.coords, [0, 1, 0])
    pos = functional(Diagonal(3), [1, 2, 0])
    p, m = orthogonal_decomposition(pos)
    assert np.allclose(p.representer.coords, [1, 2, 0]) and np.allclose(m.representer.coords, 0)


def test_spin_decomposition_example():
    phi = functional(Spin(2), [3, 4, 0])
    plus, minus = orthogonal_decomposition(phi)
    assert np.allclose(plus.representer.coords, 5 * 0.5 * np.array([0.6, 0.8, 1.0]))
    assert np.allclose(minus.representer.coords, 5 * 0.5 * np.array([-0.6, -0.8, 1.0]))
    assert dual_norm(phi) == pytest.approx(dual_norm(plus) + dual_norm(minus))
    assert functionals_orthogonal(plus, minus)


def test_decomposition_properties(alg, rng):
    phi = Functional(sample_element(alg, rng))
    plus, minus = orthogonal_decomposition(phi)
    assert np.allclose((plus - minus).representer.coords, phi.representer.coords, atol=1e-12)
    assert dual_norm(phi) == pytest.approx(dual_norm(plus) + dual_norm(minus), rel=1e-12)
    if dual_norm(minus) > 0 and dual_norm(plus) > 0:
        assert functionals_orthogonal(plus, minus)


def test_support_examples(alg, rng):
    d = Diagonal(3)
    assert np.allclose(support_projection(functional(d, [0.5, 0.5, 0])).coords, [1, 1, 0])
    assert np.allclose(support_projection(Functional(unit(alg))).coords, alg.unit_coords())
    _, c = alg.frame(rng.standard_normal(alg.dim))
    s = support_projection(Functional(element(alg, c[0])))
    assert s.is_atom and np.allclose(s.coords, c[0])


def test_support_attains_norm_and_is_minimal(alg, rng):
    p = sample_projection(alg, rng)
    w = sample_interior(alg, rng)
    a = element(alg, alg.quad(p.coords, w.coords))
    phi = Functional(a)
    s = support_projection(phi)
    assert phi(s.element) == pytest.approx(dual_norm(phi), abs=1e-9)
    assert s.rank == p.rank
    lam, c = alg.frame(a.coords)
    for k in range(alg.rank):
        if lam[k] > 1e-9:
            assert phi(s.element - element(alg, c[k])) < dual_norm(phi) - 1e-12


def test_support_rejects_non_positive():
    with pytest.raises(NotPositive):
        support_projection(functional(Diagonal(2), [1, -1]))


def test_orthogonality_examples():
    d = Diagonal(3)
    phi, psi = functional(d, [1, 0, 0]), functional(d, [0, 1, 0])
    assert functionals_orthogonal(phi, psi)
    assert dual_norm(phi - psi) == 2
    assert not functionals_orthogonal(phi, phi)
    with pytest.raises(NotPositive):
        functionals_orthogonal(phi, functional(d, [0, -1, 0]))


def test_spin_idempotents_orthogonal(rng):
    for _ in range(20):
        _, c = Spin(3).frame(rng.standard_normal(4))
        f = [Functional(element(Spin(3), ci)) for ci in c]
        assert functionals_orthogonal(*f) and orthogonal_by_norm(*f)


def test_norm_and_support_orthogonality_agree_away_from_threshold(alg, rng):
    # pairs either built orthogonal or generic; generic supports are far from orthogonal
    for _ in range(40):
        p = sample_projection(alg, rng)
        a = element(alg, alg.quad(p.coords, sample_interior(alg, rng).coords))
        q = p.complement() if rng.random() < 0.5 else sample_projection(alg, rng)
        b = element(alg, alg.quad(q.coords, sample_interior(alg, rng).coords))
        phi, psi = Functional(a), Functional(b)
        assert functionals_orthogonal(phi, psi) == orthogonal_by_norm(phi, psi)


def test_projection_lattice_helpers():
    d = Diagonal(3)
    p, q = proj(d, [1, 0, 0]), proj(d, [0, 1, 0])
    assert np.allclose(projection_sup(p, q).coords, [1, 1, 0])
    assert projection_leq(p, projection_sup(p, q))
    assert not projection_leq(projection_sup(p, q), p)


def test_states():
    d = Diagonal(3)
    assert StateDescriptor.from_functional(functional(d, [0, 1, 0])).is_pure
    assert not StateDescriptor.from_functional(functional(d, [0.5, 0.5, 0])).is_pure
    with pytest.raises(NotPositive):
        StateDescriptor.from_functional(functional(d, [1, 1, 0]))


# ---------------------------------------------------------------- extreme points


def test_extreme_point_examples():
    d = Diagonal(3)
    assert extreme_point_check(functional(d, [1, -1, 0]))
    assert not extreme_point_check(functional(d, [1, -0.5, -0.5]))
    with pytest.raises(NotInHyperplane):
        extreme_point_check(functional(d, [1, 0, 0]))


def test_extreme_points_match_vertex_enumeration():
    verts = dual_slice_vertices(3)
    expected = {tuple(np.eye(3)[i] - np.eye(3)[j]) for i in range(3) for j in range(3) if i != j}
    assert {tuple(np.round(v, 12) + 0.0) for v in verts} == expected
    assert all(extreme_point_check(functional(Diagonal(3), v)) for v in verts)
    # non-vertices: edge midpoints and interior points of the slice
    for a, b in itertools.combinations(verts, 2):
        mid = 0.5 * (a + b)
        if np.any(np.abs(mid) > 1e-12):
            assert not extreme_point_check(functional(Diagonal(3), mid))


def test_vertex_enumeration_dimension_four():
    verts = dual_slice_vertices(4)
    assert len(verts) == 12
    assert all(extreme_point_check(functional(Diagonal(4), v)) for v in verts)
    with pytest.raises(ValueError):
        dual_slice_vertices(5)


def test_spin_extreme_points(rng):
    # u - v for the two atoms of any spin frame
    for _ in range(10):
        _, c = Spin(3).frame(rng.standard_normal(4))
        assert extreme_point_check(Functional(element(Spin(3), c[1] - c[0])))


# ---------------------------------------------------------------- faces


def test_face_descriptor_validation():
    d = Diagonal(4)
    with pytest.raises(InvalidFace):
        FaceDescriptor(proj(d, [1, 1, 0, 0]), proj(d, [0, 1, 1, 0]))
    with pytest.raises(InvalidFace):
        FaceDescriptor(element(d, [0.5, 0, 0, 0]), proj(d, [0, 1, 0, 0]))
    with pytest.raises(InvalidFace):
        maximal_face(proj(d, [1, 1, 1, 1]))
    fd = FaceDescriptor(proj(d, [1, 0, 0, 0]), proj(d, [0, 1, 1, 0]))
    assert not fd.maximal
    assert maximal_face(proj(d, [1, 0, 0, 0])).maximal
    back = FaceDescriptor.from_json(json.loads(json.dumps(fd.to_json())))
    assert np.allclose(back.q.coords, fd.q.coords)


def test_face_diameter_examples():
    d = Diagonal(4)
    assert face_diameter_le_2(FaceDescriptor(proj(d, [1, 0, 0, 0]), proj(d, [0, 1, 1, 0])))
    fd = FaceDescriptor(proj(d, [1, 1, 0, 0]), proj(d, [0, 0, 1, 1]))
    assert not face_diameter_le_2(fd)
    a, b = diameter_witness(fd)
    assert dual_norm(a - b) == pytest.approx(4.0)
    assert in_face(fd, a) and in_face(fd, b)


def test_sym2_rank_one_face_diameter():
    alg = SymMatrix(2)
    rng = make_rng(9)
    p = sample_projection(alg, rng)
    fd = maximal_face(p)
    assert face_diameter_le_2(fd, samples=142)
    assert sampled_face_diameter(fd, samples=142) <= 2 + 1e-8


def test_all_orthogonal_pairs_diagonal4():
    d = Diagonal(4)
    count = 0
    for labels in itertools.product((0, 1, 2), repeat=4):
        p = np.array([x == 1 for x in labels], float)
        q = np.array([x == 2 for x in labels], float)
        if p.sum() and q.sum():
            fd = FaceDescriptor(proj(d, p), proj(d, q))
            assert face_diameter_le_2(fd, samples=30) == (p.sum() == 1 or q.sum() == 1)
            count += 1
    assert count == 50


def test_face_convexity(alg, rng):
    if alg.rank < 2:
        pytest.skip("needs rank >= 2")
    p = sample_projection(alg, rng)
    fd = maximal_face(p)
    fp = sample_face_states(fd.p, rng, 50)
    fq = sample_face_states(fd.q, rng, 50)
    pts = (fp - fq).representer.coords
    assert np.all(in_face(fd, Functional(element(alg, pts))))
    t = rng.random((50, 1))
    mix = t * pts + (1 - t) * pts[::-1]
    assert np.all(in_face(fd, Functional(element(alg, mix))))


def test_norming_class_example():
    d = Diagonal(3)
    p = proj(d, [1, 0, 0])
    fd = maximal_face(p)
    phi, psi = functional(d, [1, 0, 0]), functional(d, [0, 0.5, 0.5])
    e = d.unit_coords()
    val = (phi - psi)(element(d, 0.5 * (2 * p.coords - e)))
    assert val == pytest.approx(1.0)
    cls = norming_class_of_face(fd)
    assert np.allclose(cls.coords, p.coords - 1 / 3)


def test_norming_class_uniqueness_diagonal3():
    d = Diagonal(3)
    projs = [np.array(b, float) for b in itertools.product((0, 1), repeat=3) if 0 < sum(b) < 3]
    assert len(projs) == 6
    for p in projs:
        fd = maximal_face(proj(d, p))
        norming = []
        for q in projs:
            vals = attains_norm_on_face(fd, proj(d, q), make_rng(1), 100)
            if np.max(np.abs(vals - 1.0)) <= 1e-9:
                norming.append(tuple(q))
        assert norming == [tuple(p)]


def test_norming_class_rejects_trivial():
    d = Diagonal(3)
    with pytest.raises(InvalidFace):
        norming_class_of_face(FaceDescriptor(proj(d, [1, 0, 0]), proj(d, [0, 1, 0])))
