import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jordan_cone import (Diagonal, DomainError, Spin, SymMatrix, element, eigenvalues, exp_el,
                         functional_calculus, inverse, log_el, order_unit_norm, power,
                         quotient_norm, spectral_decomposition, spectrum, unit, variation_seminorm)
from jordan_cone.oracles import quotient_norm_bruteforce
from jordan_cone.sampling import sample_element, sample_interior

from conftest import ALGEBRAS


def test_diagonal_decomposition_groups_equal_values():
    sd = spectral_decomposition(element(Diagonal(3), [1, 2, 2]))
    assert np.allclose(sd.eigenvalues, [1, 2])
    assert np.allclose(sd.idempotents[0].coords, [1, 0, 0])
    assert np.allclose(sd.idempotents[1].coords, [0, 1, 1])
    assert [p.rank for p in sd.idempotents] == [1, 2]


def test_spin_decomposition_example():
    x = element(Spin(2), [3, 4, 10])
    sd = spectral_decomposition(x)
    assert np.allclose(sd.eigenvalues, [5, 15])
    assert np.allclose(sd.idempotents[0].coords, [-0.3, -0.4, 0.5])
    assert np.allclose(sd.idempotents[1].coords, [0.3, 0.4, 0.5])
    alg = x.algebra
    for p in sd.idempotents:
        assert np.allclose(alg.product(p.coords, p.coords), p.coords)
    assert np.allclose(sd.idempotents[0].coords + sd.idempotents[1].coords, alg.unit_coords())


def test_unit_has_single_eigenvalue(alg):
    sd = spectral_decomposition(unit(alg))
    assert np.allclose(sd.eigenvalues, [1.0])
    assert np.allclose(sd.idempotents[0].coords, alg.unit_coords())


def test_spin_zero_vector_part_is_single_block():
    sd = spectral_decomposition(element(Spin(3), [0, 0, 0, 2.5]))
    assert np.allclose(sd.eigenvalues, [2.5]) and sd.idempotents[0].rank == 2


def test_decomposition_json():
    obj = json.loads(json.dumps(spectral_decomposition(element(Diagonal(3), [1, 2, 2])).to_json()))
    assert obj["eigenvalues"] == [1.0, 2.0]
    assert obj["idempotents"][1]["coords"] == [0.0, 1.0, 1.0]


@given(st.sampled_from(ALGEBRAS), st.integers(0, 2**32 - 1))
def test_decomposition_invariants(alg, seed):
    x = sample_element(alg, np.random.default_rng(seed))
    sd = spectral_decomposition(x)
    ps = [p.coords for p in sd.idempotents]
    assert order_unit_norm(element(alg, sum(ps)) - unit(alg)) <= 1e-9
    for i in range(len(ps)):
        for j in range(i + 1, len(ps)):
            assert np.max(np.abs(eigenvalues(element(alg, alg.product(ps[i], ps[j]))))) <= 1e-9
    assert order_unit_norm(sd.reconstruct() - x) <= 1e-8 * (1 + order_unit_norm(x))


def test_spectrum_examples():
    assert np.allclose(spectrum(element(Diagonal(3), [1, 2, 4])), [1, 2, 4])
    assert np.allclose(spectrum(unit(Spin(3))), [1])
    assert np.allclose(spectrum(element(Spin(3), [1, 2, 2, 0])), [-3, 3])


def test_sym_spectrum_matches_numpy(rng):
    alg = SymMatrix(4)
    x = sample_element(alg, rng)
    assert np.allclose(eigenvalues(x), np.linalg.eigvalsh(alg.unpack(x.coords)))


def test_functional_calculus_examples(alg, rng):
    x = sample_element(alg, rng)
    assert order_unit_norm(log_el(exp_el(x)) - x) <= 1e-8
    y = sample_interior(alg, rng)
    r = power(y, 0.5)
    assert order_unit_norm(element(alg, alg.product(r.coords, r.coords)) - y) <= 1e-9 * order_unit_norm(y)
    sq = functional_calculus(x, lambda t: t * t)
    assert np.allclose(sq.coords, alg.product(x.coords, x.coords), atol=1e-10)


def test_power_and_inverse_on_diagonal():
    x = element(Diagonal(3), [1, 2, 4])
    assert np.allclose(power(x, -1).coords, [1, 0.5, 0.25])
    assert np.allclose(inverse(x).coords, [1, 0.5, 0.25])


def test_power_spectrum(alg, rng):
    y = sample_interior(alg, rng)
    assert np.allclose(eigenvalues(power(y, 1.7)), eigenvalues(y) ** 1.7, rtol=1e-9)


def test_domain_errors():
    x = element(Diagonal(3), [1, 0, 2])
    with pytest.raises(DomainError):
        log_el(x)
    with pytest.raises(DomainError):
        power(x, -0.5)
    with pytest.raises(DomainError):
        inverse(x)
    with pytest.raises(DomainError):
        functional_calculus(element(Diagonal(2), [-1, 1]), np.sqrt)
    assert np.allclose(power(element(Diagonal(2), [-1, 2]), 2).coords, [1, 4])


def test_norm_examples():
    assert order_unit_norm(element(Diagonal(3), [1, -3, 2])) == 3
    assert order_unit_norm(unit(Spin(2))) == 1
    assert np.isclose(order_unit_norm(element(Spin(2), [3, 4, 10])), 15)
    assert variation_seminorm(unit(SymMatrix(3))) == pytest.approx(0, abs=1e-15)
    assert variation_seminorm(element(Diagonal(3), [1, 2, 4])) == 3
    assert quotient_norm(element(Diagonal(3), [1, 2, 4])) == 1.5
    assert quotient_norm(unit(Diagonal(3))) == 0


def test_spin_variation_is_twice_vector_norm(rng):
    v = rng.standard_normal(4)
    assert np.isclose(variation_seminorm(element(Spin(4), [*v, 0.3])), 2 * np.linalg.norm(v))


def test_quotient_identity_against_bruteforce(alg, rng):
    x = sample_element(alg, rng, 200)
    q = np.asarray(quotient_norm(x))
    assert np.allclose(2 * q, variation_seminorm(x), atol=1e-10)
    assert np.max(np.abs(quotient_norm_bruteforce(x) - q)) <= 1e-6


def test_quotient_norm_example_bruteforce():
    assert abs(quotient_norm_bruteforce(element(Diagonal(3), [1, 2, 4])) - 1.5) <= 1e-6


def test_shift_invariance(alg, rng):
    x = sample_element(alg, rng, 100)
    e = alg.unit_coords()
    shifted = element(alg, x.coords + 7.0 * e)
    assert np.allclose(quotient_norm(shifted), quotient_norm(x), atol=1e-12)
    assert np.allclose(variation_seminorm(shifted), variation_seminorm(x), atol=1e-12)


def test_variation_dominated_by_twice_norm(alg, rng):
    x = sample_element(alg, rng, 200)
    assert np.all(np.asarray(variation_seminorm(x)) <= 2 * np.asarray(order_unit_norm(x)) + 1e-12)


def test_longdouble_is_preserved(alg, rng):
    x = sample_interior(alg, rng, 5, dtype=np.longdouble)
    assert x.coords.dtype == np.longdouble
    assert log_el(x).coords.dtype == np.longdouble
    assert power(x, -0.5).coords.dtype == np.longdouble
