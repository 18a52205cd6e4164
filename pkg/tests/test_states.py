import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdyn.errors import DimensionMismatchError, NonRealError, NotStateError
from qdyn.linalg import frob_dist, partial_trace
from qdyn.states import (
    bloch_vector,
    check_density,
    expectation,
    gell_mann_basis,
    maximally_entangled,
    maximally_mixed,
    projector,
    random_density,
    random_hermitian,
    random_unitary,
    state_from_bloch,
)

PAULIS = [
    np.eye(2),
    np.array([[0, 1], [1, 0]]),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]]),
]


def test_qubit_basis_is_scaled_paulis():
    basis = gell_mann_basis(2)
    assert len(basis) == 4
    for f, p in zip(basis.elements, PAULIS):
        np.testing.assert_allclose(f, p / np.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_gell_mann_orthonormal_and_traceless(d):
    basis = gell_mann_basis(d)
    assert len(basis) == d * d
    np.testing.assert_allclose(basis.gram(), np.eye(d * d), atol=1e-12)
    traces = np.array([np.trace(f) for f in basis.elements])
    assert abs(traces[0] - np.sqrt(d)) < 1e-12
    assert np.max(np.abs(traces[1:])) < 1e-10
    assert abs(np.sum(np.abs(traces) ** 2) - d) < 1e-12
    for f in basis.elements:
        np.testing.assert_allclose(f, f.conj().T, atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("seed", range(3))
def test_gell_mann_completeness(d, seed):
    h = random_hermitian(d, seed)
    basis = gell_mann_basis(d)
    recon = sum(c * f for c, f in zip(basis.coefficients(h), basis.elements))
    assert frob_dist(recon, h) < 1e-11


def test_bloch_maximally_mixed_is_zero():
    for d in (2, 3):
        np.testing.assert_allclose(bloch_vector(maximally_mixed(d), gell_mann_basis(d)), 0, atol=1e-15)


def test_bloch_ground_state_qubit():
    # f_i = d tr(F_i rho) with F_3 = Z/sqrt(2): 2 * (1/sqrt 2) = sqrt 2
    f = bloch_vector(projector([1, 0]), gell_mann_basis(2))
    np.testing.assert_allclose(f, [0, 0, np.sqrt(2)], atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("seed", range(5))
def test_bloch_round_trip(d, seed):
    basis = gell_mann_basis(d)
    rho = random_density(d, seed=seed)
    assert frob_dist(state_from_bloch(bloch_vector(rho, basis), basis), rho) < 1e-12


def test_state_from_bloch_zero_vector():
    np.testing.assert_allclose(state_from_bloch(np.zeros(8), gell_mann_basis(3)), np.eye(3) / 3, atol=1e-15)


def test_state_from_bloch_rejects_out_of_ball():
    with pytest.raises(NotStateError):
        state_from_bloch([0, 0, 100.0], gell_mann_basis(2))


def test_bloch_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        bloch_vector(maximally_mixed(2), gell_mann_basis(3))
    with pytest.raises(DimensionMismatchError):
        state_from_bloch(np.zeros(3), gell_mann_basis(3))


def test_expectation_simple():
    rho = projector([1, 0])
    assert expectation(rho, np.eye(2)) == pytest.approx(1)
    assert expectation(rho, PAULIS[3]) == pytest.approx(1)


@pytest.mark.parametrize("seed", range(5))
def test_expectation_matches_elementwise_trace(seed):
    rho = random_density(3, seed=seed)
    a = random_hermitian(3, seed + 100)
    oracle = sum(a[i, j] * rho[j, i] for i in range(3) for j in range(3))
    assert abs(expectation(rho, a) - oracle.real) < 1e-12


def test_expectation_errors():
    with pytest.raises(DimensionMismatchError):
        expectation(maximally_mixed(2), np.eye(3))
    # a non-Hermitian "state" with complex trace against a Hermitian observable
    with pytest.raises(NonRealError):
        expectation(np.array([[0, 1], [0, 0]]), PAULIS[2])


def test_maximally_entangled():
    np.testing.assert_allclose(maximally_entangled(2), np.array([1, 0, 0, 1]) / np.sqrt(2))
    for d in (2, 3, 4):
        v = maximally_entangled(d)
        assert abs(np.linalg.norm(v) - 1) < 1e-15
        np.testing.assert_allclose(partial_trace(projector(v), (d, d), [0]), np.eye(d) / d, atol=1e-15)


@pytest.mark.parametrize("seed", range(100))
def test_random_density_invariants(seed):
    d = 2 + seed % 4
    rank = 1 + seed % d
    rho = check_density(random_density(d, rank, seed))
    assert np.linalg.matrix_rank(rho, tol=1e-10) == rank


def test_random_density_pure_and_deterministic():
    rho = random_density(4, 1, seed=7)
    assert abs(np.trace(rho @ rho) - 1) < 1e-10
    np.testing.assert_array_equal(random_density(3, seed=5), random_density(3, seed=5))
    with pytest.raises(ValueError):
        random_density(3, 4, seed=0)


@pytest.mark.parametrize("d", [1, 2, 5, 8])
def test_random_unitary(d):
    u = random_unitary(d, seed=d)
    assert frob_dist(u.conj().T @ u, np.eye(d)) < 1e-12


def test_check_density_rejects():
    with pytest.raises(NotStateError):
        check_density(np.diag([0.5, 0.6]))
    with pytest.raises(NotStateError):
        check_density(np.diag([1.2, -0.2]))
    with pytest.raises(NotStateError):
        check_density(np.array([[0.5, 0.5], [0, 0.5]]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_qubit_bloch_ball(v):
    # inside the radius-sqrt(2) ball the reconstruction is a state, and it round-trips
    f = np.asarray(v)
    basis = gell_mann_basis(2)
    if np.linalg.norm(f) <= np.sqrt(2) * (1 - 1e-9):
        rho = state_from_bloch(f, basis)
        np.testing.assert_allclose(bloch_vector(rho, basis), f, atol=1e-12)
    elif np.linalg.norm(f) > np.sqrt(2) * (1 + 1e-6):
        with pytest.raises(NotStateError):
            state_from_bloch(f, basis)
