import numpy as np
import pytest
from numpy.testing import assert_allclose

from qrtkit import linalg as la
from qrtkit.errors import DimMismatchError, NotHermitianError


def test_eigh_matches_jacobi(rng):
    H = la.random_hermitian(6, seed=rng)
    ref = la.jacobi_eigh(H)
    dec = la.eigh(H)
    assert_allclose(dec.eigenvalues, np.sort(ref.eigenvalues), atol=1e-12)
    assert_allclose(dec.reconstruct(), H, atol=1e-12)
    assert_allclose(ref.reconstruct(), H, atol=1e-12)


def test_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        la.eigh(np.array([[0, 1], [0, 0]], dtype=complex))


def test_partial_trace_of_product(rng):
    a, b, c = (la.random_density(d, seed=rng) for d in (2, 3, 2))
    X = la.tensor(a, b, c)
    assert_allclose(la.partial_trace(X, [2, 3, 2], [1]), b, atol=1e-14)
    assert_allclose(la.partial_trace(X, [2, 3, 2], [0, 2]), np.kron(a, c), atol=1e-14)
    with pytest.raises(DimMismatchError):
        la.partial_trace(X, [2, 2, 2], [0])


def test_permute_systems_swaps_factors(rng):
    a, b = la.random_density(2, seed=rng), la.random_density(3, seed=rng)
    assert_allclose(la.permute_systems(np.kron(a, b), [2, 3], [1, 0]), np.kron(b, a), atol=1e-14)


def test_partial_transpose_detects_entanglement():
    phi = la.max_entangled(2)
    assert la.min_eig(la.partial_transpose(phi, [2, 2], [1])) == pytest.approx(-0.5)


def test_norms_and_parts(rng):
    H = la.random_hermitian(4, seed=rng)
    w = np.linalg.eigvalsh(H)
    assert la.trace_norm(H) == pytest.approx(np.sum(np.abs(w)))
    assert la.op_norm(H) == pytest.approx(np.max(np.abs(w)))
    assert_allclose(la.positive_part(H) - la.negative_part(H), H, atol=1e-12)


def test_coordinates_round_trip(rng):
    H = la.random_hermitian(3, seed=rng)
    assert_allclose(la.coords_to_herm(la.herm_to_coords(H)), H, atol=1e-14)
    x = la.herm_to_coords(H)
    assert_allclose(np.einsum("k,kij->ij", x, la.herm_basis(3)), H, atol=1e-14)


def test_random_states_are_valid(rng):
    assert la.is_density(la.random_density(4, seed=rng))
    assert la.is_density(la.random_pure(3, seed=rng))
    U = la.random_unitary(3, seed=rng)
    assert_allclose(U @ U.conj().T, np.eye(3), atol=1e-12)


def test_dephase_kills_off_diagonal(rng):
    rho = la.random_density(3, seed=rng)
    assert_allclose(la.dephase(rho), np.diag(np.diag(rho)))


def test_log2m_on_support():
    rho = np.diag([0.5, 0.5, 0.0]).astype(complex)
    assert_allclose(np.diag(la.log2m(rho)).real, [-1, -1, 0], atol=1e-12)


def test_json_round_trip(rng):
    H = la.random_hermitian(2, seed=rng)
    assert_allclose(la.matrix_from_json(la.matrix_to_json(H)), H)
