import numpy as np
import pytest
from numpy.testing import assert_allclose

from qrtkit import channels as ch
from qrtkit import linalg as la
from qrtkit.errors import DimMismatchError


def test_identity_choi_is_max_entangled():
    J = ch.identity_channel(2).choi
    assert_allclose(J, la.max_entangled(2, normalized=False), atol=1e-14)


def test_apply_matches_kraus(rng, qubit_channel):
    K = ch.kraus_from_choi(qubit_channel)
    rho = la.random_density(2, seed=rng)
    expect = sum(k @ rho @ k.conj().T for k in K)
    assert_allclose(ch.apply(qubit_channel, rho), expect, atol=1e-12)
    assert ch.is_cptp(qubit_channel.choi, 2, 2)


def test_adjoint_duality(rng, qubit_channel):
    rho = la.random_density(4, seed=rng)
    Y = la.random_hermitian(4, seed=rng)
    lhs = np.trace(Y @ ch.apply(qubit_channel, rho, dim_R=2))
    rhs = np.trace(ch.apply_adjoint(qubit_channel, Y, dim_R=2) @ rho)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_input_adjoint_is_linear_in_choi(rng, qubit_channel):
    rho = la.random_density(4, seed=rng)
    Y = la.random_hermitian(4, seed=rng)
    G = ch.input_adjoint(rho, Y, 2, 2, 2)
    lhs = np.trace(Y @ ch.apply_choi(qubit_channel.choi, rho, 2, 2, 2))
    assert np.trace(G @ qubit_channel.choi) == pytest.approx(lhs, abs=1e-12)


def test_compose_and_tensor(rng):
    N, M = ch.random_channel(2, 2, 2, seed=1), ch.random_channel(2, 2, 2, seed=2)
    rho = la.random_density(2, seed=rng)
    assert_allclose(ch.apply(ch.compose(M, N), rho), ch.apply(M, ch.apply(N, rho)), atol=1e-12)
    sig = la.random_density(2, seed=rng)
    out = ch.apply(ch.tensor_channels(N, M), np.kron(rho, sig))
    assert_allclose(out, np.kron(ch.apply(N, rho), ch.apply(M, sig)), atol=1e-12)


def test_hadamard_and_replacement(rng):
    H = ch.hadamard_channel()
    assert_allclose(ch.apply(H, la.basis_state(2, 0)), 0.5 * np.ones((2, 2)), atol=1e-14)
    w = la.random_density(2, seed=rng)
    R = ch.replacement_channel(w, 3)
    assert_allclose(ch.apply(R, la.random_density(3, seed=rng)), w, atol=1e-14)


def test_superchannel_identity_and_dims(qubit_channel):
    theta = ch.identity_superchannel(2, 2)
    assert_allclose(theta(qubit_channel).choi, qubit_channel.choi, atol=1e-14)
    with pytest.raises(DimMismatchError):
        theta(ch.random_channel(3, 2, 2, seed=0))


def test_superchannel_preserves_cptp(athermality, qubit_channel):
    theta = athermality.sample_superchannel(seed=3)
    assert ch.is_cptp(theta(qubit_channel).choi, 2, 2)


def test_json_round_trip(qubit_channel):
    back = ch.channel_from_json(ch.channel_to_json(qubit_channel))
    assert_allclose(back.choi, qubit_channel.choi)


def test_classical_channel():
    Tm = np.array([[0.9, 0.2], [0.1, 0.8]])
    out = ch.apply(ch.classical_channel(Tm), np.diag([0.3, 0.7]).astype(complex))
    assert_allclose(np.diag(out).real, Tm @ [0.3, 0.7])
