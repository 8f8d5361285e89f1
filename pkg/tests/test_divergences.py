import numpy as np
import pytest
from numpy.testing import assert_allclose

from qrtkit import channels as ch
from qrtkit import linalg as la
from qrtkit.divergences import (binary_entropy, channel_divergence, dmax, dmax_channels, entropy, petz_renyi,
                                rel_entropy, relent_grads, trace_distance)
from qrtkit.errors import DomainError


def test_classical_relative_entropy():
    p, q = np.array([0.3, 0.7]), np.array([0.6, 0.4])
    expect = np.sum(p * np.log2(p / q))
    assert rel_entropy(np.diag(p), np.diag(q)) == pytest.approx(expect, abs=1e-14)


def test_relative_entropy_off_support():
    v = rel_entropy(np.eye(2) / 2, np.diag([1.0, 0.0]))
    assert v == np.inf and not v.support_ok
    assert rel_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2) == pytest.approx(1.0)


def test_entropy_and_binary_entropy(rng):
    assert entropy(np.eye(4) / 4) == pytest.approx(2.0)
    assert entropy(la.random_pure(3, seed=rng)) == pytest.approx(0.0, abs=1e-12)
    assert binary_entropy(0.5) == 1.0
    with pytest.raises(DomainError):
        binary_entropy(1.5)


def test_dmax_commuting():
    p, q = np.array([0.3, 0.7]), np.array([0.6, 0.4])
    assert dmax(np.diag(p), np.diag(q)) == pytest.approx(np.log2(np.max(p / q)))


def test_divergence_ordering(rng):
    rho, sig = la.random_density(3, seed=rng), la.random_density(3, seed=rng)
    d = rel_entropy(rho, sig)
    assert petz_renyi(0.5, rho, sig) <= d + 1e-12
    assert d <= petz_renyi(1.5, rho, sig) + 1e-12
    assert petz_renyi(1.5, rho, sig) <= dmax(rho, sig) + 1e-12
    assert petz_renyi(0.999, rho, sig) == pytest.approx(d, abs=1e-2)
    assert 0 <= trace_distance(rho, sig) <= 1
    with pytest.raises(DomainError):
        petz_renyi(3.0, rho, sig)


def test_relent_gradients_against_finite_differences(rng):
    rho, sig = la.random_density(3, seed=rng), la.random_density(3, seed=rng)
    _, g_r, g_s = relent_grads(rho, sig)
    X = la.random_hermitian(3, seed=rng)
    X -= np.trace(X) / 3 * np.eye(3)
    h = 1e-6
    fd_r = (rel_entropy(rho + h * X, sig) - rel_entropy(rho - h * X, sig)) / (2 * h)
    fd_s = (rel_entropy(rho, sig + h * X) - rel_entropy(rho, sig - h * X)) / (2 * h)
    assert np.real(np.trace(g_r @ X)) == pytest.approx(fd_r, abs=1e-7)
    assert np.real(np.trace(g_s @ X)) == pytest.approx(fd_s, abs=1e-7)


def test_channel_divergence_identity_vs_depolarizing():
    res = channel_divergence(ch.identity_channel(2), ch.depolarizing_channel(2, 1.0), restarts=4)
    assert res.value == pytest.approx(2.0, abs=1e-8)
    assert dmax_channels(ch.identity_channel(2), ch.depolarizing_channel(2, 1.0)) == pytest.approx(2.0)


def test_channel_divergence_of_replacements(rng):
    w, s = la.random_density(2, seed=rng), la.random_density(2, seed=rng)
    res = channel_divergence(ch.replacement_channel(w, 2), ch.replacement_channel(s, 2), restarts=3)
    assert_allclose(res.value, rel_entropy(w, s), atol=1e-9)
