import numpy as np
import pytest

from qrtkit import channels as ch
from qrtkit import linalg as la
from qrtkit import measures as ms
from qrtkit import smoothing as sm
from qrtkit.divergences import rel_entropy
from qrtkit.errors import DimensionLimitError, DomainError


@pytest.fixture(scope="module")
def setup_lr():
    from qrtkit.theories import coherence_theory
    T = coherence_theory(2)
    N = ch.random_channel(2, 2, 4, seed=11)
    return T, N, ms.lr_f(N, T).value


@pytest.fixture
def phi():
    return la.max_entangled(2)


def test_zero_radius_reduces_to_robustness(setup_lr, phi):
    T, N, lr = setup_lr
    assert sm.liberal_smoothed_lr(N, T, phi, 0.0).value == pytest.approx(lr, abs=1e-6)
    assert sm.diamond_smoothed_lr(N, T, 0.0).value == pytest.approx(lr, abs=1e-6)


def test_liberal_below_diamond(setup_lr, phi):
    T, N, _ = setup_lr
    for eps in (0.05, 0.1, 0.5):
        lib = sm.liberal_smoothed_lr(N, T, phi, eps).value
        assert lib <= sm.diamond_smoothed_lr(N, T, eps).value + 1e-6


def test_nonincreasing_in_radius(setup_lr, phi):
    T, N, _ = setup_lr
    lib = [sm.liberal_smoothed_lr(N, T, phi, e).value for e in (0.0, 0.05, 0.1, 0.5)]
    dia = [sm.diamond_smoothed_lr(N, T, e).value for e in (0.0, 0.05, 0.1, 0.5)]
    assert np.all(np.diff(lib) <= 1e-6)
    assert np.all(np.diff(dia) <= 1e-6)


def test_output_variant_below_channel_variant(setup_lr, phi):
    T, N, _ = setup_lr
    a = sm.liberal_smoothed_lr(N, T, phi, 0.1, variant="output").value
    b = sm.liberal_smoothed_lr(N, T, phi, 0.1, variant="channel").value
    assert a <= b + 1e-6


def test_unit_radius_admits_zero_map(setup_lr, phi):
    T, N, _ = setup_lr
    assert sm.liberal_smoothed_lr(N, T, phi, 1.0).value == -np.inf
    assert sm.liberal_smoothed_lr(N, T, phi, 2.0).value == -np.inf


def test_diamond_radius_reaching_free_channel(coherence):
    # ½‖id − Δ‖⋄ = ½ for the qubit dephasing channel Δ, which is free
    assert sm.diamond_smoothed_lr(ch.identity_channel(2), coherence, 1.0).value == pytest.approx(0.0, abs=1e-6)


def test_outer_maximization_respects_input_value(setup_lr, phi):
    T, N, _ = setup_lr
    opt = sm.lr_eps(N, T, 0.1, restarts=2, max_iter=60)
    assert opt.value >= sm.liberal_smoothed_lr(N, T, phi, 0.1).value - 1e-6


def test_domain_errors(setup_lr):
    T, N, _ = setup_lr
    with pytest.raises(DomainError):
        sm.diamond_smoothed_lr(N, T, -0.1)
    with pytest.raises(DimensionLimitError):
        sm.lr_eps_n(N, T, 0.1, n=3)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_ogawa_nagaoka(n, t, rng):
    rho, sig = la.random_density(2, seed=rng), la.random_density(2, seed=rng)
    rep = sm.ogawa_nagaoka_check(rho, sig, rel_entropy(rho, sig) + 0.1, t, n)
    assert rep.holds
    assert rep.slack >= -1e-9


def test_ogawa_nagaoka_domain(rng):
    rho = la.random_density(2, seed=rng)
    with pytest.raises(DomainError):
        sm.ogawa_nagaoka_check(rho, rho, 0.1, 0.0, 1)
