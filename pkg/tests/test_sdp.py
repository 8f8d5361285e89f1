import numpy as np
import pytest
from numpy.testing import assert_allclose

from qrtkit import channels as ch
from qrtkit import linalg as la
from qrtkit.sdp import SdpProblem, diamond_norm, lr_to_cptp


def _diff(N, M):
    return ch.LinearMap(N.dim_in, N.dim_out, N.choi - M.choi)


def test_scalar_program():
    p = SdpProblem()
    x = p.new_real()
    p.add_psd(x - 1.0)
    p.minimize(x)
    sol = p.solve()
    assert sol.optimal
    assert sol.primal_value == pytest.approx(1.0, abs=1e-8)


def test_max_eigenvalue_program(rng):
    H = la.random_hermitian(3, seed=rng)
    p = SdpProblem()
    X = p.new_herm(3, psd=True)
    p.add_eq(X.trace(), 1.0)
    p.maximize(X.map(lambda Y: H @ Y).trace())
    sol = p.solve()
    assert sol.primal_value == pytest.approx(np.max(np.linalg.eigvalsh(H)), abs=1e-7)
    assert abs(sol.gap) < 1e-6


def test_sensitivity_matches_finite_difference(rng):
    # min Tr[C X] s.t. X ⪰ A, Tr X = 2; perturb A along E
    C = la.random_density(2, seed=rng)
    A = 0.3 * la.random_density(2, seed=rng)
    E = la.random_hermitian(2, seed=rng)

    def solve(Am):
        p = SdpProblem()
        X = p.new_herm(2)
        p.add_psd(X - Am)
        p.add_eq(X.trace(), 2.0)
        p.minimize(X.map(lambda Y: C @ Y).trace())
        return p.solve(tol=1e-11)

    sol = solve(A)
    h = 1e-5
    fd = (solve(A + h * E).primal_value - solve(A - h * E).primal_value) / (2 * h)
    assert sol.sensitivity(dpsd={0: -E}) == pytest.approx(fd, abs=1e-4)


def test_diamond_norm_identity_minus_hadamard():
    assert diamond_norm(_diff(ch.identity_channel(2), ch.hadamard_channel())) == pytest.approx(2.0, abs=1e-6)


def test_diamond_norm_forms_agree():
    N, M = ch.random_channel(2, 2, 2, seed=1), ch.random_channel(2, 2, 2, seed=2)
    D = _diff(N, M)
    assert diamond_norm(D, "general") == pytest.approx(diamond_norm(D, "simple"), abs=1e-6)


def test_diamond_norm_depolarizing_family():
    # ‖id − Dep_p‖⋄ = 2p(d²−1)/d² for the qubit depolarizing channel
    for p in (0.1, 0.5):
        v = diamond_norm(_diff(ch.identity_channel(2), ch.depolarizing_channel(2, p)))
        assert v == pytest.approx(1.5 * p, abs=1e-6)


def test_lr_to_cptp_of_channel_is_zero(qubit_channel):
    assert lr_to_cptp(qubit_channel).value == pytest.approx(0.0, abs=1e-7)
    assert lr_to_cptp(ch.LinearMap(2, 2, np.zeros((4, 4)))).neg_inf
