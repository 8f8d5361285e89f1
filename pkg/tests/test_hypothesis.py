import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import linprog

from qrtkit import channels as ch
from qrtkit import hypothesis as hy
from qrtkit import linalg as la
from qrtkit.errors import DimensionLimitError, DomainError, InfeasibleError


def _lp_beta(p, q, eps):
    res = linprog(q, A_ub=[-p], b_ub=[-(1 - eps)], bounds=[(0, 1)] * len(p), method="highs")
    return res.fun


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.3])
def test_neyman_pearson_classical(eps, rng):
    p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
    beta, mu, P, gap = hy.neyman_pearson(np.diag(p), np.diag(q), eps)
    assert beta == pytest.approx(_lp_beta(p, q, eps), abs=1e-9)
    assert abs(gap) < 1e-8
    assert np.real(np.trace(np.diag(p) @ P)) >= 1 - eps - 1e-9


def test_neyman_pearson_quantum_matches_sdp(rng):
    from qrtkit.sdp import SdpProblem
    rho, sig = la.random_density(3, seed=rng), la.random_density(3, seed=rng)
    p = SdpProblem()
    P = p.new_herm(3, psd=True)
    p.add_psd(np.eye(3) - P)
    p.add_psd(P.map(lambda X: np.trace(rho @ X, axis1=-2, axis2=-1)[..., None, None]) - 0.95)
    p.minimize(P.map(lambda X: sig @ X).trace())
    assert hy.neyman_pearson(rho, sig, 0.05)[0] == pytest.approx(p.solve().primal_value, abs=1e-7)


@pytest.mark.parametrize("n", [1, 2])
def test_beta_routes_agree_athermality(n, athermality, qubit_channel):
    phi = athermality.state_param(("R", "A")).state(np.zeros(0))
    a = hy.beta_opt(qubit_channel, phi, n, 0.05, athermality, "np")
    b = hy.beta_opt(qubit_channel, phi, n, 0.05, athermality, "sdp")
    assert a.method == "np" and b.method == "sdp"
    assert a.beta == pytest.approx(b.beta, abs=1e-7)


def test_beta_sdp_is_worst_case(coherence, qubit_channel):
    phi = np.diag([0.5, 0, 0, 0.5]).astype(complex)
    pt = hy.beta_opt(qubit_channel, phi, 1, 0.05, coherence)
    assert pt.method == "sdp"
    assert hy.alpha_error(qubit_channel, pt.test, phi) <= 0.05 + 1e-7
    worst, _ = hy.beta_worst(pt.test, phi, 1, coherence)
    assert worst == pytest.approx(pt.beta, abs=1e-6)
    with pytest.raises(DomainError):
        hy.beta_opt(qubit_channel, phi, 1, 0.05, coherence, "np")


def test_beta_errors(athermality, qubit_channel):
    phi = athermality.state_param(("R", "A")).state(np.zeros(0))
    with pytest.raises(InfeasibleError):
        hy.beta_opt(qubit_channel, phi, 1, 1.0, athermality)
    with pytest.raises(DimensionLimitError):
        hy.beta_opt(qubit_channel, phi, 4, 0.05, athermality)


def test_test_operator_validation():
    with pytest.raises(DomainError):
        hy.TestOperator(2 * np.eye(2))


def test_stein_scan_rows(athermality, qubit_channel):
    scan = hy.stein_scan(qubit_channel, athermality, 0.05, 2)
    rows = list(scan.rows())
    assert [r["n"] for r in rows] == [1, 2]
    assert set(rows[0]) == {"n", "epsilon", "phi_id", "beta", "exponent", "inner_relent", "gap"}
    assert_allclose([r["exponent"] for r in rows], [-np.log2(r["beta"]) / r["n"] for r in rows])


def test_hadamard_exponents_nondecreasing_within_slack(coherence):
    # classically correlated free input; free outputs form a non-singleton set
    phi = np.diag([0.5, 0.0, 0.0, 0.5])
    exps = [hy.beta_opt(ch.hadamard_channel(), phi, n, 0.05, coherence).exponent for n in (1, 2)]
    assert exps[0] > 0.5
    assert exps[1] >= exps[0] - 0.05


def test_p_error_singleton_is_helstrom(athermality, qubit_channel):
    phi = athermality.state_param(("R", "A")).state(np.zeros(0))
    g = athermality.gibbs["A"]
    rho = np.kron(g, ch.apply(qubit_channel, g))
    sig = np.kron(g, g)
    pe, _ = hy.p_error(qubit_channel, athermality, phi, 0.3)
    assert pe == pytest.approx(0.5 * (1 - la.trace_norm(0.3 * rho - 0.7 * sig)), abs=1e-7)


def test_chernoff_bound_holds(athermality, qubit_channel):
    rep = hy.chernoff_lower(qubit_channel, athermality)
    assert rep.holds
    assert 0 < rep.alpha_star < 1
