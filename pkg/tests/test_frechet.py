import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose

from qrtkit import linalg as la
from qrtkit.frechet import dd1_general, dd1_log, dlog


def test_dlog_matches_finite_difference(rng):
    rho = la.random_density(4, seed=rng)
    X = la.random_hermitian(4, seed=rng)
    w, V = np.linalg.eigh(rho)
    h = 1e-6
    fd = (scipy.linalg.logm(rho + h * X) - scipy.linalg.logm(rho - h * X)) / (2 * h)
    assert_allclose(dlog(V, w, X), fd, atol=1e-6)


@pytest.mark.parametrize("gap", [0.0, 1e-12, 1e-5, 1e-1])
def test_divided_differences_near_degenerate(gap):
    w = np.array([0.3, 0.3 + gap])
    L = dd1_log(w)
    assert L[0, 0] == pytest.approx(1 / 0.3)
    # log1p form avoids the cancellation a naive quotient suffers
    expect = 1 / 0.3 if gap == 0 else np.log1p(gap / 0.3) / gap
    assert L[0, 1] == pytest.approx(expect, rel=1e-9)
    G = dd1_general(w, np.log, lambda x: 1 / x)
    assert G[0, 1] == pytest.approx(expect, rel=1e-6)
