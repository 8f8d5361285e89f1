import numpy as np
import pytest
from numpy.testing import assert_allclose

from qrtkit import channels as ch
from qrtkit import linalg as la
from qrtkit import measures as ms
from qrtkit.divergences import entropy, rel_entropy
from qrtkit.errors import NotApplicableError


@pytest.fixture
def fast():
    return ms.MeasureOptions(restarts=3, max_iter=150, seed=0)


@pytest.fixture
def omega(rng):
    return la.random_density(2, seed=rng)


def test_state_resource_coherence_closed_form(coherence, omega):
    # relative entropy of coherence S(Δω) − S(ω)
    res = ms.d_state_resource(omega, coherence, ("B",))
    assert res.value == pytest.approx(entropy(la.dephase(omega)) - entropy(omega), abs=1e-7)


def test_state_robustness_coherence_qubit(coherence, omega):
    # for a qubit the coherence robustness equals the l1 coherence
    res = ms.dmax_state_resource(omega, coherence, ("B",))
    assert res.value == pytest.approx(np.log2(1 + 2 * abs(omega[0, 1])), abs=1e-6)


def test_state_resource_athermality(athermality, omega):
    res = ms.d_state_resource(omega, athermality, ("B",))
    assert res.value == pytest.approx(rel_entropy(omega, athermality.gibbs["B"]), abs=1e-7)


def test_hadamard_values(coherence, fast):
    H = ch.hadamard_channel()
    d = ms.d_f(H, coherence, fast)
    e = ms.e_f(H, coherence, fast)
    assert_allclose([d.lower, d.upper, e.lower, e.upper], 1.0, atol=1e-5)
    assert ms.lr_f(H, coherence).value >= d.value - 1e-7


@pytest.mark.parametrize("name", ["DF", "EF", "RF", "tRF"])
def test_replacement_reduction(name, coherence, omega, fast):
    N = ch.replacement_channel(omega, 2)
    target = ms.d_state_resource(omega, coherence, ("B",)).value
    assert ms.evaluate(name, N, coherence, fast).value == pytest.approx(target, abs=2e-4)


def test_robustness_reduction(coherence, omega):
    N = ch.replacement_channel(omega, 2)
    target = ms.dmax_state_resource(omega, coherence, ("B",)).value
    assert ms.lr_f(N, coherence).value == pytest.approx(target, abs=1e-6)
    assert ms.underline_lr_f(N, coherence, restarts=2).value == pytest.approx(target, abs=1e-6)


def test_free_channels_score_zero(athermality, fast):
    N = athermality.sample_channel(seed=2)
    for name in ("DF", "EF", "LRF", "uLRF", "tRF"):
        assert ms.evaluate(name, N, athermality, fast).hi <= 1e-5


def test_athermality_collapses_to_free_energy(athermality, qubit_channel, fast):
    g = athermality.gibbs["A"]
    expect = rel_entropy(ch.apply(qubit_channel, g), g)
    assert ms.e_f(qubit_channel, athermality, fast).value == pytest.approx(expect, abs=1e-6)
    assert ms.tilde_r_f(qubit_channel, athermality, fast).value == pytest.approx(expect, abs=1e-6)


def test_r_f_matches_thermodynamic_capacity(athermality, qubit_channel):
    opts = ms.MeasureOptions(restarts=6, seed=0)
    g = athermality.gibbs["A"]
    rf = ms.r_f(qubit_channel, athermality, opts).value
    tc = ms.thermo_capacity(qubit_channel, g, g, opts).value
    assert rf == pytest.approx(tc, abs=2e-4)


def test_bracket_is_tight_on_random_channel(coherence, qubit_channel, fast):
    r = ms.d_f(qubit_channel, coherence, fast)
    assert r.status == "bracket"
    assert r.upper - r.lower <= 2e-4
    assert r.lo <= r.value <= r.hi


def test_cutting_planes_survive_tiny_input_weights(coherence):
    # trial inputs with ~1e-9 weights once produced a spurious infinite cut
    N = ch.random_channel(2, 2, 4, seed=1)
    r = ms.e_f(N, coherence, ms.MeasureOptions(restarts=4, seed=1))
    assert r.upper - r.lower <= 2e-4
    assert r.diagnostics["cut_iterations"] < 10


def test_measure_ordering(coherence, qubit_channel, fast):
    d = ms.d_f(qubit_channel, coherence, fast)
    e = ms.e_f(qubit_channel, coherence, fast)
    lr = ms.lr_f(qubit_channel, coherence)
    assert e.lo <= d.hi + 1e-6
    assert d.lo <= lr.hi + 1e-6
    assert d.lo <= ms.upper_bound_log(qubit_channel, coherence)


def test_upper_bound_needs_free_uniform(athermality, qubit_channel):
    with pytest.raises(NotApplicableError):
        ms.upper_bound_log(qubit_channel, athermality)


def test_two_copy_regularization_is_subadditive(coherence, qubit_channel, fast):
    seq = ms.product_regularized(qubit_channel, coherence, "E", 2, fast)
    assert seq.monotone_check
    assert 2 * seq[2].lo <= 2 * seq[1].hi + 1e-5


def test_amortized_dominates(coherence, qubit_channel, fast):
    e = ms.e_f(qubit_channel, coherence, fast)
    ea = ms.amortized_e_f(qubit_channel, coherence, fast)
    assert ea.value >= e.lo - 1e-6


def test_result_json(coherence):
    out = ms.lr_f(ch.hadamard_channel(), coherence).to_json()
    assert out["status"] == "exact" and isinstance(out["value"], float)


def test_unknown_measure(coherence, qubit_channel):
    with pytest.raises(KeyError):
        ms.evaluate("XYZ", qubit_channel, coherence)


@pytest.mark.parametrize("n", [2, 3])
def test_lift_grad_matches_finite_difference(n, coherence, rng):
    setup = ms.CopySetup(ch.random_channel(2, 2, 2, seed=1), coherence, n)
    phi = la.random_density(4, seed=rng)
    G = la.random_hermitian(4 ** n, seed=rng)
    X = la.random_hermitian(4, seed=rng)
    h = 1e-6

    def f(p):
        return np.real(np.trace(G @ setup.lift(p)))

    fd = (f(phi + h * X) - f(phi - h * X)) / (2 * h)
    assert np.real(np.trace(setup.lift_grad(phi, G) @ X)) == pytest.approx(fd, abs=1e-7)
