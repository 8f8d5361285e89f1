import numpy as np
import pytest
from numpy.testing import assert_allclose

from qrtkit import channels as ch
from qrtkit import linalg as la
from qrtkit.errors import ConfigError, ParseError
from qrtkit.theories import gibbs_state, stein_closure_check, theory_from_json, validate_axioms


def test_coherence_free_states(coherence):
    S = coherence.free_states("B")
    assert S.membership(np.diag([0.2, 0.8]))[0]
    assert not S.membership(0.5 * np.ones((2, 2)))[0]
    assert coherence.uniform_is_free("B")


def test_athermality_free_channels(athermality):
    g = athermality.gibbs["A"]
    assert athermality.is_free_channel(ch.identity_channel(2))[0]
    assert athermality.is_free_channel(ch.replacement_channel(g, 2))[0]
    assert not athermality.is_free_channel(ch.replacement_channel(la.basis_state(2, 1), 2))[0]
    assert not athermality.uniform_is_free("B")


def test_hadamard_is_not_free(coherence):
    assert not coherence.is_free_channel(ch.hadamard_channel())[0]
    assert coherence.is_free_channel(ch.dephasing_channel(2))[0]


@pytest.mark.parametrize("name", ["coherence", "athermality"])
def test_sampled_free_channels_are_free(name, coherence, athermality):
    T = coherence if name == "coherence" else athermality
    for seed in range(3):
        N = T.sample_channel(seed=seed)
        assert ch.is_cptp(N.choi, 2, 2)
        assert T.is_free_channel(N)[0]


@pytest.mark.parametrize("name", ["coherence", "athermality"])
def test_sampled_superchannel_maps_free_to_free(name, coherence, athermality):
    T = coherence if name == "coherence" else athermality
    theta = T.sample_superchannel(seed=4)
    assert T.is_free_channel(theta(T.sample_channel(seed=5)))[0]


@pytest.mark.parametrize("name", ["coherence", "athermality"])
def test_axioms_hold(name, coherence, athermality):
    T = coherence if name == "coherence" else athermality
    rep = validate_axioms(T, samples=3, seed=0)
    assert rep.passed, rep.summary()
    assert rep.max_violation <= 1e-7


def test_stein_closure(athermality):
    phi = athermality.state_param(("R", "A")).state(np.zeros(0))
    rep = stein_closure_check(athermality, phi, n=2, samples=2, seed=1)
    assert rep.passed, rep.summary()


def test_gibbs_state():
    g = gibbs_state([0.0, 1.0], beta=2.0)
    assert_allclose(np.diag(g).real, np.array([1, np.exp(-2)]) / (1 + np.exp(-2)))


def test_theory_from_json_round_trip(athermality):
    T = theory_from_json(athermality.to_json())
    assert_allclose(T.gibbs["B"], athermality.gibbs["B"])
    assert theory_from_json('{"theory": "coherence"}').name == "coherence"


@pytest.mark.parametrize("bad, err", [
    ('{"theory": "nope"}', ConfigError),
    ('{"dim_in": 2}', ConfigError),
    ('{"theory": "athermality"}', ConfigError),
    ('{"theory": ', ParseError),
])
def test_theory_from_json_errors(bad, err):
    with pytest.raises(err):
        theory_from_json(bad)
