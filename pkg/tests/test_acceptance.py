"""Acceptance criteria at their stated tolerances.

Each test prints one ``criterion k PASS/FAIL`` line; the lines are repeated
in the terminal summary.  The property suites come from
:mod:`qrtkit.harness.suites`; closed forms and LP/scalar oracles are
computed independently inside the suites or here.
"""

import time

import numpy as np
import pytest

from qrtkit import channels as ch
from qrtkit.harness import SuiteConfig
from qrtkit.harness.suites import SUITE_FUNCS
from qrtkit.sdp import diamond_norm, lr_to_cptp

COH = {"theory": "coherence"}
THERM = {"theory": "athermality", "energies_A": [0.0, 1.0], "beta": 1.0}


def run(suite, theories, seeds, **kw):
    cfg = SuiteConfig(theories=theories, suites=[suite], seeds=list(seeds), **kw)
    t0 = time.time()
    recs = []
    for name, T in cfg.build_theories():
        for seed in cfg.seeds:
            recs += SUITE_FUNCS[suite](cfg, name, T, seed)
    return recs, time.time() - t0


def summary(recs, seconds):
    bad = [r for r in recs if not r.passed]
    worst = min((r.slack + r.tol for r in recs), default=np.nan)
    text = f"{len(recs)} checks, {len(bad)} failed, min margin {worst:.2e}, {seconds:.0f}s"
    for r in bad[:5]:
        text += f"\n      {r.check} [{r.instance}] lhs={r.lhs:.6g} rhs={r.rhs:.6g} tol={r.tol:g} {r.message}"
    return not bad, text


def test_reduction(acceptance):
    recs, sec = run("reduction", [COH, THERM], range(10),
                    measures=["DF", "EF", "RF", "tRF", "DAF", "EAF"], tol=2e-4)
    ok, text = summary(recs, sec)
    assert acceptance(1, "reduction to the state measure", ok and sec <= 120, text)


def test_minimax(acceptance):
    recs, sec = run("minimax", [COH, THERM], range(10), tol=2e-4)
    ok, text = summary(recs, sec)
    assert acceptance(2, "max-min equals min-max", ok and sec <= 300, text)


def test_diamond_dmax_identity(acceptance):
    errs = []
    for k in range(20):
        N = ch.random_channel(2, 2, 2 + k % 3, seed=100 + k)
        M = ch.random_channel(2, 2, 2 + (k + 1) % 3, seed=200 + k)
        D = ch.LinearMap(2, 2, N.choi - M.choi)
        half = 0.5 * diamond_norm(D)
        errs.append(abs(2.0 ** lr_to_cptp(D).value - half) / half)
    had = diamond_norm(ch.LinearMap(2, 2, ch.identity_channel(2).choi - ch.hadamard_channel().choi))
    ok = max(errs) <= 1e-6 and abs(had - 2.0) <= 1e-6
    assert acceptance(3, "robustness to CPTP equals half the diamond norm", ok,
                      f"max rel err {max(errs):.2e}, ||id-H|| = {had:.9f}")


def test_faithfulness(acceptance):
    recs, sec = run("faithfulness", [COH, THERM], range(10))
    ok, text = summary(recs, sec)
    assert acceptance(4, "free channels score zero; Hadamard is resourceful", ok, text)


def test_monotonicity(acceptance):
    recs, sec = run("monotonicity", [COH, THERM], range(5), superchannels=10, tol=2e-4)
    ok, text = summary(recs, sec)
    n_theta = len({(r.instance.split("/")[0], r.instance.split("/")[1]) for r in recs})
    assert acceptance(5, "monotone under free superchannels", ok and n_theta == 100,
                      f"{n_theta} superchannels; {text}")


def test_continuity(acceptance):
    recs, sec = run("continuity", [COH, THERM], range(7), continuity_eps=[0.01, 0.05, 0.2])
    ok, text = summary(recs, sec)
    assert acceptance(6, "asymptotic continuity bound", ok and len(recs) >= 20, text)


def test_smoothing_order(acceptance):
    recs, sec = run("smoothing", [COH, THERM], range(5), eps_grid=[0.05, 0.1, 0.5])
    ok, text = summary(recs, sec)
    assert acceptance(7, "liberal below diamond smoothing", ok, text)


def test_subadditivity(acceptance):
    recs, sec = run("subadditivity", [COH], range(10), zero_tol=1e-5)
    ok, text = summary(recs, sec)
    assert acceptance(8, "two-copy subadditivity", ok, text)


def test_stein(acceptance):
    recs, sec = run("stein", [THERM], [0], stein_eps=0.05, stein_nmax=3)
    ok, text = summary(recs, sec)
    assert acceptance(9, "finite-n Stein exponents", ok and len(recs) == 7 and sec <= 300, text)


def test_chernoff(acceptance):
    recs, sec = run("chernoff", [THERM], range(5))
    ok, text = summary(recs, sec)
    assert acceptance(10, "Chernoff-type lower bound", ok and len(recs) == 6, text)


def test_ogawa_nagaoka(acceptance):
    recs, sec = run("ogawa_nagaoka", [COH], range(20))
    ok, text = summary(recs, sec)
    assert acceptance(11, "Ogawa-Nagaoka inequality", ok and len(recs) == 180, text)


def test_axioms(acceptance):
    recs, sec = run("axioms", [COH, THERM], [0], axiom_samples=100)
    ok, text = summary(recs, sec)
    assert acceptance(12, "axiom validators", ok, text)
