"""Property suites: each returns a list of :class:`Record` objects."""

from __future__ import annotations

import logging
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .. import channels as ch
from .. import hypothesis as hy
from .. import linalg as la
from .. import measures as ms
from .. import smoothing as sm
from ..divergences import binary_entropy, entropy, rel_entropy
from ..errors import QrtError
from ..sdp import diamond_norm
from ..theories import AthermalityTheory, CoherenceTheory, ResourceTheory, stein_closure_check, validate_axioms
from .config import SuiteConfig

log = logging.getLogger(__name__)


@dataclass
class Record:
    """One inequality check ``lhs ≤ rhs`` with tolerance ``tol``.

    Equalities are recorded as ``|a − b| ≤ 0``.  ``status`` is
    ``certified`` when both sides carry certificates, ``heuristic`` when a
    side is only a multistart estimate, and ``error`` when a solve failed.
    """
    suite: str
    check: str
    instance: str
    lhs: float
    rhs: float
    tol: float
    status: str = "certified"
    message: str = ""

    @property
    def slack(self) -> float:
        return float(self.rhs - self.lhs)

    @property
    def passed(self) -> bool:
        return self.status != "error" and bool(self.slack >= -self.tol)

    def to_json(self) -> dict:
        return {"suite": self.suite, "check": self.check, "instance": self.instance,
                "lhs": _num(self.lhs), "rhs": _num(self.rhs), "slack": _num(self.slack),
                "tol": self.tol, "passed": self.passed, "status": self.status, "message": self.message}


CSV_COLUMNS = ("suite", "check", "instance", "lhs", "rhs", "slack", "tol", "passed", "status", "message")


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else ("inf" if x > 0 else ("-inf" if x < 0 else "nan"))


@dataclass
class SuiteReport:
    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    def summary(self) -> dict:
        by = {}
        for r in self.records:
            d = by.setdefault(r.suite, {"total": 0, "passed": 0, "failed": 0, "errors": 0})
            d["total"] += 1
            d["passed"] += r.passed
            d["failed"] += (not r.passed) and r.status != "error"
            d["errors"] += r.status == "error"
        return {"total": len(self.records), "passed": sum(r.passed for r in self.records),
                "failed": len(self.failures()), "by_suite": by}

    def rows(self):
        for r in self.records:
            yield r.to_json()


class _Ctx:
    def __init__(self, suite, theory_name, cfg):
        self.suite, self.tname, self.cfg = suite, theory_name, cfg
        self.records = []

    def le(self, check, inst, lhs, rhs, tol=None, status="certified", message=""):
        self.records.append(Record(self.suite, check, f"{self.tname}/{inst}", float(lhs), float(rhs),
                                   self.cfg.tol if tol is None else tol, status, message))

    def ordered(self, check, inst, L, R, tol=None, scale=1.0):
        """``L ≤ R`` for two measure results, comparing ``L``'s upper end to ``R``'s lower end.

        Without an upper end for ``L`` the two lower ends are compared and
        the record is only ``heuristic``.
        """
        certified = np.isfinite(L.upper) and R.status in ("exact", "bracket", "lower_bound")
        lhs = L.upper if np.isfinite(L.upper) else L.lo
        self.le(check, inst, scale * lhs, scale * R.lo, tol, "certified" if certified else "heuristic")

    def eq(self, check, inst, a, b, tol=None, status="certified"):
        self.le(check, inst, abs(float(a) - float(b)), 0.0, tol, status, f"a={float(a):.10g} b={float(b):.10g}")

    def error(self, check, inst, exc):
        self.records.append(Record(self.suite, check, f"{self.tname}/{inst}", np.nan, np.nan,
                                   self.cfg.tol, "error", f"{type(exc).__name__}: {exc}"))


def _opts(cfg: SuiteConfig, seed, rhs=False, **kw):
    return ms.MeasureOptions(restarts=cfg.rhs_restarts if rhs else cfg.restarts, seed=seed,
                             max_iter=cfg.max_iter, **kw)


def _status(*results) -> str:
    return "certified" if all(r.status in ("exact", "bracket") for r in results) else "heuristic"


def _random_channel(T, seed):
    return ch.random_channel(T.dims["A"], T.dims["B"], T.dims["B"] ** 2, seed=seed)


def _measures(names, N, T, opts, eps=0.1):
    """Evaluate measures in an order that lets later ones start from earlier witnesses."""
    out = {}
    for name in names:
        o = ms.MeasureOptions(**{**opts.__dict__, "initial": []})
        if name == "DAF" and "DF" in out:
            o.initial = [out["DF"].witness_state]
        if name == "EAF" and "EF" in out:
            o.initial = [out["EF"].witness_state]
        if name == "RF" and "tRF" in out:
            o.initial = [out["tRF"].witness_state]
        if name == "uLReps":
            out[name] = sm.underline_lr_eps(N, T, eps, o)
        else:
            out[name] = ms.evaluate(name, N, T, o)
    return out


def _order(names):
    pri = {"DF": 0, "EF": 1, "tRF": 2}
    return sorted(names, key=lambda n: pri.get(n, 3))


# --------------------------------------------------------------------------- #
# Suites
# --------------------------------------------------------------------------- #

def reduction_suite(cfg: SuiteConfig, tname: str, T: ResourceTheory, seed: int) -> list:
    c = _Ctx("reduction", tname, cfg)
    rng = la.as_rng(seed)
    w = la.random_density(T.dims["B"], seed=rng)
    N = ch.replacement_channel(w, T.dims["A"])
    target = ms.d_state_resource(w, T, ("B",))
    if isinstance(T, CoherenceTheory):
        c.eq("state_resource_vs_analytic", seed, target.value, entropy(la.dephase(w)) - entropy(w), 1e-4)
    elif isinstance(T, AthermalityTheory):
        c.eq("state_resource_vs_analytic", seed, target.value, rel_entropy(w, T.gibbs["B"]), 1e-4)
    res = _measures(_order([m for m in cfg.measures if m not in ("LRF", "uLRF")]), N, T, _opts(cfg, seed))
    for name, r in res.items():
        c.eq(f"{name}_vs_state", seed, r.value, target.value, status=_status(r))
    dmax_t = ms.dmax_state_resource(w, T, ("B",))
    for name in ("LRF", "uLRF"):
        if name in cfg.measures:
            r = ms.evaluate(name, N, T, _opts(cfg, seed))
            c.eq(f"{name}_vs_state", seed, r.value, dmax_t.value, status=_status(r))
    return c.records


def faithfulness_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("faithfulness", tname, cfg)
    N = T.sample_channel(seed=seed, mix=3)
    res = _measures(_order(cfg.measures), N, T, _opts(cfg, seed))
    for name, r in res.items():
        c.le(f"{name}_free_is_zero", seed, r.hi, 0.0, cfg.zero_tol, _status(r))
    if isinstance(T, CoherenceTheory) and seed == cfg.seeds[0]:
        H = ch.hadamard_channel()
        for name in ("DF", "EF", "LRF"):
            r = ms.evaluate(name, H, T, _opts(cfg, seed, rhs=True))
            c.le(f"{name}_hadamard_positive", "hadamard", 0.1, r.lo, 0.0, _status(r))
    return c.records


def minimax_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("minimax", tname, cfg)
    N = _random_channel(T, seed)
    for name, f in (("DF", ms.d_f), ("EF", ms.e_f)):
        r = f(N, T, _opts(cfg, seed))
        c.eq(f"{name}_orders_agree", seed, r.upper, r.lower)
    return c.records


def monotonicity_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("monotonicity", tname, cfg)
    names = _order(list(cfg.measures) + ["uLReps"])
    N = _random_channel(T, seed)
    right = _measures(names, N, T, _opts(cfg, seed, rhs=True))
    for k in range(cfg.superchannels):
        theta = T.sample_superchannel(seed=10_000 * seed + k)
        M = theta(N)
        left = _measures(names, M, T, _opts(cfg, seed))
        for name in names:
            c.ordered(f"{name}_monotone", f"{seed}.{k}", left[name], right[name])
    return c.records


def continuity_kappa(T: ResourceTheory) -> float:
    """Ceiling on ``max_N D_F(N)`` used in the continuity bound.

    ``log|B|²|A|`` when uniform states are free.  Otherwise also
    ``log|B| − log λ_min(σ_B)`` for the most mixed free output ``σ_B``,
    which bounds ``D(N(φ)‖φ_R ⊗ σ_B)``; the larger of the two is used.
    """
    dA, dB = T.dims["A"], T.dims["B"]
    k = float(np.log2(dB * dB * dA))
    if not T.uniform_is_free(("B",)):
        g = T.free_states(("B",)).interior
        k = max(k, float(np.log2(dB) - np.log2(la.min_eig(g))))
    return k


def continuity_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("continuity", tname, cfg)
    kappa = continuity_kappa(T)
    N = _random_channel(T, seed)
    R = _random_channel(T, seed + 7919)
    half = 0.5 * diamond_norm(ch.LinearMap(N.dim_in, N.dim_out, R.choi - N.choi))
    dN = ms.d_f(N, T, _opts(cfg, seed))
    for eps in cfg.continuity_eps:
        s = min(eps / half, 1.0)
        M = ch.ChoiChannel(N.dim_in, N.dim_out, (1 - s) * N.choi + s * R.choi)
        e = 0.5 * diamond_norm(ch.LinearMap(N.dim_in, N.dim_out, M.choi - N.choi))
        dM = ms.d_f(M, T, _opts(cfg, seed))
        diff = max(dM.hi - dN.lo, dN.hi - dM.lo)
        bound = (1 + e) * binary_entropy(e / (1 + e)) + e * kappa
        c.le(f"DF_continuity_eps{eps}", seed, diff, bound, 0.0, _status(dN, dM), f"eps={e:.6g}")
    return c.records


def inequality_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("inequality", tname, cfg)
    N = _random_channel(T, seed)
    r = _measures(_order(["DF", "EF", "LRF", "uLRF", "RF", "tRF", "DAF", "EAF"]), N, T, _opts(cfg, seed))
    tol = cfg.zero_tol
    for lo, hi in (("uLRF", "LRF"), ("EF", "DF"), ("DF", "DAF"), ("EF", "EAF"), ("tRF", "RF")):
        c.ordered(f"{lo}_le_{hi}", seed, r[lo], r[hi], tol)
    try:
        ub = ms.upper_bound_log(N, T)
        c.le("DF_le_log_bound", seed, r["DF"].hi, ub, tol)
    except QrtError:
        pass
    return c.records


def collapse_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("collapse", tname, cfg)
    if not isinstance(T, AthermalityTheory):
        return c.records
    N = _random_channel(T, seed)
    gA, gB = T.gibbs["A"], T.gibbs["B"]
    free_energy = float(rel_entropy(ch.apply(N, gA), gB))
    o = _opts(cfg, seed)
    c.eq("EF_gibbs_free_energy", seed, ms.e_f(N, T, o).value, free_energy, 1e-6)
    c.eq("tRF_gibbs_free_energy", seed, ms.tilde_r_f(N, T, o).value, free_energy, 1e-6)
    rf = ms.r_f(N, T, _opts(cfg, seed, rhs=True))
    tc = ms.thermo_capacity(N, gA, gB, _opts(cfg, seed, rhs=True))
    c.eq("RF_thermo_capacity", seed, rf.value, tc.value, 2e-4, "heuristic")
    return c.records


def smoothing_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("smoothing", tname, cfg)
    N = _random_channel(T, seed)
    lr = ms.lr_f(N, T).value
    prev_l, prev_d = np.inf, np.inf
    for eps in [0.0] + sorted(cfg.eps_grid):
        lib = sm.lr_eps(N, T, eps, _opts(cfg, seed))
        dia = sm.diamond_smoothed_lr(N, T, eps)
        if eps == 0.0:
            c.eq("liberal_eps0_is_lr", seed, lib.value, lr, 1e-6)
            c.eq("diamond_eps0_is_lr", seed, dia.value, lr, 1e-6)
        c.ordered(f"liberal_le_diamond_eps{eps}", seed, lib, dia, 1e-6)
        c.le(f"liberal_nonincreasing_eps{eps}", seed, lib.value, prev_l, 1e-6, "heuristic")
        c.le(f"diamond_nonincreasing_eps{eps}", seed, dia.value, prev_d, 1e-6)
        prev_l, prev_d = lib.value, dia.value
    return c.records


def subadditivity_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("subadditivity", tname, cfg)
    N = _random_channel(T, seed)
    for kind, f in (("D", ms.d_f), ("E", ms.e_f)):
        seq = ms.product_regularized(N, T, kind, 2, _opts(cfg, seed))
        c.ordered(f"{kind}2_subadditive", seed, seq[2], seq[1], cfg.zero_tol, scale=2.0)
        single = f(N, T, _opts(cfg, seed))
        c.eq(f"{kind}1_matches_single", seed, seq[1].value, single.value, cfg.zero_tol)
    return c.records


def np_lp_oracle(p, q, eps: float) -> float:
    """Classical Neyman–Pearson value ``min q·t`` s.t. ``p·t ≥ 1 − ε``, ``0 ≤ t ≤ 1``."""
    res = linprog(q, A_ub=[-np.asarray(p)], b_ub=[-(1.0 - eps)], bounds=[(0, 1)] * len(p), method="highs")
    return float(res.fun)


def classical_stein_instance():
    """A commuting athermality instance with moderate divergence and low variance."""
    g = np.diag([0.55, 0.45]).astype(complex)
    # maps γ to (0.86, 0.14)
    Tm = np.array([[0.95, 0.75], [0.05, 0.25]])
    return g, ch.classical_channel(Tm)


def stein_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("stein", tname, cfg)
    if seed != cfg.seeds[0] or not isinstance(T, AthermalityTheory):
        return c.records
    from ..theories import AthermalityTheory as AT
    g, N = classical_stein_instance()
    Ta = AT(g)
    phi = Ta.state_param(("R", "A")).state(np.zeros(0))
    target = float(rel_entropy(ch.apply(N, g), g))
    prev = -np.inf
    for n in range(1, cfg.stein_nmax + 1):
        pt = hy.beta_opt(N, phi, n, cfg.stein_eps, Ta)
        setup = ms.CopySetup(N, Ta, n)
        Phi = setup.lift(phi)
        p = np.real(np.diag(setup.apply(setup.Jn, Phi)))
        q = np.real(np.diag(setup.apply(setup.F.interior, Phi)))
        c.eq(f"beta_vs_lp_n{n}", "classical", pt.beta, np_lp_oracle(p, q, cfg.stein_eps), 1e-6)
        c.le(f"exponent_nondecreasing_n{n}", "classical", prev, pt.exponent, 0.05)
        prev = pt.exponent
    c.eq(f"exponent_near_relent_n{cfg.stein_nmax}", "classical", prev, target, 0.1)
    return c.records


def classical_chernoff(p, q) -> float:
    """``−min_α log₂ Σ p^α q^{1−α}`` by bounded scalar minimization."""
    p, q = np.asarray(p, float), np.asarray(q, float)
    r = minimize_scalar(lambda a: np.log2(np.sum(p ** a * q ** (1 - a))), bounds=(0, 1), method="bounded",
                        options={"xatol": 1e-10})
    return float(-r.fun)


def chernoff_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("chernoff", tname, cfg)
    if not isinstance(T, AthermalityTheory):
        return c.records
    N = _random_channel(T, seed)
    rep = hy.chernoff_lower(N, T)
    c.le("error_exponent_ge_bound", seed, rep.bound, rep.error_exponent, 1e-6)
    if seed == cfg.seeds[0]:
        g, Nc = classical_stein_instance()
        from ..theories import AthermalityTheory as AT
        Tc = AT(g)
        repc = hy.chernoff_lower(Nc, Tc)
        gamma = np.real(np.diag(g))
        p = np.kron(gamma, np.real(np.diag(ch.apply(Nc, g))))
        q = np.kron(gamma, gamma)
        c.eq("classical_chernoff", "classical", repc.bound, classical_chernoff(p, q), 1e-4)
    return c.records


def ogawa_nagaoka_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("ogawa_nagaoka", tname, cfg)
    rho = la.random_density(2, seed=2 * seed + 1)
    sig = la.random_density(2, seed=2 * seed + 2)
    r = float(rel_entropy(rho, sig)) + 0.1
    for n in (1, 2, 3):
        for t in (0.1, 0.5, 1.0):
            rep = sm.ogawa_nagaoka_check(rho, sig, r, t, n)
            c.le(f"on_n{n}_t{t}", seed, rep.delta, rep.bound, 1e-9)
    return c.records


def axioms_suite(cfg, tname, T, seed) -> list:
    c = _Ctx("axioms", tname, cfg)
    if seed != cfg.seeds[0]:
        return c.records
    rep = validate_axioms(T, cfg.axiom_samples, seed)
    for i, rec in enumerate(rep.records):
        c.le(rec.name, f"{seed}.{i}", rec.violation, 0.0, 1e-7)
    phi = T.state_param(("R", "A"))
    phi0 = phi.state(phi.from_state(np.eye(phi.dim) / phi.dim)) if phi.n else phi.state(np.zeros(0))
    rep2 = stein_closure_check(T, phi0, 2, cfg.axiom_samples, seed)
    for i, rec in enumerate(rep2.records):
        c.le(f"stein_{rec.name}", f"{seed}.{i}", rec.violation, 0.0, 1e-7)
    return c.records


SUITE_FUNCS = {
    "reduction": reduction_suite, "faithfulness": faithfulness_suite, "minimax": minimax_suite,
    "monotonicity": monotonicity_suite, "continuity": continuity_suite, "inequality": inequality_suite,
    "collapse": collapse_suite, "smoothing": smoothing_suite, "subadditivity": subadditivity_suite,
    "stein": stein_suite, "chernoff": chernoff_suite, "ogawa_nagaoka": ogawa_nagaoka_suite,
    "axioms": axioms_suite,
}


def _run_task(task):
    cfg_dict, suite, idx, seed = task
    cfg = SuiteConfig.from_dict(cfg_dict)
    tname, T = cfg.build_theories()[idx]
    try:
        return SUITE_FUNCS[suite](cfg, tname, T, seed)
    except (QrtError, np.linalg.LinAlgError, ValueError, ArithmeticError) as exc:
        log.warning("suite %s failed on %s seed %s: %s", suite, tname, seed, exc)
        c = _Ctx(suite, tname, cfg)
        c.error("suite", seed, exc)
        return c.records


def run_suite(cfg: SuiteConfig, write: bool = True) -> SuiteReport:
    """Run the configured suites; records are ordered by (suite, theory, seed)."""
    theories = cfg.build_theories()
    tasks = [(cfg.to_json(), s, i, seed) for s in cfg.suites for i in range(len(theories)) for seed in cfg.seeds]
    workers = max(1, int(os.environ.get("QRTKIT_THREADS", "1")))
    t0 = time.time()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    report = SuiteReport([r for chunk in chunks for r in chunk],
                         {"python": platform.python_version(), "numpy": np.__version__,
                          "workers": workers, "seconds": round(time.time() - t0, 3),
                          "config": cfg.to_json()})
    if write:
        from .io import emit_csv, save_report
        save_report(report, os.path.join(cfg.out_dir, "report.jsonl"))
        emit_csv(report.rows(), os.path.join(cfg.out_dir, "report.csv"), CSV_COLUMNS)
    return report
