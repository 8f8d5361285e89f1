"""Smoothed logarithmic robustness and finite-n trend reports.

Two smoothing balls are available.  The diamond ball keeps channels within
``ε`` in diamond norm.  The liberal ball admits any CP map whose output on a
fixed input ``φ`` is within ``ε`` in trace norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import channels as ch
from . import linalg as la
from . import params
from .divergences import LN2
from .errors import DimensionLimitError, DomainError, SupportViolationError
from .measures import (CopySetup, MeasureOptions, MeasureResult, _opts, _starts, ascend,
                       lr_f, product_regularized)
from .sdp import SdpProblem
from .theories import ResourceTheory

T_FLOOR = 1e-9


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not eps >= 0:
        raise DomainError(f"epsilon must be nonnegative, got {eps}")
    return eps


def _liberal_sdp(setup: CopySetup, Phi: np.ndarray, eps: float, variant: str = "channel"):
    """Inner liberal-smoothing SDP at a fixed (lifted) input ``Phi``.

    Returns the solution and the handles needed for input gradients.
    """
    a, b, r = setup.a, setup.b, setup.r

    def lam(X):
        return ch.apply_choi(X, Phi, a, b, r)

    rho = lam(setup.Jn)
    p = SdpProblem()
    Jp = p.new_herm(a * b, psd=True)
    K = p.new_herm(a * b, psd=True)
    t = p.new_real()
    if eps > 0:
        P = p.new_herm(r * b, psd=True)
        Q = p.new_herm(r * b, psd=True)
        j = p.add_eq(Jp.map(lam) - P + Q, rho)
        p.add_le((P + Q).trace(), eps)
    else:
        j = p.add_eq(Jp.map(lam), rho)
    if variant == "channel":
        i = p.add_psd(K - Jp)
    else:
        i = p.add_psd(K.map(lam) - Jp.map(lam))
    setup.F.constrain(p, K, scale=t)
    p.minimize(t)
    sol = p.solve()
    return sol, Jp, K, i, j


def _liberal_value_grad(setup, Phi, eps, variant):
    sol, Jp, K, i, j = _liberal_sdp(setup, Phi, eps, variant)
    tv = sol.primal_value
    if tv <= T_FLOOR:
        return -np.inf, np.zeros_like(Phi), sol, tv
    Jv, Kv = sol[Jp], sol[K]
    Y, W = sol.eq_duals[j], sol.duals[i]
    G = setup.adjoint(Jv, Y) - setup.adjoint(setup.Jn, Y)
    if variant != "channel":
        G = G - (setup.adjoint(Kv, W) - setup.adjoint(Jv, W))
    return float(np.log2(tv)), G * sol.sense / (tv * LN2), sol, tv


def _result_from(v, sol, tv, extra=None) -> MeasureResult:
    diag = {"t": tv, "gap": sol.gap, "sdp_status": sol.status, "neg_inf": bool(v == -np.inf)}
    diag.update(extra or {})
    st = "exact" if sol.optimal else "upper_bound"
    return MeasureResult(v, st, v, v, None, None, diag)


def liberal_smoothed_lr(N: ch.LinearMap, T: ResourceTheory, phi, eps: float,
                        variant: str = "channel", n: int = 1) -> MeasureResult:
    """Liberally smoothed robustness at a fixed input ``φ`` (per copy for ``n > 1``).

    Minimizes ``log₂ t`` over CP maps ``N′`` with ``‖N′(φ) − N(φ)‖₁ ≤ ε`` and
    ``t M ⪰ N′`` for a free ``M``.  ``variant="output"`` only requires
    ``t M(φ) ⪰ N′(φ)``.  The value is ``-inf`` once ``N′ = 0`` is in the ball.
    """
    eps = _check_eps(eps)
    setup = CopySetup(N, T, n)
    phi = la.hermitize(np.asarray(phi, dtype=complex))
    v, _, sol, tv = _liberal_value_grad(setup, setup.lift(phi), eps, variant)
    res = _result_from(v / n, sol, tv)
    res.witness_state = phi
    return res


def diamond_smoothed_lr(N: ch.LinearMap, T: ResourceTheory, eps: float) -> MeasureResult:
    """Robustness minimized over channels within diamond distance ``ε`` of ``N``."""
    eps = _check_eps(eps)
    a, b = N.dim_in, N.dim_out
    F = T.free_channels("A", "B")
    p = SdpProblem()
    Jp = p.new_herm(a * b, psd=True)
    K = p.new_herm(a * b, psd=True)
    t = p.new_real()
    p.add_eq(Jp.map(lambda X: la.partial_trace(X, [a, b], [0])), np.eye(a))
    if eps > 0:
        om = p.new_herm(a * b, psd=True)
        p.add_psd(om - Jp + N.choi)
        p.add_le(om.map(lambda X: la.partial_trace(X, [a, b], [0])), 0.5 * eps * np.eye(a))
    else:
        p.add_eq(Jp, N.choi)
    p.add_psd(K - Jp)
    F.constrain(p, K, scale=t)
    p.minimize(t)
    sol = p.solve()
    tv = sol.primal_value
    v = float(np.log2(tv)) if tv > T_FLOOR else -np.inf
    res = _result_from(v, sol, tv)
    res.witness_channel = ch.CpMap(a, b, la.hermitize(sol[Jp]))
    return res


def _outer(N, T, eps, opts, n, param, variant):
    eps = _check_eps(eps)
    opts = _opts(opts)
    rng = la.as_rng(opts.seed)
    setup = CopySetup(N, T, n)

    def fg(z):
        phi = param.state(z)
        v, G, sol, tv = _liberal_value_grad(setup, setup.lift(phi), eps, variant)
        g = param.pullback(z, setup.lift_grad(phi, G) / n)
        return v / n, g, (phi, sol, tv)

    out = ascend(fg, param, _starts(param, opts.restarts, rng, opts.initial), opts.max_iter)
    if out.aux is None:
        # every start hit the zero map
        phi = param.state(_starts(param, 1, rng)[0])
        return MeasureResult(-np.inf, "exact", -np.inf, -np.inf, phi, None, {"neg_inf": True})
    phi, sol, tv = out.aux
    status = "exact" if param.n == 0 and sol.optimal else "lower_bound"
    return MeasureResult(out.value, status, out.value, out.value if param.n == 0 else np.inf, phi, None,
                         {"restarts": sorted(out.values, reverse=True), "t": tv, "n": n})


def lr_eps(N: ch.LinearMap, T: ResourceTheory, eps: float, opts=None, **kw) -> MeasureResult:
    """Max over pure ``φ`` of :func:`liberal_smoothed_lr` (multistart lower bound)."""
    opts = _opts(opts, **kw)
    return _outer(N, T, eps, opts, 1, params.PureParam(T.dims["R"] * N.dim_in), "channel")


def underline_lr_eps(N: ch.LinearMap, T: ResourceTheory, eps: float, opts=None, **kw) -> MeasureResult:
    """Max over free ``φ`` of the output-level liberal smoothing."""
    opts = _opts(opts, **kw)
    return _outer(N, T, eps, opts, 1, T.state_param(("R", "A")), "output")


def lr_eps_n(N: ch.LinearMap, T: ResourceTheory, eps: float, n: int = 1, opts=None,
             variant: str = "channel", **kw) -> MeasureResult:
    """Per-copy smoothed robustness with product inputs ``φ^{⊗n}`` (``n ≤ 2``)."""
    if n > 2:
        raise DimensionLimitError("smoothed regularization is limited to n ≤ 2")
    opts = _opts(opts, **kw)
    param = (params.PureParam(T.dims["R"] * N.dim_in) if variant == "channel"
             else T.state_param(("R", "A")))
    return _outer(N, T, eps, opts, n, param, variant)


# --------------------------------------------------------------------------- #
# Reports
# --------------------------------------------------------------------------- #

@dataclass
class AepRow:
    measure: str
    n: int
    epsilon: float
    value: float
    status: str
    gap: float = float("nan")


@dataclass
class AepReport:
    rows: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def value(self, measure, n, eps=None):
        for r in self.rows:
            if r.measure == measure and r.n == n and (eps is None or r.epsilon == eps):
                return r.value
        raise KeyError((measure, n, eps))


def aep_trend_report(N: ch.LinearMap, T: ResourceTheory, eps_grid=(0.0, 0.05, 0.1), n_max: int = 2,
                     opts=None, slack: float = 1e-5, **kw) -> AepReport:
    """Tabulate ``D^{(n)}``, ``E^{(n)}`` and the smoothed robustness on a grid.

    Checks the finite-n orderings: relative entropy below the robustness,
    smoothed below unsmoothed and monotonicity in ``ε``.
    """
    opts = _opts(opts, **kw)
    rep = AepReport()
    eps_grid = sorted(float(e) for e in eps_grid)
    dn = product_regularized(N, T, "D", n_max, opts=MeasureOptions(**{**opts.__dict__, "order": "maxmin"}))
    en = product_regularized(N, T, "E", n_max, opts=MeasureOptions(**{**opts.__dict__, "order": "maxmin"}))
    for n in range(1, n_max + 1):
        rep.rows.append(AepRow("Dn", n, 0.0, dn[n].value, dn[n].status))
        rep.rows.append(AepRow("En", n, 0.0, en[n].value, en[n].status))
        prev_lr, prev_u = np.inf, np.inf
        for e in eps_grid:
            lr = lr_eps_n(N, T, e, n, opts)
            ul = lr_eps_n(N, T, e, n, opts, variant="output")
            rep.rows.append(AepRow("LRn", n, e, lr.value, lr.status, abs(dn[n].value - lr.value)))
            rep.rows.append(AepRow("uLRn", n, e, ul.value, ul.status, abs(en[n].value - ul.value)))
            if e == 0.0:
                rep.checks[f"D_le_LR_n{n}"] = dn[n].value <= lr.value + slack
                rep.checks[f"E_le_uLR_n{n}"] = en[n].value <= ul.value + slack
            rep.checks[f"LR_eps_monotone_n{n}_e{e}"] = lr.value <= prev_lr + slack
            rep.checks[f"uLR_eps_monotone_n{n}_e{e}"] = ul.value <= prev_u + slack
            rep.checks[f"uLR_le_LR_n{n}_e{e}"] = ul.value <= lr.value + slack
            prev_lr, prev_u = lr.value, ul.value
    unsm = lr_f(N, T).value
    rep.checks["smoothed_le_unsmoothed"] = all(
        r.value <= unsm + slack for r in rep.rows if r.measure == "LRn" and r.n == 1)
    return rep


@dataclass
class OgawaNagaokaReport:
    delta: float
    bound: float
    f_t: float
    slack: float

    @property
    def holds(self) -> bool:
        return self.delta <= self.bound + 1e-9


def ogawa_nagaoka_check(rho, sigma, r: float, t: float, n: int) -> OgawaNagaokaReport:
    """Compare ``Tr[(ρ^{⊗n} − 2^{nr} σ^{⊗n})₊]`` with ``2^{−n(rt − f(t))}``.

    ``f(t) = log₂ Tr[ρ^{1+t} σ^{−t}]`` with ``σ^{−t}`` taken on the support.
    """
    rho = la.hermitize(np.asarray(rho, dtype=complex))
    sigma = la.hermitize(np.asarray(sigma, dtype=complex))
    if not 0 < t <= 1:
        raise DomainError(f"t must lie in (0, 1], got {t}")
    Ps = la.support_projector(sigma)
    if la.trace_norm(rho - Ps @ rho @ Ps) > la.SUPPORT_TOL:
        raise SupportViolationError("supp ρ is not contained in supp σ")
    rp = la.matrix_fn_on_support(rho, lambda x: x ** (1.0 + t))
    sm = la.matrix_fn_on_support(sigma, lambda x: x ** (-t))
    f_t = float(np.log2(np.real(np.trace(rp @ sm))))
    X = la.kron_power(rho, n) - 2.0 ** (n * r) * la.kron_power(sigma, n)
    w = np.linalg.eigvalsh(la.hermitize(X))
    delta = float(np.sum(w[w > 0]))
    bound = float(2.0 ** (-n * (r * t - f_t)))
    return OgawaNagaokaReport(delta, bound, f_t, bound - delta)
