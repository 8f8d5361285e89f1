"""Channel resource measures built on relative entropies and robustness.

Outer optimizations over input states are multistart quasi-Newton ascents
(heuristic lower bounds); inner minimizations over free channels are convex
and certified by :func:`qrtkit.convex.minimize_relent` or an SDP.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from . import channels as ch
from . import linalg as la
from . import params
from .convex import RelEntTerm, minimize_relent, support_isometry
from .divergences import LN2, rel_entropy, relent_grads
from .errors import DimMismatchError, NotApplicableError
from .sdp import SdpProblem
from .theories import ResourceTheory

log = logging.getLogger(__name__)


# relative stopping tolerance for ascents whose objective is an inner convex solve
INNER_FTOL = 1e-10
# lo − hi crossings below this (relative) are float noise, not a failed bracket
ROUNDOFF = 1e-12


@dataclass
class MeasureOptions:
    restarts: int = 32
    tol: float = 1e-6
    max_iter: int = 500
    seed: int | None = 0
    inner_tol: float = 1e-9
    cut_iters: int = 40
    cut_restarts: int = 4
    order: str = "both"          # "both", "maxmin" or "minmax"
    initial: list = field(default_factory=list)


@dataclass
class MeasureResult:
    """Value in bits with witnesses and a status.

    ``status`` is one of ``exact``, ``lower_bound``, ``upper_bound`` or
    ``bracket``; ``lower``/``upper`` hold the bracket ends (``±inf`` when
    unknown).
    """
    value: float
    status: str
    lower: float = -np.inf
    upper: float = np.inf
    witness_state: np.ndarray | None = field(default=None, repr=False)
    witness_channel: ch.LinearMap | None = field(default=None, repr=False)
    diagnostics: dict = field(default_factory=dict, repr=False)

    def __float__(self) -> float:
        return float(self.value)

    @property
    def lo(self) -> float:
        """Best available lower end (the value itself for lower bounds)."""
        return self.lower if np.isfinite(self.lower) else self.value

    @property
    def hi(self) -> float:
        """Best available upper end (the value itself for lower bounds)."""
        return self.upper if np.isfinite(self.upper) else self.value

    def to_json(self) -> dict:
        return {"value": float(self.value), "status": self.status, "lower": _jf(self.lower),
                "upper": _jf(self.upper), "diagnostics": {k: _jf(v) for k, v in self.diagnostics.items()}}


def _jf(x):
    if isinstance(x, (float, np.floating)):
        return float(x) if np.isfinite(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, (list, tuple)):
        return [_jf(v) for v in x]
    return x


def _opts(opts, **kw) -> MeasureOptions:
    if opts is None:
        opts = MeasureOptions()
    elif isinstance(opts, dict):
        opts = MeasureOptions(**opts)
    for k, v in kw.items():
        if v is not None:
            setattr(opts, k, v)
    return opts


def _as_channel_like(J, a, b) -> ch.LinearMap:
    try:
        return ch.ChoiChannel(a, b, la.hermitize(J))
    except ValueError:
        return ch.CpMap(a, b, la.hermitize(J))


# --------------------------------------------------------------------------- #
# n-copy bookkeeping
# --------------------------------------------------------------------------- #

class CopySetup:
    """Channel ``N^{⊗n}`` against ``𝔉(Aⁿ→Bⁿ)`` with product inputs ``φ^{⊗n}``.

    Inputs ``φ`` live on ``R ⊗ A`` (``R ≅ A``); lifted inputs are ordered
    ``Rⁿ Aⁿ`` and outputs ``Rⁿ Bⁿ``.
    """

    def __init__(self, N: ch.LinearMap, T: ResourceTheory, n: int = 1):
        if (N.dim_in, N.dim_out) != (T.dims["A"], T.dims["B"]):
            raise DimMismatchError(f"channel dims {N.dims} do not match theory dims "
                                   f"{(T.dims['A'], T.dims['B'])}")
        self.N, self.T, self.n = N, T, n
        self.dA, self.dB, self.dR = N.dim_in, N.dim_out, T.dims["R"]
        self.a, self.b, self.r = self.dA ** n, self.dB ** n, self.dR ** n
        self.Jn = ch.tensor_power(N, n).choi if n > 1 else N.choi
        self.F = T.free_channels(("A",) * n, ("B",) * n)
        d = self.dR * self.dA
        self._perm = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
        self._inv = list(np.argsort(self._perm))
        self._dims_pairs = [self.dR, self.dA] * n
        self._dims_sorted = [self.dR] * n + [self.dA] * n
        self.d = d

    def lift(self, phi: np.ndarray) -> np.ndarray:
        if self.n == 1:
            return phi
        return la.permute_systems(la.kron_power(phi, self.n), self._dims_pairs, self._perm)

    def lift_grad(self, phi: np.ndarray, G: np.ndarray) -> np.ndarray:
        """Gradient w.r.t. ``φ`` of ``Tr[G φ^{⊗n}]``-type first-order terms."""
        if self.n == 1:
            return G
        n, d = self.n, self.d
        Gp = la.permute_systems(G, self._dims_sorted, self._inv).reshape((d,) * (2 * n))
        out = np.zeros((d, d), dtype=complex)
        letters = "abcdefghijkl"
        for k in range(n):
            rows = list(letters[:n])
            cols = list(letters[n:2 * n])
            # contract every slot but k with φ (Tr[G (… φ …)] pairs G's col with φ's row)
            ops, subs = [Gp], ["".join(rows) + "".join(cols)]
            for j in range(n):
                if j != k:
                    ops.append(phi)
                    subs.append(cols[j] + rows[j])
            expr = ",".join(subs) + "->" + rows[k] + cols[k]
            out += np.einsum(expr, *ops)
        return out

    def apply(self, J, Phi):
        return ch.apply_choi(J, Phi, self.a, self.b, self.r)

    def adjoint(self, J, Y):
        return ch.apply_adjoint_choi(J, Y, self.a, self.b, self.r)

    def support(self, Phi):
        PR = la.partial_trace(Phi, [self.r, self.a], [0])
        V = support_isometry(PR)
        return None if V is None else np.kron(V, np.eye(self.b))

    def inner(self, Phi, tol: float = 1e-9):
        rho = self.apply(self.Jn, Phi)
        P = self.support(Phi)
        term = RelEntTerm(rho, lambda X, Phi=Phi: self.apply(X, Phi))
        res = minimize_relent([term], self.F.interior, self.F.basis, tol=tol, supports=[P])
        return rho, res, P

    def grad_phi(self, rho, sigma, J, P) -> np.ndarray:
        """Hermitian gradient w.r.t. the lifted input of ``D(N(Φ) ‖ M_J(Φ))``."""
        return self.value_grad_phi(rho, sigma, J, P)[1]

    def value_grad_phi(self, rho, sigma, J, P):
        """``D(N(Φ) ‖ M_J(Φ))`` in bits and its gradient, on the compressed support."""
        if P is not None:
            v, gr, gs = relent_grads(P.conj().T @ rho @ P, P.conj().T @ sigma @ P)
            gr, gs = P @ gr @ P.conj().T, P @ gs @ P.conj().T
        else:
            v, gr, gs = relent_grads(rho, sigma)
        return v, self.adjoint(self.Jn, gr) + self.adjoint(J, gs)


# --------------------------------------------------------------------------- #
# Generic multistart ascent
# --------------------------------------------------------------------------- #

@dataclass
class AscentResult:
    value: float
    z: np.ndarray
    aux: object
    values: list


def ascend(fg: Callable, param: params.StateParam, starts, max_iter: int = 500,
           gtol: float = 1e-9, ftol: float = 1e-13) -> AscentResult:
    """Maximize ``f(z)`` from each start with L-BFGS-B; ``fg`` returns ``(f, grad, aux)``.

    ``ftol`` should not be tighter than the accuracy of ``f``; for objectives
    that wrap an inner solve a relative ``ftol`` near the inner tolerance
    avoids line searches that chase solver noise.
    """
    best = AscentResult(-np.inf, None, None, [])
    cache = {}

    def neg(z):
        key = z.tobytes()
        if key not in cache:
            cache.clear()
            try:
                f, g, aux = fg(z)
            except (np.linalg.LinAlgError, FloatingPointError) as exc:
                log.debug("objective failed at a trial point: %s", exc)
                f, g, aux = -1e6, np.zeros_like(z), None
            if not np.isfinite(f):
                f, g = (-1e6 if f < 0 or np.isnan(f) else 1e6), np.zeros_like(z)
            cache[key] = (f, g, aux)
            if f > best.value and aux is not None:
                best.value, best.z, best.aux = f, z.copy(), aux
        f, g, _ = cache[key]
        return -f, -g

    for z0 in starts:
        z0 = np.asarray(z0, dtype=float)
        if param.n == 0:
            neg(z0)
            best.values.append(best.value)
            break
        res = minimize(neg, z0, jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": gtol, "ftol": ftol})
        best.values.append(-float(res.fun))
    return best


def _starts(param: params.StateParam, restarts: int, rng, initial=()) -> list:
    out = [param.from_state(s) for s in initial]
    if isinstance(param, params.PureParam):
        d = int(round(np.sqrt(param.dim)))
        if d * d == param.dim:
            out.append(param.from_state(la.max_entangled_vector(d) / np.sqrt(d)))
    elif isinstance(param, (params.DiagonalParam, params.MixedParam)):
        out.append(param.from_state(np.eye(param.dim) / param.dim))
    elif isinstance(param, params.FixedParam):
        return [np.zeros(0)]
    while len(out) < max(restarts, 1):
        out.append(param.random(rng))
    return out


def _status_from(values, tol) -> bool:
    top = sorted(values, reverse=True)[:3]
    return len(top) >= 3 and top[0] - top[-1] <= tol


# --------------------------------------------------------------------------- #
# State resource
# --------------------------------------------------------------------------- #

def _guess_labels(T: ResourceTheory, d: int):
    for lab in (("B",), ("A",), ("R", "B"), ("R", "A"), ("B", "B"), ("R", "R", "B", "B")):
        try:
            if T.dim(lab) == d:
                return lab
        except DimMismatchError:
            continue
    raise DimMismatchError(f"no system of dimension {d} in theory {T.name}")


def d_state_resource(rho, T: ResourceTheory, labels=None, tol: float = 1e-9) -> MeasureResult:
    """Relative entropy of resource ``min_{σ free} D(ρ‖σ)``.

    Barrier path-following over the free-state set; the bracket is
    certified by the barrier duality gap.
    """
    rho = la.hermitize(np.asarray(rho, dtype=complex))
    labels = _guess_labels(T, rho.shape[0]) if labels is None else labels
    S = T.free_states(labels)
    if S.dim != rho.shape[0]:
        raise DimMismatchError(f"state dim {rho.shape[0]} vs free set dim {S.dim}")
    if S.basis.shape[0] == 0:
        v = float(rel_entropy(rho, S.interior))
        return MeasureResult(v, "exact", v, v, S.interior, None, {"gap": 0.0})
    res = minimize_relent([RelEntTerm(rho, lambda X: X)], S.interior, S.basis, tol=tol)
    return MeasureResult(res.value, "exact", res.lower, res.value, res.sigmas[0], None,
                         {"gap": res.gap, "newton_steps": res.newton_steps})


# --------------------------------------------------------------------------- #
# D_F and E_F (and their product-input regularizations)
# --------------------------------------------------------------------------- #

def _maxmin(setup: CopySetup, param: params.StateParam, opts: MeasureOptions, rng):
    n = setup.n

    def fg_wrap(z):
        phi = param.state(z)
        Phi = setup.lift(phi)
        rho, res, P = setup.inner(Phi, opts.inner_tol)
        sigma = setup.apply(res.J, Phi)
        G = setup.lift_grad(phi, setup.grad_phi(rho, sigma, res.J, P)) / n
        return res.value / n, param.pullback(z, G), (phi, res)

    starts = _starts(param, opts.restarts, rng, opts.initial)
    return ascend(fg_wrap, param, starts, opts.max_iter, ftol=INNER_FTOL)


def _channel_div_products(setup: CopySetup, J, param, starts, max_iter):
    """``max_φ D(N^{⊗n}(φ^{⊗n}) ‖ M_J(φ^{⊗n}))/n`` over ``param``."""
    n = setup.n
    # J ≻ 0 makes the divergence finite on supp(φ_R) ⊗ B; thresholded support
    # tests then only misfire on tiny input weights
    pd = np.linalg.eigvalsh(la.hermitize(J))[0] > 0

    def fg(z):
        phi = param.state(z)
        Phi = setup.lift(phi)
        rho = setup.apply(setup.Jn, Phi)
        sigma = setup.apply(J, Phi)
        P = setup.support(Phi)
        if pd:
            v, G = setup.value_grad_phi(rho, sigma, J, P)
            return v / n, param.pullback(z, setup.lift_grad(phi, G) / n), phi
        if P is not None:
            v = float(rel_entropy(P.conj().T @ rho @ P, P.conj().T @ sigma @ P))
        else:
            v = float(rel_entropy(rho, sigma))
        if not np.isfinite(v):
            return v, np.zeros_like(z), phi
        G = setup.lift_grad(phi, setup.grad_phi(rho, sigma, J, P)) / n
        return v / n, param.pullback(z, G), phi

    return ascend(fg, param, starts, max_iter)


def _minmax(setup: CopySetup, param: params.StateParam, opts: MeasureOptions, rng, seeds_phi):
    """Cutting planes for ``min_M max_φ``; returns (upper, lower, J, φ, history)."""
    n = setup.n
    cuts = [s for s in seeds_phi]
    if not cuts:
        cuts = [param.state(z) for z in _starts(param, 1, rng)]
    best_upper, best_J, best_phi = np.inf, None, None
    lower = -np.inf
    hist = []
    for it in range(opts.cut_iters):
        terms, sups = [], []
        for phi in cuts:
            Phi = setup.lift(phi)
            rho = setup.apply(setup.Jn, Phi)
            terms.append(RelEntTerm(rho, lambda X, Phi=Phi: setup.apply(X, Phi)))
            sups.append(setup.support(Phi))
        res = minimize_relent(terms, setup.F.interior, setup.F.basis, epigraph=True,
                              tol=opts.inner_tol, supports=sups)
        lower = max(lower, res.lower / n)
        starts = [param.from_state(p) for p in cuts[-3:]]
        starts += _starts(param, opts.cut_restarts, rng)[: opts.cut_restarts]
        cd = _channel_div_products(setup, res.J, param, starts, opts.max_iter)
        if cd.value < best_upper:
            best_upper, best_J, best_phi = cd.value, res.J, cd.aux
        hist.append((res.value / n, cd.value))
        if best_upper - lower <= opts.tol or param.n == 0:
            break
        cuts.append(cd.aux)
    return best_upper, lower, best_J, best_phi, hist


def _df_like(N, T, param, opts, n: int, name: str) -> MeasureResult:
    opts = _opts(opts)
    rng = la.as_rng(opts.seed)
    setup = CopySetup(N, T, n)
    diag = {"n": n}
    lo = -np.inf
    witness_phi, witness_J = None, None
    mm = None
    if opts.order in ("both", "maxmin"):
        mm = _maxmin(setup, param, opts, rng)
        lo = mm.value
        witness_phi, res = mm.aux
        witness_J = res.J
        diag["maxmin"] = mm.value
        diag["maxmin_restarts"] = sorted(mm.values, reverse=True)
        diag["inner_gap"] = res.gap
    up = np.inf
    if opts.order in ("both", "minmax"):
        seeds = [witness_phi] if witness_phi is not None else []
        up, low_cp, J_mm, phi_mm, hist = _minmax(setup, param, opts, rng, seeds)
        diag["minmax"] = up
        diag["minmax_lower"] = low_cp
        diag["cut_iterations"] = len(hist)
        if witness_J is None:
            witness_J, witness_phi = J_mm, phi_mm
    if opts.order == "minmax":
        value, status = up, "upper_bound"
    elif opts.order == "maxmin":
        converged = param.n == 0 or _status_from(mm.values, opts.tol)
        value, status = lo, ("exact" if (param.n == 0) else "lower_bound")
        diag["restarts_agree"] = converged
    else:
        value, status = lo, "bracket"
        if param.n == 0:
            status = "exact"
    if np.isfinite(up) and lo > up:
        diag["crossing"] = lo - up
        if lo - up <= ROUNDOFF * max(1.0, abs(lo)):
            up = lo  # float noise between two independent solves
    W = _as_channel_like(witness_J, setup.a, setup.b) if witness_J is not None else None
    return MeasureResult(value, status, lo, up, witness_phi, W, diag)


def d_f(N: ch.LinearMap, T: ResourceTheory, opts=None, **kw) -> MeasureResult:
    """Max over pure ``φ_RA`` of min over free ``M`` of ``D(N(φ)‖M(φ))``.

    Reports a bracket: the max-min value (``lower``) and the min-max value
    from cutting planes (``upper``).
    """
    opts = _opts(opts, **kw)
    param = params.PureParam(T.dims["R"] * N.dim_in)
    return _df_like(N, T, param, opts, 1, "DF")


def e_f(N: ch.LinearMap, T: ResourceTheory, opts=None, **kw) -> MeasureResult:
    """As :func:`d_f` with the outer maximum restricted to free states of ``RA``."""
    opts = _opts(opts, **kw)
    res = _df_like(N, T, T.state_param(("R", "A")), opts, 1, "EF")
    if not T.extreme_points_pure and res.status == "exact":
        res.diagnostics["note"] = "reference fixed to |R| = |A|"
    return res


@dataclass
class RegularizedSequence:
    values: dict
    monotone_check: bool
    kind: str = "D"

    def __getitem__(self, n):
        return self.values[n]


def product_regularized(N, T, kind: str = "D", n_max: int = 2, opts=None, **kw) -> RegularizedSequence:
    """Per-copy values with inputs ``φ^{⊗n}`` and free channels on ``n`` copies."""
    if n_max > 3:
        from .errors import DimensionLimitError
        raise DimensionLimitError("product regularization is limited to n ≤ 3")
    opts = _opts(opts, **kw)
    vals = {}
    for n in range(1, n_max + 1):
        param = (params.PureParam(T.dims["R"] * N.dim_in) if kind == "D" else T.state_param(("R", "A")))
        o = MeasureOptions(**{**opts.__dict__})
        if n > 1 and vals:
            o.initial = [vals[1].witness_state]
        vals[n] = _df_like(N, T, param, o, n, kind + "n")
    ok = True
    ns = sorted(vals)
    for i in ns:
        for j in ns:
            if i + j in vals:
                ok &= (i + j) * vals[i + j].lo <= i * vals[i].hi + j * vals[j].hi + 1e-5
    return RegularizedSequence(vals, ok, kind)


# --------------------------------------------------------------------------- #
# Logarithmic robustness
# --------------------------------------------------------------------------- #

def lr_f(N: ch.LinearMap, T: ResourceTheory) -> MeasureResult:
    """``log₂ min{t : t J^M ⪰ J^N, M free}`` as an SDP in ``K = t J^M``."""
    F = T.free_channels("A", "B")
    p = SdpProblem()
    K = p.new_herm(F.dim, psd=True)
    t = p.new_real()
    p.add_psd(K - N.choi)
    F.constrain(p, K, scale=t)
    p.minimize(t)
    sol = p.solve()
    tv = sol.primal_value
    M = _as_channel_like(sol[K] / tv, N.dim_in, N.dim_out) if tv > 0 else None
    st = "exact" if sol.optimal else "upper_bound"
    v = float(np.log2(tv))
    lo = float(np.log2(max(sol.dual_value, 1e-300)))
    return MeasureResult(v, st, lo, v, None, M, {"t": tv, "gap": sol.gap, "sdp_status": sol.status})


def _underline_sdp(N, T, phi):
    dA, dB, dR = N.dim_in, N.dim_out, T.dims["R"]
    F = T.free_channels("A", "B")
    p = SdpProblem()
    K = p.new_herm(F.dim, psd=True)
    t = p.new_real()
    rho = ch.apply_choi(N.choi, phi, dA, dB, dR)
    i = p.add_psd(K.map(lambda X: ch.apply_choi(X, phi, dA, dB, dR)) - rho)
    F.constrain(p, K, scale=t)
    p.minimize(t)
    sol = p.solve()
    return sol, K, i


def underline_lr_f(N: ch.LinearMap, T: ResourceTheory, opts=None, **kw) -> MeasureResult:
    """Max over free ``φ`` of ``min_M D_max(N(φ) ‖ M(φ))`` (one SDP per ``φ``)."""
    opts = _opts(opts, **kw)
    rng = la.as_rng(opts.seed)
    param = T.state_param(("R", "A"))
    dA, dB, dR = N.dim_in, N.dim_out, T.dims["R"]

    def fg(z):
        phi = param.state(z)
        sol, K, i = _underline_sdp(N, T, phi)
        tv = sol.primal_value
        if not tv > 0:
            return -np.inf, np.zeros_like(z), None
        W = sol.duals[i]
        Kv = sol[K]
        G = -(ch.apply_adjoint_choi(Kv, W, dA, dB, dR) - ch.apply_adjoint_choi(N.choi, W, dA, dB, dR))
        return float(np.log2(tv)), param.pullback(z, G / (tv * LN2)), (phi, sol, Kv)

    out = ascend(fg, param, _starts(param, opts.restarts, rng, opts.initial), opts.max_iter)
    phi, sol, Kv = out.aux
    M = _as_channel_like(Kv / sol.primal_value, dA, dB)
    status = "exact" if param.n == 0 and sol.optimal else "lower_bound"
    return MeasureResult(out.value, status, out.value, np.inf if param.n else out.value, phi, M,
                         {"restarts": sorted(out.values, reverse=True)})


# --------------------------------------------------------------------------- #
# State-based measures
# --------------------------------------------------------------------------- #

def _state_resource_grad(rho, T, labels, tol):
    r = d_state_resource(rho, T, labels, tol)
    _, g, _ = relent_grads(rho, r.witness_state)
    return r.value, g


def r_f(N: ch.LinearMap, T: ResourceTheory, opts=None, **kw) -> MeasureResult:
    """``sup_σ D_F(N(σ_RA)) − D_F(σ_RA)`` over all states (multistart lower bound)."""
    opts = _opts(opts, **kw)
    rng = la.as_rng(opts.seed)
    dA, dB, dR = N.dim_in, N.dim_out, T.dims["R"]
    param = params.MixedParam(dR * dA)
    return _r_like(N, T, param, opts, rng, subtract=True)


def tilde_r_f(N: ch.LinearMap, T: ResourceTheory, opts=None, **kw) -> MeasureResult:
    """``sup`` over free ``σ_RA`` of ``D_F(N(σ))``."""
    opts = _opts(opts, **kw)
    rng = la.as_rng(opts.seed)
    return _r_like(N, T, T.state_param(("R", "A")), opts, rng, subtract=False)


def _r_like(N, T, param, opts, rng, subtract):
    dA, dB, dR = N.dim_in, N.dim_out, T.dims["R"]

    def fg(z):
        sigma = param.state(z)
        out = ch.apply_choi(N.choi, sigma, dA, dB, dR)
        v1, g1 = _state_resource_grad(out, T, ("R", "B"), opts.inner_tol)
        G = ch.apply_adjoint_choi(N.choi, g1, dA, dB, dR)
        v = v1
        if subtract:
            v2, g2 = _state_resource_grad(sigma, T, ("R", "A"), opts.inner_tol)
            v -= v2
            G = G - g2
        return v, param.pullback(z, G), sigma

    out = ascend(fg, param, _starts(param, opts.restarts, rng, opts.initial), opts.max_iter)
    status = "exact" if param.n == 0 else "lower_bound"
    return MeasureResult(out.value, status, out.value, out.value if param.n == 0 else np.inf, out.aux, None,
                         {"restarts": sorted(out.values, reverse=True)})


def thermo_capacity(N: ch.LinearMap, gamma_A, gamma_B, opts=None, **kw) -> MeasureResult:
    """``sup_σ D(N(σ)‖γ_B) − D(σ‖γ_A)`` over states of ``A`` (lower bound)."""
    opts = _opts(opts, **kw)
    rng = la.as_rng(opts.seed)
    gA = la.hermitize(np.asarray(gamma_A, dtype=complex))
    gB = la.hermitize(np.asarray(gamma_B, dtype=complex))
    dA, dB = N.dim_in, N.dim_out
    param = params.MixedParam(dA)

    def fg(z):
        sigma = param.state(z)
        out = ch.apply_choi(N.choi, sigma, dA, dB, 1)
        v1, g1, _ = relent_grads(out, gB)
        v2, g2, _ = relent_grads(sigma, gA)
        G = ch.apply_adjoint_choi(N.choi, g1, dA, dB, 1) - g2
        return v1 - v2, param.pullback(z, G), sigma

    starts = _starts(param, opts.restarts, rng, list(opts.initial) + [gA])
    out = ascend(fg, param, starts, opts.max_iter)
    return MeasureResult(out.value, "lower_bound", out.value, np.inf, out.aux, None,
                         {"restarts": sorted(out.values, reverse=True)})


# --------------------------------------------------------------------------- #
# Amortized measures
# --------------------------------------------------------------------------- #

class _PairParam(params.StateParam):
    def __init__(self, p1: params.StateParam, p2: params.StateParam):
        self.p1, self.p2 = p1, p2
        self.n = p1.n + p2.n
        self.dim = p1.dim

    def split(self, z):
        return z[:self.p1.n], z[self.p1.n:]

    def state(self, z):
        z1, z2 = self.split(z)
        return self.p1.state(z1), self.p2.state(z2)

    def from_state(self, pair):
        if isinstance(pair, tuple):
            r, s = pair
        else:
            r = s = pair
        return np.concatenate([self.p1.from_state(r), self.p2.from_state(s)])

    def random(self, rng):
        return np.concatenate([self.p1.random(rng), self.p2.random(rng)])


def _amortized(N, T, pparam, opts, rng, name):
    dA, dB, dR = N.dim_in, N.dim_out, T.dims["R"]
    setup = CopySetup(N, T, 1)

    def fg(z):
        rho, sigma = pparam.state(z)
        z1, z2 = pparam.split(z)
        out = setup.apply(N.choi, rho)
        P = setup.support(sigma)
        term = RelEntTerm(out, lambda X, s=sigma: setup.apply(X, s))
        res = minimize_relent([term], setup.F.interior, setup.F.basis, tol=opts.inner_tol, supports=[P])
        base, gb_r, gb_s = relent_grads(rho, sigma)
        if not (np.isfinite(res.value) and np.isfinite(base)):
            return -np.inf, np.zeros_like(z), None
        sig_out = setup.apply(res.J, sigma)
        if P is not None:
            _, gr, gs = relent_grads(P.conj().T @ out @ P, P.conj().T @ sig_out @ P)
            gr, gs = P @ gr @ P.conj().T, P @ gs @ P.conj().T
        else:
            _, gr, gs = relent_grads(out, sig_out)
        G_rho = setup.adjoint(N.choi, gr) - gb_r
        G_sig = setup.adjoint(res.J, gs) - gb_s
        g = np.concatenate([pparam.p1.pullback(z1, G_rho), pparam.p2.pullback(z2, G_sig)])
        return res.value - float(rel_entropy(rho, sigma)), g, ((rho, sigma), res)

    starts = [pparam.from_state(s) for s in opts.initial]
    if isinstance(pparam.p1, params.PureParam) or isinstance(pparam.p1, params.MixedParam):
        d = int(round(np.sqrt(pparam.dim)))
        me = la.max_entangled(d)
        starts.append(pparam.from_state(me))
    elif not isinstance(pparam.p1, params.FixedParam):
        starts.append(pparam.from_state(np.eye(pparam.dim) / pparam.dim))
    while len(starts) < max(opts.restarts, 1):
        starts.append(pparam.random(rng))
    out = ascend(fg, pparam, starts if pparam.n else [np.zeros(0)], opts.max_iter, ftol=INNER_FTOL)
    pair, res = out.aux
    M = _as_channel_like(res.J, dA, dB)
    status = "lower_bound"
    return MeasureResult(out.value, status, out.value, np.inf, pair, M,
                         {"restarts": sorted(out.values, reverse=True), "measure": name})


def amortized_d_f(N, T, opts=None, **kw) -> MeasureResult:
    """``sup_{ρ,σ} min_M D(N(ρ)‖M(σ)) − D(ρ‖σ)`` over states of ``RA`` (lower bound)."""
    opts = _opts(opts, **kw)
    d = T.dims["R"] * N.dim_in
    pp = _PairParam(params.MixedParam(d), params.MixedParam(d))
    return _amortized(N, T, pp, opts, la.as_rng(opts.seed), "DAF")


def amortized_e_f(N, T, opts=None, **kw) -> MeasureResult:
    """As :func:`amortized_d_f` with ``ρ, σ`` free states of ``RA``."""
    opts = _opts(opts, **kw)
    pp = _PairParam(T.state_param(("R", "A")), T.state_param(("R", "A")))
    return _amortized(N, T, pp, opts, la.as_rng(opts.seed), "EAF")


# --------------------------------------------------------------------------- #
# Bounds
# --------------------------------------------------------------------------- #

def upper_bound_log(N: ch.LinearMap, T: ResourceTheory) -> float:
    """``log₂(|B|²|A|)``, valid when the uniform states of ``B`` and ``RA`` are free."""
    if not (T.uniform_is_free("B") and T.uniform_is_free("RA")):
        raise NotApplicableError(f"uniform state is not free in theory {T.name}")
    return float(np.log2(N.dim_out ** 2 * N.dim_in))


MEASURES = {
    "DF": d_f, "EF": e_f, "LRF": lr_f, "uLRF": underline_lr_f, "RF": r_f, "tRF": tilde_r_f,
    "DAF": amortized_d_f, "EAF": amortized_e_f,
}


def dmax_state_resource(rho, T: ResourceTheory, labels=None) -> MeasureResult:
    """State robustness ``min{log₂ t : tσ ⪰ ρ, σ free}`` as an SDP."""
    rho = la.hermitize(np.asarray(rho, dtype=complex))
    labels = _guess_labels(T, rho.shape[0]) if labels is None else labels
    S = T.free_states(labels)
    p = SdpProblem()
    K = p.new_herm(S.dim, psd=True)
    t = p.new_real()
    p.add_psd(K - rho)
    S.constrain(p, K, scale=t)
    p.minimize(t)
    sol = p.solve()
    v = float(np.log2(sol.primal_value))
    return MeasureResult(v, "exact" if sol.optimal else "upper_bound", v, v, la.hermitize(sol[K]) / sol.primal_value,
                         None, {"gap": sol.gap})


def evaluate(name: str, N: ch.LinearMap, T: ResourceTheory, opts=None, **kw) -> MeasureResult:
    """Dispatch a measure by its short name (``DF``, ``EF``, ``LRF``, ...)."""
    if name not in MEASURES:
        raise KeyError(f"unknown measure {name!r}; choose from {sorted(MEASURES)}")
    f = MEASURES[name]
    if name == "LRF":
        return f(N, T)
    return f(N, T, opts, **kw)
