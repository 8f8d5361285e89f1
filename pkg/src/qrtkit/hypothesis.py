"""Finite-n discrimination of ``N^{⊗n}`` against the free channels.

The optimal type-II error is a minimax problem.  Its inner maximum over
the free Choi set is dualized in closed form, so the whole problem is a
single SDP.  When all free channels produce the same output on the
chosen input, it reduces to two-state Neyman–Pearson testing, which is
solved through its one-dimensional dual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import channels as ch
from . import linalg as la
from .divergences import petz_quasi
from .errors import DimMismatchError, DimensionLimitError, DomainError, InfeasibleError
from .frechet import dd1_general
from .measures import CopySetup
from .sdp import SdpProblem, linear_opt_over_set
from .theories import ResourceTheory

SINGLETON_TOL = 1e-10


@dataclass
class TestOperator:
    """Two-outcome test ``0 ⪯ P ⪯ I`` on ``Rⁿ Bⁿ``."""
    P: np.ndarray

    def __post_init__(self):
        self.P = la.hermitize(np.asarray(self.P, dtype=complex))
        w = np.linalg.eigvalsh(self.P)
        if w[0] < -1e-8 or w[-1] > 1 + 1e-8:
            raise DomainError(f"test operator eigenvalues {w[0]:.3g}..{w[-1]:.3g} outside [0, 1]")


@dataclass
class SteinPoint:
    n: int
    epsilon: float
    beta: float
    exponent: float
    phi: np.ndarray = field(repr=False, default=None)
    gap: float = 0.0
    method: str = "sdp"
    test: np.ndarray | None = field(repr=False, default=None)


def _P(P) -> np.ndarray:
    return P.P if isinstance(P, TestOperator) else la.hermitize(np.asarray(P, dtype=complex))


def alpha_error(N: ch.LinearMap, P, phi, n: int = 1, T: ResourceTheory | None = None) -> float:
    """Type-I error ``Tr[N^{⊗n}(φ^{⊗n})(I − P)]``."""
    P = _P(P)
    dR = phi.shape[0] // N.dim_in
    a, b, r = N.dim_in ** n, N.dim_out ** n, dR ** n
    if P.shape[0] != r * b:
        raise DimMismatchError(f"test acts on dim {P.shape[0]}, expected {r * b}")
    Phi = _lift(phi, dR, N.dim_in, n)
    J = ch.tensor_power(N, n).choi if n > 1 else N.choi
    rho = ch.apply_choi(J, Phi, a, b, r)
    return float(np.real(np.trace(rho @ (np.eye(r * b) - P))))


def _lift(phi, dR, dA, n):
    if n == 1:
        return la.hermitize(np.asarray(phi, dtype=complex))
    X = la.kron_power(phi, n)
    perm = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    return la.permute_systems(X, [dR, dA] * n, perm)


def beta_worst(P, phi, n: int, T: ResourceTheory):
    """``max_M Tr[M(φ^{⊗n}) P]`` over free ``M``; returns ``(value, Choi of M)``."""
    P = _P(P)
    dA, dB, dR = T.dims["A"], T.dims["B"], T.dims["R"]
    a, b, r = dA ** n, dB ** n, dR ** n
    if P.shape[0] != r * b:
        raise DimMismatchError(f"test acts on dim {P.shape[0]}, expected {r * b}")
    Phi = _lift(phi, dR, dA, n)
    S = T.free_channels(("A",) * n, ("B",) * n)
    C = ch.input_adjoint(Phi, P, a, b, r)
    return linear_opt_over_set(C, S, "max")


def _singleton_output(S, Phi, a, b, r):
    """Common output of all free channels on ``Phi`` when the output set is a point."""
    out0 = ch.apply_choi(S.interior, Phi, a, b, r)
    if S.basis.shape[0]:
        var = ch.apply_choi(S.basis, Phi, a, b, r)
        if np.max(np.abs(var)) > SINGLETON_TOL:
            return None
    return la.hermitize(out0)


def neyman_pearson(rho, sigma, eps: float):
    """``min Tr[σP]`` s.t. ``Tr[ρP] ≥ 1 − ε``, ``0 ⪯ P ⪯ I`` via its scalar dual.

    The dual is ``max_{μ ≥ 0} μ(1 − ε) − Tr[(μρ − σ)₊]``.  Returns
    ``(beta, μ*, P, gap)`` where ``P`` is a primal test built from the
    eigenvectors of ``μ*ρ − σ`` and ``gap`` is its primal-dual difference.
    """
    rho = la.hermitize(np.asarray(rho, dtype=complex))
    sigma = la.hermitize(np.asarray(sigma, dtype=complex))

    def g(mu):
        w = np.linalg.eigvalsh(mu * rho - sigma)
        return mu * (1.0 - eps) - float(np.sum(w[w > 0]))

    hi = 1.0
    while g(2 * hi) > g(hi) - 1e-15 and hi < 1e12:
        hi *= 2
    hi *= 2
    res = minimize_scalar(lambda m: -g(m), bounds=(0.0, hi), method="bounded",
                          options={"xatol": 1e-14 * max(hi, 1.0), "maxiter": 2000})
    mu = float(res.x)
    # polish: concave piecewise-smooth, golden refinement around mu
    for lo_, hi_ in [(max(0.0, mu * (1 - 1e-3)), mu * (1 + 1e-3) + 1e-12)]:
        r2 = minimize_scalar(lambda m: -g(m), bounds=(lo_, hi_), method="bounded",
                             options={"xatol": 1e-15 * max(mu, 1.0), "maxiter": 2000})
        if -r2.fun > g(mu):
            mu = float(r2.x)
    dual = g(mu)
    # greedy over eigenvectors of μρ − σ, largest first; the last one is taken fractionally
    w, V = np.linalg.eigh(mu * rho - sigma)
    order = np.argsort(w)[::-1]
    r_w = np.real(np.einsum("ik,ij,jk->k", V.conj(), rho, V))
    P = np.zeros_like(rho)
    need = 1.0 - eps
    for k in order:
        if need <= 0:
            break
        if r_w[k] <= 1e-15:
            continue
        q = 1.0 if r_w[k] <= need else need / r_w[k]
        P += q * np.outer(V[:, k], V[:, k].conj())
        need -= q * r_w[k]
    primal = float(np.real(np.trace(sigma @ P)))
    feasible = np.real(np.trace(rho @ P)) >= 1.0 - eps - 1e-9
    gap = primal - dual if feasible else np.nan
    return max(dual, 0.0), mu, P, gap


def beta_opt(N: ch.LinearMap, phi, n: int, eps: float, T: ResourceTheory,
             method: str = "auto") -> SteinPoint:
    """Optimal worst-case type-II error at type-I error ``ε``.

    ``method`` is ``"auto"`` (Neyman–Pearson when the free output is a
    single state, SDP otherwise), ``"np"`` or ``"sdp"``.
    """
    if not 0 < eps < 1:
        raise InfeasibleError(f"epsilon must lie in (0, 1), got {eps}", eps)
    if n > 3:
        raise DimensionLimitError("hypothesis tests are limited to n ≤ 3")
    setup = CopySetup(N, T, n)
    a, b, r = setup.a, setup.b, setup.r
    phi = la.hermitize(np.asarray(phi, dtype=complex))
    Phi = setup.lift(phi)
    rho = setup.apply(setup.Jn, Phi)
    S = setup.F
    sigma = _singleton_output(S, Phi, a, b, r) if method in ("auto", "np") else None
    if method == "np" and sigma is None:
        raise DomainError("free outputs on this input are not a single state")
    if sigma is not None:
        beta, _, P, gap = neyman_pearson(rho, sigma, eps)
        return SteinPoint(n, eps, beta, _exponent(beta, n), phi, gap, "np", P)
    # min Tr[Z J0] s.t. Z ∈ span(free functionals), Z ⪰ Λ*(P), 0 ⪯ P ⪯ I, Tr[ρP] ≥ 1 − ε
    p = SdpProblem()
    P = p.new_herm(r * b, psd=True)
    Z = p.new_herm(a * b)
    p.add_psd(np.eye(r * b) - P)
    p.add_psd(P.map(lambda X: np.trace(rho @ X, axis1=-2, axis2=-1)[..., None, None]) - (1.0 - eps))
    for B in S.basis:
        p.add_eq(Z.map(lambda X, B=B: np.trace(B @ X, axis1=-2, axis2=-1)[..., None, None]))
    p.add_psd(Z - P.map(lambda X: ch.input_adjoint(Phi, X, a, b, r)))
    J0 = S.interior
    p.minimize(Z.map(lambda X: np.trace(J0 @ X, axis1=-2, axis2=-1)[..., None, None]))
    sol = p.solve()
    beta = max(float(sol.primal_value), 0.0)
    return SteinPoint(n, eps, beta, _exponent(beta, n), phi, float(sol.gap), "sdp", la.hermitize(sol[P]))


def _exponent(beta, n):
    return float(-np.log2(beta) / n) if beta > 0 else np.inf


@dataclass
class SteinScan:
    points: list
    inner_relent: dict
    phis: list = field(repr=False, default_factory=list)

    def rows(self):
        for pt in self.points:
            ir = self.inner_relent.get(pt.n, np.nan)
            yield {"n": pt.n, "epsilon": pt.epsilon, "phi_id": getattr(pt, "phi_id", 0),
                   "beta": pt.beta, "exponent": pt.exponent, "inner_relent": ir,
                   "gap": ir - pt.exponent}

    def exponents(self):
        return [pt.exponent for pt in self.points]


def _free_inputs(T, count, seed):
    param = T.state_param(("R", "A"))
    if param.n == 0:
        return [param.state(np.zeros(0))]
    rng = la.as_rng(seed)
    out = [param.state(param.from_state(np.eye(param.dim) / param.dim))]
    while len(out) < count:
        out.append(param.state(param.random(rng)))
    return out


def stein_scan(N: ch.LinearMap, T: ResourceTheory, eps: float = 0.05, n_max: int = 3,
               phis=None, phi_count: int = 8, seed=0, method: str = "auto") -> SteinScan:
    """Exponents ``−log₂β/n`` for ``n = 1..n_max``, best over the given free inputs.

    Also records the per-copy inner relative entropy ``min_M D(N(φ)‖M(φ))/n``
    at the selected input.
    """
    phis = list(phis) if phis is not None else _free_inputs(T, phi_count, seed)
    pts, inner = [], {}
    for n in range(1, n_max + 1):
        best = None
        for k, phi in enumerate(phis):
            pt = beta_opt(N, phi, n, eps, T, method)
            pt.phi_id = k
            if best is None or pt.exponent > best.exponent:
                best = pt
        pts.append(best)
        setup = CopySetup(N, T, n)
        _, res, _ = setup.inner(setup.lift(best.phi))
        inner[n] = res.value / n
    return SteinScan(pts, inner, phis)


# --------------------------------------------------------------------------- #
# Chernoff-type bound
# --------------------------------------------------------------------------- #

def p_error(N: ch.LinearMap, T: ResourceTheory, phi, t0: float = 0.5):
    """``max_M ½(1 − ‖t₀N(φ) − t₁M(φ)‖₁)`` over free ``M`` (an SDP)."""
    setup = CopySetup(N, T, 1)
    a, b, r = setup.a, setup.b, setup.r
    phi = la.hermitize(np.asarray(phi, dtype=complex))
    rho = setup.apply(N.choi, phi)
    p = SdpProblem()
    J = p.new_herm(a * b, psd=True)
    setup.F.constrain(p, J)
    Pp = p.new_herm(r * b, psd=True)
    Qm = p.new_herm(r * b, psd=True)
    p.add_eq(Pp - Qm - t0 * rho + (1 - t0) * J.map(lambda X: ch.apply_choi(X, phi, a, b, r)))
    p.minimize((Pp + Qm).trace())
    sol = p.solve()
    return 0.5 * (1.0 - sol.primal_value), la.hermitize(sol[J])


def _q_grad(rho_a, sigma, alpha):
    w, V = np.linalg.eigh(la.hermitize(sigma))
    w = np.maximum(w, 0.0)
    L = dd1_general(w, lambda x: np.power(np.maximum(x, 1e-300), 1.0 - alpha),
                    lambda x: (1.0 - alpha) * np.power(np.maximum(x, 1e-300), -alpha))
    return V @ (L * (V.conj().T @ rho_a @ V)) @ V.conj().T


def _max_renyi_over_free(setup: CopySetup, phi, alpha, samples, rng, polish=20):
    """Heuristic ``max_M D_α(N(φ)‖M(φ))``: sampled extreme points then vertex descent of ``Q_α``."""
    a, b, r = setup.a, setup.b, setup.r
    rho = setup.apply(setup.Jn, phi)
    S = setup.F
    out0 = _singleton_output(S, phi, a, b, r)
    if out0 is not None:
        d = _renyi(alpha, rho, out0)
        return d, d
    rho_a = la.matrix_fn_on_support(rho, lambda x: x ** alpha)
    best_J, best_q = None, np.inf
    sampled = -np.inf
    for _ in range(samples):
        J = S.extreme_point(la.random_hermitian(S.dim, rng))
        q = petz_quasi(alpha, rho, setup.apply(J, phi))
        sampled = max(sampled, _q_to_d(q, alpha))
        if q < best_q:
            best_J, best_q = J, q
    for _ in range(polish):
        G = _q_grad(rho_a, setup.apply(best_J, phi), alpha)
        C = ch.input_adjoint(phi, G, a, b, r)
        _, J = linear_opt_over_set(C, S, "min")
        q = petz_quasi(alpha, rho, setup.apply(J, phi))
        if q < best_q - 1e-12:
            best_J, best_q = J, q
        else:
            break
    return sampled, _q_to_d(best_q, alpha)


def _q_to_d(q, alpha):
    return float(np.log2(q) / (alpha - 1.0)) if q > 0 else np.inf


def _renyi(alpha, rho, sigma):
    return _q_to_d(petz_quasi(alpha, rho, sigma), alpha)


@dataclass
class ChernoffReport:
    alphas: np.ndarray
    G: np.ndarray
    bound: float
    alpha_star: float
    p_error: float
    t0: float
    phi: np.ndarray = field(repr=False, default=None)
    G_sampled: np.ndarray = field(repr=False, default=None)

    @property
    def error_exponent(self) -> float:
        return float(-np.log2(self.p_error)) if self.p_error > 0 else np.inf

    @property
    def holds(self) -> bool:
        return self.error_exponent >= self.bound - 1e-6


def chernoff_lower(N: ch.LinearMap, T: ResourceTheory, alphas=None, t0: float = 0.5,
                   phi_count: int = 4, samples: int = 8, seed=0) -> ChernoffReport:
    """Single-copy Chernoff-type quantity ``max_α (1 − α) G_α``.

    ``G_α = min_φ max_M D_α(N(φ)‖M(φ))`` over free inputs and free channels.
    The inner maximum is heuristic unless the free output is a single
    state.  ``p_error`` is the exact single-copy worst-case error at the
    input attaining ``G``.
    """
    alphas = np.linspace(0.05, 0.95, 19) if alphas is None else np.asarray(alphas, dtype=float)
    if np.any((alphas <= 0) | (alphas >= 1)):
        raise DomainError("alphas must lie in (0, 1)")
    rng = la.as_rng(seed)
    setup = CopySetup(N, T, 1)
    phis = _free_inputs(T, phi_count, seed)

    def G_at(alpha):
        best, best_s, best_phi = np.inf, np.inf, None
        for phi in phis:
            s, v = _max_renyi_over_free(setup, phi, alpha, samples, rng)
            if v < best:
                best, best_s, best_phi = v, s, phi
        return best, best_s, best_phi

    vals = [G_at(a) for a in alphas]
    G = np.array([v[0] for v in vals])
    Gs = np.array([v[1] for v in vals])
    obj = (1.0 - alphas) * G
    k = int(np.argmax(obj))
    a_star, bound, phi = float(alphas[k]), float(obj[k]), vals[k][2]
    lo, hi = alphas[max(k - 1, 0)], alphas[min(k + 1, len(alphas) - 1)]
    if hi > lo:
        r = minimize_scalar(lambda a: -(1.0 - a) * G_at(a)[0], bounds=(lo, hi), method="bounded",
                            options={"xatol": 1e-8})
        if -r.fun > bound:
            a_star, bound = float(r.x), float(-r.fun)
            phi = G_at(a_star)[2]
    pe = min(p_error(N, T, ph, t0)[0] for ph in phis)
    return ChernoffReport(alphas, G, bound, a_star, pe, t0, phi, Gs)
