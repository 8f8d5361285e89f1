"""State and channel divergences (all in bits)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import linalg as la
from . import channels as ch
from .errors import DimMismatchError, DomainError
from .frechet import dd1_log, frechet_apply

LN2 = np.log(2.0)


class DivergenceValue(float):
    """A float carrying a support flag; ``inf`` iff the support condition fails."""

    def __new__(cls, value: float, support_ok: bool = True):
        obj = float.__new__(cls, value)
        obj.support_ok = bool(support_ok)
        return obj

    @property
    def value(self) -> float:
        return float(self)

    def __repr__(self) -> str:
        return f"DivergenceValue({float(self)!r}, support_ok={self.support_ok})"


def _support_split(sigma, support_tol):
    dec = la.eigh(sigma, check=False)
    w = dec.eigenvalues
    cut = support_tol * max(np.max(np.abs(w)), 1e-300)
    return dec, w > cut


def _support_ok(rho, dec, mask, support_tol) -> bool:
    V0 = dec.eigenvectors[:, ~mask]
    if V0.shape[1] == 0:
        return True
    leak = np.real(np.trace(V0.conj().T @ rho @ V0))
    return leak <= support_tol * max(np.real(np.trace(rho)), 1e-300)


def rel_entropy(rho, sigma, support_tol: float = la.SUPPORT_TOL) -> DivergenceValue:
    """Umegaki relative entropy ``Tr[ρ (log₂ρ − log₂σ)]``; ``+inf`` off support."""
    rho = la.hermitize(rho)
    sigma = la.hermitize(sigma)
    if rho.shape != sigma.shape:
        raise DimMismatchError(f"shapes {rho.shape} and {sigma.shape} differ")
    dec, mask = _support_split(sigma, support_tol)
    if not _support_ok(rho, dec, mask, support_tol):
        return DivergenceValue(np.inf, False)
    wr = np.linalg.eigvalsh(rho)
    wr = wr[wr > support_tol * max(wr[-1], 1e-300)]
    neg_ent = float(np.sum(wr * np.log2(wr)))
    V = dec.eigenvectors[:, mask]
    lw = np.log2(dec.eigenvalues[mask])
    diag = np.real(np.einsum("ik,ij,jk->k", V.conj(), rho, V))
    cross = float(np.sum(diag * lw))
    return DivergenceValue(neg_ent - cross)


def entropy(rho) -> float:
    w = np.linalg.eigvalsh(la.hermitize(rho))
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def dmax(rho, sigma, support_tol: float = la.SUPPORT_TOL) -> DivergenceValue:
    """``log₂ ‖σ^{-1/2} ρ σ^{-1/2}‖_∞`` on the support of ``σ``."""
    rho = la.hermitize(rho)
    sigma = la.hermitize(sigma)
    if rho.shape != sigma.shape:
        raise DimMismatchError(f"shapes {rho.shape} and {sigma.shape} differ")
    dec, mask = _support_split(sigma, support_tol)
    if not _support_ok(rho, dec, mask, support_tol):
        return DivergenceValue(np.inf, False)
    V = dec.eigenvectors[:, mask]
    s = dec.eigenvalues[mask] ** -0.5
    X = (V * s).conj().T @ rho @ (V * s)
    lam = np.max(np.linalg.eigvalsh(la.hermitize(X)))
    if lam <= 0:
        return DivergenceValue(-np.inf)
    return DivergenceValue(np.log2(lam))


def petz_quasi(alpha: float, rho, sigma, support_tol: float = la.SUPPORT_TOL) -> float:
    """``Tr[ρ^α σ^{1−α}]`` with generalized powers on supports."""
    ra = la.matrix_fn_on_support(rho, lambda x: x ** alpha, support_tol)
    sb = la.matrix_fn_on_support(sigma, lambda x: x ** (1.0 - alpha), support_tol)
    return float(np.real(np.trace(ra @ sb)))


def petz_renyi(alpha: float, rho, sigma, support_tol: float = la.SUPPORT_TOL) -> DivergenceValue:
    """Petz–Rényi divergence for ``α ∈ (0,1) ∪ (1,2]``."""
    if not (0 < alpha < 1 or 1 < alpha <= 2):
        raise DomainError(f"alpha = {alpha} outside (0,1) ∪ (1,2]")
    rho = la.hermitize(rho)
    sigma = la.hermitize(sigma)
    if alpha > 1:
        dec, mask = _support_split(sigma, support_tol)
        if not _support_ok(rho, dec, mask, support_tol):
            return DivergenceValue(np.inf, False)
    Q = petz_quasi(alpha, rho, sigma, support_tol)
    if Q <= 0:
        return DivergenceValue(np.inf, False)
    return DivergenceValue(np.log2(Q) / (alpha - 1.0))


def trace_distance(rho, sigma) -> float:
    return 0.5 * la.trace_norm(np.asarray(rho) - np.asarray(sigma))


def binary_entropy(x: float) -> float:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"binary entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def get_divergence(kind, alpha: float | None = None):
    if callable(kind):
        return kind
    if kind in ("relent", "D", "rel_entropy"):
        return rel_entropy
    if kind in ("dmax", "Dmax"):
        return dmax
    if kind in ("renyi", "petz"):
        if alpha is None:
            raise ValueError("renyi divergence needs alpha")
        return lambda r, s: petz_renyi(alpha, r, s)
    if kind == "trace":
        return trace_distance
    raise ValueError(f"unknown divergence kind {kind!r}")


# --------------------------------------------------------------------------- #
# Gradient of the relative entropy with respect to both arguments
# --------------------------------------------------------------------------- #

def relent_grads(rho, sigma, eps: float = 1e-12):
    """Value and gradients ``(∂_ρ, ∂_σ)`` of ``D(ρ‖σ)`` in bits.

    ``σ`` is regularized by ``eps·I`` inside the derivative; the ``ρ`` gradient
    drops the constant identity term (trace-preserving directions only).
    """
    wr, Vr = np.linalg.eigh(la.hermitize(rho))
    ws, Vs = np.linalg.eigh(la.hermitize(sigma))
    ws = np.maximum(ws, eps * max(ws[-1], 1e-300))
    mr = wr > 1e-14 * max(wr[-1], 1e-300)
    lr = np.zeros_like(wr)
    lr[mr] = np.log(wr[mr])
    log_rho = (Vr * lr) @ Vr.conj().T
    log_sig = (Vs * np.log(ws)) @ Vs.conj().T
    val = float(np.sum(wr[mr] * lr[mr]) - np.real(np.trace(rho @ log_sig))) / LN2
    g_rho = (log_rho - log_sig) / LN2
    g_sig = -frechet_apply(Vs, dd1_log(ws), rho) / LN2
    return val, la.hermitize(g_rho), la.hermitize(g_sig)


# --------------------------------------------------------------------------- #
# Channel divergence
# --------------------------------------------------------------------------- #

@dataclass
class ChannelDivergenceResult:
    value: float
    maximizer: np.ndarray = field(repr=False)
    status: str
    restart_values: list = field(default_factory=list, repr=False)

    def __float__(self) -> float:
        return float(self.value)


def _vec_to_state(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    D = x.size // 2
    v = x[:D] + 1j * x[D:]
    nrm2 = float(np.real(np.vdot(v, v)))
    if nrm2 < 1e-200:
        v = np.ones(D, dtype=complex)
        nrm2 = float(D)
    return v, np.outer(v, v.conj()) / nrm2, nrm2


def pure_state_grad(v: np.ndarray, nrm2: float, G: np.ndarray) -> np.ndarray:
    """Gradient in real coordinates of ``v ↦ Tr[G vv^†/‖v‖²]``."""
    Gv = G @ v
    f0 = float(np.real(np.vdot(v, Gv))) / nrm2
    g = 2.0 * (Gv - f0 * v) / nrm2
    return np.concatenate([g.real, g.imag])


def channel_divergence(N: ch.LinearMap, M: ch.LinearMap, dgen="relent", restarts: int = 32,
                       tol: float = 1e-6, seed=0, max_iter: int = 500, alpha: float | None = None,
                       dim_R: int | None = None, initial=None) -> ChannelDivergenceResult:
    """Maximize ``d(N(φ), M(φ))`` over pure ``φ`` on ``R ⊗ A``.

    Multistart quasi-Newton ascent on unnormalized vectors (the objective is
    scale invariant).  Status is ``converged`` when the three best restarts
    agree within ``tol``, otherwise ``lower_bound``.
    """
    if N.dims != M.dims:
        raise DimMismatchError(f"channel dims differ: {N.dims} vs {M.dims}")
    dA = N.dim_in
    dR = dA if dim_R is None else dim_R
    D = dR * dA
    rng = la.as_rng(seed)
    div = get_divergence(dgen, alpha)
    analytic = dgen in ("relent", "D", "rel_entropy")

    def objective(x):
        v, phi, nrm2 = _vec_to_state(x)
        rho = ch.apply_choi(N.choi, phi, dA, N.dim_out, dR)
        sig = ch.apply_choi(M.choi, phi, dA, N.dim_out, dR)
        if analytic:
            val, g_r, g_s = relent_grads(rho, sig)
            G = (ch.apply_adjoint_choi(N.choi, g_r, dA, N.dim_out, dR)
                 + ch.apply_adjoint_choi(M.choi, g_s, dA, N.dim_out, dR))
            return -val, -pure_state_grad(v, nrm2, G)
        val = float(div(rho, sig))
        # finite-difference gradients need finite values
        return -min(val, 1e6) if np.isfinite(val) or val > 0 else 1e6

    starts = []
    if initial is not None:
        for psi in initial:
            psi = np.asarray(psi, dtype=complex)
            if psi.ndim == 2:
                w, V = np.linalg.eigh(la.hermitize(psi))
                psi = V[:, -1]
            starts.append(np.concatenate([psi.real, psi.imag]))
    me = la.max_entangled_vector(dA) / np.sqrt(dA) if dR == dA else None
    if me is not None:
        starts.append(np.concatenate([me.real, me.imag]))
    while len(starts) < max(restarts, 1):
        starts.append(rng.standard_normal(2 * D))

    best_vals = []
    best_x = None
    best = -np.inf
    for x0 in starts:
        res = minimize(objective, x0, jac=analytic, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": 1e-10, "ftol": 1e-15})
        val = -float(res.fun)
        if not np.isfinite(val):
            continue
        best_vals.append(val)
        if val > best:
            best = val
            best_x = res.x
    if best_x is None:
        return ChannelDivergenceResult(np.inf, np.eye(D) / D, "lower_bound", [])
    _, phi, _ = _vec_to_state(best_x)
    rho = ch.apply_choi(N.choi, phi, dA, N.dim_out, dR)
    sig = ch.apply_choi(M.choi, phi, dA, N.dim_out, dR)
    value = float(div(rho, sig))
    top = sorted(best_vals, reverse=True)[:3]
    status = "converged" if len(top) >= 3 and top[0] - top[-1] <= tol else "lower_bound"
    return ChannelDivergenceResult(value, phi, status, sorted(best_vals, reverse=True))


def dmax_channels(N: ch.LinearMap, M: ch.LinearMap) -> DivergenceValue:
    """Channel max-relative entropy ``D_max(J^N ‖ J^M)``."""
    if N.dims != M.dims:
        raise DimMismatchError(f"channel dims differ: {N.dims} vs {M.dims}")
    return dmax(N.choi, M.choi)
