"""Relative-entropy minimization over affine+PSD sets.

Solves ``min_J Σ_k w_k D(ρ_k ‖ Λ_k(J))`` (or the epigraph form
``min_J max_k D(ρ_k ‖ Λ_k(J))``) for ``J`` in a spectrahedron
``{J ⪰ 0, A(J) = b}`` with a primal log-barrier path-following method.
Second derivatives of ``−Tr[ρ log σ]`` come from second divided
differences of the logarithm.  The barrier parameter gives a certified
suboptimality bound ``ν/t``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import linalg as la
from .frechet import dd1_log, dd2_log

log = logging.getLogger(__name__)

LN2 = np.log(2.0)


@dataclass
class RelEntTerm:
    """One term ``D(ρ ‖ Λ(J))``; ``lam`` is linear and batch-aware."""
    rho: np.ndarray
    lam: Callable[[np.ndarray], np.ndarray]
    weight: float = 1.0


@dataclass
class ConvexResult:
    value: float           # bits, objective at the returned point
    lower: float           # bits, certified lower bound
    J: np.ndarray = field(repr=False)
    sigmas: list = field(repr=False, default_factory=list)
    term_values: list = field(repr=False, default_factory=list)
    newton_steps: int = 0
    status: str = "optimal"

    @property
    def gap(self) -> float:
        return self.value - self.lower


def support_isometry(rho: np.ndarray, tol: float = 1e-12):
    """Isometry onto the support of ``rho``; ``None`` when full rank.

    Compressing a term by ``P`` is exact only when every ``Λ(J)`` is
    supported inside ``range(P)``, e.g. ``P = supp(φ_R) ⊗ I_B``.
    """
    w, V = np.linalg.eigh(la.hermitize(rho))
    keep = w > tol * max(w[-1], 1e-300)
    if np.all(keep):
        return None
    return V[:, keep]


class _Term:
    def __init__(self, term: RelEntTerm, J0: np.ndarray, basis: np.ndarray, support: np.ndarray | None):
        rho = la.hermitize(np.asarray(term.rho, dtype=complex))
        P = support
        lam = term.lam
        if P is not None:
            lam = (lambda f, P: (lambda X: P.conj().T @ f(X) @ P))(term.lam, P)
            rho = P.conj().T @ rho @ P
        self.rho = la.hermitize(rho)
        self.weight = float(term.weight)
        self.s0 = la.hermitize(lam(J0))
        self.S = lam(basis) if basis.shape[0] else np.zeros((0,) + self.s0.shape, dtype=complex)
        self.Sf = self.S.reshape(self.S.shape[0], -1)
        wr = np.linalg.eigvalsh(self.rho)
        wr = wr[wr > 1e-300]
        self.neg_ent = float(np.sum(wr * np.log(wr)))  # Tr ρ ln ρ

    def sigma(self, w):
        if w.size == 0:
            return self.s0
        return self.s0 + (w @ self.Sf).reshape(self.s0.shape)

    def value(self, w) -> float:
        """Relative entropy in nats; ``inf`` outside the domain."""
        ws, V = np.linalg.eigh(la.hermitize(self.sigma(w)))
        if ws[0] <= 0:
            return np.inf
        rt = np.real(np.einsum("ik,ij,jk->k", V.conj(), self.rho, V))
        return self.neg_ent - float(np.sum(rt * np.log(ws)))

    def derivs(self, w):
        """Value, gradient and Hessian in the reduced coordinates (nats)."""
        ws, V = np.linalg.eigh(la.hermitize(self.sigma(w)))
        rt = V.conj().T @ self.rho @ V
        f = self.neg_ent - float(np.real(np.sum(np.diag(rt) * np.log(ws))))
        L1 = dd1_log(ws)
        G = -(L1 * rt)  # gradient in the eigenbasis, i.e. −Dlog(σ)[ρ]
        St = V.conj().T @ self.S @ V
        g = np.real(np.einsum("ij,aji->a", G, St))
        L2 = dd2_log(ws)
        # T_ab = Σ ρ_ji L2_ikj S^a_ik S^b_kj; Hessian is −(T + Tᵀ)
        W = rt.T[:, None, :] * L2
        Z = np.matmul(St.transpose(2, 0, 1), W.transpose(1, 0, 2))  # (k, a, j)
        T = Z.transpose(1, 0, 2).reshape(St.shape[0], -1) @ St.reshape(St.shape[0], -1).T
        H = -np.real(T + T.T)
        return f, g, 0.5 * (H + H.T), V, ws


def _logdet_derivs(J: np.ndarray, B: np.ndarray):
    C = np.linalg.cholesky(J)
    Ci = scipy.linalg.solve_triangular(C, np.eye(J.shape[0]), lower=True)
    Bt = Ci @ B @ Ci.conj().T
    g = -np.real(np.einsum("aii->a", Bt))
    Bf = Bt.reshape(Bt.shape[0], -1)
    H = np.real(Bf.conj() @ Bf.T)
    val = -2.0 * float(np.sum(np.log(np.real(np.diag(C)))))
    return val, g, 0.5 * (H + H.T)


def _logdet(J: np.ndarray) -> float:
    try:
        C = np.linalg.cholesky(J)
    except np.linalg.LinAlgError:
        return np.inf
    d = np.real(np.diag(C))
    if np.any(d <= 0):
        return np.inf
    return -2.0 * float(np.sum(np.log(d)))


def minimize_relent(terms: Sequence[RelEntTerm], J0: np.ndarray, basis: np.ndarray,
                    epigraph: bool = False, tol: float = 1e-9, mu: float = 20.0,
                    max_newton: int = 400, supports: Sequence | None = None) -> ConvexResult:
    """Barrier path-following for the relative-entropy programs above.

    Parameters
    ----------
    terms : sequence of RelEntTerm
    J0 : ndarray
        Strictly feasible point (``J0 ≻ 0``, affine constraints satisfied).
    basis : ndarray, shape (n, D, D)
        Hermitian directions spanning the affine constraints' nullspace.
    epigraph : bool
        Minimize ``max_k`` instead of the weighted sum.
    tol : float
        Target certified gap in nats.

    Returns
    -------
    ConvexResult
        Values in bits; ``lower`` is certified by the barrier duality gap.
    """
    J0 = la.hermitize(np.asarray(J0, dtype=complex))
    basis = np.asarray(basis, dtype=complex).reshape(-1, J0.shape[0], J0.shape[0])
    sup = supports if supports is not None else [None] * len(terms)
    ts = [_Term(tm, J0, basis, s) for tm, s in zip(terms, sup)]
    n = basis.shape[0]
    K = len(ts)

    Bf = basis.reshape(n, -1)

    def J_of(w):
        return J0 + (w[:n] @ Bf).reshape(J0.shape) if n else J0

    def finish(w, lower_nats, steps, status="optimal"):
        vals = [tm.value(w[:n]) for tm in ts]
        obj = max(vals) if epigraph else sum(tm.weight * v for tm, v in zip(ts, vals))
        return ConvexResult(obj / LN2, min(lower_nats, obj) / LN2, J_of(w), [tm.sigma(w[:n]) for tm in ts],
                            [v / LN2 for v in vals], steps, status)

    if n == 0:
        return finish(np.zeros(0), _value0(ts, epigraph), 0)

    nu = float(J0.shape[0]) + (K if epigraph else 0)
    if epigraph:
        s0 = max(tm.value(np.zeros(n)) for tm in ts) + 1.0
        x = np.concatenate([np.zeros(n), [s0]])
    else:
        x = np.zeros(n)

    def F(x, t):
        bj = _logdet(J_of(x))
        if not np.isfinite(bj):
            return np.inf
        if epigraph:
            s = x[n]
            tot = t * s + bj
            for tm in ts:
                v = tm.value(x[:n])
                if not np.isfinite(v) or s - v <= 0:
                    return np.inf
                tot -= np.log(s - v)
            return tot
        tot = bj
        for tm in ts:
            v = tm.value(x[:n])
            if not np.isfinite(v):
                return np.inf
            tot += t * tm.weight * v
        return tot

    def derivs(x, t):
        _, gb, Hb = _logdet_derivs(J_of(x), basis)
        if epigraph:
            s = x[n]
            g = np.zeros(n + 1)
            H = np.zeros((n + 1, n + 1))
            g[:n] += gb
            H[:n, :n] += Hb
            g[n] += t
            for tm in ts:
                f, gf, Hf, _, _ = tm.derivs(x[:n])
                r = s - f
                # −log(s − f)
                gg = np.concatenate([gf, [-1.0]]) / r
                g += gg
                H += np.outer(gg, gg)
                H[:n, :n] += Hf / r
            return g, H
        g = gb.copy()
        H = Hb.copy()
        for tm in ts:
            _, gf, Hf, _, _ = tm.derivs(x)
            g += t * tm.weight * gf
            H += t * tm.weight * Hf
        return g, H

    scale = max(1.0, abs(_value0(ts, epigraph)))
    t = nu / scale
    steps = 0
    while True:
        final = nu / t <= tol
        # loose centering on intermediate stages, tight on the last
        cen_tol = 1e-7 if final else 1e-2
        for _ in range(60):
            g, H = derivs(x, t)
            try:
                c = scipy.linalg.cho_factor(H + 1e-14 * np.trace(H) / len(H) * np.eye(len(H)))
                dx = -scipy.linalg.cho_solve(c, g)
            except np.linalg.LinAlgError:
                dx = -np.linalg.lstsq(H, g, rcond=None)[0]
            lam2 = float(-g @ dx)
            steps += 1
            if lam2 <= cen_tol:
                break
            f0 = F(x, t)
            a = 1.0
            # the roundoff in F is about eps·|F|; below that Armijo cannot decide
            noise = 1e-14 * max(1.0, abs(f0))
            while a > 1e-12:
                f1 = F(x + a * dx, t)
                if f1 <= f0 - 0.25 * a * lam2 or (np.isfinite(f1) and lam2 < 1e-3 and f1 <= f0 + noise):
                    break
                a *= 0.5
            if a <= 1e-12 or (lam2 < 1e-3 and a < 1e-3):
                break
            x = x + a * dx
            if steps > max_newton:
                break
        if final or steps > max_newton:
            break
        t = min(t * mu, nu / tol)
    status = "optimal" if steps <= max_newton else "max_iter"
    res = finish(x, 0.0, steps, status)
    obj_nats = res.value * LN2
    res.lower = (obj_nats - nu / t) / LN2
    if status != "optimal":
        log.debug("barrier solver hit the Newton cap (%d steps)", steps)
    return res


def _value0(ts, epigraph) -> float:
    vals = [tm.value(np.zeros(tm.S.shape[0])) for tm in ts]
    return max(vals) if epigraph else sum(tm.weight * v for tm, v in zip(ts, vals))
