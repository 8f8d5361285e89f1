"""Dense semidefinite programming over Hermitian matrix variables.

Problems are modelled with affine matrix expressions in real coordinates.
Equalities are eliminated by a nullspace parametrization and the remaining
program is handed to the cvxopt conic solver, after embedding each complex
Hermitian block ``H = A + iB`` as the real symmetric ``[[A, -B], [B, A]]``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from . import linalg as la
from .errors import DimMismatchError, InfeasibleError, MaxIterationsError

log = logging.getLogger(__name__)

GAP_TOL = 1e-7
FEAS_TOL = 1e-7


# --------------------------------------------------------------------------- #
# Affine expressions
# --------------------------------------------------------------------------- #

class Expr:
    """Affine map from the real variable vector to ``m × m`` Hermitian matrices.

    ``terms[b]`` has shape ``(k_b, m, m)``: the matrix multiplying each real
    coordinate of variable block ``b``.  Scalars are ``1 × 1``.
    """

    __slots__ = ("m", "terms", "const")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, m: int, terms: dict | None = None, const=None):
        self.m = m
        self.terms = terms or {}
        self.const = np.zeros((m, m), dtype=complex) if const is None else np.asarray(const, dtype=complex)

    @staticmethod
    def constant(M) -> "Expr":
        M = np.atleast_2d(np.asarray(M, dtype=complex))
        return Expr(M.shape[0], {}, M)

    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            if other.m != self.m:
                raise DimMismatchError(f"expression sizes {self.m} and {other.m} differ")
            return other
        M = np.asarray(other, dtype=complex)
        if M.ndim == 0:
            M = M * np.eye(self.m)
        return Expr(self.m, {}, M)

    def __add__(self, other) -> "Expr":
        other = self._coerce(other)
        terms = dict(self.terms)
        for b, c in other.terms.items():
            terms[b] = terms[b] + c if b in terms else c
        return Expr(self.m, terms, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return self * -1.0

    def __sub__(self, other) -> "Expr":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Expr":
        return self._coerce(other) - self

    def __mul__(self, c) -> "Expr":
        if isinstance(c, Expr):
            raise TypeError("expressions are affine; products are not supported")
        c = np.asarray(c)
        if c.ndim == 0:
            return Expr(self.m, {b: t * c for b, t in self.terms.items()}, self.const * c)
        # scalar expression times a constant matrix
        if self.m != 1:
            raise DimMismatchError("only scalar expressions can multiply a matrix")
        M = np.asarray(c, dtype=complex)
        return Expr(M.shape[0], {b: t[:, 0, 0, None, None] * M for b, t in self.terms.items()},
                    self.const[0, 0] * M)

    __rmul__ = __mul__

    def map(self, f: Callable[[np.ndarray], np.ndarray]) -> "Expr":
        """Apply a linear, batch-aware map ``f`` acting on trailing ``(m, m)`` axes."""
        const = np.asarray(f(self.const), dtype=complex)
        terms = {b: np.asarray(f(t), dtype=complex) for b, t in self.terms.items()}
        return Expr(const.shape[-1], terms, const)

    def trace(self) -> "Expr":
        return self.map(lambda X: np.trace(X, axis1=-2, axis2=-1)[..., None, None])

    def value(self, blocks: dict) -> np.ndarray:
        out = self.const.copy()
        for b, t in self.terms.items():
            out = out + np.tensordot(blocks[b], t, axes=(0, 0))
        return out

    def __repr__(self) -> str:
        return f"Expr(m={self.m}, blocks={sorted(self.terms)})"


def _herm_vec(X: np.ndarray) -> np.ndarray:
    return la.herm_to_coords(X)


def _embed_real(F: np.ndarray) -> np.ndarray:
    """Real symmetric embedding of Hermitian ``F`` (batch-aware)."""
    A, B = F.real, F.imag
    top = np.concatenate([A, -B], axis=-1)
    bot = np.concatenate([B, A], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def _unembed(Z: np.ndarray) -> np.ndarray:
    """Hermitian ``W`` with ``Tr[F W] = ⟨embed(F), Z⟩`` for Hermitian ``F``."""
    m = Z.shape[0] // 2
    Z11, Z12, Z21, Z22 = Z[:m, :m], Z[:m, m:], Z[m:, :m], Z[m:, m:]
    S = Z11 + Z22
    T = Z21 - Z12
    return 0.5 * (S + S.T) + 0.5j * (T - T.T)


# --------------------------------------------------------------------------- #
# Problem and solution
# --------------------------------------------------------------------------- #

@dataclass
class SdpSolution:
    primal_value: float
    dual_value: float
    status: str
    gap: float
    values: dict = field(repr=False, default_factory=dict)
    duals: list = field(repr=False, default_factory=list)
    eq_duals: list = field(repr=False, default_factory=list)
    sense: float = 1.0
    eq_residual: float = 0.0
    psd_residual: float = 0.0
    iterations: int = 0

    def __getitem__(self, expr: Expr) -> np.ndarray:
        return expr.value(self.values)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def sensitivity(self, dpsd: dict | None = None, deq: dict | None = None) -> float:
        """First-order change of the optimal value under a constraint perturbation.

        ``dpsd[i]`` and ``deq[j]`` are the derivatives of the constant parts
        of PSD constraint ``i`` and equality ``j`` (as Hermitian matrices).
        """
        dv = 0.0
        for i, dE in (dpsd or {}).items():
            dv -= float(np.real(np.trace(self.duals[i] @ dE)))
        for j, dE in (deq or {}).items():
            dv += float(np.real(np.trace(self.eq_duals[j] @ dE)))
        return dv * self.sense


class SdpProblem:
    """Container for variables, constraints and a linear objective.

    Examples
    --------
    >>> p = SdpProblem()
    >>> x = p.new_real()
    >>> p.add_psd(x - 1.0)
    >>> p.minimize(x)
    >>> round(p.solve().primal_value, 6)
    1.0
    """

    def __init__(self):
        self._sizes: list[int] = []
        self._herm: dict[int, int] = {}
        self.equalities: list[Expr] = []
        self.psd: list[Expr] = []
        self.objective: Expr = Expr(1)
        self.sense = 1.0

    # -- variables ---------------------------------------------------------- #
    def new_herm(self, d: int, psd: bool = False) -> Expr:
        b = len(self._sizes)
        self._sizes.append(d * d)
        self._herm[b] = d
        X = Expr(d, {b: np.array(la.herm_basis(d))})
        if psd:
            self.add_psd(X)
        return X

    def new_real(self, nonneg: bool = False) -> Expr:
        b = len(self._sizes)
        self._sizes.append(1)
        x = Expr(1, {b: np.ones((1, 1, 1), dtype=complex)})
        if nonneg:
            self.add_psd(x)
        return x

    # -- constraints -------------------------------------------------------- #
    def add_eq(self, lhs: Expr, rhs=0.0) -> int:
        """Add ``lhs = rhs``; returns the constraint index."""
        self.equalities.append(lhs - rhs)
        return len(self.equalities) - 1

    def add_psd(self, expr: Expr) -> int:
        """Add ``expr ⪰ 0``; returns the constraint index."""
        self.psd.append(expr)
        return len(self.psd) - 1

    def add_le(self, lhs, rhs) -> None:
        """Scalar or matrix inequality ``lhs ⪯ rhs``."""
        if isinstance(rhs, Expr):
            self.psd.append(rhs - lhs)
        else:
            self.psd.append(-(lhs - rhs))

    def minimize(self, expr: Expr) -> None:
        self.objective, self.sense = expr, 1.0

    def maximize(self, expr: Expr) -> None:
        self.objective, self.sense = expr, -1.0

    # -- assembly ----------------------------------------------------------- #
    def _offsets(self):
        off = np.concatenate([[0], np.cumsum(self._sizes)]).astype(int)
        return off, int(off[-1])

    def _dense(self, expr: Expr, N: int, off) -> np.ndarray:
        F = np.zeros((N, expr.m, expr.m), dtype=complex)
        for b, t in expr.terms.items():
            F[off[b]:off[b + 1]] = t
        return F

    def to_json(self) -> dict:
        """Debug dump of block sizes and constraint shapes."""
        return {"variables": list(self._sizes), "equalities": [e.m for e in self.equalities],
                "psd": [e.m for e in self.psd], "sense": self.sense}

    def solve(self, maxiters: int = 200, tol: float = 1e-9, raise_on_fail: bool = False) -> SdpSolution:
        return solve(self, maxiters=maxiters, tol=tol, raise_on_fail=raise_on_fail)


def _nullspace_param(A: np.ndarray, b: np.ndarray, N: int):
    if A.shape[0] == 0:
        return np.zeros(N), np.eye(N), 0.0
    U, s, Vt = scipy.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > 1e-10 * max(s[0], 1.0))) if s.size else 0
    x0 = Vt[:rank].T @ ((U[:, :rank].T @ b) / s[:rank])
    resid = float(np.max(np.abs(A @ x0 - b))) if b.size else 0.0
    return x0, Vt[rank:].T, resid


def solve(p: SdpProblem, maxiters: int = 200, tol: float = 1e-9, raise_on_fail: bool = False) -> SdpSolution:
    """Solve ``p`` and return primal/dual values with residual certificates.

    Status is ``optimal`` when the duality gap is below ``1e-7·(1+|primal|)``
    and the PSD residual below ``1e-7``; ``infeasible`` when the equalities
    are inconsistent or the solver returns an infeasibility certificate;
    otherwise ``max_iter``.
    """
    import cvxopt
    from cvxopt import solvers

    off, N = p._offsets()
    # equalities in real coordinates
    rows, rhs = [], []
    for e in p.equalities:
        F = p._dense(e, N, off)
        rows.append(_herm_vec(F).T)
        rhs.append(-_herm_vec(e.const))
    A = np.vstack(rows) if rows else np.zeros((0, N))
    b = np.concatenate(rhs) if rhs else np.zeros(0)
    x0, Z, resid = _nullspace_param(A, b, N)
    if resid > 1e-8 * (1 + np.max(np.abs(b), initial=0.0)):
        sol = SdpSolution(np.inf * p.sense, np.inf * p.sense, "infeasible", np.inf, eq_residual=resid)
        if raise_on_fail:
            raise InfeasibleError("equality constraints are inconsistent", resid)
        return sol

    c_full = np.real(p._dense(p.objective, N, off)[:, 0, 0]) * p.sense
    c0 = float(np.real(p.objective.const[0, 0])) * p.sense
    c = Z.T @ c_full
    cconst = c0 + c_full @ x0
    nw = Z.shape[1]

    Gs, hs, sizes = [], [], []
    for e in p.psd:
        F = p._dense(e, N, off)
        Fe = _embed_real(F)  # (N, 2m, 2m)
        C = _embed_real(e.const + np.tensordot(x0, F, axes=(0, 0)))
        Gw = -np.tensordot(Z.T, Fe, axes=(1, 0))  # (nw, 2m, 2m)
        k = 2 * e.m
        Gs.append(Gw.reshape(nw, k * k).T)
        hs.append(C.T.reshape(k * k))
        sizes.append(k)

    def unpack(w):
        x = x0 + Z @ w
        return {blk: x[off[blk]:off[blk + 1]] for blk in range(len(p._sizes))}

    if nw == 0 or not Gs:
        if nw > 0 and np.max(np.abs(c)) > 1e-12:
            raise InfeasibleError("objective unbounded without conic constraints")
        w = np.zeros(nw)
        val = cconst * p.sense
        return _finish(p, unpack(w), val, val, "optimal", raise_on_fail, 0)

    opts = {"show_progress": False, "maxiters": maxiters, "abstol": tol, "reltol": tol, "feastol": tol}
    Gsm = [cvxopt.matrix(G) for G in Gs]
    hsm = [cvxopt.matrix(h.reshape(k, k)) for h, k in zip(hs, sizes)]
    try:
        res = solvers.sdp(cvxopt.matrix(c), Gs=Gsm, hs=hsm, options=opts)
    except (ValueError, ArithmeticError) as exc:
        log.debug("cvxopt failed (%s); retrying with interior shift", exc)
        hsm = [cvxopt.matrix(h.reshape(k, k) + 1e-8 * np.eye(k)) for h, k in zip(hs, sizes)]
        res = solvers.sdp(cvxopt.matrix(c), Gs=Gsm, hs=hsm, options=opts)
    status = res["status"]
    if status in ("primal infeasible", "dual infeasible"):
        if raise_on_fail:
            raise InfeasibleError(f"solver reports {status}", res.get("residual as primal infeasibility certificate"))
        return SdpSolution(np.inf * p.sense, np.inf * p.sense, "infeasible", np.inf)
    if res["x"] is None:
        if raise_on_fail:
            raise MaxIterationsError("solver returned no iterate")
        return SdpSolution(np.nan, np.nan, "max_iter", np.inf)
    w = np.array(res["x"]).ravel()
    primal = (float(res["primal objective"]) + cconst) * p.sense
    dual = (float(res["dual objective"]) + cconst) * p.sense
    duals = [_unembed(np.array(z)) for z in res["zs"]]
    sol = _finish(p, unpack(w), primal, dual, status, raise_on_fail, res.get("iterations", 0), duals)
    sol.sense = p.sense
    if p.equalities and A.shape[0]:
        sol.eq_duals = _equality_duals(p, A, c_full, duals, N, off)
    return sol


def _equality_duals(p, A, c_full, duals, N, off):
    """Recover Hermitian multipliers of the eliminated equalities from stationarity."""
    grad = c_full.copy()
    for e, W in zip(p.psd, duals):
        F = p._dense(e, N, off)
        grad -= np.real(np.einsum("kij,ji->k", F, W))
    y = np.linalg.lstsq(A.T, -grad, rcond=None)[0]
    out, pos = [], 0
    for e in p.equalities:
        k = e.m * e.m
        w = np.concatenate([np.ones(e.m), 0.5 * np.ones(k - e.m)])
        out.append(la.coords_to_herm(y[pos:pos + k] * w))
        pos += k
    return out


def _finish(p, blocks, primal, dual, status, raise_on_fail, iters, duals=None) -> SdpSolution:
    eq_res = max((float(np.max(np.abs(e.value(blocks)))) for e in p.equalities), default=0.0)
    psd_res = max((max(0.0, -la.min_eig(e.value(blocks))) for e in p.psd), default=0.0)
    gap = abs(primal - dual)
    ok = gap <= GAP_TOL * (1 + abs(primal)) and psd_res <= FEAS_TOL and eq_res <= FEAS_TOL
    st = "optimal" if ok else "max_iter"
    if st != "optimal" and status == "optimal":
        log.debug("solver optimal but certificate check failed: gap=%g psd=%g eq=%g", gap, psd_res, eq_res)
    sol = SdpSolution(primal, dual, st, gap, blocks, duals or [], eq_res, psd_res, iters)
    if raise_on_fail and st != "optimal":
        raise MaxIterationsError(f"no certified optimum (gap {gap:.2e}, psd residual {psd_res:.2e})", sol)
    return sol


# --------------------------------------------------------------------------- #
# Templates
# --------------------------------------------------------------------------- #

def _choi_of(D) -> tuple[np.ndarray, int, int]:
    if hasattr(D, "choi"):
        return np.asarray(D.choi), D.dim_in, D.dim_out
    J, a, b = D
    return np.asarray(J), a, b


def _tr_out(a: int, b: int):
    return lambda X: la.partial_trace(X, [a, b], [0])


def diamond_norm(Delta, form: str = "general", return_solution: bool = False):
    """Diamond norm of a Hermitian-preserving map given by its Choi matrix.

    ``form="general"`` solves ``min ½(‖Tr_B Y₀‖_∞ + ‖Tr_B Y₁‖_∞)`` subject to
    ``[[Y₀, −J], [−J, Y₁]] ⪰ 0``; ``form="simple"`` solves
    ``2 min ‖Tr_B ω‖_∞`` with ``ω ⪰ J``, ``ω ⪰ 0`` and is valid only for
    trace-annihilating maps (differences of channels).

    Parameters
    ----------
    Delta : LinearMap or tuple
        Map or ``(choi, dim_in, dim_out)``.
    """
    J, a, b = _choi_of(Delta)
    D = a * b
    if np.max(np.abs(J)) < 1e-14:
        return (0.0, None) if return_solution else 0.0
    p = SdpProblem()
    trB = _tr_out(a, b)
    if form == "simple":
        w = p.new_herm(D, psd=True)
        s = p.new_real()
        p.add_psd(w - J)
        p.add_psd(s * np.eye(a) - w.map(trB))
        p.minimize(s * 2.0)
    elif form == "general":
        Y0 = p.new_herm(D)
        Y1 = p.new_herm(D)
        s0, s1 = p.new_real(), p.new_real()

        def block(Y0m, Y1m, Jm):
            top = np.concatenate([Y0m, -Jm], axis=-1)
            bot = np.concatenate([-np.conj(np.swapaxes(Jm, -1, -2)), Y1m], axis=-1)
            return np.concatenate([top, bot], axis=-2)

        zero = np.zeros((D, D))
        big = (Y0.map(lambda X: block(X, np.zeros_like(X), np.zeros_like(X)))
               + Y1.map(lambda X: block(np.zeros_like(X), X, np.zeros_like(X)))
               + Expr.constant(block(zero, zero, J)))
        p.add_psd(big)
        p.add_psd(s0 * np.eye(a) - Y0.map(trB))
        p.add_psd(s1 * np.eye(a) - Y1.map(trB))
        p.minimize((s0 + s1) * 0.5)
    else:
        raise ValueError(f"unknown form {form!r}")
    sol = p.solve()
    return (sol.primal_value, sol) if return_solution else sol.primal_value


@dataclass
class LrToCptpResult:
    value: float
    t: float
    neg_inf: bool
    solution: SdpSolution = field(repr=False, default=None)

    def __float__(self) -> float:
        return float(self.value)


def lr_to_cptp(Delta, floor: float = 1e-12) -> LrToCptpResult:
    """``min log₂ t`` such that ``t J^E ⪰ J^Δ`` for some channel ``E``.

    Solved in the scaled variable ``K = t J^E`` with ``Tr_B K = t I_A``.  When
    ``t`` is below ``floor`` (the zero map) the value is ``-inf`` and
    ``neg_inf`` is set.
    """
    J, a, b = _choi_of(Delta)
    if np.max(np.abs(J)) < 1e-14:
        return LrToCptpResult(-np.inf, 0.0, True)
    p = SdpProblem()
    K = p.new_herm(a * b, psd=True)
    t = p.new_real()
    p.add_psd(K - J)
    p.add_eq(K.map(_tr_out(a, b)), t * np.eye(a))
    p.minimize(t)
    sol = p.solve()
    tv = sol.primal_value
    if tv <= floor:
        return LrToCptpResult(-np.inf, tv, True, sol)
    return LrToCptpResult(float(np.log2(tv)), tv, False, sol)


def linear_opt_over_set(C, S, sense: str = "max", return_solution: bool = False):
    """Optimize ``Tr[C X]`` over the affine+PSD set ``S``.

    ``S`` is any object exposing ``dim``, ``A`` (rows acting on Hermitian
    coordinates) and ``b``; see :class:`qrtkit.theories.ConstraintSystem`.
    Returns ``(value, optimizer)``.
    """
    C = la.hermitize(np.asarray(C, dtype=complex))
    p = SdpProblem()
    X = p.new_herm(S.dim, psd=True)
    S.constrain(p, X)
    obj = X.map(lambda Y: (C[None] @ Y if Y.ndim == 3 else C @ Y)).trace()
    if sense == "max":
        p.maximize(obj)
    elif sense == "min":
        p.minimize(obj)
    else:
        raise ValueError(f"sense must be 'max' or 'min', not {sense!r}")
    sol = p.solve()
    if sol.status == "infeasible":
        raise InfeasibleError("constraint system is infeasible", sol.eq_residual)
    Xv = la.hermitize(sol[X])
    out = (sol.primal_value, Xv)
    return out + (sol,) if return_solution else out
