"""Resource theories as affine+PSD constraint systems.

Free states and free channels (on Choi matrices) are described by linear
equalities ``L_i(X) = T_i`` together with ``X ⪰ 0``.  Systems are labelled
(``"A"``, ``"B"``, ``"R"``, ``"E"``); tuples of labels denote composites.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import channels as ch
from . import linalg as la
from . import params
from .errors import ConfigError, DimMismatchError, InfeasibleError, NotFullRankError, ParseError

log = logging.getLogger(__name__)

MEMBER_TOL = 1e-7

LinMap = Callable[[np.ndarray], np.ndarray]


def _dual_weights(d: int) -> np.ndarray:
    return np.concatenate([np.ones(d), 0.5 * np.ones(d * d - d)])


class ConstraintSystem:
    """``{X ⪰ 0 : L_i(X) = T_i}`` on ``dim × dim`` Hermitian matrices.

    Parameters
    ----------
    dim : int
    maps : list of (callable, ndarray)
        Linear batch-aware maps with Hermitian targets.
    interior : ndarray, optional
        A strictly feasible point; computed by an SDP when omitted.
    """

    def __init__(self, dim: int, maps: Sequence[tuple[LinMap, np.ndarray]], interior=None, name: str = ""):
        self.dim = int(dim)
        self.maps = [(L, np.atleast_2d(np.asarray(T, dtype=complex))) for L, T in maps]
        self.name = name
        self._interior = None if interior is None else la.hermitize(np.asarray(interior, dtype=complex))
        if self._interior is not None:
            ok, viol = self.membership(self._interior)
            if not ok or la.min_eig(self._interior) <= 0:
                raise InfeasibleError(f"{name}: supplied interior point is not strictly feasible", viol)

    def __repr__(self) -> str:
        return f"ConstraintSystem({self.name!r}, dim={self.dim}, free_dims={self.basis.shape[0]})"

    # -- linear algebra ----------------------------------------------------- #
    @cached_property
    def _reduced(self):
        D = self.dim
        E = np.array(la.herm_basis(D))
        rows, rhs = [], []
        for L, T in self.maps:
            out = la.herm_to_coords(np.asarray(L(E)))
            rows.append(out.T)
            rhs.append(la.herm_to_coords(T))
        if not rows:
            return np.zeros((0, D * D)), np.zeros(0), np.eye(D * D)
        A = np.vstack(rows)
        b = np.concatenate(rhs)
        U, s, Vt = scipy.linalg.svd(A, full_matrices=True)
        r = int(np.sum(s > 1e-10 * max(s[0], 1.0)))
        Ar = s[:r, None] * Vt[:r]
        br = U[:, :r].T @ b
        x0 = Vt[:r].T @ (br / s[:r])
        if np.max(np.abs(A @ x0 - b), initial=0.0) > 1e-8:
            raise InfeasibleError(f"{self.name}: affine constraints are inconsistent")
        return Ar, br, Vt[r:].T

    @property
    def A(self) -> np.ndarray:
        """Independent rows acting on Hermitian coordinates."""
        return self._reduced[0]

    @property
    def b(self) -> np.ndarray:
        return self._reduced[1]

    @cached_property
    def basis(self) -> np.ndarray:
        """Hermitian directions spanning the affine nullspace, shape ``(n, D, D)``."""
        Z = self._reduced[2]
        return la.coords_to_herm(Z.T) if Z.shape[1] else np.zeros((0, self.dim, self.dim), dtype=complex)

    @cached_property
    def functionals(self) -> np.ndarray:
        """Hermitian ``A_k`` with ``Tr[A_k X] = b_k`` describing the affine hull."""
        return la.coords_to_herm(self.A * _dual_weights(self.dim))

    @property
    def interior(self) -> np.ndarray:
        if self._interior is None:
            self._interior = self._analytic_interior()
        return self._interior

    def _analytic_interior(self) -> np.ndarray:
        from .sdp import SdpProblem
        p = SdpProblem()
        X = p.new_herm(self.dim)
        lam = p.new_real()
        p.add_psd(X - lam * np.eye(self.dim))
        p.add_psd(1.0 - lam)
        self.constrain(p, X)
        p.maximize(lam)
        sol = p.solve()
        if sol.status == "infeasible" or sol.primal_value <= 1e-9:
            raise InfeasibleError(f"{self.name}: no strictly feasible point", sol.primal_value)
        return la.hermitize(sol[X])

    # -- use ---------------------------------------------------------------- #
    def membership(self, X, tol: float = MEMBER_TOL) -> tuple[bool, float]:
        """Check equalities and positivity; returns ``(ok, max violation)``."""
        X = np.asarray(X, dtype=complex)
        if X.shape != (self.dim, self.dim):
            raise DimMismatchError(f"expected {self.dim}×{self.dim}, got {X.shape}")
        viol = max(0.0, -la.min_eig(la.hermitize(X)))
        viol = max(viol, la.herm_violation(X))
        for L, T in self.maps:
            viol = max(viol, float(np.max(np.abs(L(X) - T))))
        return viol <= tol, viol

    def constrain(self, p, X, scale=None) -> None:
        """Add the affine constraints for expression ``X`` (optionally scaled by ``scale``)."""
        for L, T in self.maps:
            p.add_eq(X.map(L), T if scale is None else scale * T)

    def extreme_point(self, C) -> np.ndarray:
        from .sdp import linear_opt_over_set
        _, X = linear_opt_over_set(C, self, "max")
        return X

    def sample(self, seed=None, mix: int = 3) -> np.ndarray:
        """Random point: Dirichlet mixture of ``mix`` extreme points of random linear costs."""
        rng = la.as_rng(seed)
        if self.basis.shape[0] == 0:
            return self.interior.copy()
        pts = [self.extreme_point(la.random_hermitian(self.dim, rng)) for _ in range(max(mix, 1))]
        w = rng.dirichlet(np.ones(len(pts)))
        return la.hermitize(sum(wi * P for wi, P in zip(w, pts)))


# --------------------------------------------------------------------------- #
# Theories
# --------------------------------------------------------------------------- #

def _offdiag_mask(d: int) -> np.ndarray:
    return 1.0 - np.eye(d)


def _mio_mask(a: int, b: int) -> np.ndarray:
    """Entries ``(i k, i l)`` with ``k ≠ l`` of a Choi matrix on ``A ⊗ B``."""
    M = np.zeros((a, b, a, b))
    for i in range(a):
        M[i, :, i, :] = _offdiag_mask(b)
    return M.reshape(a * b, a * b)


def _trace_map(X):
    return np.trace(X, axis1=-2, axis2=-1)[..., None, None]


def _tp_map(a: int, b: int) -> LinMap:
    return lambda X: la.partial_trace(X, [a, b], [0])


@dataclass
class ResourceTheory:
    """Base class; subclasses fill in the free sets.

    ``dims`` maps system labels to dimensions.  ``"R"`` defaults to ``A``.
    """
    name: str
    dims: dict
    extreme_points_pure: bool = False
    has_full_rank_free_state: bool = True
    convex: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    def dim(self, labels) -> int:
        labels = _labels(labels)
        try:
            return int(np.prod([self.dims[s] for s in labels])) if labels else 1
        except KeyError as exc:
            raise DimMismatchError(f"unknown system label {exc}") from None

    def free_states(self, labels) -> ConstraintSystem:
        key = ("s", _labels(labels))
        if key not in self._cache:
            self._cache[key] = self._free_states(_labels(labels))
        return self._cache[key]

    def free_channels(self, labels_in, labels_out) -> ConstraintSystem:
        key = ("c", _labels(labels_in), _labels(labels_out))
        if key not in self._cache:
            self._cache[key] = self._free_channels(_labels(labels_in), _labels(labels_out))
        return self._cache[key]

    def state_param(self, labels) -> params.StateParam:
        """Parametrization of the free states of ``labels`` for outer ascent."""
        raise NotImplementedError

    def uniform_is_free(self, labels) -> bool:
        d = self.dim(labels)
        return self.free_states(labels).membership(np.eye(d) / d)[0]

    def is_free_channel(self, N: ch.LinearMap, labels_in="A", labels_out="B", tol: float = MEMBER_TOL):
        return self.free_channels(labels_in, labels_out).membership(N.choi, tol)

    def sample_channel(self, labels_in="A", labels_out="B", seed=None, mix: int = 3) -> ch.ChoiChannel:
        J = self.free_channels(labels_in, labels_out).sample(seed, mix)
        J = _polish_cptp(J, self.dim(labels_in), self.dim(labels_out))
        return ch.ChoiChannel(self.dim(labels_in), self.dim(labels_out), J)

    def sample_superchannel(self, seed=None, mix: int = 1, keep=None, env: str = "E") -> ch.Superchannel:
        """Free superchannel with free pre- (``A → A E``) and post-processing (``B E → B``).

        Each slot mixes a gentle free map (appending a free ancilla, or
        discarding it) with weight ``keep`` and a random free map with weight
        ``1 − keep``.  ``keep`` defaults to uniform draws in ``[0.5, 0.95]``.
        """
        rng = la.as_rng(seed)
        dA, dB, dE = self.dims["A"], self.dims["B"], self.dims[env]
        k1, k2 = (rng.uniform(0.5, 0.95, 2) if keep is None else np.broadcast_to(keep, 2))
        sig = self.free_states(env).interior
        append = ch.tensor_channels(ch.identity_channel(dA), ch.replacement_channel(sig, 1))
        discard = ch.tensor_channels(ch.identity_channel(dB), ch.trace_map(dE))
        pre = self.sample_channel("A", ("A", env), rng, mix)
        post = self.sample_channel(("B", env), "B", rng, mix)
        pre = ch.ChoiChannel(dA, dA * dE, k1 * append.choi + (1 - k1) * pre.choi)
        post = ch.ChoiChannel(dB * dE, dB, k2 * discard.choi + (1 - k2) * post.choi)
        return ch.Superchannel(pre, post, dE)

    def sample_state(self, labels, seed=None, mix: int = 3) -> np.ndarray:
        return self.free_states(labels).sample(seed, mix)

    def replacement_free(self, labels_in, labels_out, seed=None) -> ch.LinearMap:
        sigma = self.sample_state(labels_out, seed)
        return ch.replacement_channel(sigma, self.dim(labels_in))

    def to_json(self) -> dict:
        raise NotImplementedError

    # subclass hooks
    def _free_states(self, labels) -> ConstraintSystem:
        raise NotImplementedError

    def _free_channels(self, lin, lout) -> ConstraintSystem:
        raise NotImplementedError


def _labels(labels) -> tuple:
    if isinstance(labels, str):
        return tuple(labels)
    return tuple(labels)


def _polish_cptp(J, a, b):
    """Remove solver round-off from the trace-preserving condition."""
    J = la.hermitize(J)
    X = la.partial_trace(J, [a, b], [0])
    w, V = np.linalg.eigh(la.hermitize(X))
    if np.min(w) <= 0:
        return J
    S = (V * w ** -0.5) @ V.conj().T
    K = np.kron(S, np.eye(b))
    return la.hermitize(K @ J @ K)


class CoherenceTheory(ResourceTheory):
    """Incoherent states are diagonal; free channels are maximal incoherent operations."""

    def __init__(self, dim_in: int = 2, dim_out: int | None = None, dim_env: int = 2):
        dim_out = dim_in if dim_out is None else dim_out
        super().__init__("coherence", {"A": dim_in, "B": dim_out, "R": dim_in, "E": dim_env},
                         extreme_points_pure=True, has_full_rank_free_state=True)

    def _free_states(self, labels):
        d = self.dim(labels)
        mask = _offdiag_mask(d)
        maps = [(lambda X, m=mask: X * m, np.zeros((d, d))), (_trace_map, [[1.0]])]
        return ConstraintSystem(d, maps, np.eye(d) / d, f"incoherent{labels}")

    def _free_channels(self, lin, lout):
        a, b = self.dim(lin), self.dim(lout)
        mask = _mio_mask(a, b)
        maps = [(_tp_map(a, b), np.eye(a)), (lambda X, m=mask: X * m, np.zeros((a * b, a * b)))]
        return ConstraintSystem(a * b, maps, np.eye(a * b) / b, f"MIO{lin}->{lout}")

    def state_param(self, labels):
        return params.DiagonalParam(self.dim(labels))

    def to_json(self):
        return {"theory": "coherence", "dim_in": self.dims["A"], "dim_out": self.dims["B"]}


class AthermalityTheory(ResourceTheory):
    """A single Gibbs state per system; free channels are Gibbs preserving."""

    def __init__(self, gamma_A, gamma_B=None, gamma_E=None):
        gA = la.hermitize(np.asarray(gamma_A, dtype=complex))
        gB = gA if gamma_B is None else la.hermitize(np.asarray(gamma_B, dtype=complex))
        gE = gA if gamma_E is None else la.hermitize(np.asarray(gamma_E, dtype=complex))
        for g in (gA, gB, gE):
            if la.min_eig(g) <= 1e-12:
                raise NotFullRankError("Gibbs states must be full rank")
            if abs(np.real(np.trace(g)) - 1) > 1e-9:
                raise ValueError("Gibbs states must have unit trace")
        self.gibbs = {"A": gA, "B": gB, "R": gA, "E": gE}
        super().__init__("athermality", {k: v.shape[0] for k, v in self.gibbs.items()},
                         extreme_points_pure=False, has_full_rank_free_state=True)

    def gamma(self, labels) -> np.ndarray:
        labels = _labels(labels)
        if not labels:
            return np.ones((1, 1), dtype=complex)
        return la.tensor(*[self.gibbs[s] for s in labels])

    def _free_states(self, labels):
        g = self.gamma(labels)
        return ConstraintSystem(g.shape[0], [(lambda X: X, g)], g, f"gibbs{labels}")

    def _free_channels(self, lin, lout):
        a, b = self.dim(lin), self.dim(lout)
        gin, gout = self.gamma(lin), self.gamma(lout)
        K = np.kron(gin.T, np.eye(b))

        def gibbs_out(X, K=K, a=a, b=b):
            return la.partial_trace(K @ X, [a, b], [1])

        maps = [(_tp_map(a, b), np.eye(a)), (gibbs_out, gout)]
        return ConstraintSystem(a * b, maps, np.kron(np.eye(a), gout), f"GP{lin}->{lout}")

    def state_param(self, labels):
        return params.FixedParam(self.gamma(labels))

    def to_json(self):
        return {"theory": "athermality", "gamma_A": la.matrix_to_json(self.gibbs["A"]),
                "gamma_B": la.matrix_to_json(self.gibbs["B"])}


class TrivialTheory(ResourceTheory):
    """Every state and every channel is free."""

    def __init__(self, dim_in: int = 2, dim_out: int | None = None, dim_env: int = 2):
        dim_out = dim_in if dim_out is None else dim_out
        super().__init__("trivial", {"A": dim_in, "B": dim_out, "R": dim_in, "E": dim_env},
                         extreme_points_pure=True)

    def _free_states(self, labels):
        d = self.dim(labels)
        return ConstraintSystem(d, [(_trace_map, [[1.0]])], np.eye(d) / d, f"all{labels}")

    def _free_channels(self, lin, lout):
        a, b = self.dim(lin), self.dim(lout)
        return ConstraintSystem(a * b, [(_tp_map(a, b), np.eye(a))], np.eye(a * b) / b, f"CPTP{lin}->{lout}")

    def state_param(self, labels):
        return params.MixedParam(self.dim(labels))

    def to_json(self):
        return {"theory": "trivial", "dim_in": self.dims["A"], "dim_out": self.dims["B"]}


class ReplacementOnlyTheory(ResourceTheory):
    """Free channels are replacement maps onto free states of a base theory.

    Does not contain the identity channel; intended for oracle cross-checks.
    """

    def __init__(self, base: ResourceTheory):
        self.base = base
        super().__init__("replacement", dict(base.dims), base.extreme_points_pure,
                         base.has_full_rank_free_state)

    def _free_states(self, labels):
        return self.base.free_states(labels)

    def _free_channels(self, lin, lout):
        a, b = self.dim(lin), self.dim(lout)
        S = self.base.free_states(lout)

        def out(X, a=a, b=b):
            return la.partial_trace(X, [a, b], [1]) / a

        def off_product(X, a=a, b=b, out=out):
            return X - np.kron(np.eye(a), out(X))

        maps = [(off_product, np.zeros((a * b, a * b)))]
        maps += [(lambda X, L=L, out=out: L(out(X)), T) for L, T in S.maps]
        return ConstraintSystem(a * b, maps, np.kron(np.eye(a), S.interior), f"repl{lin}->{lout}")

    def state_param(self, labels):
        return self.base.state_param(labels)

    def to_json(self):
        return {"theory": "replacement", "base": self.base.to_json()}


def coherence_theory(dim_in: int = 2, dim_out: int | None = None) -> CoherenceTheory:
    return CoherenceTheory(dim_in, dim_out)


def athermality_theory(gamma_A, gamma_B=None) -> AthermalityTheory:
    return AthermalityTheory(gamma_A, gamma_B)


def gibbs_state(energies, beta: float = 1.0) -> np.ndarray:
    """``exp(−βH)/Z`` for a diagonal Hamiltonian."""
    e = np.asarray(energies, dtype=float)
    w = np.exp(-beta * (e - e.min()))
    return np.diag(w / w.sum()).astype(complex)


def theory_from_json(obj) -> ResourceTheory:
    """Build a theory from ``{"theory": "coherence"|"athermality"|"replacement"|"trivial", ...}``."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(f"theory JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None
    if not isinstance(obj, dict) or "theory" not in obj:
        raise ConfigError("theory spec must be an object with a 'theory' key")
    kind = obj["theory"]
    try:
        if kind == "coherence":
            return CoherenceTheory(int(obj.get("dim_in", 2)), obj.get("dim_out"))
        if kind == "trivial":
            return TrivialTheory(int(obj.get("dim_in", 2)), obj.get("dim_out"))
        if kind == "athermality":
            if "gamma_A" in obj:
                gA = la.matrix_from_json(obj["gamma_A"])
                gB = la.matrix_from_json(obj["gamma_B"]) if "gamma_B" in obj else None
            else:
                beta = float(obj.get("beta", 1.0))
                gA = gibbs_state(obj["energies_A"], beta)
                gB = gibbs_state(obj.get("energies_B", obj["energies_A"]), beta)
            return AthermalityTheory(gA, gB)
        if kind == "replacement":
            return ReplacementOnlyTheory(theory_from_json(obj.get("base", {"theory": "coherence"})))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad {kind!r} theory spec: {exc}") from None
    raise ConfigError(f"unknown theory {kind!r}")


# --------------------------------------------------------------------------- #
# Axiom validators
# --------------------------------------------------------------------------- #

@dataclass
class CheckRecord:
    name: str
    violation: float
    passed: bool


@dataclass
class ValidationReport:
    theory: str
    records: list = field(default_factory=list)
    tol: float = MEMBER_TOL

    def add(self, name: str, violation: float) -> None:
        self.records.append(CheckRecord(name, float(violation), bool(violation <= self.tol)))

    @property
    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    @property
    def max_violation(self) -> float:
        return max((r.violation for r in self.records), default=0.0)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        names = sorted({r.name for r in self.records})
        return {n: max(r.violation for r in self.records if r.name == n) for n in names}


def validate_axioms(T: ResourceTheory, samples: int = 20, seed=0, label: str = "A") -> ValidationReport:
    """Sample free channels and test the closure axioms by membership.

    Checks identity and trace are free, composition, ``id_C ⊗ M``, tensor
    products, permutation sandwiches of two-copy free channels and
    replacement maps onto free states.
    """
    rng = la.as_rng(seed)
    rep = ValidationReport(T.name)
    L = (label,)
    d = T.dim(L)
    rep.add("identity", T.free_channels(L, L).membership(ch.identity_channel(d).choi)[1])
    rep.add("trace", T.free_channels(L, ()).membership(ch.trace_map(d).choi)[1])
    for _ in range(samples):
        M1 = T.sample_channel(L, L, rng)
        M2 = T.sample_channel(L, L, rng)
        rep.add("composition", T.free_channels(L, L).membership(ch.compose(M1, M2).choi)[1])
        rep.add("identity_tensor",
                T.free_channels(L + L, L + L).membership(ch.identity_tensor(M1, d).choi)[1])
        rep.add("tensor", T.free_channels(L + L, L + L).membership(ch.tensor_channels(M1, M2).choi)[1])
        M12 = T.sample_channel(L + L, L + L, rng)
        P = ch.permutation_channel([1, 0], d, 2)
        sand = ch.compose(P, ch.compose(M12, P))
        rep.add("permutation", T.free_channels(L + L, L + L).membership(sand.choi)[1])
        R = T.replacement_free(L, L, rng)
        rep.add("replacement", T.free_channels(L, L).membership(R.choi)[1])
    return rep


def _phi_power(phi: np.ndarray, dR: int, dA: int, n: int) -> np.ndarray:
    """``φ^{⊗n}`` reordered from ``(RA)^n`` to ``R^n A^n``."""
    X = la.kron_power(phi, n)
    perm = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    return la.permute_systems(X, [dR, dA] * n, perm)


def output_set_distance(T: ResourceTheory, phi, rho, n: int, label_in="A", label_out="B", dim_R=None) -> float:
    """``min_M ‖Λ(J^M) − ρ‖_∞`` over ``M ∈ 𝔉(Aⁿ→Bⁿ)`` with input ``φ^{⊗n}`` (ordered ``Rⁿ Aⁿ``)."""
    from .sdp import SdpProblem
    dA, dB = T.dims[label_in], T.dims[label_out]
    dR = dA if dim_R is None else dim_R
    a, b, r = dA ** n, dB ** n, dR ** n
    S = T.free_channels((label_in,) * n, (label_out,) * n)
    phin = _phi_power(phi, dR, dA, n)
    p = SdpProblem()
    J = p.new_herm(a * b, psd=True)
    S.constrain(p, J)
    s = p.new_real()
    out = J.map(lambda X: ch.apply_choi(X, phin, a, b, r))
    eye = np.eye(r * b)
    p.add_psd(s * eye - (out - rho))
    p.add_psd(s * eye + (out - rho))
    p.minimize(s)
    sol = p.solve()
    return max(float(sol.primal_value), 0.0)


def output_sample(T: ResourceTheory, phi, n: int, seed=None, label_in="A", label_out="B", dim_R=None):
    dA, dB = T.dims[label_in], T.dims[label_out]
    dR = dA if dim_R is None else dim_R
    M = T.sample_channel((label_in,) * n, (label_out,) * n, seed)
    return ch.apply_choi(M.choi, _phi_power(phi, dR, dA, n), dA ** n, dB ** n, dR ** n)


def _permute_pairs(X, dR, dB, n, perm):
    """Permute the ``n`` (R, B) pairs of an ``Rⁿ Bⁿ`` operator by ``perm``."""
    full = list(perm) + [n + p for p in perm]
    return la.permute_systems(X, [dR] * n + [dB] * n, full)


def _pair_tensor(X, Y, dR, dB, n, m):
    """``X ⊗ Y`` for ``Rⁿ Bⁿ`` and ``Rᵐ Bᵐ`` operators, reordered to ``R^{n+m} B^{n+m}``."""
    Z = np.kron(X, Y)
    perm = list(range(n)) + list(range(2 * n, 2 * n + m)) + list(range(n, 2 * n)) + list(range(2 * n + m, 2 * n + 2 * m))
    return la.permute_systems(Z, [dR] * n + [dB] * n + [dR] * m + [dB] * m, perm)


def stein_closure_check(T: ResourceTheory, phi, n: int = 2, samples: int = 5, seed=0,
                        label_in="A", label_out="B") -> ValidationReport:
    """Closure properties of ``M_n(φ) = {M(φ^{⊗n}) : M ∈ 𝔉(Aⁿ→Bⁿ)}``.

    Checks a full-rank product element, closure under discarding the last
    copy, under tensor products and under permutations of copies.
    """
    rng = la.as_rng(seed)
    rep = ValidationReport(T.name)
    dA, dB = T.dims[label_in], T.dims[label_out]
    dR = dA
    phi = la.hermitize(np.asarray(phi, dtype=complex))
    # full-rank product element: replacement onto the most mixed free output state
    sig_B = T.free_states((label_out,)).interior
    phi_R = la.partial_trace(phi, [dR, dA], [0])
    prod = la.permute_systems(la.kron_power(np.kron(phi_R, sig_B), n), [dR, dB] * n,
                              [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)])
    rep.add("product_member", output_set_distance(T, phi, prod, n, label_in, label_out))
    rep.add("product_full_rank", max(0.0, 1e-12 - la.min_eig(prod)))
    for _ in range(samples):
        X = output_sample(T, phi, n, rng, label_in, label_out)
        if n >= 2:
            Xt = la.partial_trace(X, [dR] * n + [dB] * n, [k for k in range(2 * n) if k not in (n - 1, 2 * n - 1)])
            rep.add("trace_closure", output_set_distance(T, phi, Xt, n - 1, label_in, label_out))
            perm = list(rng.permutation(n))
            rep.add("permutation_closure",
                    output_set_distance(T, phi, _permute_pairs(X, dR, dB, n, perm), n, label_in, label_out))
            X1 = output_sample(T, phi, 1, rng, label_in, label_out)
            Xm = output_sample(T, phi, n - 1, rng, label_in, label_out)
            rep.add("tensor_closure",
                    output_set_distance(T, phi, _pair_tensor(X1, Xm, dR, dB, 1, n - 1), n, label_in, label_out))
        else:
            rep.add("member", output_set_distance(T, phi, X, 1, label_in, label_out))
    return rep


__all__ = [
    "ConstraintSystem", "ResourceTheory", "CoherenceTheory", "AthermalityTheory", "TrivialTheory",
    "ReplacementOnlyTheory", "coherence_theory", "athermality_theory", "gibbs_state", "theory_from_json",
    "validate_axioms", "stein_closure_check", "ValidationReport", "output_set_distance", "MEMBER_TOL",
]
