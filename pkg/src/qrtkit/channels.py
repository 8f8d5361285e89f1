"""Channels stored as unnormalized Choi matrices.

Convention: ``J = Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)`` on ``A ⊗ B`` so that ``Tr J = |A|``
for a channel and ``Tr_B J = I_A``.  Reference systems are always the
leftmost tensor factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import DimMismatchError, NotCPError, NotTPError

CP_TOL = 1e-9
TP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Hermiticity-preserving linear map ``A → B`` given by its Choi matrix."""

    dim_in: int
    dim_out: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        J = la.check_hermitian(self.choi, tol=1e-8)
        if J.shape[0] != self.dim_in * self.dim_out:
            raise DimMismatchError(
                f"Choi shape {J.shape} inconsistent with dims {self.dim_in}->{self.dim_out}")
        J.setflags(write=False)
        object.__setattr__(self, "choi", J)
        object.__setattr__(self, "dim_in", int(self.dim_in))
        object.__setattr__(self, "dim_out", int(self.dim_out))

    # arithmetic produces plain linear maps
    def __sub__(self, other: "LinearMap") -> "LinearMap":
        _same_dims(self, other)
        return LinearMap(self.dim_in, self.dim_out, self.choi - other.choi)

    def __add__(self, other: "LinearMap") -> "LinearMap":
        _same_dims(self, other)
        return LinearMap(self.dim_in, self.dim_out, self.choi + other.choi)

    def __mul__(self, c: float) -> "LinearMap":
        return LinearMap(self.dim_in, self.dim_out, float(c) * self.choi)

    __rmul__ = __mul__

    def __call__(self, rho, dim_R: int | None = None) -> np.ndarray:
        return apply(self, rho, dim_R)

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim_in, self.dim_out


class CpMap(LinearMap):
    """Completely positive map (trace preservation not required)."""

    def __post_init__(self):
        super().__post_init__()
        lam = la.min_eig(self.choi)
        if lam < -CP_TOL:
            raise NotCPError(f"Choi matrix has eigenvalue {lam:.3e} < -{CP_TOL:.0e}")


class ChoiChannel(CpMap):
    """Quantum channel (CPTP map)."""

    def __post_init__(self):
        super().__post_init__()
        viol = tp_violation(self.choi, self.dim_in, self.dim_out)
        if viol > TP_TOL:
            raise NotTPError(f"||Tr_B J - I_A|| = {viol:.3e} > {TP_TOL:.0e}")


def _same_dims(a: LinearMap, b: LinearMap) -> None:
    if a.dims != b.dims:
        raise DimMismatchError(f"dims differ: {a.dims} vs {b.dims}")


def tp_violation(J, dim_in: int, dim_out: int) -> float:
    red = la.partial_trace(J, [dim_in, dim_out], [0])
    return float(np.max(np.abs(red - np.eye(dim_in))))


def is_cp(J, tol: float = CP_TOL) -> bool:
    return la.min_eig(J) >= -tol


def is_cptp(J, dim_in: int, dim_out: int, cp_tol: float = CP_TOL, tp_tol: float = TP_TOL) -> bool:
    """Accept exactly Choi matrices with ``λ_min ≥ −cp_tol`` and TP residual ``≤ tp_tol``."""
    J = np.asarray(J)
    if J.shape != (dim_in * dim_out, dim_in * dim_out) or not la.is_hermitian(J, 1e-8):
        return False
    return is_cp(J, cp_tol) and tp_violation(J, dim_in, dim_out) <= tp_tol


def as_channel(N: LinearMap) -> ChoiChannel:
    if isinstance(N, ChoiChannel):
        return N
    return ChoiChannel(N.dim_in, N.dim_out, N.choi)


# --------------------------------------------------------------------------- #
# Application
# --------------------------------------------------------------------------- #

def apply_choi(J: np.ndarray, rho: np.ndarray, dim_in: int, dim_out: int, dim_R: int) -> np.ndarray:
    """``(id_R ⊗ N)(ρ)`` from raw arrays; both arguments may be batched."""
    rho = np.asarray(rho)
    J = np.asarray(J)
    r = rho.reshape(rho.shape[:-2] + (dim_R, dim_in, dim_R, dim_in))
    j = J.reshape(J.shape[:-2] + (dim_in, dim_out, dim_in, dim_out))
    out = np.einsum("...rasp,...abpc->...rbsc", r, j)
    D = dim_R * dim_out
    return out.reshape(out.shape[:-4] + (D, D))


def apply_adjoint_choi(J: np.ndarray, Y: np.ndarray, dim_in: int, dim_out: int, dim_R: int) -> np.ndarray:
    """Heisenberg picture ``(id_R ⊗ N)^*(Y)`` so that ``Tr[Y N(X)] = Tr[N^*(Y) X]``."""
    Y = np.asarray(Y)
    y = Y.reshape(Y.shape[:-2] + (dim_R, dim_out, dim_R, dim_out))
    j = np.asarray(J).reshape(J.shape[:-2] + (dim_in, dim_out, dim_in, dim_out))
    out = np.einsum("...scrb,...abpc->...spra", y, j)
    D = dim_R * dim_in
    return out.reshape(out.shape[:-4] + (D, D))


def input_adjoint(rho: np.ndarray, Y: np.ndarray, dim_in: int, dim_out: int, dim_R: int) -> np.ndarray:
    """Adjoint of ``J ↦ (id_R ⊗ N_J)(ρ)``: returns ``G`` with ``Tr[Y N_J(ρ)] = Tr[G J]``."""
    Y = np.asarray(Y)
    y = Y.reshape(Y.shape[:-2] + (dim_R, dim_out, dim_R, dim_out))
    r = np.asarray(rho).reshape(rho.shape[:-2] + (dim_R, dim_in, dim_R, dim_in))
    out = np.einsum("...sdrb,...rasp->...pdab", y, r)
    D = dim_in * dim_out
    return out.reshape(out.shape[:-4] + (D, D))


def infer_dim_R(N: LinearMap, rho: np.ndarray, dim_R: int | None) -> int:
    d = np.asarray(rho).shape[-1]
    if dim_R is None:
        if d % N.dim_in:
            raise DimMismatchError(f"state dim {d} not a multiple of |A| = {N.dim_in}")
        return d // N.dim_in
    if d != dim_R * N.dim_in:
        raise DimMismatchError(f"state dim {d} != dim_R * |A| = {dim_R * N.dim_in}")
    return int(dim_R)


def apply(N: LinearMap, rho, dim_R: int | None = None) -> np.ndarray:
    """Apply ``id_R ⊗ N`` to ``ρ`` on ``R ⊗ A``.

    ``dim_R`` is inferred from the size of ``ρ`` when omitted; for a state on
    ``R ⊗ A`` with ``R ≅ A`` this is ``|A|``.
    """
    rho = np.asarray(rho, dtype=complex)
    dR = infer_dim_R(N, rho, dim_R)
    return apply_choi(N.choi, rho, N.dim_in, N.dim_out, dR)


def apply_adjoint(N: LinearMap, Y, dim_R: int = 1) -> np.ndarray:
    Y = np.asarray(Y, dtype=complex)
    return apply_adjoint_choi(N.choi, Y, N.dim_in, N.dim_out, dim_R)


# --------------------------------------------------------------------------- #
# Constructors
# --------------------------------------------------------------------------- #

def choi_from_kraus(kraus: Sequence, validate: bool = True) -> LinearMap:
    """Choi matrix ``Σ_k vec(K_k) vec(K_k)^†`` with column-stacked input index."""
    ks = [np.asarray(K, dtype=complex) for K in kraus]
    if not ks:
        raise DimMismatchError("empty Kraus list")
    dout, din = ks[0].shape
    if any(K.shape != (dout, din) for K in ks):
        raise DimMismatchError("Kraus operators have inconsistent shapes")
    J = np.zeros((din * dout, din * dout), dtype=complex)
    for K in ks:
        v = K.T.reshape(din * dout)   # v[a*dout + b] = K[b, a]
        J += np.outer(v, v.conj())
    tp = np.max(np.abs(sum(K.conj().T @ K for K in ks) - np.eye(din)))
    if not validate:
        return LinearMap(din, dout, J)
    if tp <= TP_TOL:
        return ChoiChannel(din, dout, J)
    return CpMap(din, dout, J)


def kraus_from_choi(N: LinearMap, tol: float = 1e-12) -> list[np.ndarray]:
    dec = la.eigh(N.choi, check=False)
    if dec.eigenvalues[0] < -CP_TOL:
        raise NotCPError(f"Choi matrix has eigenvalue {dec.eigenvalues[0]:.3e}")
    out = []
    scale = max(dec.eigenvalues[-1], 1e-300)
    for lam, v in zip(dec.eigenvalues[::-1], dec.eigenvectors[:, ::-1].T):
        if lam <= tol * scale:
            continue
        K = (np.sqrt(lam) * v).reshape(N.dim_in, N.dim_out).T
        out.append(K)
    return out


def identity_channel(d: int) -> ChoiChannel:
    return ChoiChannel(d, d, la.max_entangled(d, normalized=False))


def unitary_channel(U) -> ChoiChannel:
    U = np.asarray(U, dtype=complex)
    return choi_from_kraus([U])


def hadamard_channel() -> ChoiChannel:
    H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    return unitary_channel(H)


def replacement_channel(omega, dim_in: int) -> ChoiChannel:
    omega = la.check_hermitian(omega)
    return ChoiChannel(dim_in, omega.shape[0], np.kron(np.eye(dim_in), omega))


def trace_map(dim_in: int) -> ChoiChannel:
    return ChoiChannel(dim_in, 1, np.eye(dim_in, dtype=complex))


def dephasing_channel(d: int, p: float = 1.0) -> ChoiChannel:
    """``ρ ↦ (1−p) ρ + p Δ(ρ)``; ``p = 1`` is complete dephasing."""
    J = la.max_entangled(d, normalized=False)
    D = np.diag(np.diag(J))
    return ChoiChannel(d, d, (1 - p) * J + p * D)


def depolarizing_channel(d: int, p: float) -> ChoiChannel:
    J = (1 - p) * la.max_entangled(d, normalized=False) + p * np.eye(d * d) / d
    return ChoiChannel(d, d, J)


def classical_channel(stochastic) -> ChoiChannel:
    """Classical channel from a column-stochastic matrix ``T[b, a] = p(b|a)``."""
    T = np.asarray(stochastic, dtype=float)
    dout, din = T.shape
    J = np.zeros((din * dout, din * dout), dtype=complex)
    for a in range(din):
        for b in range(dout):
            J[a * dout + b, a * dout + b] = T[b, a]
    return ChoiChannel(din, dout, J)


def random_channel(dim_in: int, dim_out: int, env_dim: int = 2, seed=None) -> ChoiChannel:
    """Channel from a Haar-random Stinespring isometry ``A → B ⊗ E``."""
    V = la.random_isometry(dim_in, dim_out * env_dim, seed)
    kraus = [V.reshape(dim_out, env_dim, dim_in)[:, e, :] for e in range(env_dim)]
    J = choi_from_kraus(kraus, validate=False).choi
    return ChoiChannel(dim_in, dim_out, J)


# --------------------------------------------------------------------------- #
# Composition and tensor structure
# --------------------------------------------------------------------------- #

def _result(J, dim_in, dim_out, like: Sequence[LinearMap]) -> LinearMap:
    if all(isinstance(m, ChoiChannel) for m in like):
        return ChoiChannel(dim_in, dim_out, J)
    if all(isinstance(m, CpMap) for m in like):
        return CpMap(dim_in, dim_out, J)
    return LinearMap(dim_in, dim_out, J)


def compose(M: LinearMap, N: LinearMap) -> LinearMap:
    """``M ∘ N`` for ``N: A → B`` and ``M: B → C``."""
    if N.dim_out != M.dim_in:
        raise DimMismatchError(f"cannot compose {N.dims} then {M.dims}")
    J = apply_choi(M.choi, N.choi, M.dim_in, M.dim_out, N.dim_in)
    return _result(J, N.dim_in, M.dim_out, (M, N))


def tensor_channels(*maps: LinearMap) -> LinearMap:
    """``N_1 ⊗ N_2 ⊗ ...`` with Choi matrix on ``A_1 A_2 ... ⊗ B_1 B_2 ...``."""
    if len(maps) == 1 and isinstance(maps[0], (list, tuple)):
        maps = tuple(maps[0])
    J = maps[0].choi
    dims_a = [maps[0].dim_in]
    dims_b = [maps[0].dim_out]
    for m in maps[1:]:
        k = len(dims_a)
        cur = np.kron(J, m.choi)
        # current factor order: A_1..A_k B_1..B_k A_{k+1} B_{k+1}
        order_dims = dims_a + dims_b + [m.dim_in, m.dim_out]
        perm = list(range(k)) + [2 * k] + list(range(k, 2 * k)) + [2 * k + 1]
        J = la.permute_systems(cur, order_dims, perm)
        dims_a.append(m.dim_in)
        dims_b.append(m.dim_out)
    return _result(J, int(np.prod(dims_a)), int(np.prod(dims_b)), maps)


def tensor_power(N: LinearMap, n: int) -> LinearMap:
    if n < 1:
        raise ValueError("n must be >= 1")
    return tensor_channels(*([N] * n)) if n > 1 else N


def identity_tensor(N: LinearMap, d: int, left: bool = True) -> LinearMap:
    """``id_d ⊗ N`` (default) or ``N ⊗ id_d``."""
    I = identity_channel(d)
    return tensor_channels(I, N) if left else tensor_channels(N, I)


@dataclass(frozen=True, eq=False)
class Superchannel:
    """Pre-processing ``A′ → A ⊗ E`` and post-processing ``B ⊗ E → B′``."""

    pre: LinearMap
    post: LinearMap
    env_dim: int

    def __post_init__(self):
        if self.pre.dim_out % self.env_dim or self.post.dim_in % self.env_dim:
            raise DimMismatchError("environment dimension does not divide the slot dims")

    @property
    def dim_a(self) -> int:
        return self.pre.dim_out // self.env_dim

    @property
    def dim_b(self) -> int:
        return self.post.dim_in // self.env_dim

    def __call__(self, N: LinearMap) -> LinearMap:
        return superchannel_apply(self, N)


def superchannel_apply(theta: Superchannel, N: LinearMap) -> LinearMap:
    """``E_post ∘ (N ⊗ id_E) ∘ E_pre``."""
    if N.dim_in != theta.dim_a or N.dim_out != theta.dim_b:
        raise DimMismatchError(
            f"channel dims {N.dims} do not fit superchannel slot ({theta.dim_a}, {theta.dim_b})")
    mid = tensor_channels(N, identity_channel(theta.env_dim))
    return compose(theta.post, compose(mid, theta.pre))


def identity_superchannel(dim_a: int, dim_b: int) -> Superchannel:
    return Superchannel(identity_channel(dim_a), identity_channel(dim_b), 1)


def permutation_unitary(perm: Sequence[int], dim: int) -> np.ndarray:
    """Unitary with ``P (x_0 ⊗ ... ⊗ x_{n-1}) = x_{perm[0]} ⊗ ... ⊗ x_{perm[n-1]}``."""
    n = len(perm)
    D = dim ** n
    P = np.zeros((D, D))
    for idx in itertools.product(range(dim), repeat=n):
        src = np.ravel_multi_index(idx, (dim,) * n)
        dst = np.ravel_multi_index(tuple(idx[p] for p in perm), (dim,) * n)
        P[dst, src] = 1.0
    return P


def permutation_channel(perm: Sequence[int], dim: int, n: int | None = None) -> ChoiChannel:
    n = len(perm) if n is None else n
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} elements")
    return unitary_channel(permutation_unitary(perm, dim))


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


# --------------------------------------------------------------------------- #
# JSON
# --------------------------------------------------------------------------- #

def channel_to_json(N: LinearMap) -> dict:
    return {"dim_in": N.dim_in, "dim_out": N.dim_out, "choi": la.matrix_to_json(N.choi)}


def channel_from_json(obj) -> ChoiChannel:
    from .errors import ParseError
    if not isinstance(obj, dict):
        raise ParseError("channel JSON must be an object")
    if "kraus" in obj:
        try:
            ks = [la.matrix_from_json(k) for k in obj["kraus"]]
        except TypeError as exc:
            raise ParseError(f"bad kraus list: {exc}") from exc
        return as_channel(choi_from_kraus(ks))
    try:
        din, dout = int(obj["dim_in"]), int(obj["dim_out"])
        J = la.matrix_from_json(obj["choi"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed channel object: {exc}") from exc
    return ChoiChannel(din, dout, J)
