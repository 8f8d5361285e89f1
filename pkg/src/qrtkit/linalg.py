"""Dense Hermitian linear algebra.

Eigendecompositions, matrix functions restricted to supports, tensor and
partial-trace calculus, norms and seeded random generators.  Functions that
act on operators accept arrays with leading batch axes where noted, which the
SDP modelling layer relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimMismatchError, NotHermitianError

TOL_HERM = 1e-10
SUPPORT_TOL = 1e-9


def as_rng(seed=None) -> np.random.Generator:
    """Return a generator; integers and ``None`` are turned into fresh ones."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# --------------------------------------------------------------------------- #
# Hermiticity
# --------------------------------------------------------------------------- #

def herm_violation(H: np.ndarray) -> float:
    H = np.asarray(H)
    if H.size == 0:
        return 0.0
    return float(np.max(np.abs(H - np.swapaxes(H.conj(), -1, -2))))


def is_hermitian(H: np.ndarray, tol: float = TOL_HERM) -> bool:
    H = np.asarray(H)
    return H.ndim >= 2 and H.shape[-1] == H.shape[-2] and herm_violation(H) <= tol


def check_hermitian(H, tol: float = TOL_HERM) -> np.ndarray:
    """Validate Hermiticity and return the exactly symmetrized matrix."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimMismatchError(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise NotHermitianError("matrix has non-finite entries")
    viol = herm_violation(H)
    if viol > tol:
        raise NotHermitianError(f"H - H^dagger has max entry {viol:.3e} > {tol:.1e}")
    return hermitize(H)


def hermitize(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    return 0.5 * (H + np.swapaxes(H.conj(), -1, -2))


def dag(X: np.ndarray) -> np.ndarray:
    return np.swapaxes(np.asarray(X).conj(), -1, -2)


# --------------------------------------------------------------------------- #
# Spectral decomposition
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        V = self.eigenvectors
        return (V * f(self.eigenvalues)) @ V.conj().T


def eigh(H, check: bool = True) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues.

    Parameters
    ----------
    H : array_like
        Hermitian matrix (checked to ``TOL_HERM`` unless ``check`` is false).

    Returns
    -------
    SpectralDecomposition
    """
    H = check_hermitian(H) if check else hermitize(H)
    w, V = np.linalg.eigh(H)
    return SpectralDecomposition(w, V)


def jacobi_eigh(H, tol: float = 1e-14, max_sweeps: int = 60) -> SpectralDecomposition:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Slow compared with LAPACK but independent of it; the test-suite uses it
    as a reference implementation for :func:`eigh`.
    """
    A = check_hermitian(H).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(np.max(np.abs(A)), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(A - np.diag(np.diag(A))) ** 2))
        if off <= tol * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                g = abs(apq)
                if g <= 1e-300:
                    continue
                phase = apq / g
                tau = (A[q, q].real - A[p, p].real) / (2.0 * g)
                t = 1.0 / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau < 0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # columns p, q of A J and V J
                jp = c
                jqp = -s * np.conj(phase)
                jpq = s * phase
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = colp * jp + colq * jqp
                A[:, q] = colp * jpq + colq * c
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = np.conj(jp) * rowp + np.conj(jqp) * rowq
                A[q, :] = np.conj(jpq) * rowp + c * rowq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = vp * jp + vq * jqp
                V[:, q] = vp * jpq + vq * c
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(w[order], V[:, order])


def matrix_fn_on_support(H, f: Callable[[np.ndarray], np.ndarray],
                         support_tol: float = SUPPORT_TOL) -> np.ndarray:
    """Apply ``f`` to the eigenvalues above ``support_tol * op_norm(H)``.

    Eigenvectors in the (numerical) kernel are mapped to zero, so e.g.
    ``f = x**-0.5`` gives the generalized inverse square root.
    """
    dec = eigh(H, check=False)
    w = dec.eigenvalues
    cut = support_tol * max(np.max(np.abs(w)), 1e-300)
    mask = w > cut
    vals = np.zeros_like(w)
    if np.any(mask):
        vals[mask] = f(w[mask])
    V = dec.eigenvectors
    return (V * vals) @ V.conj().T


def support_projector(H, support_tol: float = SUPPORT_TOL) -> np.ndarray:
    return matrix_fn_on_support(H, np.ones_like, support_tol)


def psd_sqrt(H) -> np.ndarray:
    return matrix_fn_on_support(H, np.sqrt)


def log2m(H, support_tol: float = SUPPORT_TOL) -> np.ndarray:
    return matrix_fn_on_support(H, np.log2, support_tol)


# --------------------------------------------------------------------------- #
# Tensor calculus (batch-aware on leading axes)
# --------------------------------------------------------------------------- #

def tensor(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices (or vectors)."""
    if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
        ops = tuple(ops[0])
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op))
    return out


def kron_power(X, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex) if np.ndim(X) == 2 else np.ones(1, dtype=complex)
    for _ in range(n):
        out = np.kron(out, X)
    return out


def _check_dims(X: np.ndarray, dims: Sequence[int]) -> None:
    total = int(np.prod(dims))
    if X.shape[-1] != total or X.shape[-2] != total:
        raise DimMismatchError(f"dims {list(dims)} do not match operator shape {X.shape[-2:]}")


def partial_trace(X, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``X`` may carry leading batch axes.  The kept subsystems retain their
    original relative order.
    """
    X = np.asarray(X)
    dims = [int(d) for d in dims]
    _check_dims(X, dims)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimMismatchError(f"keep index out of range for {n} subsystems")
    batch = X.shape[:-2]
    nb = len(batch)
    T = X.reshape(batch + tuple(dims) + tuple(dims))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out_row = [row[i] for i in keep]
    out_col = [col[i] for i in keep]
    spec = "..." + "".join(row) + "".join(col) + "->..." + "".join(out_row) + "".join(out_col)
    R = np.einsum(spec, T)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return R.reshape(batch + (dk, dk))


def permute_systems(X, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: output factor ``k`` is input factor ``perm[k]``."""
    X = np.asarray(X)
    dims = [int(d) for d in dims]
    _check_dims(X, dims)
    n = len(dims)
    batch = X.shape[:-2]
    nb = len(batch)
    T = X.reshape(batch + tuple(dims) + tuple(dims))
    axes = list(range(nb)) + [nb + p for p in perm] + [nb + n + p for p in perm]
    D = int(np.prod(dims))
    return T.transpose(axes).reshape(batch + (D, D))


def partial_transpose(X, dims: Sequence[int], systems: Iterable[int]) -> np.ndarray:
    X = np.asarray(X)
    dims = [int(d) for d in dims]
    _check_dims(X, dims)
    n = len(dims)
    batch = X.shape[:-2]
    nb = len(batch)
    T = X.reshape(batch + tuple(dims) + tuple(dims))
    axes = list(range(nb + 2 * n))
    for s in systems:
        axes[nb + s], axes[nb + n + s] = axes[nb + n + s], axes[nb + s]
    D = int(np.prod(dims))
    return T.transpose(axes).reshape(batch + (D, D))


def embed_identity_left(X, d: int) -> np.ndarray:
    """``I_d ⊗ X`` for (batched) ``X``."""
    X = np.asarray(X)
    I = np.eye(d)
    if X.ndim == 2:
        return np.kron(I, X)
    m = X.shape[-1]
    out = np.einsum("ij,...kl->...ikjl", I, X)
    return out.reshape(X.shape[:-2] + (d * m, d * m))


def embed_identity_right(X, d: int) -> np.ndarray:
    """``X ⊗ I_d`` for (batched) ``X``."""
    X = np.asarray(X)
    I = np.eye(d)
    if X.ndim == 2:
        return np.kron(X, I)
    m = X.shape[-1]
    out = np.einsum("...ij,kl->...ikjl", X, I)
    return out.reshape(X.shape[:-2] + (d * m, d * m))


# --------------------------------------------------------------------------- #
# Norms and spectral parts
# --------------------------------------------------------------------------- #

def trace_norm(X) -> float:
    X = np.asarray(X)
    if is_hermitian(X, 1e-12 * max(1.0, float(np.max(np.abs(X))) if X.size else 1.0)):
        return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(X)))))
    return float(np.sum(np.linalg.svd(X, compute_uv=False)))


def op_norm(X) -> float:
    X = np.asarray(X)
    if X.size == 0:
        return 0.0
    if is_hermitian(X, 1e-12 * max(1.0, float(np.max(np.abs(X))))):
        return float(np.max(np.abs(np.linalg.eigvalsh(hermitize(X)))))
    return float(np.linalg.norm(X, 2))


def positive_part(X) -> np.ndarray:
    dec = eigh(X, check=False)
    return dec.apply(lambda w: np.where(w > 0, w, 0.0))


def negative_part(X) -> np.ndarray:
    dec = eigh(X, check=False)
    return dec.apply(lambda w: np.where(w < 0, -w, 0.0))


def min_eig(X) -> float:
    return float(np.linalg.eigvalsh(hermitize(X))[0])


def is_psd(X, tol: float = 1e-9) -> bool:
    return min_eig(X) >= -tol


def is_density(X, tol: float = 1e-9) -> bool:
    X = np.asarray(X)
    return (is_hermitian(X, TOL_HERM) and abs(np.trace(X).real - 1.0) <= tol
            and min_eig(X) >= -tol)


# --------------------------------------------------------------------------- #
# Random generators
# --------------------------------------------------------------------------- #

def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_density(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt random state ``G G^† / Tr[G G^†]`` (Ginibre ``G``)."""
    rng = as_rng(seed)
    G = _ginibre(rng, dim, dim if rank is None else rank)
    rho = G @ G.conj().T
    return hermitize(rho / np.trace(rho).real)


def random_pure(dim: int, seed=None) -> np.ndarray:
    rng = as_rng(seed)
    v = _ginibre(rng, dim, 1)[:, 0]
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_ket(dim: int, seed=None) -> np.ndarray:
    rng = as_rng(seed)
    v = _ginibre(rng, dim, 1)[:, 0]
    return v / np.linalg.norm(v)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with phase-fixed ``R``."""
    rng = as_rng(seed)
    Z = _ginibre(rng, dim, dim)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    ph = d / np.where(np.abs(d) > 0, np.abs(d), 1.0)
    return Q * ph


def random_isometry(dim_in: int, dim_out: int, seed=None) -> np.ndarray:
    rng = as_rng(seed)
    Z = _ginibre(rng, dim_out, dim_in)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    ph = d / np.where(np.abs(d) > 0, np.abs(d), 1.0)
    return Q * ph


def random_hermitian(dim: int, seed=None) -> np.ndarray:
    rng = as_rng(seed)
    G = _ginibre(rng, dim, dim)
    return hermitize(G + G.conj().T)


# --------------------------------------------------------------------------- #
# Small constructors
# --------------------------------------------------------------------------- #

def ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    return np.outer(v, v.conj())


def basis_state(dim: int, index: int) -> np.ndarray:
    return proj(ket(dim, index))


def max_entangled_vector(dim: int) -> np.ndarray:
    """Unnormalized ``Σ_i |ii⟩``."""
    return np.eye(dim, dtype=complex).reshape(dim * dim)


def max_entangled(dim: int, normalized: bool = True) -> np.ndarray:
    v = max_entangled_vector(dim)
    P = np.outer(v, v.conj())
    return P / dim if normalized else P


def dephase(X) -> np.ndarray:
    X = np.asarray(X)
    return np.diag(np.diag(X))


# --------------------------------------------------------------------------- #
# Real coordinates of Hermitian matrices
# --------------------------------------------------------------------------- #

@lru_cache(maxsize=None)
def _herm_index(d: int):
    iu, ju = np.triu_indices(d, 1)
    return iu, ju


@lru_cache(maxsize=None)
def herm_basis(d: int) -> np.ndarray:
    """Basis ``E_k`` with ``X = Σ_k x_k E_k`` and ``x = (diag, Re upper, Im upper)``."""
    iu, ju = _herm_index(d)
    m = len(iu)
    B = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        B[i, i, i] = 1.0
    for k in range(m):
        i, j = iu[k], ju[k]
        B[d + k, i, j] = 1.0
        B[d + k, j, i] = 1.0
        B[d + m + k, i, j] = 1j
        B[d + m + k, j, i] = -1j
    B.setflags(write=False)
    return B


def herm_to_coords(X) -> np.ndarray:
    """Real coordinates (diag, Re upper, Im upper); batch-aware."""
    X = np.asarray(X)
    d = X.shape[-1]
    iu, ju = _herm_index(d)
    diag = np.real(np.diagonal(X, axis1=-2, axis2=-1))
    up = X[..., iu, ju]
    return np.concatenate([diag, up.real, up.imag], axis=-1)


def coords_to_herm(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    d = int(round(np.sqrt(n)))
    iu, ju = _herm_index(d)
    m = len(iu)
    X = np.zeros(x.shape[:-1] + (d, d), dtype=complex)
    idx = np.arange(d)
    X[..., idx, idx] = x[..., :d]
    vals = x[..., d:d + m] + 1j * x[..., d + m:]
    X[..., iu, ju] = vals
    X[..., ju, iu] = vals.conj()
    return X


def hs_inner(A, B) -> float:
    """Real part of ``Tr[A^† B]``."""
    return float(np.real(np.vdot(np.asarray(A), np.asarray(B))))


# --------------------------------------------------------------------------- #
# JSON encoding
# --------------------------------------------------------------------------- #

def matrix_to_json(X) -> dict:
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return {"rows": int(X.shape[0]), "cols": int(X.shape[1]),
            "re": X.real.tolist(), "im": X.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    from .errors import ParseError
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros((rows, cols))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix object: {exc}") from exc
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise ParseError(f"matrix arrays do not match declared shape ({rows}, {cols})")
    X = re + 1j * im
    if not np.all(np.isfinite(X)):
        raise ParseError("matrix has non-finite entries")
    return X
