"""Divided differences and Fréchet derivatives of spectral functions.

For ``σ = V diag(w) V^†`` the derivative of a spectral function ``f`` is
``Df(σ)[X] = V (f^{[1]}(w) ∘ V^† X V) V^†`` and the second derivative uses
the second divided difference ``f^{[2]}``.  Natural logarithms throughout.
"""

from __future__ import annotations

import numpy as np


def _atanh_ratio(x: np.ndarray) -> np.ndarray:
    """``atanh(x)/x`` with a series near zero."""
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    x2 = xs * xs
    out[small] = 1.0 + x2 / 3.0 + x2 * x2 / 5.0
    xl = x[~small]
    out[~small] = np.arctanh(xl) / xl
    return out


def dd1_log(w: np.ndarray) -> np.ndarray:
    """First divided differences of ``ln`` on positive eigenvalues ``w``."""
    a = w[:, None]
    b = w[None, :]
    s = a + b
    x = (a - b) / s
    near = np.abs(x) < 1e-2
    lw = np.log(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        far = (lw[:, None] - lw[None, :]) / (a - b)
    return np.where(near, 2.0 / s * _atanh_ratio(np.where(near, x, 0.0)), far)


def dd2_log(w: np.ndarray) -> np.ndarray:
    """Second divided differences ``ln[w_i, w_k, w_j]`` as an ``(n, n, n)`` array."""
    n = len(w)
    L = dd1_log(w)
    a = w[:, None, None]
    c = w[None, None, :]
    diff = a - c
    # (ln[a,k] - ln[k,c]) / (a - c)
    num = L[:, :, None] - L[None, :, :]
    bk = w[None, :, None]
    wmax = np.maximum(np.maximum(a, c), bk)
    wmin = np.minimum(np.minimum(a, c), bk)
    close = (wmax - wmin) <= 1e-3 * wmin
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / diff
    # Taylor expansion about the mean for nearly coincident triples
    m = (a + bk + c) / 3.0
    u, v, t = a - m, bk - m, c - m
    h2 = u * u + v * v + t * t + u * v + v * t + t * u
    taylor = -1.0 / (2.0 * m * m) - h2 / (4.0 * m ** 4)
    near_ac = ~close & (np.abs(diff) < 1e-6 * np.maximum(a, c))
    if np.any(near_ac):
        # a ≈ c with k separated: derivative form at the midpoint
        mid = np.broadcast_to(0.5 * (a + c), out.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            pair_vals = _dd2_pair(mid, np.broadcast_to(bk, out.shape))
        out = np.where(near_ac, pair_vals, out)
    out = np.where(close, np.broadcast_to(taylor, out.shape), out)
    return np.broadcast_to(out, (n, n, n)).copy()


def _dd2_pair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``ln[a, a, b] = (1/a − ln[a, b]) / (a − b)`` for ``a`` far from ``b``."""
    s = a + b
    x = (a - b) / s
    near = np.abs(x) < 1e-2
    far = (np.log(a) - np.log(b)) / (a - b)
    l1 = np.where(near, 2.0 / s * _atanh_ratio(np.where(near, x, 0.0)), far)
    return (1.0 / a - l1) / (a - b)


def frechet_apply(V: np.ndarray, L: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``V (L ∘ V^† X V) V^†``."""
    Xt = V.conj().T @ X @ V
    return V @ (L * Xt) @ V.conj().T


def dlog(V: np.ndarray, w: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Fréchet derivative of ``ln`` at ``V diag(w) V^†`` in direction ``X``."""
    return frechet_apply(V, dd1_log(w), X)


def dd1_general(w: np.ndarray, f, fprime) -> np.ndarray:
    a = w[:, None]
    b = w[None, :]
    fa = f(a)
    fb = f(b)
    close = np.abs(a - b) <= 1e-9 * np.maximum(np.abs(a), np.abs(b))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (fa - fb) / (a - b)
    mid = 0.5 * (a + b)
    return np.where(close, fprime(np.broadcast_to(mid, out.shape)), out)
