"""Unconstrained parametrizations of state sets for multistart ascent.

Each parametrization maps a real vector ``z`` to a density matrix and pulls
a Hermitian gradient ``G`` (so that ``df = Tr[G dρ]``) back to ``∂f/∂z``.
"""

from __future__ import annotations

import numpy as np

from . import linalg as la


class StateParam:
    n: int = 0
    dim: int = 1

    def state(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pullback(self, z: np.ndarray, G: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def random(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.n)

    def from_state(self, rho: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class PureParam(StateParam):
    """``v ↦ vv†/‖v‖²`` with ``v = z[:d] + i z[d:]``."""

    def __init__(self, dim: int):
        self.dim = dim
        self.n = 2 * dim

    def _v(self, z):
        v = z[:self.dim] + 1j * z[self.dim:]
        nrm2 = float(np.real(np.vdot(v, v)))
        if nrm2 < 1e-200:
            v = np.ones(self.dim, dtype=complex)
            nrm2 = float(self.dim)
        return v, nrm2

    def state(self, z):
        v, nrm2 = self._v(z)
        return np.outer(v, v.conj()) / nrm2

    def pullback(self, z, G):
        v, nrm2 = self._v(z)
        Gv = G @ v
        f0 = float(np.real(np.vdot(v, Gv))) / nrm2
        g = 2.0 * (Gv - f0 * v) / nrm2
        return np.concatenate([g.real, g.imag])

    def from_state(self, rho):
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim == 1:
            v = rho
        else:
            _, V = np.linalg.eigh(la.hermitize(rho))
            v = V[:, -1]
        return np.concatenate([v.real, v.imag])


class MixedParam(StateParam):
    """``G ↦ GG†/Tr[GG†]`` with a complex square ``G``."""

    def __init__(self, dim: int):
        self.dim = dim
        self.n = 2 * dim * dim

    def _G(self, z):
        d = self.dim
        return (z[:d * d] + 1j * z[d * d:]).reshape(d, d)

    def state(self, z):
        A = self._G(z)
        S = A @ A.conj().T
        return S / max(np.real(np.trace(S)), 1e-300)

    def pullback(self, z, G):
        A = self._G(z)
        S = A @ A.conj().T
        t = max(np.real(np.trace(S)), 1e-300)
        rho = S / t
        Gc = G - np.real(np.trace(G @ rho)) * np.eye(self.dim)
        g = 2.0 * (Gc @ A) / t
        return np.concatenate([g.real.ravel(), g.imag.ravel()])

    def from_state(self, rho):
        A = la.psd_sqrt(la.hermitize(rho))
        return np.concatenate([A.real.ravel(), A.imag.ravel()])


class DiagonalParam(StateParam):
    """Probability vectors ``p = z²/‖z‖²`` on the diagonal."""

    def __init__(self, dim: int):
        self.dim = dim
        self.n = dim

    def state(self, z):
        q = z * z
        return np.diag(q / max(q.sum(), 1e-300)).astype(complex)

    def pullback(self, z, G):
        q = z * z
        s = max(q.sum(), 1e-300)
        p = q / s
        gd = np.real(np.diag(G))
        return 2.0 * z * (gd - gd @ p) / s

    def from_state(self, rho):
        return np.sqrt(np.maximum(np.real(np.diag(rho)), 0.0))

    def random(self, rng):
        return np.abs(rng.standard_normal(self.n)) + 1e-3


class FixedParam(StateParam):
    """A singleton set."""

    def __init__(self, rho: np.ndarray):
        self.rho = la.hermitize(np.asarray(rho, dtype=complex))
        self.dim = self.rho.shape[0]
        self.n = 0

    def state(self, z):
        return self.rho

    def pullback(self, z, G):
        return np.zeros(0)

    def from_state(self, rho):
        return np.zeros(0)
