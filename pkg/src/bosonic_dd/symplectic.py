"""Dense real linear algebra for the symplectic setting.

Conventions used throughout the package:

* Phase-space coordinates are QP-blocked per subsystem,
  ``(Q_1^S .. Q_nS^S, P_1^S .. P_nS^S, Q_1^E .. Q_nE^E, P_1^E .. P_nE^E)``.
* The symplectic form is ``J = J_S (+) J_E`` with each block
  ``[[0, I], [-I, 0]]`` in QP ordering, so ``J^2 = -I`` and ``J^T = -J``.
* A quadratic Hamiltonian with symmetric matrix ``A`` corresponds to the
  algebra element ``X = A J``; membership is tested via
  ``X^T J + J X = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class ModeLayout:
    """Mode counts fixing the canonical phase-space coordinate ordering."""

    n_system: int
    n_env: int = 0

    def __post_init__(self) -> None:
        if self.n_system < 1:
            raise ValueError("need at least one system mode")
        if self.n_env < 0:
            raise ValueError("environment mode count must be nonnegative")

    @property
    def n_total(self) -> int:
        return self.n_system + self.n_env

    @property
    def dim(self) -> int:
        """Full phase-space dimension 2*(n_system + n_env)."""
        return 2 * self.n_total

    @property
    def system_dim(self) -> int:
        return 2 * self.n_system

    @property
    def env_dim(self) -> int:
        return 2 * self.n_env


def _single_form(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def symplectic_form(layout: ModeLayout) -> np.ndarray:
    """The matrix J for a layout: ``J_{nS} (+) J_{nE}`` in QP-block ordering."""
    J = np.zeros((layout.dim, layout.dim))
    ds = layout.system_dim
    J[:ds, :ds] = _single_form(layout.n_system)
    if layout.n_env:
        J[ds:, ds:] = _single_form(layout.n_env)
    return J


def _check_square(M: np.ndarray, name: str = "matrix") -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")


def sp_algebra_residual(X: np.ndarray, J: np.ndarray) -> float:
    """Frobenius norm of ``X^T J + J X`` (zero iff X is in sp(2n))."""
    _check_square(X, "X")
    if X.shape != J.shape:
        raise ValueError(f"dimension mismatch: X {X.shape} vs J {J.shape}")
    return float(np.linalg.norm(X.T @ J + J @ X))


def is_in_sp_algebra(X: np.ndarray, J: np.ndarray, tol: float = 1e-10) -> bool:
    return sp_algebra_residual(X, J) <= tol


def symplectic_residual(S: np.ndarray, J: np.ndarray) -> float:
    """Frobenius norm of ``S J S^T - J`` (zero iff S is symplectic)."""
    _check_square(S, "S")
    if S.shape != J.shape:
        raise ValueError(f"dimension mismatch: S {S.shape} vs J {J.shape}")
    return float(np.linalg.norm(S @ J @ S.T - J))


def is_symplectic(S: np.ndarray, J: np.ndarray, tol: float = 1e-10) -> bool:
    return symplectic_residual(S, J) <= tol


def matrix_exponential(X: np.ndarray) -> np.ndarray:
    """Dense matrix exponential (scaling-and-squaring Pade, via scipy).

    Relative accuracy is ~1e-13 or better for ``||X|| <= 10``; larger inputs
    are handled by the built-in rescaling of the backend.
    """
    _check_square(X, "X")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix exponential of non-finite input")
    return scipy.linalg.expm(np.asarray(X, dtype=float))


@dataclass(frozen=True)
class Blocks:
    """System/environment block decomposition of a phase-space matrix."""

    ss: np.ndarray
    se: np.ndarray
    es: np.ndarray
    ee: np.ndarray


def block_decompose(M: np.ndarray, layout: ModeLayout) -> Blocks:
    _check_square(M, "M")
    if M.shape[0] != layout.dim:
        raise ValueError(f"matrix dimension {M.shape[0]} != layout dimension {layout.dim}")
    d = layout.system_dim
    return Blocks(ss=M[:d, :d].copy(), se=M[:d, d:].copy(),
                  es=M[d:, :d].copy(), ee=M[d:, d:].copy())


def assemble_blocks(blocks: Blocks) -> np.ndarray:
    top = np.hstack([blocks.ss, blocks.se])
    bot = np.hstack([blocks.es, blocks.ee])
    return np.vstack([top, bot])


def offdiag_residual(M: np.ndarray, layout: ModeLayout) -> float:
    """sqrt(||M_SE||_F^2 + ||M_ES||_F^2), the distance to the nearest
    block-diagonal matrix in Frobenius norm."""
    b = block_decompose(M, layout)
    return float(np.sqrt(np.linalg.norm(b.se) ** 2 + np.linalg.norm(b.es) ** 2))


def spectral_norm(M: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> float:
    """Largest singular value via power iteration on M^T M.

    Deterministic: the start vector is drawn from a fixed-seed generator.
    Raises if the iteration fails to converge within ``max_iter`` steps.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    if M.ndim != 2:
        raise ValueError("spectral_norm expects a 2-d array")
    G = M.T @ M
    rng = np.random.default_rng(0x5eed)
    v = rng.standard_normal(G.shape[0])
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iter):
        w = G @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        sigma = float(np.sqrt(nw))
        if abs(sigma - prev) <= tol * max(1.0, sigma):
            return sigma
        prev = sigma
    raise RuntimeError(f"power iteration did not converge in {max_iter} steps")
