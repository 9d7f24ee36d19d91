"""Eigen-decompositions of moment operators, ``B (x) B`` and ``T - B (x) B``."""
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DimensionError
from .moments import MomentOperator
from .symspace import fix_signs, jacobi_eigh, vech_iso

JACOBI_MAX_COORDS = 600
DEGENERACY_RTOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Descending eigenvalues; ``eigenvectors`` holds the matching columns.

    In top-k mode only ``k`` pairs are stored.  ``degenerate`` is set when
    the two leading eigenvalues agree to ``1e-10`` relative, in which case
    the leading vector is one arbitrary (but deterministic) member of the
    leading eigenspace.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degenerate: bool = False
    method: str = "jacobi"

    @property
    def lambda1(self):
        return float(self.eigenvalues[0])

    @property
    def lambda2(self):
        return float(self.eigenvalues[1]) if len(self.eigenvalues) > 1 else 0.0

    def leading(self, k=1):
        return self.eigenvalues[:k]


def _as_matrix(T):
    return T.matrix if isinstance(T, MomentOperator) else np.asarray(T, dtype=float)


def _is_degenerate(w):
    if len(w) < 2:
        return False
    top = abs(w[0])
    return bool(top > 0 and w[0] - w[1] <= DEGENERACY_RTOL * top)


def full_spectrum(T, method="auto"):
    """All ``D`` eigenpairs of an operator.

    ``method="jacobi"`` uses the cyclic Jacobi solver, ``"lapack"`` defers to
    :func:`numpy.linalg.eigh`; ``"auto"`` picks Jacobi up to
    ``D = JACOBI_MAX_COORDS`` coordinates.
    """
    M = _as_matrix(T)
    if method == "auto":
        method = "jacobi" if M.shape[0] <= JACOBI_MAX_COORDS else "lapack"
    if method == "jacobi":
        w, V, _ = jacobi_eigh(M)
    elif method == "lapack":
        w, V = np.linalg.eigh(M)
        w, V = w[::-1].copy(), fix_signs(V[:, ::-1])
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return Spectrum(w, V, _is_degenerate(w), method)


def top_eigens(T, k, rtol=1e-12, max_iter=None, seed=0):
    """Leading ``k`` eigenpairs by power iteration with deflation.

    Each pair is iterated, orthogonally to the vectors already found, until
    successive Rayleigh quotients differ by at most ``rtol`` relative; the
    cap is ``10 * D`` iterations per pair.  Assumes a positive semidefinite
    operator, as every moment operator is.
    """
    M = _as_matrix(T)
    D = M.shape[0]
    if not 1 <= k <= D:
        raise DimensionError(f"k must be in [1, {D}], got {k}")
    max_iter = 10 * D if max_iter is None else max_iter
    rng = np.random.Generator(np.random.PCG64(seed))
    found = np.zeros((D, 0))
    values = []
    scale = max(np.linalg.norm(M, 2) if D <= 64 else np.abs(M).sum(axis=1).max(), 1e-300)
    for j in range(k):
        v = rng.standard_normal(D)
        v -= found @ (found.T @ v)
        v /= np.linalg.norm(v)
        rho = float(v @ M @ v)
        for it in range(max_iter):
            y = M @ v
            y -= found @ (found.T @ y)
            norm = np.linalg.norm(y)
            if norm <= 1e-14 * scale:
                # v lies in the null space of the deflated operator
                rho_new = 0.0
                converged = True
            else:
                v = y / norm
                rho_new = float(v @ M @ v)
                converged = abs(rho_new - rho) <= rtol * max(abs(rho_new), 1e-300)
            rho = rho_new
            if converged:
                break
        else:
            raise ConvergenceError(
                f"power iteration for eigenpair {j + 1} did not converge in {max_iter} iterations",
                pair=j + 1, rayleigh=rho,
            )
        values.append(rho)
        found = np.column_stack([found, v])
    w = np.array(values)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], fix_signs(found[:, order])
    return Spectrum(w, V, _is_degenerate(w), "power")


def rank_one_op(B):
    """``B (x) B``: the operator ``A -> <A, B> B``."""
    b = vech_iso(np.asarray(B, dtype=float))
    return MomentOperator(np.outer(b, b), "rank-one")


def centered_operator(T, B):
    """``T - B (x) B``; its quadratic form at ``A`` is ``Var <A X, X>``."""
    B = np.asarray(B, dtype=float)
    if B.shape != (T.dim, T.dim):
        raise DimensionError(f"operator is for d = {T.dim}, second moment has shape {B.shape}")
    return MomentOperator(T.matrix - rank_one_op(B).matrix, "centered")
