"""Symmetric matrices as a Euclidean space.

Symmetric ``d x d`` matrices are mapped to ``D = d(d+1)/2`` coordinates by
``vech_iso``: the upper triangle is read row by row, diagonal entries are
copied and off-diagonal entries are multiplied by ``sqrt(2)``.  With this
scaling the plain dot product of coordinates equals ``Tr(AB)``, so every
self-adjoint operator on symmetric matrices becomes an ordinary symmetric
``D x D`` matrix with the same eigenvalues.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ConvergenceError, DimensionError, InputError, NotPSDError

SQRT2 = np.sqrt(2.0)
DEFAULT_EIG_LIMIT = 512
SYMMETRY_RTOL = 1e-8
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
PSD_RTOL = 1e-10


def coord_dim(d):
    return d * (d + 1) // 2


def sym_dim(D):
    """Return ``d`` with ``d(d+1)/2 == D`` or raise :class:`DimensionError`."""
    D = int(D)
    d = int(round((np.sqrt(8 * D + 1) - 1) / 2))
    if D < 1 or coord_dim(d) != D:
        raise DimensionError(f"length {D} is not of the form d(d+1)/2")
    return d


@lru_cache(maxsize=None)
def _layout(d):
    rows, cols = np.triu_indices(d)
    scale = np.where(rows == cols, 1.0, SQRT2)
    for arr in (rows, cols, scale):
        arr.setflags(write=False)
    return rows, cols, scale


def triu_layout(d):
    """Row indices, column indices and isometric scale of the coordinates."""
    return _layout(int(d))


def as_symmetric(A, rtol=SYMMETRY_RTOL):
    """Validate a square matrix and return its symmetrized float copy.

    Asymmetry up to ``rtol * ||A||_F`` is treated as rounding noise; larger
    asymmetry raises :class:`InputError`.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    asym = np.max(np.abs(A - A.T))
    if asym > rtol * np.linalg.norm(A):
        raise InputError(f"matrix is not symmetric (max |A - A^T| = {asym:.3g})")
    return 0.5 * (A + A.T)


def vech_iso(A):
    """Isometric half-vectorization of a symmetric matrix (or a stack of them)."""
    A = np.asarray(A, dtype=float)
    d = A.shape[-1]
    rows, cols, scale = _layout(d)
    return A[..., rows, cols] * scale


def vech_iso_inv(v):
    """Inverse of :func:`vech_iso`."""
    v = np.asarray(v, dtype=float)
    d = sym_dim(v.shape[-1])
    rows, cols, scale = _layout(d)
    A = np.zeros(v.shape[:-1] + (d, d))
    vals = v / scale
    A[..., rows, cols] = vals
    A[..., cols, rows] = vals
    return A


def outer_coords(X):
    """Rows ``vech_iso(x x^T)`` for every row ``x`` of ``X`` without forming ``x x^T``."""
    X = np.asarray(X, dtype=float)
    rows, cols, scale = _layout(X.shape[1])
    return X[:, rows] * X[:, cols] * scale


def frobenius_inner(A, B):
    """``<A, B> = Tr(AB)`` for symmetric ``A`` and ``B``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.sum(A * B))


def congruence_matrix(S):
    """Coordinate matrix of ``A -> S A S`` for symmetric ``S``.

    The map is self-adjoint for the trace inner product, so the result is
    symmetric.
    """
    S = np.asarray(S, dtype=float)
    rows, cols, scale = _layout(S.shape[0])
    half = np.where(rows == cols, 0.5, 1.0)
    K = S[np.ix_(rows, rows)] * S[np.ix_(cols, cols)]
    K += S[np.ix_(rows, cols)] * S[np.ix_(cols, rows)]
    K *= np.outer(scale, half / scale)
    return K


# -- eigensolver ------------------------------------------------------------


@dataclass(frozen=True)
class SmallSpectrum:
    """Descending eigenvalues with eigenvectors stored as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


@lru_cache(maxsize=64)
def _round_robin(n):
    """Disjoint index pairs for each round of a parallel Jacobi sweep."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[k], players[m - 1 - k]) for k in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            p, q = map(np.array, zip(*pairs))
            rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def fix_signs(V, tol=1e-12):
    """Flip columns so the first coordinate above ``tol`` in magnitude is positive."""
    V = np.array(V, dtype=float)
    for j in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, j]) > tol)
        if nz.size and V[nz[0], j] < 0:
            V[:, j] = -V[:, j]
    return V


def _off_diagonal(A):
    return np.linalg.norm(A - np.diag(np.diag(A)))


def jacobi_eigh(A, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Rotations are applied in round-robin order, ``n // 2`` disjoint pairs at
    a time, which fixes the rotation sequence and lets each round run as a
    handful of vectorized row and column updates.  Iteration stops when the
    off-diagonal Frobenius mass drops below ``tol * ||A||_F``.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in descending order.
    V : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, sign-normalized with
        :func:`fix_signs`.
    sweeps : int
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    target = tol * scale
    rounds = _round_robin(n)
    sweeps = 0
    off = _off_diagonal(A)
    while off > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps",
                off_diagonal=off, target=target, sweeps=sweeps,
            )
        for p, q in rounds:
            apq = A[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            theta = (A[q, q] - A[p, p]) / np.where(active, 2.0 * apq, 1.0)
            # t = sgn(theta) / (|theta| + sqrt(theta^2 + 1)), overflow-safe for large |theta|
            big = np.abs(theta) > 1e150
            root = np.sqrt(np.where(big, 1.0, theta * theta) + 1.0)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0),
                         np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + root))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            Ap, Aq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p], A[:, q]
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p], V[:, q]
            V[:, p] = Vp * c - Vq * s
            V[:, q] = Vp * s + Vq * c
        sweeps += 1
        off = _off_diagonal(A)
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], fix_signs(V[:, order]), sweeps


def eig_sym_small(A, limit=DEFAULT_EIG_LIMIT):
    """Full eigendecomposition of a ``d x d`` symmetric matrix (``d <= limit``)."""
    A = as_symmetric(A)
    if A.shape[0] > limit:
        raise DimensionError(f"d = {A.shape[0]} exceeds eigensolver limit {limit}")
    w, V, sweeps = jacobi_eigh(A)
    return SmallSpectrum(w, V, sweeps)


def _psd_clip(w):
    top = max(np.max(np.abs(w)), 0.0) if w.size else 0.0
    return np.where(np.abs(w) <= PSD_RTOL * top, 0.0, w)


def psd_split(A):
    """Split ``A = A_plus - A_minus`` into PSD parts with orthogonal ranges."""
    spec = eig_sym_small(A)
    w = _psd_clip(spec.eigenvalues)
    V = spec.eigenvectors
    plus = (V * np.maximum(w, 0.0)) @ V.T
    minus = (V * np.maximum(-w, 0.0)) @ V.T
    return 0.5 * (plus + plus.T), 0.5 * (minus + minus.T)


def matrix_sqrt_psd(B):
    """Symmetric PSD square root.  Raises :class:`NotPSDError` on negative spectrum."""
    spec = eig_sym_small(B)
    w = spec.eigenvalues
    top = np.max(np.abs(w))
    if w[-1] < -PSD_RTOL * top:
        raise NotPSDError(f"matrix has eigenvalue {w[-1]:.3g} < 0")
    V = spec.eigenvectors
    S = (V * np.sqrt(np.maximum(w, 0.0))) @ V.T
    return 0.5 * (S + S.T)


def pinv_sqrt_psd(B, rcond=1e-12):
    """``(B^+)^{1/2}``: inverse square root on the range of ``B``, zero elsewhere."""
    spec = eig_sym_small(B)
    w = spec.eigenvalues
    top = np.max(np.abs(w))
    if w[-1] < -PSD_RTOL * top:
        raise NotPSDError(f"matrix has eigenvalue {w[-1]:.3g} < 0")
    keep = w > rcond * top
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    V = spec.eigenvectors
    S = (V * inv) @ V.T
    return 0.5 * (S + S.T)
