"""Second moments and 4th-moment operators of discrete and model measures."""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import CapacityError, DimensionError, InputError, InvalidMomentError, NotPSDError
from .symspace import (
    as_symmetric,
    congruence_matrix,
    coord_dim,
    eig_sym_small,
    outer_coords,
    sym_dim,
    triu_layout,
    vech_iso,
    vech_iso_inv,
)

DEFAULT_DENSE_LIMIT = 96
CHUNK_ROWS = 2048
THREADS_ENV = "MOMENT_SPECTRA_THREADS"


def worker_threads():
    """Thread cap from ``MOMENT_SPECTRA_THREADS`` (default: CPU count)."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Weighted atoms ``x_i`` in ``R^d`` representing a discrete measure.

    ``labels`` optionally records which model component produced each point.
    """

    points: np.ndarray
    weights: np.ndarray = None
    labels: np.ndarray = None

    def __post_init__(self):
        X = np.array(self.points, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionError(f"points must be an (n, d) array with n, d >= 1, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InputError("points contain non-finite values")
        n = X.shape[0]
        if self.weights is None:
            w = np.full(n, 1.0 / n)
        else:
            w = np.array(self.weights, dtype=float).reshape(-1)
            if w.shape != (n,):
                raise DimensionError(f"expected {n} weights, got {w.shape[0]}")
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise InputError("weights must be finite and non-negative")
            if abs(w.sum() - 1.0) > 1e-12:
                raise InputError(f"weights sum to {w.sum():.17g}, expected 1")
        X.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", X)
        object.__setattr__(self, "weights", w)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise DimensionError("labels must have one entry per point")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def uniform(self):
        return bool(np.all(self.weights == self.weights[0]))

    def transform(self, M):
        """Pushforward under ``x -> M x``."""
        M = np.asarray(M, dtype=float)
        return SampleSet(self.points @ M.T, self.weights, self.labels)

    def scale(self, c):
        return SampleSet(c * self.points, self.weights, self.labels)


@dataclass(frozen=True, eq=False)
class MomentOperator:
    """The operator ``A -> E <A, xx^T> xx^T`` as a ``D x D`` coordinate matrix.

    Coordinates are those of :func:`moment_spectra.symspace.vech_iso`.
    ``source`` is ``"empirical"`` or the name of the analytic family.
    """

    matrix: np.ndarray
    source: str = "empirical"
    dim: int = field(init=False)

    def __post_init__(self):
        T = np.array(self.matrix, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise DimensionError(f"operator matrix must be square, got {T.shape}")
        d = sym_dim(T.shape[0])
        T = 0.5 * (T + T.T)
        T.setflags(write=False)
        object.__setattr__(self, "matrix", T)
        object.__setattr__(self, "dim", d)

    @property
    def coord_dim(self):
        return self.matrix.shape[0]

    @property
    def trace(self):
        return float(np.trace(self.matrix))

    def apply(self, A):
        """Evaluate the operator on a symmetric matrix."""
        return vech_iso_inv(self.matrix @ vech_iso(A))

    def __add__(self, other):
        return MomentOperator(self.matrix + other.matrix, "sum")

    def __sub__(self, other):
        return MomentOperator(self.matrix - other.matrix, "difference")


def second_moment(samples):
    """``B = sum_i w_i x_i x_i^T``."""
    X, w = samples.points, samples.weights
    B = (X * w[:, None]).T @ X
    return 0.5 * (B + B.T)


def _chunk_gram(V, w):
    return (V * w[:, None]).T @ V


def _tree_sum(parts):
    while len(parts) > 1:
        merged = [parts[k] + parts[k + 1] for k in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            merged.append(parts[-1])
        parts = merged
    return parts[0]


def fourth_moment_operator(samples, dense_limit=DEFAULT_DENSE_LIMIT, threads=None):
    """Empirical operator ``sum_i w_i v_i v_i^T`` with ``v_i = vech_iso(x_i x_i^T)``.

    Rows are processed in fixed chunks of ``CHUNK_ROWS`` whose Gram matrices
    are merged by a fixed pairwise tree, so the result does not depend on
    the number of worker threads.
    """
    d = samples.dim
    if d > dense_limit:
        raise CapacityError(
            f"d = {d} exceeds the dense operator limit {dense_limit} "
            f"(D = {coord_dim(d)}); raise the limit or use top-k eigenvalues on a smaller problem"
        )
    X, w = samples.points, samples.weights
    bounds = [(lo, min(lo + CHUNK_ROWS, len(X))) for lo in range(0, len(X), CHUNK_ROWS)]

    def work(span):
        lo, hi = span
        return _chunk_gram(outer_coords(X[lo:hi]), w[lo:hi])

    threads = worker_threads() if threads is None else threads
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(bounds))) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    return MomentOperator(_tree_sum(parts), "empirical")


# -- analytic operators ------------------------------------------------------


def analytic_iid(d, m4):
    """Operator of a vector with i.i.d. coordinates, ``E X = 0``, ``E X^2 = 1``, ``E X^4 = m4``.

    Acts as ``A -> 2A + Tr(A) I + (m4 - 3) diag(A)``.
    """
    if m4 < 1:
        raise InvalidMomentError(f"E X^4 = {m4} < 1 is impossible when E X^2 = 1")
    D = coord_dim(d)
    I = vech_iso(np.eye(d))
    T = 2.0 * np.eye(D) + np.outer(I, I) + (m4 - 3.0) * np.diag(I)
    return MomentOperator(T, "iid")


def analytic_gaussian(B):
    """Operator of ``N(0, B)``: ``A -> 2 BAB + <A, B> B``."""
    B = as_symmetric(B)
    w = eig_sym_small(B).eigenvalues
    if w[-1] < -1e-10 * max(abs(w[0]), abs(w[-1])):
        raise NotPSDError("covariance is not positive semidefinite")
    b = vech_iso(B)
    return MomentOperator(2.0 * congruence_matrix(B) + np.outer(b, b), "gaussian")


def analytic_sphere(d):
    """Operator of the uniform measure on the unit sphere ``S^{d-1}``.

    Equals the standard Gaussian operator divided by ``E ||g||^4 = d(d+2)``.
    """
    if d < 1:
        raise DimensionError("d must be positive")
    T = analytic_gaussian(np.eye(d)).matrix / (d * (d + 2))
    return MomentOperator(T, "sphere")


def mixture_operator(parts):
    """Convex combination ``sum_k alpha_k T_k`` of ``(alpha_k, T_k)`` pairs."""
    parts = list(parts)
    if not parts:
        raise InputError("mixture needs at least one component")
    weights = np.array([a for a, _ in parts], dtype=float)
    if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise InputError("mixture weights must be positive and sum to 1")
    dims = {T.dim for _, T in parts}
    if len(dims) != 1:
        raise DimensionError(f"mixture components have different dimensions {sorted(dims)}")
    M = sum(a * T.matrix for a, T in parts)
    return MomentOperator(M, "mixture")


def scale_pushforward(T, c):
    """Operator of the pushforward under ``x -> c x``: ``c^4 T``."""
    if not c > 0:
        raise InputError(f"scale must be positive, got {c}")
    return MomentOperator(c ** 4 * T.matrix, T.source)


def zero_operator(d):
    return MomentOperator(np.zeros((coord_dim(d),) * 2), "point-mass-origin")


def lift_first_order(samples, a):
    """Product with ``delta_a``: prepend the constant coordinate ``a`` to every atom."""
    X = samples.points
    lifted = np.hstack([np.full((X.shape[0], 1), float(a)), X])
    return SampleSet(lifted, samples.weights, samples.labels)


def _pair_index(d):
    rows, cols, scale = triu_layout(d)
    idx = np.empty((d, d), dtype=int)
    idx[rows, cols] = np.arange(len(rows))
    idx[cols, rows] = np.arange(len(rows))
    return idx, rows, cols, scale


def moment_tensor(T):
    """Recover the symmetric 4-tensor ``E x_i x_j x_k x_l`` from an operator."""
    idx, _, _, scale = _pair_index(T.dim)
    C = T.matrix / np.outer(scale, scale)
    return C[idx[:, :, None, None], idx[None, None, :, :]]


def operator_from_tensor(M4, source="tensor"):
    """Operator whose 4-tensor is ``M4`` (inverse of :func:`moment_tensor`)."""
    _, rows, cols, scale = _pair_index(M4.shape[0])
    C = M4[rows, cols][:, rows, cols]
    return MomentOperator(C * np.outer(scale, scale), source)
