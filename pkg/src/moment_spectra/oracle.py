"""Brute-force reference values for small instances.

Nothing here shares code with the fast paths beyond the coordinate map,
so the tests can use these functions as independent ground truth.

Why enumerating balanced subsets gives the exact separation: for ``n``
equal atoms, a split ``mu = mu1/2 + mu2/2`` is a vector of masses
``m_i in [0, 2/n]`` with ``sum m_i = 1``, and ``M1 - M2 = 2 (sum_i m_i x_i x_i^T - B)``
is affine in ``m``.  A norm of an affine map is convex, so its maximum over
the polytope is attained at a vertex.  With ``n`` even the vertices are
exactly the vectors with ``n/2`` entries at the cap ``2/n`` and the rest
zero, i.e. the balanced subsets.  The weight-``alpha`` variant is the same
argument with cap ``1/(alpha n)`` and ``alpha n`` atoms at the cap.
"""
import hashlib
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .exceptions import DimensionError, UnsupportedError
from .moments import MomentOperator
from .symspace import coord_dim, vech_iso, vech_iso_inv

MAX_SUBSET_ATOMS = 14
MAX_BRUTE_ATOMS = 200
MAX_BRUTE_DIM = 6
GRID_CELLS = 1 << 22


@dataclass(frozen=True)
class OracleResult:
    value: float
    argmax: object
    instance_hash: str
    method: str


def instance_hash(samples):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(samples.points).tobytes())
    h.update(np.ascontiguousarray(samples.weights).tobytes())
    return h.hexdigest()[:16]


def _require_uniform(samples):
    if not samples.uniform:
        raise UnsupportedError("subset enumeration needs equal atom weights")


def _best_subset(samples, k):
    """Max of ``||(1/k) sum_{i in S} x_i x_i^T - B||_F`` over ``|S| = k``; ties go to the smallest mask."""
    X = samples.points
    n = len(X)
    G = np.einsum("ni,nj->nij", X, X).reshape(n, -1)
    B = G.mean(axis=0)
    subsets = np.array(list(combinations(range(n), k)), dtype=int)
    sums = G[subsets].sum(axis=1) / k
    vals = np.linalg.norm(sums - B, axis=1)
    best = vals.max()
    masks = (1 << subsets).sum(axis=1)
    winner = int(masks[vals == best].min())
    return float(best), winner


def s_exact_small(samples):
    """Exact separation ``s`` of an equal-weight atomic measure (``n`` even, ``n <= 14``).

    ``argmax`` is the bitmask of atoms placed wholly in ``mu1``.
    """
    _require_uniform(samples)
    n = samples.n
    if n % 2 or n > MAX_SUBSET_ATOMS:
        raise UnsupportedError(f"need an even number of atoms <= {MAX_SUBSET_ATOMS}, got {n}")
    value, mask = _best_subset(samples, n // 2)
    return OracleResult(value, mask, instance_hash(samples), "balanced-subsets")


def s_alpha_exact_small(samples, alpha):
    """Exact ``(1/2) sup ||M(nu1) - M(nu2)||_F`` over ``mu = alpha nu1 + (1 - alpha) nu2``.

    The half factor matches the equal-weight separation, so ``alpha = 1/2``
    reproduces :func:`s_exact_small`.  Needs equal weights and ``alpha n``
    integral.
    """
    _require_uniform(samples)
    n = samples.n
    k = alpha * n
    if not 0 < alpha <= 0.5 or abs(k - round(k)) > 1e-12 or n > MAX_SUBSET_ATOMS:
        raise UnsupportedError(f"need alpha * n integral and n <= {MAX_SUBSET_ATOMS}")
    value, mask = _best_subset(samples, int(round(k)))
    return OracleResult(0.5 * value / (1.0 - alpha), mask, instance_hash(samples), "alpha-subsets")


# -- beta ---------------------------------------------------------------------


def _ratio(X, w, V, p):
    Y = X @ V
    second = w @ (Y * Y)
    upper = (w @ np.abs(Y) ** p) ** (1.0 / p)
    out = np.full(V.shape[1], -np.inf)
    ok = second > 1e-14 * max(float(w @ (X * X).sum(axis=1)), 1e-300)
    out[ok] = upper[ok] / np.sqrt(second[ok])
    return out


def _grid(d, resolution):
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        m = int(np.ceil(np.pi / resolution))
        theta = np.arange(m) * (np.pi / m)
        return np.vstack([np.cos(theta), np.sin(theta)])
    # Fibonacci points on the upper hemisphere; v and -v give the same ratio
    m = int(np.ceil(2.0 * np.pi / resolution ** 2))
    k = np.arange(m) + 0.5
    z = k / m
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * k
    return np.vstack([r * np.cos(phi), r * np.sin(phi), z])


def _polish(X, w, v, p, radius):
    d = len(v)
    if d == 1:
        return v
    if d == 2:
        t0 = np.arctan2(v[1], v[0])
        res = minimize_scalar(
            lambda t: -_ratio(X, w, np.array([[np.cos(t)], [np.sin(t)]]), p)[0],
            bounds=(t0 - radius, t0 + radius), method="bounded",
            options={"xatol": 1e-13},
        )
        t = res.x
        return np.array([np.cos(t), np.sin(t)])

    def neg(u):
        u = np.asarray(u)
        nrm = np.linalg.norm(u)
        return np.inf if nrm == 0 else -_ratio(X, w, (u / nrm)[:, None], p)[0]

    res = minimize(neg, v, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    return res.x / np.linalg.norm(res.x)


def beta_exact_small(samples, p, resolution=1e-3, polish=8):
    """Grid maximum of ``(E|<x,v>|^p)^{1/p} / (E<x,v>^2)^{1/2}`` over unit ``v``, ``d <= 3``.

    The grid has angular spacing at most ``resolution``; the ``polish`` best
    grid points are refined by local optimization.  For ``resolution <= 1e-3``
    the reported value is within 1% (in practice far closer) of the
    supremum: the ratio is a smooth function of the direction, so its value
    at the nearest grid point is off by ``O(resolution^2)`` relative.
    """
    d = samples.dim
    if d > 3:
        raise DimensionError(f"grid oracle supports d <= 3, got {d}")
    X, w = samples.points, samples.weights
    V = _grid(d, resolution)
    chunk = max(16, GRID_CELLS // len(X))
    vals = np.concatenate([_ratio(X, w, V[:, lo:lo + chunk], p)
                           for lo in range(0, V.shape[1], chunk)])
    top = np.argsort(-vals, kind="stable")[:polish]
    best_val, best_dir = float(vals[top[0]]), V[:, top[0]]
    for j in top:
        u = _polish(X, w, V[:, j], p, 2.0 * resolution)
        r = float(_ratio(X, w, u[:, None], p)[0])
        if r > best_val:
            best_val, best_dir = r, u
    return OracleResult(best_val, best_dir, instance_hash(samples), f"grid-{d}d")


# -- operator -------------------------------------------------------------------


def t_operator_brute(samples):
    """Assemble ``T`` column by column from ``T(E) = sum_i w_i <E, x_i x_i^T> x_i x_i^T``."""
    n, d = samples.n, samples.dim
    if n > MAX_BRUTE_ATOMS or d > MAX_BRUTE_DIM:
        raise UnsupportedError(f"brute force limited to n <= {MAX_BRUTE_ATOMS}, d <= {MAX_BRUTE_DIM}")
    D = coord_dim(d)
    T = np.zeros((D, D))
    for j in range(D):
        E = vech_iso_inv(np.eye(D)[j])
        image = np.zeros((d, d))
        for x, wi in zip(samples.points, samples.weights):
            inner = 0.0
            for a in range(d):
                for b in range(d):
                    inner += E[a, b] * x[a] * x[b]
            for a in range(d):
                for b in range(d):
                    image[a, b] += wi * inner * x[a] * x[b]
        T[:, j] = vech_iso(image)
    return MomentOperator(T, "brute-force")
