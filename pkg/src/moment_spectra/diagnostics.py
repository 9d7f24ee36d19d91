"""Spectral diagnostics: eigenvalue inequalities, the gap statistic, bounds on
the separation parameter and estimates of the L^p-L^2 constant ``beta``."""
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateMeasureError, InconsistentInputsError, InputError
from .models import make_rng
from .moments import MomentOperator, second_moment
from .spectra import full_spectrum
from .symspace import congruence_matrix, eig_sym_small, pinv_sqrt_psd, vech_iso_inv

SLACK_RTOL = 1e-9
CLAMP_ATOL = 1e-9
SUPPORT_RTOL = 1e-14


@dataclass(frozen=True)
class GapReport:
    lambda1: float
    lambda2: float
    B_frob_sq: float
    gamma: float
    s_upper_normalized_sq: float
    s_lower_normalized_sq: float
    beta_used: float
    trace_T: float
    eigenvalue_slacks: tuple
    beta_certified: bool = False

    @property
    def upper_is_unconditional(self):
        # the upper bound holds for every measure, whatever beta is
        return True

    @property
    def s_upper(self):
        """Upper bound on ``s`` itself (``2 ||B||_F sqrt(gamma)``)."""
        return float(np.sqrt(self.B_frob_sq * self.s_upper_normalized_sq))

    @property
    def s_lower(self):
        return float(np.sqrt(self.B_frob_sq * self.s_lower_normalized_sq))


@dataclass(frozen=True)
class BetaEstimate:
    """Search result for the smallest ``beta`` with ``||<x,v>||_p <= beta ||<x,v>||_2``.

    ``lower`` is attained at ``direction`` and so never exceeds the true
    constant; ``certified_upper_p4`` (p = 4 only) always dominates it.
    """

    p: int
    lower: float
    direction: np.ndarray
    directions_tested: int
    seed: int
    certified_upper_p4: float = None


@dataclass(frozen=True)
class UnequalBounds:
    alpha: float
    lower: float
    upper: float


def _spectrum(T, spectrum):
    return full_spectrum(T) if spectrum is None else spectrum


def check_theorem_firstmain(T, B, spectrum=None):
    """Slacks ``(l1 - tr T / d, l1 - ||B||_F^2, ||lambda||_2 - l1)``.

    All three are non-negative for any measure; a value below
    ``-1e-9 * l1`` means ``T`` and ``B`` cannot come from the same measure.
    """
    spec = _spectrum(T, spectrum)
    lam = spec.eigenvalues
    l1 = float(lam[0])
    slacks = (
        l1 - T.trace / T.dim,
        l1 - float(np.sum(B * B)),
        float(np.sqrt(np.sum(lam * lam))) - l1,
    )
    tol = SLACK_RTOL * max(abs(l1), 1e-300)
    if min(slacks) < -tol:
        raise InconsistentInputsError(f"negative slack {min(slacks):.3g} (lambda1 = {l1:.6g})")
    return slacks


def gap_statistic(T, B, spectrum=None):
    """``gamma = l2 / l1 + (1 - ||B||_F^2 / l1)``, a number in ``[0, 2]``."""
    spec = _spectrum(T, spectrum)
    l1 = spec.lambda1
    if not l1 > 0:
        raise DegenerateMeasureError("lambda1 = 0: the measure is the point mass at the origin")
    ratio = spec.lambda2 / l1
    excess = 1.0 - float(np.sum(B * B)) / l1
    if ratio < -CLAMP_ATOL or excess < -CLAMP_ATOL:
        raise InconsistentInputsError(f"gap components ({ratio:.3g}, {excess:.3g}) are negative")
    return max(ratio, 0.0) + max(excess, 0.0)


def separation_bounds(T, B, beta, spectrum=None, beta_certified=False):
    """Two-sided bounds on ``(s / ||B||_F)^2``: ``gamma^3 / (200 beta^8)`` and ``4 gamma``."""
    if beta < 1:
        raise InputError(f"beta must be >= 1, got {beta}")
    spec = _spectrum(T, spectrum)
    gamma = gap_statistic(T, B, spec)
    return GapReport(
        lambda1=spec.lambda1,
        lambda2=spec.lambda2,
        B_frob_sq=float(np.sum(B * B)),
        gamma=gamma,
        s_upper_normalized_sq=4.0 * gamma,
        s_lower_normalized_sq=gamma ** 3 / (200.0 * beta ** 8),
        beta_used=float(beta),
        trace_T=T.trace,
        eigenvalue_slacks=check_theorem_firstmain(T, B, spec),
        beta_certified=beta_certified,
    )


def guarantee_lower_bound(T, B, beta, spectrum=None):
    """Guaranteed ``||M1 - M2||_F / 2`` of the median split: ``||B||_F sqrt(gamma^3 / (200 beta^8))``."""
    if beta < 1:
        raise InputError(f"beta must be >= 1, got {beta}")
    gamma = gap_statistic(T, B, spectrum)
    return float(np.linalg.norm(B) * np.sqrt(gamma ** 3 / (200.0 * beta ** 8)))


# -- beta --------------------------------------------------------------------


def whitened_operator(T, B, rcond=1e-12):
    """``A -> S T(S A S) S`` with ``S = (B^+)^{1/2}``.

    Its top eigenvalue bounds ``sup_v E<x,v>^4 / (E<x,v>^2)^2`` from above.
    """
    K = congruence_matrix(pinv_sqrt_psd(B, rcond))
    return MomentOperator(K @ T.matrix @ K, "whitened")


def lp_ratios(X, w, V, p, floor=0.0):
    """``(E|<x,v>|^p)^{1/p} / (E<x,v>^2)^{1/2}`` for each column ``v`` of ``V``.

    Columns whose second moment is at most ``floor`` get ``-inf``.
    """
    Y = X @ V
    second = w @ (Y * Y)
    upper = (w @ np.abs(Y) ** p) ** (1.0 / p)
    out = np.full(V.shape[1], -np.inf)
    ok = second > floor
    out[ok] = upper[ok] / np.sqrt(second[ok])
    return out


def _ascend(X, w, v, p, floor, step=0.5, min_step=1e-7, max_iter=400):
    """Coordinate ascent of the ratio on the unit sphere."""
    d = len(v)
    best = lp_ratios(X, w, v[:, None], p, floor)[0]
    E = np.eye(d)
    for _ in range(max_iter):
        if step < min_step:
            break
        cand = np.concatenate([v[:, None] + step * E, v[:, None] - step * E], axis=1)
        cand /= np.linalg.norm(cand, axis=0)
        r = lp_ratios(X, w, cand, p, floor)
        k = int(np.argmax(r))
        if r[k] > best:
            best, v = r[k], cand[:, k]
        else:
            step *= 0.5
    return best, v


def estimate_beta(samples, p=8, n_dirs=32, seed=0, refine=True, n_refine=4, T=None):
    """Lower estimate of the smallest ``beta`` for the measure ``samples``.

    Candidate directions are the coordinate axes, the eigenvectors of ``B``,
    the eigenvectors of the matrix behind the leading eigenvector of the
    whitened operator (raw and mapped back through ``B^{-1/2}``) and
    ``n_dirs`` seeded random unit vectors.  The ``n_refine`` best candidates
    are polished by coordinate ascent and the best ratio wins (ties go to
    the earliest candidate).  For ``p = 4`` the certified upper bound
    ``lambda1(whitened T)^{1/4}`` is attached.
    """
    from .moments import fourth_moment_operator

    if p not in (4, 8):
        raise InputError(f"p must be 4 or 8, got {p}")
    X, w = samples.points, samples.weights
    d = samples.dim
    B = second_moment(samples)
    floor = SUPPORT_RTOL * max(float(np.trace(B)), 1e-300)
    if not np.trace(B) > 0:
        raise DegenerateMeasureError("the measure has empty support away from the origin")

    T = fourth_moment_operator(samples) if T is None else T
    Tw = whitened_operator(T, B)
    white_spec = full_spectrum(Tw)
    U = eig_sym_small(vech_iso_inv(white_spec.eigenvectors[:, 0])).eigenvectors
    S = pinv_sqrt_psd(B)
    SU = S @ U
    rng = make_rng(seed)
    R = rng.standard_normal((d, n_dirs))
    parts = [np.eye(d), eig_sym_small(B).eigenvectors, U, SU, R]
    V = np.concatenate(parts, axis=1)
    norms = np.linalg.norm(V, axis=0)
    V = V[:, norms > 0] / norms[norms > 0]

    ratios = lp_ratios(X, w, V, p, floor)
    dirs = V.copy()
    if refine:
        for j in np.argsort(-ratios, kind="stable")[:n_refine]:
            if np.isfinite(ratios[j]):
                ratios[j], dirs[:, j] = _ascend(X, w, V[:, j], p, floor)
    k = int(np.argmax(ratios))
    certified = float(max(white_spec.lambda1, 0.0) ** 0.25) if p == 4 else None
    return BetaEstimate(
        p=p,
        lower=float(ratios[k]),
        direction=dirs[:, k],
        directions_tested=int(V.shape[1]),
        seed=seed,
        certified_upper_p4=certified,
    )


def beta_mixture_bound(betas, weights, p):
    """Constant valid for a mixture: ``max_i beta_i * max_i alpha_i^{1/p - 1/2}``."""
    betas = np.asarray(betas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if betas.shape != weights.shape or betas.size == 0:
        raise InputError("need one beta per mixture weight")
    if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise InputError("mixture weights must be positive and sum to 1")
    if np.any(betas < 1):
        raise InputError("every beta must be >= 1")
    return float(betas.max() * np.max(weights ** (1.0 / p - 0.5)))


def unequal_weight_bounds(s_value, alpha):
    """Range ``[s / (2(1 - alpha)), s / (2 alpha)]`` of the weight-``alpha`` separation."""
    if not 0 < alpha <= 0.5:
        raise InputError(f"alpha must lie in (0, 1/2], got {alpha}")
    if s_value < 0:
        raise InputError("s must be non-negative")
    return UnequalBounds(alpha, s_value / (2.0 * (1.0 - alpha)), s_value / (2.0 * alpha))
