"""Equal-weight median split along the leading direction of ``T - B (x) B``."""
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import CLAMP_ATOL, gap_statistic, guarantee_lower_bound
from .exceptions import InconsistentInputsError, InputError
from .moments import fourth_moment_operator, second_moment
from .spectra import centered_operator, full_spectrum
from .symspace import vech_iso_inv

MEDIAN_TOL = 1e-12


@dataclass(frozen=True)
class LeadingDirection:
    A: np.ndarray
    eigenvalue: float
    degenerate: bool


@dataclass(frozen=True)
class Decomposition:
    """Split ``mu = mu1 / 2 + mu2 / 2`` of a weighted atomic measure.

    ``mass1`` and ``mass2`` are the atom masses of ``mu1`` and ``mu2``
    (each sums to 1, and ``mass1 + mass2 = 2 w``).  ``achieved`` is
    ``||M1 - M2||_F / 2``.  ``guarantee`` is the lower bound promised for
    ``achieved`` by the chosen ``beta``; it is only a proof when
    ``beta_certified`` is true.
    """

    A: np.ndarray
    b0: float
    alpha: float
    scores: np.ndarray
    mass1: np.ndarray
    mass2: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    achieved: float
    guarantee: float = None
    beta: float = None
    beta_certified: bool = False
    degenerate: bool = False
    gamma: float = None
    B_frob: float = None

    @property
    def labels(self):
        """1 where an atom sits wholly in ``mu1``, 0 in ``mu2``; ties follow ``alpha >= 1/2``."""
        f, b0 = self.scores, self.b0
        return np.where(f > b0, 1, np.where(f < b0, 0, int(self.alpha >= 0.5)))

    @property
    def normalized_achieved(self):
        return self.achieved / self.B_frob if self.B_frob else 0.0


def leading_direction(T, B):
    """Unit-Frobenius ``A`` spanning the top eigenvector of ``T - B (x) B``.

    The sign is fixed so the first non-negligible coordinate is positive.
    """
    C = centered_operator(T, B)
    spec = full_spectrum(C)
    lam = spec.eigenvalues
    ref = max(abs(lam[0]), float(np.abs(T.matrix).max()), 1e-300)
    if lam[-1] < -CLAMP_ATOL * ref:
        raise InconsistentInputsError(
            f"T - B (x) B has eigenvalue {lam[-1]:.3g}; T and B are not from one measure"
        )
    lam1 = max(lam[0], 0.0)
    v = spec.eigenvectors[:, 0]
    A = vech_iso_inv(v / np.linalg.norm(v))
    degenerate = spec.degenerate or lam1 <= 1e-12 * ref
    return LeadingDirection(A, float(lam1), bool(degenerate))


def weighted_median(f, w):
    """Crossing value ``b0`` and tie weight ``alpha`` for the split at the median.

    Atoms are scanned in descending ``f`` until the accumulated mass reaches
    one half; ``b0`` is the value at that atom, atoms exactly equal to it
    form the tie class, and ``alpha`` tops the mass above ``b0`` up to one
    half.
    """
    order = np.argsort(-f, kind="stable")
    cum = np.cumsum(w[order])
    k = int(np.searchsorted(cum, 0.5 - MEDIAN_TOL))
    k = min(k, len(f) - 1)
    b0 = float(f[order[k]])
    above = float(w[f > b0].sum())
    tie = float(w[f == b0].sum())
    alpha = 0.0 if tie == 0 else min(max((0.5 - above) / tie, 0.0), 1.0)
    return b0, alpha


def median_split(samples, A):
    """Split ``samples`` at the median of ``f(x) = <A x, x>``.

    Atoms above the median move wholly into ``mu1``, atoms below into
    ``mu2``, and atoms at the median are shared in proportion ``alpha``.
    """
    A = np.asarray(A, dtype=float)
    if abs(np.linalg.norm(A) - 1.0) > 1e-9:
        raise InputError(f"direction must have unit Frobenius norm, got {np.linalg.norm(A):.6g}")
    X, w = samples.points, samples.weights
    f = np.einsum("ni,ij,nj->n", X, A, X)
    b0, alpha = weighted_median(f, w)
    mass1 = np.where(f > b0, 2.0 * w, np.where(f == b0, 2.0 * alpha * w, 0.0))
    mass2 = 2.0 * w - mass1
    M1 = (X * mass1[:, None]).T @ X
    M2 = (X * mass2[:, None]).T @ X
    achieved = 0.5 * float(np.linalg.norm(M1 - M2))
    return Decomposition(
        A=A, b0=b0, alpha=alpha, scores=f, mass1=mass1, mass2=mass2,
        M1=M1, M2=M2, achieved=achieved,
        B_frob=float(np.linalg.norm(second_moment(samples))),
    )


def run_decomposition(samples, beta=None, beta_certified=False, T=None):
    """Median split along the leading direction, with its guarantee for ``beta``.

    Without ``beta`` the guarantee uses the p = 8 search estimate, which can
    underestimate the true constant; the result is then marked uncertified.
    """
    from .diagnostics import estimate_beta

    B = second_moment(samples)
    T = fourth_moment_operator(samples) if T is None else T
    spec = full_spectrum(T)
    gamma = gap_statistic(T, B, spec)
    if beta is None:
        beta = max(estimate_beta(samples, p=8, T=T).lower, 1.0)
        beta_certified = False
    direction = leading_direction(T, B)
    split = median_split(samples, direction.A)
    return replace(
        split,
        guarantee=guarantee_lower_bound(T, B, beta, spec),
        beta=float(beta),
        beta_certified=bool(beta_certified),
        degenerate=direction.degenerate,
        gamma=gamma,
    )


def label_agreement(labels, truth):
    """Fraction of matching binary labels under the better of the two orientations."""
    labels = np.asarray(labels).astype(int)
    truth = np.asarray(truth).astype(int)
    agree = float(np.mean(labels == truth))
    return max(agree, 1.0 - agree)
