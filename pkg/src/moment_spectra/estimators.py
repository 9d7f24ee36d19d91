"""scikit-learn style wrappers around the moment-operator pipeline."""
import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import _check_sample_weight, check_array, check_is_fitted

from .decompose import leading_direction, median_split
from .diagnostics import estimate_beta, guarantee_lower_bound, separation_bounds
from .moments import DEFAULT_DENSE_LIMIT, SampleSet, fourth_moment_operator, second_moment
from .spectra import full_spectrum, top_eigens
from .symspace import outer_coords


def _sample_set(X, sample_weight):
    X = check_array(X, dtype=np.float64)
    w = _check_sample_weight(sample_weight, X, dtype=np.float64)
    total = w.sum()
    if not total > 0:
        raise ValueError("sample weights must have a positive sum")
    return SampleSet(X, w / total)


class FourthMomentSpectrum(TransformerMixin, BaseEstimator):
    """Spectrum of the 4th-moment operator of the (weighted) empirical measure.

    Parameters
    ----------
    n_components : int, default=2
        Number of leading eigen-directions kept by :meth:`transform`.
    p : {4, 8}, default=8
        Exponent of the L^p-L^2 constant estimated during ``fit``.
    beta : float or None, default=None
        Known L^8-L^2 constant.  When None, the search estimate is used and
        the lower separation bound is only heuristic.
    n_dirs : int, default=32
        Random directions in the beta search.
    random_state : int, default=0
    dense_limit : int, default=96
        Largest dimension for which the dense operator is built.
    top_k : int or None, default=None
        Compute only this many eigenpairs by power iteration.

    Attributes
    ----------
    second_moment_ : ndarray of shape (d, d)
    operator_ : MomentOperator
    spectrum_ : Spectrum
    eigenvalues_ : ndarray
    beta_estimate_ : BetaEstimate or None
    report_ : GapReport
    gamma_ : float
    """

    def __init__(self, n_components=2, p=8, beta=None, n_dirs=32, random_state=0,
                 dense_limit=DEFAULT_DENSE_LIMIT, top_k=None):
        self.n_components = n_components
        self.p = p
        self.beta = beta
        self.n_dirs = n_dirs
        self.random_state = random_state
        self.dense_limit = dense_limit
        self.top_k = top_k

    def fit(self, X, y=None, sample_weight=None):
        samples = _sample_set(X, sample_weight)
        self.n_features_in_ = samples.dim
        self.second_moment_ = second_moment(samples)
        self.operator_ = fourth_moment_operator(samples, dense_limit=self.dense_limit)
        if self.top_k is None:
            self.spectrum_ = full_spectrum(self.operator_)
        else:
            self.spectrum_ = top_eigens(self.operator_, max(self.top_k, 2), seed=self.random_state)
        self.eigenvalues_ = self.spectrum_.eigenvalues
        if self.beta is None:
            self.beta_estimate_ = estimate_beta(samples, self.p, self.n_dirs, self.random_state, T=self.operator_)
            beta, certified = max(self.beta_estimate_.lower, 1.0), False
        else:
            self.beta_estimate_ = None
            beta, certified = self.beta, True
        self.report_ = separation_bounds(self.operator_, self.second_moment_, beta,
                                         self.spectrum_, beta_certified=certified)
        self.gamma_ = self.report_.gamma
        return self

    def transform(self, X):
        """Coordinates of ``x x^T`` along the leading eigenvectors of the operator."""
        check_is_fitted(self, "spectrum_")
        X = check_array(X, dtype=np.float64)
        V = self.spectrum_.eigenvectors[:, : self.n_components]
        return outer_coords(X) @ V


class MedianSplit(ClusterMixin, BaseEstimator):
    """Two-way split at the median of ``<A x, x>``, ``A`` the top direction of ``T - B (x) B``.

    ``labels_`` is 1 for atoms sent to the first half and 0 for the second;
    atoms exactly at the threshold follow the tie weight.
    """

    def __init__(self, beta=None, beta_certified=False):
        self.beta = beta
        self.beta_certified = beta_certified

    def fit(self, X, y=None, sample_weight=None):
        samples = _sample_set(X, sample_weight)
        self.n_features_in_ = samples.dim
        B = second_moment(samples)
        T = fourth_moment_operator(samples)
        spec = full_spectrum(T)
        if self.beta is None:
            beta, certified = max(estimate_beta(samples, p=8, T=T).lower, 1.0), False
        else:
            beta, certified = self.beta, self.beta_certified
        direction = leading_direction(T, B)
        self.decomposition_ = median_split(samples, direction.A)
        self.direction_ = direction.A
        self.threshold_ = self.decomposition_.b0
        self.alpha_ = self.decomposition_.alpha
        self.achieved_ = self.decomposition_.achieved
        self.guarantee_ = guarantee_lower_bound(T, B, beta, spec)
        self.beta_ = beta
        self.certified_ = certified
        self.labels_ = self.decomposition_.labels
        return self

    def decision_function(self, X):
        check_is_fitted(self, "direction_")
        X = check_array(X, dtype=np.float64)
        return np.einsum("ni,ij,nj->n", X, self.direction_, X) - self.threshold_

    def predict(self, X):
        score = self.decision_function(X)
        return np.where(score > 0, 1, np.where(score < 0, 0, int(self.alpha_ >= 0.5)))
