"""Fourth-moment operators of probability measures on R^d, their spectra,
spectral-gap diagnostics and an explicit median-split decomposition."""

__version__ = "0.1.0"

from .decompose import Decomposition, label_agreement, leading_direction, median_split, run_decomposition
from .diagnostics import (
    BetaEstimate,
    GapReport,
    beta_mixture_bound,
    check_theorem_firstmain,
    estimate_beta,
    gap_statistic,
    guarantee_lower_bound,
    separation_bounds,
    unequal_weight_bounds,
    whitened_operator,
)
from .estimators import FourthMomentSpectrum, MedianSplit
from .exceptions import (
    CapacityError,
    ConvergenceError,
    DegenerateMeasureError,
    DimensionError,
    InconsistentInputsError,
    InputError,
    InvalidMomentError,
    MomentSpectraError,
    NotPSDError,
    UnsupportedError,
)
from .models import (
    IID,
    DiscreteAxes,
    Gaussian,
    Lifted,
    Mixture,
    PointMass,
    ProjectionMixture,
    Scaled,
    Sphere,
    hypercube,
    make_rng,
    sample,
)
from .moments import (
    MomentOperator,
    SampleSet,
    analytic_gaussian,
    analytic_iid,
    analytic_sphere,
    fourth_moment_operator,
    mixture_operator,
    second_moment,
)
from .spectra import Spectrum, centered_operator, full_spectrum, rank_one_op, top_eigens
from .symspace import coord_dim, vech_iso, vech_iso_inv

__all__ = [name for name in dir() if not name.startswith("_")]
