"""Model measures with closed-form moments and seeded samplers.

Every model exposes ``second_moment()``, ``operator()`` (its exact
4th-moment operator) and ``draw(n, rng)``.  All families are centrally
symmetric, so odd moments vanish; :class:`Lifted` relies on this.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, InputError, InvalidMomentError
from .moments import (
    MomentOperator,
    SampleSet,
    analytic_gaussian,
    analytic_iid,
    analytic_sphere,
    fourth_moment_operator,
    mixture_operator,
    moment_tensor,
    operator_from_tensor,
    scale_pushforward,
)
from .symspace import as_symmetric, matrix_sqrt_psd

PRNG_NAME = "numpy.random.PCG64"
PRNG_VERSION = f"{PRNG_NAME}/numpy-{np.__version__}"


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class Gaussian:
    cov: np.ndarray
    name = "gaussian"

    def __post_init__(self):
        object.__setattr__(self, "cov", as_symmetric(self.cov))

    @property
    def dim(self):
        return self.cov.shape[0]

    def second_moment(self):
        return self.cov.copy()

    def operator(self):
        return analytic_gaussian(self.cov)

    def draw(self, n, rng):
        root = matrix_sqrt_psd(self.cov)
        return rng.standard_normal((n, self.dim)) @ root, None


@dataclass(frozen=True)
class IID:
    """Independent coordinates with ``E X = 0``, ``E X^2 = 1`` and ``E X^4 = m4``.

    The coordinate law is uniform on ``[-sqrt3, sqrt3]`` for ``m4 = 9/5``,
    standard normal for ``m4 = 3``, Rademacher for ``m4 = 1`` and otherwise
    the symmetric three-point law ``P(0) = 1 - 1/m4``, ``P(+-sqrt(m4)) = 1/(2 m4)``.
    """

    d: int
    m4: float = 1.8
    name = "iid"

    def __post_init__(self):
        if self.m4 < 1:
            raise InvalidMomentError(f"E X^4 = {self.m4} < 1 is impossible when E X^2 = 1")

    @property
    def dim(self):
        return self.d

    @property
    def law(self):
        if np.isclose(self.m4, 1.8, rtol=0, atol=1e-15):
            return "uniform"
        if self.m4 == 3:
            return "normal"
        if self.m4 == 1:
            return "rademacher"
        return "three-point"

    def second_moment(self):
        return np.eye(self.d)

    def operator(self):
        return analytic_iid(self.d, self.m4)

    def draw(self, n, rng):
        shape = (n, self.d)
        law = self.law
        if law == "uniform":
            return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), shape), None
        if law == "normal":
            return rng.standard_normal(shape), None
        if law == "rademacher":
            return rng.choice([-1.0, 1.0], size=shape), None
        q = 1.0 / self.m4
        u = rng.random(shape)
        amp = np.sqrt(self.m4)
        X = np.where(u < q / 2, amp, np.where(u < q, -amp, 0.0))
        return X, None


def hypercube(d):
    """Uniform measure on ``[-sqrt3, sqrt3]^d``."""
    return IID(d, 9.0 / 5.0)


@dataclass(frozen=True, eq=False)
class ProjectionMixture:
    """``N(0, P)/2 + N(0, I - P)/2``; ``P`` defaults to the first ``d/2`` axes.

    Drawn labels are 0 for the ``N(0, P)`` component and 1 for ``N(0, I - P)``.
    """

    d: int
    projection: np.ndarray = None
    name = "projection-mixture"

    def __post_init__(self):
        if self.projection is None:
            if self.d % 2:
                raise DimensionError("default projection mixture needs even d")
            P = np.diag((np.arange(self.d) < self.d // 2).astype(float))
        else:
            P = as_symmetric(self.projection)
            if P.shape != (self.d, self.d) or not np.allclose(P @ P, P, atol=1e-10):
                raise InputError("projection must be a d x d orthogonal projection")
        object.__setattr__(self, "projection", P)

    @property
    def dim(self):
        return self.d

    def second_moment(self):
        return 0.5 * np.eye(self.d)

    def operator(self):
        P = self.projection
        Q = np.eye(self.d) - P
        return MomentOperator(
            mixture_operator([(0.5, analytic_gaussian(P)), (0.5, analytic_gaussian(Q))]).matrix,
            self.name,
        )

    def draw(self, n, rng):
        labels = rng.integers(0, 2, size=n)
        G = rng.standard_normal((n, self.d))
        P = self.projection
        Q = np.eye(self.d) - P
        X = np.where(labels[:, None] == 0, G @ P, G @ Q)
        return X, labels


@dataclass(frozen=True)
class DiscreteAxes:
    """Uniform measure on the ``2d`` points ``+-e_i``."""

    d: int
    name = "discrete-axes"

    @property
    def dim(self):
        return self.d

    def atoms(self):
        E = np.eye(self.d)
        return np.stack([E, -E], axis=1).reshape(2 * self.d, self.d)

    def second_moment(self):
        return np.eye(self.d) / self.d

    def operator(self):
        T = fourth_moment_operator(SampleSet(self.atoms()))
        return MomentOperator(T.matrix, self.name)

    def draw(self, n, rng):
        idx = rng.integers(0, 2 * self.d, size=n)
        return self.atoms()[idx], None


@dataclass(frozen=True)
class Sphere:
    """Uniform measure on the unit sphere in ``R^d``."""

    d: int
    name = "sphere"

    @property
    def dim(self):
        return self.d

    def second_moment(self):
        return np.eye(self.d) / self.d

    def operator(self):
        return analytic_sphere(self.d)

    def draw(self, n, rng):
        G = rng.standard_normal((n, self.d))
        return G / np.linalg.norm(G, axis=1, keepdims=True), None


@dataclass(frozen=True)
class Scaled:
    """Pushforward of ``model`` under ``x -> c x``."""

    model: object
    c: float
    name = "scaled"

    def __post_init__(self):
        if not self.c > 0:
            raise InputError("scale must be positive")

    @property
    def dim(self):
        return self.model.dim

    def second_moment(self):
        return self.c ** 2 * self.model.second_moment()

    def operator(self):
        return scale_pushforward(self.model.operator(), self.c)

    def draw(self, n, rng):
        X, labels = self.model.draw(n, rng)
        return self.c * X, labels


@dataclass(frozen=True)
class PointMass:
    """``delta_0`` in ``R^d``."""

    d: int
    name = "point-mass"

    @property
    def dim(self):
        return self.d

    def second_moment(self):
        return np.zeros((self.d, self.d))

    def operator(self):
        from .moments import zero_operator

        return zero_operator(self.d)

    def draw(self, n, rng):
        return np.zeros((n, self.d)), None


@dataclass(frozen=True, eq=False)
class Mixture:
    """Finite mixture; drawn labels are component indices."""

    models: tuple
    weights: tuple
    name = "mixture"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.models) != len(w) or not self.models:
            raise InputError("need one weight per component")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InputError("mixture weights must be positive and sum to 1")
        if len({m.dim for m in self.models}) != 1:
            raise DimensionError("mixture components must share a dimension")
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @property
    def dim(self):
        return self.models[0].dim

    def second_moment(self):
        return sum(a * m.second_moment() for a, m in zip(self.weights, self.models))

    def operator(self):
        return mixture_operator([(a, m.operator()) for a, m in zip(self.weights, self.models)])

    def draw(self, n, rng):
        labels = rng.choice(len(self.models), size=n, p=np.asarray(self.weights))
        X = np.empty((n, self.dim))
        for k, model in enumerate(self.models):
            mask = labels == k
            X[mask], _ = model.draw(int(mask.sum()), rng)
        return X, labels


@dataclass(frozen=True)
class Lifted:
    """Product ``delta_a x model`` on ``R^{d+1}`` (constant first coordinate ``a``)."""

    model: object
    a: float
    name = "lifted"

    @property
    def dim(self):
        return self.model.dim + 1

    def second_moment(self):
        B = self.model.second_moment()
        d = B.shape[0]
        out = np.zeros((d + 1, d + 1))
        out[0, 0] = self.a ** 2
        out[1:, 1:] = B
        return out

    def operator(self):
        # odd moments of the base model vanish, so only a^4, a^2 B and E x^{(4)} survive
        a = self.a
        B = self.model.second_moment()
        base = moment_tensor(self.model.operator())
        d = B.shape[0]
        M = np.zeros((d + 1,) * 4)
        M[1:, 1:, 1:, 1:] = base
        M[0, 0, 0, 0] = a ** 4
        for pattern in ("00ij", "0i0j", "0ij0", "i00j", "i0j0", "ij00"):
            index = tuple(0 if ch == "0" else slice(1, None) for ch in pattern)
            M[index] = a ** 2 * B
        return operator_from_tensor(M, self.name)

    def draw(self, n, rng):
        X, labels = self.model.draw(n, rng)
        return np.hstack([np.full((n, 1), float(self.a)), X]), labels


def sample(model, n, seed):
    """Seeded :class:`SampleSet` from ``model``.

    :class:`DiscreteAxes` is enumerated exactly (``2d`` atoms, uniform
    weights) and ignores ``n``.
    """
    if isinstance(model, DiscreteAxes):
        return SampleSet(model.atoms())
    n = int(n)
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    X, labels = model.draw(n, make_rng(seed))
    return SampleSet(X, labels=labels)
