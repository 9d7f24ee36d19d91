import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group

from conftest import random_measure
from moment_spectra.exceptions import ConvergenceError, DimensionError
from moment_spectra.models import ProjectionMixture
from moment_spectra.moments import MomentOperator, SampleSet, analytic_iid, analytic_sphere, fourth_moment_operator, second_moment
from moment_spectra.spectra import centered_operator, full_spectrum, rank_one_op, top_eigens
from moment_spectra.symspace import vech_iso, vech_iso_inv


def test_jacobi_and_lapack_agree(rng):
    T = fourth_moment_operator(SampleSet(rng.standard_normal((300, 5))))
    a = full_spectrum(T, "jacobi")
    b = full_spectrum(T, "lapack")
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10, atol=1e-12)
    assert a.method == "jacobi" and b.method == "lapack"
    with pytest.raises(ValueError):
        full_spectrum(T, "qr")


def test_eigenvectors_diagonalize(rng):
    T = fourth_moment_operator(SampleSet(rng.standard_normal((100, 4))))
    spec = full_spectrum(T)
    V = spec.eigenvectors
    np.testing.assert_allclose(V.T @ T.matrix @ V, np.diag(spec.eigenvalues), atol=1e-11)


def test_top_eigens_match_full(rng):
    T = fourth_moment_operator(SampleSet(rng.standard_normal((400, 4)) * [3, 2, 1, 0.5]))
    full = full_spectrum(T)
    top = top_eigens(T, 3)
    np.testing.assert_allclose(top.eigenvalues, full.eigenvalues[:3], rtol=1e-8)
    for j in range(3):
        assert abs(top.eigenvectors[:, j] @ full.eigenvectors[:, j]) > 1 - 1e-4
    with pytest.raises(DimensionError):
        top_eigens(T, 0)


def test_top_eigens_sphere_closed_form():
    top = top_eigens(analytic_sphere(20), 2)
    np.testing.assert_allclose(top.eigenvalues, [1 / 20, 2 / (20 * 22)], rtol=1e-8)


def test_top_eigens_all_pairs(rng):
    T = fourth_moment_operator(SampleSet(rng.standard_normal((40, 2)) * [2.0, 1.0]))
    np.testing.assert_allclose(top_eigens(T, 3).eigenvalues, full_spectrum(T).eigenvalues, rtol=1e-8)


def test_top_eigens_d8_against_full():
    s = SampleSet(np.random.default_rng(8).standard_normal((500, 8)))
    T = fourth_moment_operator(s)
    np.testing.assert_allclose(top_eigens(T, 3).eigenvalues, full_spectrum(T).eigenvalues[:3], rtol=1e-8)


def test_top_eigens_iteration_cap():
    # a ratio of 0.999 needs far more than 10 * D = 60 steps
    T = MomentOperator(np.diag([1.0, 0.999, 0.5, 0.4, 0.3, 0.2]), "test")
    with pytest.raises(ConvergenceError):
        top_eigens(T, 1)


def test_top_eigens_rank_deficient():
    # a single atom: rank one operator, second eigenvalue zero
    T = fourth_moment_operator(SampleSet([[1.0, 2.0]]))
    top = top_eigens(T, 2)
    assert top.eigenvalues[0] == pytest.approx(25.0)
    assert top.eigenvalues[1] == pytest.approx(0.0, abs=1e-10)


def test_degenerate_flag():
    assert full_spectrum(ProjectionMixture(6).operator()).degenerate
    assert not full_spectrum(analytic_iid(4, 1.8)).degenerate


def test_rank_one_and_centered(rng):
    s = SampleSet(rng.standard_normal((60, 3)))
    B = second_moment(s)
    T = fourth_moment_operator(s)
    R = rank_one_op(B)
    A = rng.standard_normal((3, 3))
    A = A + A.T
    np.testing.assert_allclose(R.apply(A), np.sum(A * B) * B, atol=1e-12)
    C = centered_operator(T, B)
    # quadratic form of the centered operator is a variance
    f = np.einsum("ni,ij,nj->n", s.points, A, s.points)
    a = vech_iso(A)
    assert a @ C.matrix @ a == pytest.approx(np.var(f), rel=1e-10)
    with pytest.raises(DimensionError):
        centered_operator(T, np.eye(2))


@given(st.integers(0, 10_000), st.integers(2, 5), st.integers(3, 60))
@settings(max_examples=30, deadline=None)
def test_orthogonal_pushforward_invariance(seed, d, n):
    s = random_measure(seed, n, d)
    Q = ortho_group.rvs(d, random_state=seed)
    w1 = full_spectrum(fourth_moment_operator(s)).eigenvalues
    w2 = full_spectrum(fourth_moment_operator(s.transform(Q))).eigenvalues
    np.testing.assert_allclose(w1, w2, atol=1e-9 * w1[0])


def test_spectrum_leading_helper():
    spec = full_spectrum(analytic_iid(3, 3.0))
    assert spec.lambda1 == pytest.approx(5.0)
    assert spec.lambda2 == pytest.approx(2.0)
    np.testing.assert_allclose(spec.leading(2), [5.0, 2.0])
    assert vech_iso_inv(spec.eigenvectors[:, 0]).shape == (3, 3)
