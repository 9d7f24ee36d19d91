import numpy as np
import pytest

from moment_spectra import SampleSet

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def check(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def random_measure(seed, n, d, weighted=False):
    """Points with a seed-dependent law: Gaussian with random covariance, heavy tails or a sparse cloud."""
    rng = np.random.default_rng(seed)
    kind = seed % 3
    if kind == 0:
        L = rng.standard_normal((d, d))
        X = rng.standard_normal((n, d)) @ L
    elif kind == 1:
        X = rng.standard_t(3, size=(n, d))
    else:
        X = rng.standard_normal((n, d)) * (rng.random((n, d)) < 0.4)
        X[0] = rng.standard_normal(d)
    w = None
    if weighted:
        w = rng.random(n) + 0.05
        w /= w.sum()
    return SampleSet(X, w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
