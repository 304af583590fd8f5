import numpy as np
import pytest

from amrp.data_io import ChannelLayout, StimulusProtocol, load_food_db, synthesize_session

FS = 128.0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def layout():
    return ChannelLayout()


@pytest.fixture(scope="session")
def small_protocol():
    return StimulusProtocol(food_count=4)


@pytest.fixture(scope="session")
def small_session(small_protocol, layout):
    return synthesize_session(small_protocol, layout, seed=7)


@pytest.fixture(scope="session")
def food_db():
    return load_food_db()


def sine(freq, n=128, fs=FS, amp=1.0, phase=0.0):
    t = np.arange(n) / fs
    return amp * np.sin(2 * np.pi * freq * t + phase)


def band_energy(x, lo, hi, fs=FS):
    """Energy of ``x`` in [lo, hi) by direct DFT."""
    X = np.fft.rfft(x)
    f = np.fft.rfftfreq(x.size, 1 / fs)
    return float(np.sum(np.abs(X[(f >= lo) & (f < hi)]) ** 2))


def tapered_band_energy(x, lo, hi, fs=FS):
    """Like :func:`band_energy` but Hann-tapered, so the estimator itself leaks little."""
    X = np.fft.rfft(x * np.hanning(x.size))
    f = np.fft.rfftfreq(x.size, 1 / fs)
    return float(np.sum(np.abs(X[(f >= lo) & (f < hi)]) ** 2))


ACCEPTANCE = []


def verdict(name, ok, detail, elapsed=None, limit=None):
    """Record one acceptance line and fail the calling test when it does not hold."""
    if limit is not None:
        ok = ok and elapsed < limit
        detail = f"{detail} [{elapsed:.1f}s, limit {limit}s]"
    line = f"{'PASS' if ok else 'FAIL'} criterion {name}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
