"""Periodized Mallat discrete wavelet transform with Daubechies filters."""

from dataclasses import dataclass, replace as _replace
from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import polynomial as P

from ..errors import InconsistentStructureError, TooManyLevelsError


@lru_cache(maxsize=None)
def daubechies(n_moments):
    """Orthonormal Daubechies low-pass filter with ``n_moments`` vanishing moments.

    Built by spectral factorization: the minimum-phase half of the roots of the
    Daubechies polynomial, multiplied by ``(1 + z)^N`` and scaled so the taps
    sum to sqrt(2). Returns ``2 * n_moments`` taps.
    """
    N = int(n_moments)
    if N < 1:
        raise ValueError("need at least one vanishing moment")
    if N == 1:
        return np.array([1.0, 1.0]) / np.sqrt(2.0)
    # P(y) = sum_k C(N-1+k, k) y^k with y = (2 - z - 1/z) / 4, times z^(N-1)
    acc = np.zeros(2 * N - 1)
    for k in range(N):
        term = P.polypow(np.array([-1.0, 2.0, -1.0]) / 4.0, k)
        term = np.concatenate([np.zeros(N - 1 - k), term])
        acc[: len(term)] += comb(N - 1 + k, k) * term
    roots = np.roots(acc[::-1])
    roots = roots[np.abs(roots) < 1]
    h = np.array([1.0])
    for _ in range(N):
        h = np.convolve(h, [1.0, 1.0])
    for r in roots:
        h = np.convolve(h, [1.0, -r])
    h = np.real(h)
    h = h / h.sum() * np.sqrt(2.0)
    h.setflags(write=False)
    return h


def wavelet_filters(name):
    """(lowpass, highpass) analysis filters for ``haar`` or ``dbN``."""
    name = name.lower()
    if name == "haar":
        h = daubechies(1)
    elif name.startswith("db") and name[2:].isdigit():
        h = daubechies(int(name[2:]))
    else:
        raise ValueError(f"unsupported wavelet {name!r}")
    g = h[::-1] * (-1.0) ** np.arange(len(h))
    return h, g


@dataclass(frozen=True)
class WaveletCoefficients:
    """Detail arrays ordered finest first (D1..DL) plus the coarsest approximation."""
    details: tuple
    approximation: np.ndarray
    wavelet: str
    lengths: tuple  # signal length entering each level, finest first

    @property
    def levels(self):
        return len(self.details)

    def replace(self, **kw):
        if "details" in kw:
            kw["details"] = tuple(np.asarray(d, dtype=np.float64) for d in kw["details"])
        return _replace(self, **kw)


def _analysis(x, h, g):
    # x: (..., L) with L even
    L = x.shape[-1]
    idx = (2 * np.arange(L // 2)[:, None] + np.arange(len(h))[None, :]) % L
    frames = x[..., idx]
    return frames @ h, frames @ g


def _synthesis(a, d, h, g):
    half = a.shape[-1]
    L = 2 * half
    out = np.zeros(a.shape[:-1] + (L,))
    base = 2 * np.arange(half)
    for n in range(len(h)):
        # base + n is distinct for fixed n, so fancy-index add has no collisions
        out[..., (base + n) % L] += h[n] * a + g[n] * d
    return out


def max_level(n):
    return int(np.floor(np.log2(n))) if n >= 1 else 0


def dwt(x, wavelet="db4", levels=5):
    """Multi-level periodized DWT along the last axis.

    Odd-length intermediate signals are extended by repeating their last
    sample; the original lengths are kept so :func:`idwt` trims them off.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if levels < 1:
        raise TooManyLevelsError("levels must be >= 1")
    if n < 2 ** levels:
        raise TooManyLevelsError(f"{levels} levels need at least {2 ** levels} samples, got {n}")
    h, g = wavelet_filters(wavelet)
    a = x
    details, lengths = [], []
    for _ in range(levels):
        lengths.append(a.shape[-1])
        if a.shape[-1] % 2:
            a = np.concatenate([a, a[..., -1:]], axis=-1)
        a, d = _analysis(a, h, g)
        details.append(d)
    return WaveletCoefficients(tuple(details), a, wavelet, tuple(lengths))


def idwt(coeffs):
    h, g = wavelet_filters(coeffs.wavelet)
    if len(coeffs.details) != len(coeffs.lengths) or not coeffs.details:
        raise InconsistentStructureError("detail count does not match recorded levels")
    a = np.asarray(coeffs.approximation, dtype=np.float64)
    for d, n in zip(reversed(coeffs.details), reversed(coeffs.lengths)):
        d = np.asarray(d, dtype=np.float64)
        if d.shape != a.shape or a.shape[-1] != (n + 1) // 2:
            raise InconsistentStructureError(
                f"coefficient shapes {a.shape}/{d.shape} inconsistent with length {n}")
        a = _synthesis(a, d, h, g)[..., :n]
    return a
