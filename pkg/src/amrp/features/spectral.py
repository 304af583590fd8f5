"""Short-time Fourier transform and periodogram."""

from dataclasses import dataclass

import numpy as np

from ..errors import WindowTooLongError


def window(name, n):
    """Periodic analysis window of length ``n``."""
    k = np.arange(n)
    if name == "hann":
        return 0.5 - 0.5 * np.cos(2 * np.pi * k / n)
    if name == "hamming":
        return 0.54 - 0.46 * np.cos(2 * np.pi * k / n)
    if name in ("rect", "boxcar", None):
        return np.ones(n)
    raise ValueError(f"unknown window {name!r}")


@dataclass(frozen=True)
class Spectrogram:
    magnitude: np.ndarray  # (..., frames, bins)
    window_len: int
    hop: int
    freqs: np.ndarray
    times: np.ndarray
    window_fn: str = "hann"

    def power(self):
        return self.magnitude ** 2


def frame_signal(x, window_len, hop):
    n = x.shape[-1]
    n_frames = 1 + (n - window_len) // hop
    idx = hop * np.arange(n_frames)[:, None] + np.arange(window_len)[None, :]
    return x[..., idx]


def stft(x, window_len=64, hop=32, window_fn="hann", fs=128.0):
    """Magnitude STFT along the last axis.

    Frame ``m`` covers samples ``[m*hop, m*hop + window_len)``; no padding is
    applied so every frame lies inside the signal. Times are frame centres.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if hop < 1:
        raise ValueError("hop must be >= 1")
    if window_len < 1 or window_len > n:
        raise WindowTooLongError(f"window of {window_len} exceeds signal length {n}")
    w = window(window_fn, window_len)
    frames = frame_signal(x, window_len, hop) * w
    mag = np.abs(np.fft.rfft(frames, axis=-1))
    freqs = np.fft.rfftfreq(window_len, 1.0 / fs)
    times = (hop * np.arange(mag.shape[-2]) + window_len / 2) / fs
    return Spectrogram(mag, window_len, hop, freqs, times, window_fn)


def psd(x, fs=128.0):
    """One-sided periodogram of the demeaned signal.

    Scaled so that ``sum(P) * df`` equals the population variance of ``x``.
    Returns ``(freqs, P)``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if n == 0:
        raise ValueError("empty signal")
    xc = x - x.mean(axis=-1, keepdims=True)
    X = np.fft.rfft(xc, axis=-1)
    p = np.abs(X) ** 2 / (fs * n)
    if n % 2 == 0:
        p[..., 1:-1] *= 2
    else:
        p[..., 1:] *= 2
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    return freqs, p
