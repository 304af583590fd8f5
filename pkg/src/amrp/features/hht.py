"""Empirical mode decomposition and Hilbert spectral analysis.

:func:`emd` is vectorized over leading axes: every row of a 2-D batch is
sifted independently, with per-row extrema padded into rectangular arrays so
the spline fits run as a single batched tridiagonal solve.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EmdConfig:
    max_imfs: int = 8
    sift_sd_threshold: float = 0.25
    max_sift_iters: int = 10


@dataclass(frozen=True)
class ImfSet:
    imfs: np.ndarray  # (..., n_imfs, N); rows past a signal's own count are zero
    residue: np.ndarray  # (..., N)
    counts: np.ndarray  # number of IMFs actually extracted per signal

    def __len__(self):
        return self.imfs.shape[-2]

    def reconstruct(self):
        return self.imfs.sum(axis=-2) + self.residue


def _extrema_masks(x):
    mx = np.zeros(x.shape, dtype=bool)
    mn = np.zeros(x.shape, dtype=bool)
    c, l, r = x[:, 1:-1], x[:, :-2], x[:, 2:]
    mx[:, 1:-1] = (c > l) & (c >= r)
    mn[:, 1:-1] = (c < l) & (c <= r)
    return mx, mn


def _zero_crossings(x):
    s = np.signbit(x)
    return (s[:, 1:] != s[:, :-1]).sum(axis=1)


def _knots(x, mask):
    """Mirror-extended knot positions/values, padded to a common width."""
    B, N = x.shape
    counts = mask.sum(axis=1)
    K = counts + 4
    width = int(K.max())
    far = 4.0 * N
    pos = far + np.arange(width, dtype=np.float64)[None, :].repeat(B, axis=0)
    val = np.zeros((B, width))

    rows, cols = np.nonzero(mask)
    start = np.concatenate([[0], np.cumsum(counts)[:-1]])
    rank = np.arange(rows.size) - start[rows]
    pos[rows, rank + 2] = cols
    val[rows, rank + 2] = x[rows, cols]

    ar = np.arange(B)
    first = pos[:, 2].copy(), val[:, 2].copy()
    second = pos[:, 3].copy(), val[:, 3].copy()
    last_i = counts + 1
    last = pos[ar, last_i].copy(), val[ar, last_i].copy()
    prev = pos[ar, last_i - 1].copy(), val[ar, last_i - 1].copy()
    pos[:, 0], val[:, 0] = -second[0], second[1]
    pos[:, 1], val[:, 1] = -first[0], first[1]
    pos[ar, last_i + 1], val[ar, last_i + 1] = 2.0 * (N - 1) - last[0], last[1]
    pos[ar, last_i + 2], val[ar, last_i + 2] = 2.0 * (N - 1) - prev[0], prev[1]
    return pos, val, K


def _natural_spline(pos, val, K, N):
    """Evaluate per-row natural cubic splines through (pos, val) at 0..N-1."""
    B, W = pos.shape
    idx = np.arange(W)[None, :]
    h = np.diff(pos, axis=1)
    valid_iv = idx[:, :-1] < (K - 1)[:, None]
    h = np.where(valid_iv, h, 1.0)
    slope = np.diff(val, axis=1) / h

    interior = (idx >= 1) & (idx < (K - 1)[:, None])
    a = np.zeros((B, W))
    b = np.ones((B, W))
    c = np.zeros((B, W))
    d = np.zeros((B, W))
    a[:, 1:-1] = h[:, :-1]
    b[:, 1:-1] = 2.0 * (h[:, :-1] + h[:, 1:])
    c[:, 1:-1] = h[:, 1:]
    d[:, 1:-1] = 6.0 * (slope[:, 1:] - slope[:, :-1])
    a = np.where(interior, a, 0.0)
    b = np.where(interior, b, 1.0)
    c = np.where(interior, c, 0.0)
    d = np.where(interior, d, 0.0)

    # Thomas algorithm, batched over rows
    cp = np.zeros((B, W))
    dp = np.zeros((B, W))
    cp[:, 0] = c[:, 0] / b[:, 0]
    dp[:, 0] = d[:, 0] / b[:, 0]
    for i in range(1, W):
        den = b[:, i] - a[:, i] * cp[:, i - 1]
        cp[:, i] = c[:, i] / den
        dp[:, i] = (d[:, i] - a[:, i] * dp[:, i - 1]) / den
    M = np.zeros((B, W))
    M[:, -1] = dp[:, -1]
    for i in range(W - 2, -1, -1):
        M[:, i] = dp[:, i] - cp[:, i] * M[:, i + 1]

    # interval lookup through one flat searchsorted on row-offset knots
    span = 8.0 * N + W
    offs = span * np.arange(B, dtype=np.float64)[:, None]
    t = np.arange(N, dtype=np.float64)[None, :]
    flat = (pos + offs).ravel()
    q = (t + offs).ravel()
    j = np.searchsorted(flat, q, side="right").reshape(B, N) - 1 - np.arange(B)[:, None] * W
    j = np.clip(j, 0, (K - 2)[:, None])

    r = np.arange(B)[:, None]
    x0, x1 = pos[r, j], pos[r, j + 1]
    y0, y1 = val[r, j], val[r, j + 1]
    m0, m1 = M[r, j], M[r, j + 1]
    hh = x1 - x0
    u, v = x1 - t, t - x0
    return (m0 * u ** 3 + m1 * v ** 3) / (6.0 * hh) \
        + (y0 / hh - m0 * hh / 6.0) * u + (y1 / hh - m1 * hh / 6.0) * v


def _mean_envelope(x):
    N = x.shape[1]
    mx, mn = _extrema_masks(x)
    upper = _natural_spline(*_knots(x, mx), N)
    lower = _natural_spline(*_knots(x, mn), N)
    return 0.5 * (upper + lower), mx.sum(1), mn.sum(1)


def _siftable(x):
    mx, mn = _extrema_masks(x)
    return (mx.sum(1) >= 2) & (mn.sum(1) >= 2)


def emd(x, config=EmdConfig()):
    """Decompose ``x`` (any leading shape, samples last) into IMFs.

    A signal is sifted only while it has at least two maxima and two minima.
    Sifting of one IMF stops when ``sum(m^2) / sum(h^2)`` drops below the SD
    threshold and extrema and zero-crossing counts differ by at most one, or
    after ``max_sift_iters`` passes. The residue is ``x`` minus the IMFs, so
    the decomposition is complete up to rounding.
    """
    x = np.asarray(x, dtype=np.float64)
    lead, N = x.shape[:-1], x.shape[-1]
    flat = x.reshape(-1, N)
    B = flat.shape[0]
    imfs = np.zeros((B, config.max_imfs, N))
    counts = np.zeros(B, dtype=np.int64)
    residue = flat.copy()

    if N >= 3:
        for k in range(config.max_imfs):
            rows = np.flatnonzero(_siftable(residue))
            if rows.size == 0:
                break
            h = residue[rows].copy()
            live = np.ones(rows.size, dtype=bool)
            for _ in range(config.max_sift_iters):
                sub = np.flatnonzero(live)
                if sub.size == 0:
                    break
                hs = h[sub]
                ok = _siftable(hs)
                # rows that lost their extrema keep their current h
                live[sub[~ok]] = False
                sub, hs = sub[ok], hs[ok]
                if sub.size == 0:
                    break
                m, nmax, nmin = _mean_envelope(hs)
                hn = hs - m
                energy = np.sum(hs ** 2, axis=1)
                sd = np.sum(m ** 2, axis=1) / np.where(energy > 0, energy, 1.0)
                h[sub] = hn
                mx2, mn2 = _extrema_masks(hn)
                n_ext = mx2.sum(1) + mn2.sum(1)
                balanced = np.abs(n_ext - _zero_crossings(hn)) <= 1
                live[sub[(sd < config.sift_sd_threshold) & balanced]] = False
            imfs[rows, k] = h
            counts[rows] += 1
            residue[rows] = residue[rows] - h

    residue = flat - imfs.sum(axis=1)
    return ImfSet(imfs.reshape(lead + (config.max_imfs, N)),
                  residue.reshape(lead + (N,)), counts.reshape(lead))


@dataclass(frozen=True)
class AnalyticSignal:
    real: np.ndarray
    imag: np.ndarray
    amplitude: np.ndarray
    frequency: np.ndarray  # Hz


def analytic(x):
    """x + iH[x] via a one-sided spectrum along the last axis."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    X = np.fft.fft(x, axis=-1)
    u = np.zeros(n)
    u[0] = 1.0
    if n % 2 == 0:
        u[n // 2] = 1.0
        u[1:n // 2] = 2.0
    else:
        u[1:(n + 1) // 2] = 2.0
    return np.fft.ifft(X * u, axis=-1)


def hilbert_analyze(x, fs=128.0):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] == 0:
        raise ValueError("empty signal")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal must be finite")
    z = analytic(x)
    amp = np.abs(z)
    if x.shape[-1] > 1:
        phase = np.unwrap(np.angle(z), axis=-1)
        freq = np.gradient(phase, axis=-1) * fs / (2.0 * np.pi)
    else:
        freq = np.zeros_like(x)
    return AnalyticSignal(x, z.imag, amp, freq)
