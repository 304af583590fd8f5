"""Band-pass filtering, wavelet denoising, band decomposition and epoching."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .bands import DEFAULT_BANDS, BandSpec
from .data_io import FRONTAL_CHANNELS, ChannelLayout, EegRecording
from .errors import (
    EpochLongerThanTrialError,
    InvalidBandEdgesError,
    SignalTooShortError,
    UnknownChannelError,
)

log = logging.getLogger(__name__)

DEFAULT_BAND = (0.5, 30.0)
WIDEBAND = (0.3, 45.0)


def _design(lo_hz, hi_hz, order, fs):
    nyq = fs / 2.0
    if not (0 <= lo_hz < hi_hz < nyq):
        raise InvalidBandEdgesError(
            f"need 0 <= lo < hi < {nyq} Hz, got {lo_hz}..{hi_hz}")
    if order < 1:
        raise ValueError("filter order must be >= 1")
    if lo_hz == 0:
        return sps.butter(order, hi_hz, btype="lowpass", fs=fs, output="sos")
    return sps.butter(order, [lo_hz, hi_hz], btype="bandpass", fs=fs, output="sos")


def bandpass_filter(x, lo_hz, hi_hz, order=4, fs=128.0):
    """Zero-phase Butterworth band-pass along the last axis.

    ``order`` is the design order; forward-backward application doubles the
    effective magnitude roll-off and cancels the phase.
    """
    x = np.asarray(x, dtype=np.float64)
    sos = _design(lo_hz, hi_hz, order, fs)
    return _filtfilt(sos, x, order)


def _filtfilt(sos, x, order):
    n = x.shape[-1]
    if n <= 2 * order:
        raise SignalTooShortError(f"signal of {n} samples too short for order {order}")
    # scipy's default pad length, clipped so short epochs still filter
    ntaps = 2 * len(sos) + 1 - min((sos[:, 2] == 0).sum(), (sos[:, 5] == 0).sum())
    return sps.sosfiltfilt(sos, x, axis=-1, padlen=min(3 * ntaps, n - 1))


def frequency_response(lo_hz, hi_hz, order=4, fs=128.0, freqs=(10.0,)):
    """Magnitude of the forward-backward filter (|H|^2) at ``freqs``."""
    sos = _design(lo_hz, hi_hz, order, fs)
    _, h = sps.sosfreqz(sos, worN=np.asarray(freqs, dtype=float), fs=fs)
    return np.abs(h) ** 2


def wavelet_denoise(x, wavelet="db4", levels=4, rule="soft", factor=1.0):
    """Universal-threshold wavelet shrinkage.

    The noise scale is the median absolute deviation of the finest detail
    divided by 0.6745; every detail level is shrunk with
    ``factor * sigma * sqrt(2 ln N)``. The approximation is left untouched.
    """
    from .features.wavelets import dwt, idwt

    x = np.asarray(x, dtype=np.float64)
    if rule not in ("soft", "hard"):
        raise ValueError(f"unknown threshold rule {rule!r}")
    coeffs = dwt(x, wavelet, levels)
    d1 = coeffs.details[0]
    sigma = np.median(np.abs(d1)) / 0.6745
    thr = factor * sigma * np.sqrt(2.0 * np.log(max(x.size, 2)))
    if thr == 0:
        return idwt(coeffs)
    shrunk = []
    for d in coeffs.details:
        if rule == "soft":
            shrunk.append(np.sign(d) * np.maximum(np.abs(d) - thr, 0.0))
        else:
            shrunk.append(np.where(np.abs(d) > thr, d, 0.0))
    return idwt(coeffs.replace(details=shrunk))


def decompose_bands(x, band_table=DEFAULT_BANDS, fs=128.0, order=4):
    """Split ``x`` into one zero-phase filtered component per band."""
    x = np.asarray(x, dtype=np.float64)
    out = {}
    for band in band_table:
        band.check(fs)
        hi = band.hi_hz
        if hi >= fs / 2:
            # an upper edge at Nyquist degenerates to a high-pass
            sos = sps.butter(order, band.lo_hz, btype="highpass", fs=fs, output="sos")
            out[band.name] = _filtfilt(sos, x, order)
        else:
            out[band.name] = bandpass_filter(x, band.lo_hz, hi, order, fs)
    return out


@dataclass(frozen=True)
class Epoch:
    samples: np.ndarray
    sample_rate_hz: float
    trial_index: int
    window_index: int

    @property
    def duration(self):
        return self.samples.shape[-1] / self.sample_rate_hz


def window_epochs(trial, epoch_seconds=1.0, fs=128.0, trial_index=None):
    """Cut a trial (``Trial`` or channel-major array) into consecutive epochs."""
    if hasattr(trial, "samples"):
        data = np.asarray(trial.samples)
        trial_index = trial.food_index if trial_index is None else trial_index
    else:
        data = np.asarray(trial)
    trial_index = 0 if trial_index is None else trial_index
    width = int(round(epoch_seconds * fs))
    n = data.shape[-1]
    if width < 1 or width > n:
        raise EpochLongerThanTrialError(
            f"epoch of {width} samples does not fit in a trial of {n}")
    epochs = []
    for w in range(n // width):
        block = np.array(data[..., w * width:(w + 1) * width], dtype=np.float64)
        block.setflags(write=False)
        epochs.append(Epoch(block, fs, trial_index, w))
    return epochs


def channel_subset(layout, mode):
    if mode == "all":
        return layout.names
    if mode == "frontal":
        wanted = FRONTAL_CHANNELS
        missing = [c for c in wanted if c not in layout.names]
        if missing:
            raise UnknownChannelError(f"frontal channels missing from layout: {missing}")
        # order follows the layout
        return tuple(c for c in layout.names if c in wanted)
    raise ValueError(f"unknown channel mode {mode!r}")


def select_channels(recording, mode="all"):
    names = channel_subset(recording.layout, mode)
    if names == recording.layout.names:
        return recording
    idx = [recording.layout.index(c) for c in names]
    layout = ChannelLayout(names, recording.layout.reference_names, names)
    return EegRecording(layout, recording.sample_rate_hz, recording.samples[idx],
                        recording.protocol)


@dataclass(frozen=True)
class CleaningConfig:
    band: tuple = DEFAULT_BAND
    order: int = 4
    wavelet: str = "db4"
    levels: int = 4
    rule: str = "soft"
    factor: float = 1.0
    denoise: bool = True


def clean_signal(x, fs, cfg=CleaningConfig()):
    """Band-pass then wavelet-denoise a channel-major block."""
    y = bandpass_filter(x, cfg.band[0], cfg.band[1], cfg.order, fs)
    if cfg.denoise:
        y = np.atleast_2d(y)
        y = np.stack([wavelet_denoise(row, cfg.wavelet, cfg.levels, cfg.rule, cfg.factor)
                      for row in y])
        if np.ndim(x) == 1:
            y = y[0]
    return y


def clean_recording(recording, cfg=CleaningConfig()):
    data = clean_signal(recording.samples, recording.sample_rate_hz, cfg)
    return EegRecording(recording.layout, recording.sample_rate_hz, data, recording.protocol)


def parse_band(text):
    """``"lo:hi"`` -> (lo, hi)."""
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise InvalidBandEdgesError(f"band must look like lo:hi, got {text!r}") from None
    BandSpec("band", lo, hi)
    return lo, hi


def parse_denoise(text):
    """``"wavelet:levels:rule"`` -> (wavelet, levels, rule)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"denoise must look like wavelet:levels:rule, got {text!r}")
    return parts[0], int(parts[1]), parts[2]
