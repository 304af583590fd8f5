"""Fixed-length feature vectors per extraction method.

Every method reduces a channel to a list of non-negative magnitude groups:

STFT  |X(m, f)| over all frames for the bins of each canonical band
DWT   |d| of each detail level D1..DL
HHT   Hilbert amplitude of each of the first K IMFs (zeros if absent)

Each group is summarized by the same statistics, laid out channel-major,
then group, then statistic.
"""

from dataclasses import dataclass, field

import numpy as np

from ..bands import DEFAULT_BANDS
from ..errors import MissingChannelError, NonFiniteFeatureError
from .hht import EmdConfig, analytic, emd
from .spectral import stft
from .wavelets import dwt

METHODS = ("STFT", "DWT", "HHT")
STATS = ("mean_power", "std", "energy", "peak")


@dataclass(frozen=True)
class FeatureConfig:
    fs: float = 128.0
    window_len: int = 64
    hop: int = 32
    window_fn: str = "hann"
    wavelet: str = "db4"
    dwt_levels: int = 5
    n_imfs: int = 4
    emd: EmdConfig = field(default_factory=EmdConfig)
    bands: tuple = DEFAULT_BANDS

    def group_names(self, method):
        if method == "STFT":
            return tuple(b.name for b in self.bands)
        if method == "DWT":
            return tuple(f"D{i + 1}" for i in range(self.dwt_levels))
        if method == "HHT":
            return tuple(f"IMF{i + 1}" for i in range(self.n_imfs))
        raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class FeatureVector:
    method: str
    values: np.ndarray
    channels: tuple
    groups: tuple
    stats: tuple = STATS

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (len(self.channels) * len(self.groups) * len(self.stats),):
            raise ValueError("feature length does not match its descriptor")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return len(self.channels), len(self.groups), len(self.stats)

    def labels(self):
        return [f"{c}/{g}/{s}" for c in self.channels for g in self.groups for s in self.stats]


def group_stats(m):
    """(mean power, std, energy, peak) along the last axis of ``m``."""
    m = np.asarray(m, dtype=np.float64)
    sq = m * m
    return np.stack([sq.mean(axis=-1), m.std(axis=-1), sq.sum(axis=-1), m.max(axis=-1)],
                    axis=-1)


def channel_groups(x, method, cfg=FeatureConfig()):
    """Magnitude groups for signals ``x`` of shape (..., N)."""
    x = np.asarray(x, dtype=np.float64)
    if method == "STFT":
        spec = stft(x, cfg.window_len, cfg.hop, cfg.window_fn, cfg.fs)
        out = []
        for band in cfg.bands:
            sel = (spec.freqs >= band.lo_hz) & (spec.freqs < band.hi_hz)
            if not sel.any():
                raise ValueError(f"band {band.name} contains no STFT bin")
            block = spec.magnitude[..., sel]
            out.append(block.reshape(block.shape[:-2] + (-1,)))
        return out
    if method == "DWT":
        coeffs = dwt(x, cfg.wavelet, cfg.dwt_levels)
        return [np.abs(d) for d in coeffs.details]
    if method == "HHT":
        cfg_emd = EmdConfig(max(cfg.n_imfs, 1), cfg.emd.sift_sd_threshold,
                            cfg.emd.max_sift_iters)
        imfs = emd(x, cfg_emd).imfs[..., : cfg.n_imfs, :]
        amp = np.abs(analytic(imfs))
        return [amp[..., k, :] for k in range(cfg.n_imfs)]
    raise ValueError(f"unknown method {method!r}")


def assemble_features(transforms, method, channels=None, stats=STATS, cfg=FeatureConfig()):
    """Build a :class:`FeatureVector` from per-channel magnitude groups.

    ``transforms`` maps channel name to the list returned by
    :func:`channel_groups` for that channel. ``channels`` fixes the order and
    defaults to the mapping's order.
    """
    if tuple(stats) != STATS:
        raise ValueError(f"unsupported statistics {stats}; expected {STATS}")
    channels = tuple(channels) if channels is not None else tuple(transforms)
    missing = [c for c in channels if c not in transforms]
    if missing:
        raise MissingChannelError(f"no transform for channels {missing}")
    groups = cfg.group_names(method)
    rows = []
    for ch in channels:
        parts = transforms[ch]
        if len(parts) != len(groups):
            raise ValueError(f"channel {ch}: expected {len(groups)} groups, got {len(parts)}")
        rows.append(np.stack([group_stats(p) for p in parts]))
    values = np.stack(rows).ravel() if rows else np.zeros(0)
    if not np.all(np.isfinite(values)):
        raise NonFiniteFeatureError(f"{method} features contain non-finite values")
    return FeatureVector(method, values, channels, groups, tuple(stats))


def epoch_features(epoch, channels, method, cfg=FeatureConfig()):
    """Feature vector for one channel-major epoch."""
    epoch = np.asarray(epoch, dtype=np.float64)
    groups = channel_groups(epoch, method, cfg)
    transforms = {ch: [g[i] for g in groups] for i, ch in enumerate(channels)}
    return assemble_features(transforms, method, channels, cfg=cfg)


def extract_batch(epochs, method, cfg=FeatureConfig(), chunk=512):
    """Feature matrix (E, C*G*S) for an (E, C, N) stack of epochs."""
    epochs = np.asarray(epochs, dtype=np.float64)
    E, C, _ = epochs.shape
    G = len(cfg.group_names(method))
    out = np.empty((E, C * G * len(STATS)))
    for s in range(0, E, chunk):
        block = epochs[s:s + chunk]
        groups = channel_groups(block, method, cfg)
        st = np.stack([group_stats(g) for g in groups], axis=2)  # (e, C, G, S)
        out[s:s + chunk] = st.reshape(st.shape[0], -1)
    if not np.all(np.isfinite(out)):
        raise NonFiniteFeatureError(f"{method} features contain non-finite values")
    return out
