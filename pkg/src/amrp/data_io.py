"""
Recording, label and food-database ingestion plus a seeded session generator.

File formats
------------
EEG CSV      header ``t,<ch1>,...,<chN>``; one row per sample instant, values
             in microvolts, '.' decimal separator.
Labels CSV   header ``food,like,excitement,feelings``; binary values.
Food JSON    array of ``{id, name, calories, slots[], nutrients{}}``.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .bands import BAND_NAMES, DEFAULT_BANDS
from .errors import (
    ChannelMismatchError,
    DuplicateFoodIndexError,
    DuplicateIdError,
    EmptySlotsError,
    InvalidProfileError,
    MalformedRowError,
    MissingFileError,
    NonPositiveCaloriesError,
    OutOfRangeLabelError,
    RecordingTooShortError,
)

DEFAULT_CHANNELS = (
    "AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
    "O2", "P8", "T8", "FC6", "F4", "F8", "AF4",
)
REFERENCE_CHANNELS = ("P3", "P4")
FRONTAL_CHANNELS = ("AF3", "AF4", "F3", "F4", "F7", "F8", "FC5", "FC6")

TARGETS = ("like", "excitement", "feelings")
SLOTS = ("breakfast", "lunch", "dinner", "snacks")


@dataclass(frozen=True)
class ChannelLayout:
    names: tuple = DEFAULT_CHANNELS
    reference_names: tuple = REFERENCE_CHANNELS
    frontal_subset: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "reference_names", tuple(self.reference_names))
        if len(set(self.names)) != len(self.names):
            raise ChannelMismatchError(f"duplicate channel names in {self.names}")
        if self.frontal_subset is None:
            frontal = tuple(c for c in FRONTAL_CHANNELS if c in self.names)
        else:
            frontal = tuple(self.frontal_subset)
            missing = [c for c in frontal if c not in self.names]
            if missing:
                raise ChannelMismatchError(f"frontal channels {missing} not in layout")
        object.__setattr__(self, "frontal_subset", frontal)

    def index(self, name):
        return self.names.index(name)


@dataclass(frozen=True)
class StimulusProtocol:
    food_count: int = 40
    stimulus_seconds: float = 10.0
    calm_seconds: float = 17.0
    sample_rate_hz: float = 128.0

    def __post_init__(self):
        if self.food_count <= 0:
            raise ValueError("food_count must be positive")
        if min(self.stimulus_seconds, self.calm_seconds, self.sample_rate_hz) <= 0:
            raise ValueError("durations and sample rate must be positive")
        for name in ("stimulus_seconds", "calm_seconds"):
            n = getattr(self, name) * self.sample_rate_hz
            if not math.isclose(n, round(n), abs_tol=1e-9):
                raise ValueError(f"{name} does not span a whole number of samples")

    @property
    def stimulus_samples(self):
        return int(round(self.stimulus_seconds * self.sample_rate_hz))

    @property
    def calm_samples(self):
        return int(round(self.calm_seconds * self.sample_rate_hz))

    @property
    def stride(self):
        return self.stimulus_samples + self.calm_samples

    @property
    def session_samples(self):
        """Full session length, trailing calm block included."""
        return self.food_count * self.stride

    @property
    def minimum_samples(self):
        """Shortest recording that still contains every stimulus window."""
        return (self.food_count - 1) * self.stride + self.stimulus_samples

    def trial_bounds(self):
        return [(k * self.stride, k * self.stride + self.stimulus_samples)
                for k in range(self.food_count)]


@dataclass(frozen=True)
class EegRecording:
    layout: ChannelLayout
    sample_rate_hz: float
    samples: np.ndarray
    protocol: Optional[StimulusProtocol] = None

    def __post_init__(self):
        data = np.array(self.samples, dtype=np.float64, copy=True)
        if data.ndim != 2 or data.shape[0] != len(self.layout.names):
            raise ChannelMismatchError(
                f"samples shape {data.shape} does not match "
                f"{len(self.layout.names)} channels")
        if not np.all(np.isfinite(data)):
            raise ValueError("recording contains non-finite samples")
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)

    @property
    def n_samples(self):
        return self.samples.shape[1]

    def channel(self, name):
        return self.samples[self.layout.index(name)]

    def equals(self, other):
        return (self.layout.names == other.layout.names
                and self.sample_rate_hz == other.sample_rate_hz
                and np.array_equal(self.samples, other.samples))


@dataclass(frozen=True)
class SurveyLabels:
    foods: tuple
    like: np.ndarray
    excitement: np.ndarray
    feelings: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "foods", tuple(int(f) for f in self.foods))
        if len(set(self.foods)) != len(self.foods):
            raise DuplicateFoodIndexError("duplicate food index in labels")
        for name in TARGETS:
            arr = np.asarray(getattr(self, name), dtype=np.int64).copy()
            if arr.shape != (len(self.foods),):
                raise ValueError(f"{name} labels must have one entry per food")
            if np.any((arr != 0) & (arr != 1)):
                raise OutOfRangeLabelError(f"{name} labels must be 0 or 1")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def target(self, name):
        return getattr(self, name)

    def triple(self, food):
        i = self.foods.index(food)
        return int(self.like[i]), int(self.excitement[i]), int(self.feelings[i])


@dataclass(frozen=True)
class FoodItem:
    id: str
    name: str
    calories: float
    allowed_slots: tuple
    nutrients: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.calories > 0:
            raise NonPositiveCaloriesError(f"food {self.id!r}: calories must be > 0")
        slots = tuple(s for s in SLOTS if s in set(self.allowed_slots))
        unknown = set(self.allowed_slots) - set(SLOTS)
        if unknown:
            raise ValueError(f"food {self.id!r}: unknown slots {sorted(unknown)}")
        if not slots:
            raise EmptySlotsError(f"food {self.id!r}: no allowed meal slot")
        object.__setattr__(self, "allowed_slots", slots)


@dataclass(frozen=True)
class Trial:
    food_index: int
    samples: np.ndarray


# --------------------------------------------------------------------------
# recordings

def _fmt(x):
    return repr(float(x))


def write_recording(path, recording):
    """Write ``recording`` so that :func:`load_recording` restores it bit for bit."""
    path = Path(path)
    fs = recording.sample_rate_hz
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("t," + ",".join(recording.layout.names) + "\n")
        columns = recording.samples.T.tolist()
        for i, row in enumerate(columns):
            fh.write(_fmt(i / fs) + "," + ",".join(map(repr, row)) + "\n")
    return path


def load_recording(path, layout=None, sample_rate=128.0, column_map=None, protocol=None):
    """Read an EEG CSV into an :class:`EegRecording`.

    ``column_map`` renames header columns to layout channel names. Columns are
    reordered to the layout order; extra or missing channels raise
    :class:`ChannelMismatchError`.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"recording not found: {path}")
    layout = layout or ChannelLayout()
    column_map = dict(column_map or {})

    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRowError(0, "empty file") from None
        if not header or header[0] != "t":
            raise MalformedRowError(0, "header must start with 't'")
        channels = [column_map.get(h, h) for h in header[1:]]
        if sorted(channels) != sorted(layout.names):
            raise ChannelMismatchError(
                f"header channels {channels} do not match layout {list(layout.names)}")
        order = [channels.index(name) + 1 for name in layout.names]
        width = len(header)
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != width:
                raise MalformedRowError(lineno, f"expected {width} columns, got {len(row)}")
            try:
                values = [float(row[j]) for j in order]
            except ValueError:
                bad = next(c for c in row if not _is_number(c))
                raise MalformedRowError(lineno, f"non-numeric cell {bad!r}") from None
            if not all(math.isfinite(v) for v in values):
                raise MalformedRowError(lineno, "non-finite value")
            rows.append(values)

    samples = np.array(rows, dtype=np.float64).reshape(len(rows), len(layout.names)).T
    return EegRecording(layout, float(sample_rate), samples, protocol)


def _is_number(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


# --------------------------------------------------------------------------
# labels

def write_labels(path, labels):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("food," + ",".join(TARGETS) + "\n")
        for i, food in enumerate(labels.foods):
            fh.write(f"{food},{labels.like[i]},{labels.excitement[i]},{labels.feelings[i]}\n")
    return path


def load_labels(path):
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"labels not found: {path}")
    foods, values = [], []
    seen = set()
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if header != ["food", *TARGETS]:
            raise MalformedRowError(0, f"labels header must be food,{','.join(TARGETS)}")
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRowError(lineno, f"expected 4 columns, got {len(row)}")
            try:
                food = int(row[0])
                triple = [float(c) for c in row[1:]]
            except ValueError:
                raise MalformedRowError(lineno, "non-numeric cell") from None
            if any(v not in (0.0, 1.0) for v in triple):
                raise OutOfRangeLabelError(f"row {lineno}: labels must be 0 or 1, got {row[1:]}")
            if food in seen:
                raise DuplicateFoodIndexError(f"row {lineno}: food {food} listed twice")
            seen.add(food)
            foods.append(food)
            values.append([int(v) for v in triple])
    arr = np.array(values, dtype=np.int64).reshape(len(values), 3)
    return SurveyLabels(tuple(foods), arr[:, 0], arr[:, 1], arr[:, 2])


# --------------------------------------------------------------------------
# food database

def parse_food_db(entries):
    if not isinstance(entries, list):
        raise ValueError("food database must be a JSON array")
    foods, ids = [], set()
    for entry in entries:
        fid = str(entry["id"])
        if fid in ids:
            raise DuplicateIdError(f"duplicate food id {fid!r}")
        ids.add(fid)
        foods.append(FoodItem(
            id=fid,
            name=str(entry["name"]),
            calories=float(entry["calories"]),
            allowed_slots=tuple(entry.get("slots", ())),
            nutrients={k: float(v) for k, v in (entry.get("nutrients") or {}).items()},
        ))
    return tuple(foods)


def load_food_db(path=None):
    """Load a food database; ``None`` loads the bundled 40-item sample database."""
    if path is None:
        text = resources.files("amrp").joinpath("data/foods.json").read_text(encoding="utf-8")
    else:
        path = Path(path)
        if not path.is_file():
            raise MissingFileError(f"food database not found: {path}")
        text = path.read_text(encoding="utf-8")
    return parse_food_db(json.loads(text))


def food_to_dict(food):
    return {
        "id": food.id,
        "name": food.name,
        "calories": food.calories,
        "slots": list(food.allowed_slots),
        "nutrients": dict(food.nutrients),
    }


# --------------------------------------------------------------------------
# synthetic sessions

@dataclass(frozen=True)
class ClassProfile:
    """Label-conditioned band gains for the session generator.

    ``gains`` maps a target to ``{band: power multiplier}`` applied inside the
    stimulus windows of foods labelled 1 for that target.
    """
    gains: Mapping[str, Mapping[str, float]]
    baseline_uv: Mapping[str, float] = field(default_factory=lambda: {
        "Delta": 12.0, "Theta": 8.0, "Alpha": 6.0, "Beta": 4.0, "Gamma": 2.0})
    noise_uv: float = 0.5
    channel_spread: float = 0.15

    def __post_init__(self):
        if not self.gains or not any(self.gains.values()):
            raise InvalidProfileError("class profile has no band gains")
        for target, bands in self.gains.items():
            if target not in TARGETS:
                raise InvalidProfileError(f"unknown target {target!r}")
            if not bands:
                raise InvalidProfileError(f"target {target!r} has empty band gains")
            for band, mult in bands.items():
                if band not in BAND_NAMES:
                    raise InvalidProfileError(f"unknown band {band!r}")
                if not mult > 0:
                    raise InvalidProfileError(f"gain for {target}/{band} must be > 0")


# Like drives alpha; the other two targets use separate bands so that the
# three labels do not alias onto one spectral feature.
ALPHA_PROFILE = ClassProfile(gains={
    "like": {"Alpha": 4.0},
    "excitement": {"Beta": 4.0},
    "feelings": {"Theta": 4.0},
})

PROFILES = {"alpha": ALPHA_PROFILE}


def _band_noise(rng, n_channels, n_samples, lo, hi, fs):
    white = rng.standard_normal((n_channels, n_samples))
    spec = np.fft.rfft(white, axis=1)
    freqs = np.fft.rfftfreq(n_samples, 1.0 / fs)
    spec[:, (freqs < lo) | (freqs >= hi)] = 0.0
    out = np.fft.irfft(spec, n=n_samples, axis=1)
    rms = np.sqrt(np.mean(out ** 2, axis=1, keepdims=True))
    return out / np.where(rms > 0, rms, 1.0)


def synthesize_session(protocol=None, layout=None, class_profile=ALPHA_PROFILE, seed=0):
    """Generate a reproducible session and its survey labels.

    Each channel is a sum of band-limited Gaussian noise components, one per
    canonical band. During the stimulus window of a food labelled 1 for a
    target, the profile's band for that target is scaled by the square root of
    its power multiplier.
    """
    protocol = protocol or StimulusProtocol()
    layout = layout or ChannelLayout()
    rng = np.random.default_rng(seed)
    n_ch = len(layout.names)
    n = protocol.session_samples
    fs = protocol.sample_rate_hz
    m = protocol.food_count

    labels = {}
    for target in TARGETS:
        base = np.zeros(m, dtype=np.int64)
        base[: m // 2] = 1
        labels[target] = rng.permutation(base)

    bounds = protocol.trial_bounds()
    data = np.zeros((n_ch, n))
    for band in DEFAULT_BANDS:
        hi = min(band.hi_hz, fs / 2)
        component = _band_noise(rng, n_ch, n, band.lo_hz, hi, fs)
        spread = rng.lognormal(0.0, class_profile.channel_spread, size=(n_ch, 1))
        component *= class_profile.baseline_uv[band.name] * spread
        envelope = np.ones(n)
        for target, band_gains in class_profile.gains.items():
            mult = band_gains.get(band.name)
            if mult is None:
                continue
            for food, (start, stop) in enumerate(bounds):
                if labels[target][food] == 1:
                    envelope[start:stop] *= math.sqrt(mult)
        data += component * envelope
    data += class_profile.noise_uv * rng.standard_normal((n_ch, n))

    recording = EegRecording(layout, float(fs), data, protocol)
    survey = SurveyLabels(tuple(range(m)), labels["like"], labels["excitement"],
                          labels["feelings"])
    return recording, survey


# --------------------------------------------------------------------------
# segmentation

def segment_trials(recording, protocol=None) -> Sequence[Trial]:
    """Cut the stimulus window of every food out of ``recording``."""
    protocol = protocol or recording.protocol or StimulusProtocol(
        sample_rate_hz=recording.sample_rate_hz)
    if recording.n_samples < protocol.minimum_samples:
        raise RecordingTooShortError(
            f"recording has {recording.n_samples} samples, protocol needs "
            f"{protocol.minimum_samples}")
    trials = []
    for food, (start, stop) in enumerate(protocol.trial_bounds()):
        block = recording.samples[:, start:stop].copy()
        block.setflags(write=False)
        trials.append(Trial(food, block))
    return trials
