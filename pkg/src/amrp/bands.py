"""Canonical EEG frequency bands."""

from dataclasses import dataclass

from .errors import InvalidBandEdgesError

BAND_NAMES = ("Delta", "Theta", "Alpha", "Beta", "Gamma")


@dataclass(frozen=True)
class BandSpec:
    name: str
    lo_hz: float
    hi_hz: float

    def __post_init__(self):
        if not 0 <= self.lo_hz < self.hi_hz:
            raise InvalidBandEdgesError(
                f"band {self.name}: need 0 <= lo < hi, got {self.lo_hz}..{self.hi_hz}")

    def check(self, sample_rate):
        if self.hi_hz > sample_rate / 2:
            raise InvalidBandEdgesError(
                f"band {self.name}: upper edge {self.hi_hz} Hz exceeds Nyquist "
                f"({sample_rate / 2} Hz)")
        return self


DEFAULT_BANDS = (
    BandSpec("Delta", 0.3, 4.0),
    BandSpec("Theta", 4.0, 8.0),
    BandSpec("Alpha", 8.0, 12.0),
    BandSpec("Beta", 12.0, 25.0),
    BandSpec("Gamma", 25.0, 45.0),
)


def band_table(spec=None):
    """Build a band table from ``{name: [lo, hi]}``; missing bands keep defaults."""
    if spec is None:
        return DEFAULT_BANDS
    table = []
    for band in DEFAULT_BANDS:
        lo, hi = spec.get(band.name, (band.lo_hz, band.hi_hz))
        table.append(BandSpec(band.name, float(lo), float(hi)))
    unknown = set(spec) - set(BAND_NAMES)
    if unknown:
        raise InvalidBandEdgesError(f"unknown band names: {sorted(unknown)}")
    return tuple(table)
