from .assemble import (METHODS, STATS, FeatureConfig, FeatureVector, assemble_features,
                       channel_groups, epoch_features, extract_batch, group_stats)
from .hht import AnalyticSignal, EmdConfig, ImfSet, emd, hilbert_analyze
from .spectral import Spectrogram, psd, stft
from .wavelets import WaveletCoefficients, daubechies, dwt, idwt

__all__ = [
    "METHODS", "STATS", "FeatureConfig", "FeatureVector", "assemble_features",
    "channel_groups", "epoch_features", "extract_batch", "group_stats",
    "AnalyticSignal", "EmdConfig", "ImfSet", "emd", "hilbert_analyze",
    "Spectrogram", "psd", "stft", "WaveletCoefficients", "daubechies", "dwt", "idwt",
]
