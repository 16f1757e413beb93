"""Time-frequency masks: phase-sensitive oracle masks, binarization,
mask application and network-based estimation."""

import numpy as np

from .dsp import Spectrogram, log_magnitude_features
from .gru import gru_forward

# Modeled cost per bin of the phase-sensitive mask formula
# (complex product, two magnitudes, division, clamp).
SOFT_MASK_FLOPS_PER_BIN = 14
APPLY_MASK_FLOPS_PER_BIN = 2
BINARIZE_FLOPS_PER_BIN = 1


class TFMask:
    """Mask values in [0, 1] shaped (frames, bins); `binary` marks masks
    whose values are exactly 0 or 1."""

    def __init__(self, values, binary=False):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("mask values must be shaped (frames, bins)")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("mask values must lie in [0, 1]")
        self.values = values
        self.binary = bool(binary)

    @property
    def num_frames(self):
        return self.values.shape[0]

    @property
    def num_bins(self):
        return self.values.shape[1]

    def __repr__(self):
        return f"TFMask(frames={self.num_frames}, bins={self.num_bins}, binary={self.binary})"


def phase_sensitive_values(target_bins, mixture_bins):
    """Phase-sensitive mask values for complex bin arrays of equal shape.

    Each value is the target/mixture power ratio times the cosine of
    their phase difference, clamped to [0, 1]; bins with zero mixture
    magnitude yield 0.
    """
    target = np.asarray(target_bins)
    mixture = np.asarray(mixture_bins)
    if target.shape != mixture.shape:
        raise ValueError("target and mixture shapes differ")
    mag_x = np.abs(mixture)
    # |S|^2/|X|^2 * cos(angle(S) - angle(X))  ==  |S| Re(S X*) / |X|^3
    num = np.abs(target) * np.real(target * np.conj(mixture))
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(mag_x > 0.0, num / (mag_x ** 3), 0.0)
    return np.clip(values, 0.0, 1.0)


def oracle_soft_mask(clean, noisy, channel=0, counter=None, stage="mask"):
    """Phase-sensitive mask computed from a clean/noisy spectrogram pair."""
    if clean.bins.shape[1:] != noisy.bins.shape[1:] or clean.config != noisy.config:
        raise ValueError("clean and noisy spectrograms must share shape and config")
    values = phase_sensitive_values(clean.bins[channel], noisy.bins[channel])
    if counter is not None:
        counter.add(stage, values.size * SOFT_MASK_FLOPS_PER_BIN)
    return TFMask(values, binary=False)


def binarize_mask(soft, threshold, counter=None, stage="mask"):
    """Threshold a soft mask: 1 where value >= threshold, else 0."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    values = (soft.values >= threshold).astype(np.float64)
    if counter is not None:
        counter.add(stage, values.size * BINARIZE_FLOPS_PER_BIN)
    return TFMask(values, binary=True)


def apply_mask(spec, mask, channel=None, counter=None, stage="mask"):
    """Scale spectrogram bins by the mask.

    The mask is shared across channels when `channel` is None; otherwise
    only the given channel is scaled and the rest pass through.
    """
    if mask.values.shape != spec.bins.shape[1:]:
        raise ValueError("mask shape does not match the spectrogram")
    if channel is None:
        bins = spec.bins * mask.values[np.newaxis, :, :]
        scaled = spec.channels * mask.values.size
    else:
        if not 0 <= channel < spec.channels:
            raise IndexError(f"channel {channel} out of range")
        bins = spec.bins.copy()
        bins[channel] = bins[channel] * mask.values
        scaled = mask.values.size
    if counter is not None:
        counter.add(stage, scaled * APPLY_MASK_FLOPS_PER_BIN)
    return Spectrogram(bins, spec.config, spec.sample_rate)


def estimate_soft_mask(net, noisy, channel=0, counter=None, stage="mask"):
    """Soft mask from a network whose output size equals the bin count."""
    if net.output_size != noisy.num_bins:
        raise ValueError(f"network output size {net.output_size} does not match "
                         f"{noisy.num_bins} frequency bins")
    scores = gru_forward(net, log_magnitude_features(noisy, channel), counter, stage)
    return TFMask(scores, binary=False)


def estimate_mask(net, noisy, channel=0, threshold=0.7, counter=None, stage="mask"):
    """Network mask estimation followed by binarization."""
    soft = estimate_soft_mask(net, noisy, channel, counter, stage)
    return binarize_mask(soft, threshold, counter, stage)
