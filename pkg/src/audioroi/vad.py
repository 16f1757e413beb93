"""Voice activity detection: energy-quartile labels, network scoring
and the gatekeeper decision."""

from dataclasses import dataclass

import numpy as np

from .dsp import log_magnitude_features
from .gru import gru_forward


@dataclass(frozen=True)
class VadConfig:
    threshold: float = 0.3
    smoothing_window: int = 10

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.smoothing_window < 1:
            raise ValueError("smoothing_window must be >= 1")


@dataclass
class VadLabelSequence:
    """Noisy, desensitized and final per-frame labels of equal length."""

    noisy: np.ndarray
    desensitized: np.ndarray
    final: np.ndarray

    def __post_init__(self):
        if not len(self.noisy) == len(self.desensitized) == len(self.final):
            raise ValueError("label sequences must share one length")

    def __len__(self):
        return len(self.final)


def make_vad_labels(energies, config=VadConfig()):
    """Turn per-frame energies into voice-activity labels.

    A frame is marked active when its energy reaches the first quartile
    of all frame energies (Q1 by linear interpolation between order
    statistics). The noisy marks are then averaged over a trailing
    window — shortened at the clip start, so early frames average over
    the frames available — and the mean is binarized at 0.5.
    """
    e = np.asarray(energies, dtype=np.float64)
    if e.ndim != 1 or e.size == 0:
        raise ValueError("energies must be a non-empty 1-D sequence")
    q1 = np.quantile(e, 0.25)
    noisy = (e >= q1).astype(np.uint8)
    w = config.smoothing_window
    csum = np.concatenate(([0.0], np.cumsum(noisy, dtype=np.float64)))
    t = np.arange(e.size)
    lo = np.maximum(t - (w - 1), 0)
    desensitized = (csum[t + 1] - csum[lo]) / (t - lo + 1)
    final = (desensitized >= 0.5).astype(np.uint8)
    return VadLabelSequence(noisy, desensitized, final)


def vad_features(spec, channel=0):
    """Feature sequence for the VAD network: per-frame log magnitudes."""
    return log_magnitude_features(spec, channel)


def vad_scores(net, spec, channel=0, counter=None, stage="vad"):
    """Per-frame voice scores in (0, 1) from a single-output network."""
    if net.output_size != 1:
        raise ValueError("VAD network must have a single output")
    return gru_forward(net, vad_features(spec, channel), counter, stage)[:, 0]


def gate(scores, config=VadConfig()):
    """Per-frame activity decision: active iff score >= threshold."""
    return np.asarray(scores, dtype=np.float64) >= config.threshold
