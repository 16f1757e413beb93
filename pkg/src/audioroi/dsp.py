"""Multichannel audio frames, windowed STFT/ISTFT and frame energies."""

from dataclasses import dataclass

import numpy as np

from .counters import OpCounter, fft_flops

DEFAULT_SAMPLE_RATE = 16000


@dataclass(frozen=True)
class StftConfig:
    """Analysis parameters: frame/hop in samples and the window type."""

    frame_size: int = 512
    hop_size: int = 256
    window: str = "hann"

    def __post_init__(self):
        if self.frame_size <= 0 or self.frame_size % 2 != 0:
            raise ValueError("frame_size must be positive and even")
        if not 0 < self.hop_size <= self.frame_size:
            raise ValueError("hop_size must satisfy 0 < hop_size <= frame_size")
        if self.window not in ("hann", "rect"):
            raise ValueError(f"unsupported window {self.window!r}")

    @property
    def num_bins(self):
        return self.frame_size // 2 + 1


class AudioClip:
    """Immutable multichannel audio: samples shaped (channels, length).

    A 1-D array is accepted and treated as mono. Values are nominally in
    [-1, 1] but no clipping is applied.
    """

    def __init__(self, samples, sample_rate):
        samples = np.array(samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2 or samples.shape[0] < 1:
            raise ValueError("samples must be 1-D (mono) or (channels, length)")
        if sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        samples.flags.writeable = False
        self.samples = samples
        self.sample_rate = int(sample_rate)

    @property
    def channels(self):
        return self.samples.shape[0]

    @property
    def num_samples(self):
        return self.samples.shape[1]

    @property
    def duration(self):
        return self.num_samples / self.sample_rate

    def channel(self, index):
        return self.samples[index]

    def __repr__(self):
        return (f"AudioClip(channels={self.channels}, "
                f"samples={self.num_samples}, rate={self.sample_rate})")


class Spectrogram:
    """Complex STFT bins shaped (channels, frames, bins)."""

    def __init__(self, bins, config, sample_rate):
        bins = np.asarray(bins, dtype=np.complex128)
        if bins.ndim != 3:
            raise ValueError("bins must be shaped (channels, frames, bins)")
        if bins.shape[2] != config.num_bins:
            raise ValueError("bin count does not match frame_size/2 + 1")
        self.bins = bins
        self.config = config
        self.sample_rate = int(sample_rate)

    @property
    def channels(self):
        return self.bins.shape[0]

    @property
    def num_frames(self):
        return self.bins.shape[1]

    @property
    def num_bins(self):
        return self.bins.shape[2]

    def __repr__(self):
        return (f"Spectrogram(channels={self.channels}, frames={self.num_frames}, "
                f"bins={self.num_bins})")


def window_array(config):
    """Analysis window. The hann window is periodic so overlap-add sums
    to an exact constant at hops that divide the frame size."""
    if config.window == "hann":
        n = np.arange(config.frame_size)
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / config.frame_size)
    return np.ones(config.frame_size)


def num_stft_frames(num_samples, config):
    """Frame count for a clip: the trailing partial frame is dropped."""
    if num_samples < config.frame_size:
        return 0
    return 1 + (num_samples - config.frame_size) // config.hop_size


def stft(clip, config=StftConfig(), counter=None, stage="stft"):
    """Short-time Fourier transform of every channel.

    Args:
        clip: AudioClip of at least one frame of samples.
        config: frame/hop/window parameters.
        counter: optional OpCounter credited with the analytic FFT cost.

    Returns:
        Spectrogram with bins[channel, t, k].
    """
    n = clip.num_samples
    if n < config.frame_size:
        raise ValueError("insufficient samples: clip is shorter than one frame")
    t = num_stft_frames(n, config)
    w = window_array(config)
    frames = np.lib.stride_tricks.sliding_window_view(
        clip.samples, config.frame_size, axis=1)[:, ::config.hop_size][:, :t]
    bins = np.fft.rfft(frames * w, axis=2)
    if counter is not None:
        counter.add(stage, clip.channels * t *
                    (fft_flops(config.frame_size) + config.frame_size))
    return Spectrogram(bins, config, clip.sample_rate)


def _cola_constant(config):
    frame, hop = config.frame_size, config.hop_size
    if frame % hop != 0:
        raise ValueError("hop_size must divide frame_size for overlap-add")
    if config.window == "hann":
        if hop > frame // 2:
            raise ValueError("hann window requires hop_size <= frame_size/2")
        return frame / (2.0 * hop)
    return frame / hop


def istft(spec, counter=None, stage="istft"):
    """Inverse STFT by plain overlap-add divided by the window's
    overlap constant: exact on interior samples, attenuated on the
    first/last boundary frames.
    """
    cfg = spec.config
    cola = _cola_constant(cfg)
    frame, hop = cfg.frame_size, cfg.hop_size
    t = spec.num_frames
    out = np.zeros((spec.channels, frame + max(t - 1, 0) * hop))
    if t > 0:
        pieces = np.fft.irfft(spec.bins, n=frame, axis=2)
        for i in range(t):
            out[:, i * hop:i * hop + frame] += pieces[:, i]
    out /= cola
    if counter is not None:
        counter.add(stage, spec.channels * t * (fft_flops(frame) + frame))
    return AudioClip(out, spec.sample_rate)


def frame_energy(spec, channel=0):
    """Per-frame energy E[t] = sum_k |X[t, k]|^2 for one channel."""
    if not 0 <= channel < spec.channels:
        raise IndexError(f"channel {channel} out of range")
    b = spec.bins[channel]
    return (b.real ** 2 + b.imag ** 2).sum(axis=1)


def log_magnitude_features(spec, channel=0, eps=1e-8):
    """Per-frame log-magnitude feature vectors (frames, bins), the input
    representation fed to the recurrent networks."""
    if not 0 <= channel < spec.channels:
        raise IndexError(f"channel {channel} out of range")
    return np.log(np.abs(spec.bins[channel]) + eps)
