"""WAV file I/O: 16-bit PCM and 32-bit float, mono to 8 channels."""

import numpy as np
from scipy.io import wavfile

from .dsp import AudioClip

MAX_CHANNELS = 8


def read_wav(path):
    """Load a WAV file into an AudioClip with samples scaled to [-1, 1]."""
    rate, data = wavfile.read(path)
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32 or data.dtype == np.float64:
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype} "
                         "(expected 16-bit PCM or 32-bit float)")
    if samples.ndim == 1:
        samples = samples[np.newaxis, :]
    else:
        samples = samples.T
    if samples.shape[0] > MAX_CHANNELS:
        raise ValueError(f"{samples.shape[0]} channels exceeds the supported "
                         f"maximum of {MAX_CHANNELS}")
    return AudioClip(samples, rate)


def write_wav(path, clip, encoding="float32"):
    """Write an AudioClip as WAV. `encoding` is "float32" or "pcm16"."""
    if clip.channels > MAX_CHANNELS:
        raise ValueError(f"{clip.channels} channels exceeds the supported "
                         f"maximum of {MAX_CHANNELS}")
    data = clip.samples.T
    if clip.channels == 1:
        data = data[:, 0]
    if encoding == "float32":
        wavfile.write(path, clip.sample_rate, data.astype(np.float32))
    elif encoding == "pcm16":
        scaled = np.clip(data, -1.0, 1.0) * 32767.0
        wavfile.write(path, clip.sample_rate, scaled.astype(np.int16))
    else:
        raise ValueError(f"unsupported encoding {encoding!r}")
