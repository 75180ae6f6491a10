"""
16-bit PCM stereo WAV files.

Samples are quantized as sign(x) floor(|x| 32767 + 1/2), rounding ties away
from zero and clipping symmetrically to +-32767.
"""

import logging
import os
import tempfile
from pathlib import Path

import numpy as np
import scipy.io.wavfile

from config import PCM_FULL_SCALE
from exceptions import OutputError
from sonify.binaural import StereoBuffer

logger = logging.getLogger(__name__)


def quantize(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    levels = np.sign(samples) * np.floor(np.abs(samples) * PCM_FULL_SCALE + 0.5)
    return np.clip(levels, -PCM_FULL_SCALE, PCM_FULL_SCALE).astype("<i2")


def write_wav(buf: StereoBuffer, path, overwrite: bool = False) -> Path:
    """
    Write a stereo buffer as interleaved L,R 16-bit PCM.

    The file is written next to its destination and renamed into place, so a
    failed write never leaves a partial WAV behind.
    """
    path = Path(path)
    if path.exists() and not overwrite:
        raise OutputError(f"{path} already exists (pass --overwrite to replace it)")

    data = np.column_stack([quantize(buf.left), quantize(buf.right)])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(suffix=".wav", dir=path.parent)
        os.close(fd)
        try:
            scipy.io.wavfile.write(tmp_name, int(buf.sample_rate), data)
            os.replace(tmp_name, path)
        finally:
            if os.path.exists(tmp_name):
                os.remove(tmp_name)
    except OSError as exc:
        raise OutputError(f"could not write {path}: {exc}") from exc

    logger.info("wrote %s (%d samples at %d Hz)", path, buf.n_samples, buf.sample_rate)
    return path


def read_wav(path) -> StereoBuffer:
    """Read a 16-bit stereo WAV back into float samples."""
    try:
        rate, data = scipy.io.wavfile.read(str(path))
    except (OSError, ValueError) as exc:
        raise OutputError(f"could not read {path}: {exc}") from exc
    if data.dtype != np.int16 or data.ndim != 2 or data.shape[1] != 2:
        raise OutputError(f"{path} is not a 16-bit stereo WAV")
    samples = data.astype(float) / PCM_FULL_SCALE
    samples = np.clip(samples, -1.0, 1.0)
    return StereoBuffer(int(rate), samples[:, 0], samples[:, 1])
