import struct

import numpy as np
import pytest

from exceptions import OutputError
from sonify import StereoBuffer, read_wav, write_wav
from sonify.wav import quantize


def _chunks(raw):
    """RIFF chunk id -> (offset of payload, size)."""
    chunks = {}
    offset = 12
    while offset + 8 <= len(raw):
        chunk_id = raw[offset:offset + 4]
        size = struct.unpack("<I", raw[offset + 4:offset + 8])[0]
        chunks[chunk_id] = (offset + 8, size)
        offset += 8 + size + (size % 2)
    return chunks


def test_one_second_of_silence(tmp_path):
    buf = StereoBuffer(44100, np.zeros(44100), np.zeros(44100))
    path = write_wav(buf, tmp_path / "silence.wav")
    raw = path.read_bytes()

    assert raw[:4] == b"RIFF" and raw[8:12] == b"WAVE"
    chunks = _chunks(raw)
    fmt_offset, _ = chunks[b"fmt "]
    fmt_tag, channels, rate, byte_rate, block_align, bits = struct.unpack(
        "<HHIIHH", raw[fmt_offset:fmt_offset + 16]
    )
    assert (fmt_tag, channels, rate, bits) == (1, 2, 44100, 16)
    assert byte_rate == 44100 * 4 and block_align == 4

    data_offset, data_size = chunks[b"data"]
    assert data_size == 176400
    assert len(raw) == data_offset + 176400
    assert raw[data_offset:] == bytes(176400)


def test_quantize_full_scale_and_ties():
    levels = quantize(np.array([1.0, -1.0, 0.5, -0.5, 0.0]))
    np.testing.assert_array_equal(levels, [32767, -32767, 16384, -16384, 0])
    assert levels.dtype == np.int16


def test_interleaving(tmp_path):
    buf = StereoBuffer(8000, [1.0, 0.0], [-1.0, 0.5])
    raw = write_wav(buf, tmp_path / "pair.wav").read_bytes()
    data_offset, _ = _chunks(raw)[b"data"]
    samples = np.frombuffer(raw[data_offset:], dtype="<i2")
    np.testing.assert_array_equal(samples, [32767, -32767, 0, 16384])


def test_read_back_within_one_level(tmp_path):
    rng = np.random.default_rng(3)
    left, right = rng.uniform(-1, 1, 1000), rng.uniform(-1, 1, 1000)
    path = write_wav(StereoBuffer(22050, left, right), tmp_path / "noise.wav")
    back = read_wav(path)
    assert back.sample_rate == 22050
    assert np.max(np.abs(back.left - left)) <= 1.0 / 32767
    assert np.max(np.abs(back.right - right)) <= 1.0 / 32767


def test_refuses_to_overwrite(tmp_path):
    buf = StereoBuffer(8000, np.zeros(10), np.zeros(10))
    path = tmp_path / "out.wav"
    write_wav(buf, path)
    with pytest.raises(OutputError):
        write_wav(buf, path)
    write_wav(buf, path, overwrite=True)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out.wav"]


def test_read_rejects_non_wav(tmp_path):
    path = tmp_path / "bogus.wav"
    path.write_bytes(b"not a wav file")
    with pytest.raises(OutputError):
        read_wav(path)
