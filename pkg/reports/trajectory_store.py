"""
Binary trajectory store, so a long evolve can be rendered many times.

Layout (all little-endian):

    offset  size        field
    0       8           magic b"QSONTRJ\\0"
    8       2           version (uint16)
    10      4           dim (uint32)
    14      4           n_frames (uint32)
    18      8 n         frame times (float64)
    ...     16 n d d    frames, row-major, complex128 as interleaved re, im
"""

import logging
import os
from pathlib import Path

import numpy as np

from config import TRAJECTORY_MAGIC, TRAJECTORY_VERSION
from engine import StateTrajectory
from exceptions import OutputError

logger = logging.getLogger(__name__)

HEADER_DTYPE = np.dtype([
    ("magic", "S8"),
    ("version", "<u2"),
    ("dim", "<u4"),
    ("n_frames", "<u4"),
])


def save_trajectory(traj: StateTrajectory, path, overwrite: bool = False) -> Path:
    path = Path(path)
    if path.exists() and not overwrite:
        raise OutputError(f"{path} already exists (pass --overwrite to replace it)")

    header = np.zeros(1, dtype=HEADER_DTYPE)
    header["magic"] = TRAJECTORY_MAGIC
    header["version"] = TRAJECTORY_VERSION
    header["dim"] = traj.dim
    header["n_frames"] = len(traj)

    tmp = path.with_name(path.name + ".part")
    try:
        with open(tmp, "wb") as f:
            f.write(header.tobytes())
            f.write(np.ascontiguousarray(traj.times, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(traj.frames, dtype="<c16").tobytes())
        os.replace(tmp, path)
    except OSError as exc:
        raise OutputError(f"could not write {path}: {exc}") from exc
    finally:
        if tmp.exists():
            tmp.unlink()

    logger.info("stored %d frames of dimension %d in %s", len(traj), traj.dim, path)
    return path


def load_trajectory(path) -> StateTrajectory:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise OutputError(f"could not read {path}: {exc}") from exc

    if len(raw) < HEADER_DTYPE.itemsize:
        raise OutputError(f"{path} is too short to be a trajectory store")
    header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
    if bytes(header["magic"]).ljust(8, b"\x00") != TRAJECTORY_MAGIC:
        raise OutputError(f"{path} is not a trajectory store (bad magic)")
    if int(header["version"]) != TRAJECTORY_VERSION:
        raise OutputError(f"{path} has unsupported store version {int(header['version'])}")

    dim, n_frames = int(header["dim"]), int(header["n_frames"])
    offset = HEADER_DTYPE.itemsize
    expected = offset + 8 * n_frames + 16 * n_frames * dim * dim
    if len(raw) != expected:
        raise OutputError(f"{path} has {len(raw)} bytes, layout needs {expected}")

    times = np.frombuffer(raw, dtype="<f8", count=n_frames, offset=offset)
    frames = np.frombuffer(raw, dtype="<c16", count=n_frames * dim * dim, offset=offset + 8 * n_frames)
    return StateTrajectory(times.astype(float), frames.reshape(n_frames, dim, dim).astype(complex))
