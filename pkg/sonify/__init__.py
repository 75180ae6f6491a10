"""
Sonification: density-matrix trajectories to binaural audio.
"""

from sonify.binaural import (
    FrequencyMap,
    SonificationParams,
    StereoBuffer,
    channel_coherence_metric,
    energy_shift,
    map_frequencies,
    offdiagonal_weight,
    phase_drift_rate,
    render_binaural,
    time_dilation,
    to_energy_basis,
)
from sonify.wav import read_wav, write_wav

__all__ = [
    "FrequencyMap",
    "SonificationParams",
    "StereoBuffer",
    "channel_coherence_metric",
    "energy_shift",
    "map_frequencies",
    "offdiagonal_weight",
    "phase_drift_rate",
    "read_wav",
    "render_binaural",
    "time_dilation",
    "to_energy_basis",
    "write_wav",
]
