"""Frame-video ENF baseline.

Global-shutter footage only sees the flicker folded down by the frame
rate, so the tracked alias must be mapped back up to the flicker line;
rolling-shutter footage samples once per row, which raises the effective
rate to fps*rows and exposes the flicker directly.  Row series are
treated as uniformly sampled even when the sensor idles between frames,
a deliberate simplification that slightly smears the spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import EnfTrace, GridConfig
from .eenf import StftConfig, stft_peak_track, zero_phase_bandpass
from .simulate import FrameSequence

__all__ = ["VenfConfig", "frame_series", "extract_venf"]


@dataclass(frozen=True)
class VenfConfig:
    """Frame-pipeline knobs: spatial reduction, detrend, and tracking."""

    grid: GridConfig = GridConfig(50.0)
    mode: str = "row_mean"
    detrend: str = "consecutive_pair"
    band_halfwidth_hz: float = 1.0
    stft: StftConfig = field(default_factory=StftConfig)

    def __post_init__(self):
        if self.mode not in ("global_mean", "row_mean"):
            raise ValueError("mode must be 'global_mean' or 'row_mean'")
        if self.detrend not in ("none", "consecutive_pair"):
            raise ValueError("detrend must be 'none' or 'consecutive_pair'")
        if self.band_halfwidth_hz <= 0:
            raise ValueError("band_halfwidth_hz must be positive")


def _pair_detrended(frames: np.ndarray) -> np.ndarray:
    """Subtract the mean image of each consecutive frame pair from both.

    Pairs are non-overlapping: (0,1), (2,3), ...; an odd trailing frame
    shares the mean of the final two frames.  Within a pair the scene
    estimate is a single constant image, so differences between the two
    frames of a pair are preserved exactly while static content cancels.
    """
    out = np.empty_like(frames)
    n = len(frames)
    n_even = n - (n % 2)
    pairs = frames[:n_even].reshape(n_even // 2, 2, *frames.shape[1:])
    means = pairs.mean(axis=1, keepdims=True)
    out[:n_even] = (pairs - means).reshape(n_even, *frames.shape[1:])
    if n % 2:
        out[-1] = frames[-1] - 0.5 * (frames[-2] + frames[-1])
    return out


def frame_series(frames: FrameSequence, cfg: VenfConfig) -> tuple[np.ndarray, float]:
    """Reduce frames to a 1-d brightness series and its sample rate.

    global_mean: one sample per frame (fs = fps).  row_mean: one sample
    per row in readout order (fs = fps*rows), which requires a
    rolling-shutter sequence.
    """
    if len(frames) < 2:
        raise ValueError("need at least two frames")
    data = frames.frames
    if cfg.detrend == "consecutive_pair":
        data = _pair_detrended(data)
    if cfg.mode == "global_mean":
        return data.mean(axis=(1, 2)), frames.fps
    if frames.shutter != "rolling" or frames.row_readout <= 0:
        raise ValueError("row_mean requires a rolling-shutter sequence")
    series = data.mean(axis=2).reshape(-1)
    return series, frames.fps * frames.height


def _unalias(alias_hz: float, flicker_hz: float, fps: float) -> float:
    """Map a folded flicker measurement back up to the flicker line."""
    k = round(flicker_hz / fps)
    up = k * fps + alias_hz
    down = k * fps - alias_hz
    return up if abs(up - flicker_hz) <= abs(down - flicker_hz) else down


def extract_venf(frames: FrameSequence, cfg: VenfConfig) -> EnfTrace:
    """Frame sequence in, baseband ENF trace out.

    Raises ValueError("degenerate alias") when the frame rate folds the
    flicker onto DC or onto the fold edge, where deviations cancel.
    """
    series, fs = frame_series(frames, cfg)
    flicker = cfg.grid.flicker_hz
    if cfg.mode == "row_mean":
        center = flicker
        if center + cfg.band_halfwidth_hz >= fs / 2.0:
            raise ValueError("row rate too low to see the flicker line")
        filtered = zero_phase_bandpass(series, fs, center, cfg.band_halfwidth_hz)
        raw = stft_peak_track(filtered, fs, cfg.stft, center, halfwidth_hz=1.0)
        return EnfTrace(raw.t0, raw.step, raw.values / 2.0)

    k = round(flicker / fs)
    alias = abs(flicker - k * fs)
    if alias < 1.0 or alias > fs / 2.0 - 1.0:
        raise ValueError("degenerate alias: flicker folds onto DC or fs/2")
    filtered = zero_phase_bandpass(series, fs, alias,
                                   min(cfg.band_halfwidth_hz, 0.45 * alias))
    raw = stft_peak_track(filtered, fs, cfg.stft, alias, halfwidth_hz=1.0)
    flick = np.array([_unalias(a, flicker, fs) for a in raw.values])
    return EnfTrace(raw.t0, raw.step, flick / 2.0)
