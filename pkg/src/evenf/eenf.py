"""ENF estimation from event streams.

Pipeline: uniform temporal sampling of the stream into single-timestamp
cohorts, majority-vote reduction to a polarity sequence, zero-phase
band-pass around each flicker harmonic, STFT peak tracking with
quadratic interpolation, baseband normalization, and smoothness-driven
per-segment harmonic selection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import signal as sps

from .core import EnfTrace, EventStream, GridConfig, PolaritySequence

__all__ = [
    "SamplingConfig",
    "StftConfig",
    "HarmonicConfig",
    "HarmonicTraces",
    "EventSlices",
    "EenfResult",
    "temporal_sample",
    "spatial_vote",
    "bandpass",
    "zero_phase_bandpass",
    "stft_peak_track",
    "normalize_to_baseband",
    "smoothness",
    "harmonic_select",
    "extract_eenf",
    "extract_eenf_detailed",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplingConfig:
    """Uniform temporal-sampling interval for the event stream."""

    delta_t: float = 0.001

    def __post_init__(self):
        if self.delta_t <= 0:
            raise ValueError("delta_t must be positive")


@dataclass(frozen=True)
class StftConfig:
    """Sliding-window spectral analysis parameters.

    search_halfwidth_hz is expressed per baseband Hz: tracking harmonic m
    searches +/- 2*m*search_halfwidth_hz around the harmonic line so the
    normalized trace stays within +/- search_halfwidth_hz of nominal.
    min_prominence_db is the peak-over-band-median level below which a
    measurement is considered unreliable.
    """

    window_s: float = 16.0
    hop_s: float = 1.0
    window_shape: str = "hann"
    zero_pad_factor: int = 4
    search_halfwidth_hz: float = 0.5
    min_prominence_db: float = 12.0

    def __post_init__(self):
        if self.window_s <= 0 or self.hop_s <= 0:
            raise ValueError("window_s and hop_s must be positive")
        if self.hop_s > self.window_s:
            raise ValueError("hop_s must not exceed window_s")
        if self.zero_pad_factor < 1:
            raise ValueError("zero_pad_factor must be at least 1")
        if self.search_halfwidth_hz <= 0:
            raise ValueError("search_halfwidth_hz must be positive")


@dataclass(frozen=True)
class HarmonicConfig:
    """Which flicker harmonics to track and how to choose among them."""

    max_order_m: int = 3
    segment_s: float = 10.0
    band_halfwidth_hz: float = 1.0   # per harmonic order

    def __post_init__(self):
        if self.max_order_m < 1:
            raise ValueError("max_order_m must be at least 1")
        if self.segment_s <= 0:
            raise ValueError("segment_s must be positive")
        if self.band_halfwidth_hz <= 0:
            raise ValueError("band_halfwidth_hz must be positive")


@dataclass(frozen=True)
class HarmonicTraces:
    """Per-harmonic baseband traces on a common grid."""

    per_order: dict[int, EnfTrace]

    def __post_init__(self):
        if not self.per_order:
            raise ValueError("need at least one harmonic trace")
        ref = next(iter(self.per_order.values()))
        for tr in self.per_order.values():
            if (tr.t0 != ref.t0 or tr.step != ref.step
                    or len(tr) != len(ref)):
                raise ValueError("harmonic traces must share one grid")

    @property
    def orders(self) -> list[int]:
        return sorted(self.per_order)


@dataclass(frozen=True)
class EventSlices:
    """Result of temporal sampling: one single-timestamp cohort per moment.

    Cohort n is the index range [start[n], stop[n]) into the stream's
    arrays; ``moments`` holds the sampling instants t1 + n*delta_t.
    """

    stream: EventStream
    delta_t: float
    moments: np.ndarray
    start: np.ndarray
    stop: np.ndarray

    def __len__(self) -> int:
        return len(self.moments)

    def cohort(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(timestamps, polarities) of slice n."""
        sl = slice(int(self.start[n]), int(self.stop[n]))
        return self.stream.t[sl], self.stream.p[sl]

    def counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-slice (+1 count, -1 count), vectorized over all slices."""
        pos = np.concatenate(([0], np.cumsum(self.stream.p == 1)))
        neg = np.concatenate(([0], np.cumsum(self.stream.p == -1)))
        return (pos[self.stop] - pos[self.start],
                neg[self.stop] - neg[self.start])


def temporal_sample(stream: EventStream, cfg: SamplingConfig) -> EventSlices:
    """Sample the stream at uniform moments t_n = t1 + n*delta_t.

    Each moment takes the cohort of events sharing the first timestamp at
    or after it; events between picks are discarded, one cohort may serve
    several consecutive moments, and the loop runs while t_n <= t_N (the
    last event time), so a single-event stream yields exactly one slice.
    """
    if len(stream) == 0:
        raise ValueError("empty stream: nothing to sample")
    t = stream.t
    t1 = float(t[0])
    t_n_last = float(t[-1])
    dt = cfg.delta_t
    n_max = int((t_n_last - t1) / dt)
    while t1 + (n_max + 1) * dt <= t_n_last:
        n_max += 1
    while n_max > 0 and t1 + n_max * dt > t_n_last:
        n_max -= 1
    moments = t1 + dt * np.arange(n_max + 1)
    uniq, first = np.unique(t, return_index=True)
    bounds = np.concatenate((first, [len(t)]))
    j = np.searchsorted(uniq, moments, side="left")
    return EventSlices(stream, dt, moments,
                       bounds[j].astype(np.int64),
                       bounds[j + 1].astype(np.int64))


def spatial_vote(slices: EventSlices) -> PolaritySequence:
    """Majority polarity per slice: sign(N+ - N-), with sign(0) = 0."""
    pos, neg = slices.counts()
    votes = np.sign(pos.astype(np.int64) - neg.astype(np.int64))
    return PolaritySequence(float(slices.moments[0]), slices.delta_t,
                            votes.astype(np.int8))


def zero_phase_bandpass(x: np.ndarray, fs: float, center_hz: float,
                        halfwidth_hz: float) -> np.ndarray:
    """Zero-phase Butterworth band-pass around one spectral line.

    The design meets <= 1 dB passband droop and >= 40 dB attenuation one
    halfwidth beyond each band edge after the forward-backward pass
    (which squares the magnitude response, hence the halved design
    numbers handed to buttord).
    """
    nyq = fs / 2.0
    lo, hi = center_hz - halfwidth_hz, center_hz + halfwidth_hz
    if lo <= 0 or hi >= nyq:
        raise ValueError("band outside (0, Nyquist)")
    stop_lo = max(center_hz - 2.0 * halfwidth_hz, 0.5 * lo)
    stop_hi = min(center_hz + 2.0 * halfwidth_hz, 0.5 * (hi + nyq))
    order, wn = sps.buttord([lo / nyq, hi / nyq],
                            [stop_lo / nyq, stop_hi / nyq],
                            gpass=0.5, gstop=20.0)
    sos = sps.butter(order, wn, btype="bandpass", output="sos")
    return sps.sosfiltfilt(sos, np.asarray(x, dtype=np.float64))


def bandpass(seq: PolaritySequence, center_hz: float,
             halfwidth_hz: float) -> np.ndarray:
    """Zero-phase band-pass of the vote sequence around one harmonic."""
    return zero_phase_bandpass(seq.values.astype(np.float64),
                               seq.sample_rate, center_hz, halfwidth_hz)


def _parabolic_refine(logmag: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Fractional-bin offset of the peak from a 3-point log-magnitude fit."""
    ym1 = logmag[np.arange(len(j)), j - 1]
    y0 = logmag[np.arange(len(j)), j]
    yp1 = logmag[np.arange(len(j)), j + 1]
    denom = ym1 - 2.0 * y0 + yp1
    delta = np.where(denom < 0, 0.5 * (ym1 - yp1) / np.where(denom == 0, 1, denom), 0.0)
    return np.clip(delta, -0.5, 0.5)


def stft_peak_track(x: np.ndarray, fs: float, stft: StftConfig,
                    center_hz: float, halfwidth_hz: Optional[float] = None,
                    t0: float = 0.0, return_prominence: bool = False):
    """Track the dominant spectral line near center_hz across STFT hops.

    Each window is tapered, zero-padded by stft.zero_pad_factor, and the
    in-band magnitude peak refined by quadratic interpolation of the
    log magnitudes of the three bins around the maximum; the refined
    frequency is clamped to the search band.  Returns an EnfTrace whose
    samples sit at the window centers (and, optionally, the per-hop peak
    prominence in dB over the in-band median level).
    """
    x = np.asarray(x, dtype=np.float64)
    if halfwidth_hz is None:
        halfwidth_hz = stft.search_halfwidth_hz
    win_n = int(round(stft.window_s * fs))
    hop_n = int(round(stft.hop_s * fs))
    if len(x) < win_n:
        raise ValueError("signal shorter than the analysis window")
    window = sps.get_window(stft.window_shape, win_n, fftbins=True)
    nfft = win_n * stft.zero_pad_factor
    df = fs / nfft
    lo = max(1, int(math.ceil((center_hz - halfwidth_hz) / df)))
    hi = min(nfft // 2 - 1, int(math.floor((center_hz + halfwidth_hz) / df)))
    if hi <= lo:
        raise ValueError("search band narrower than one frequency bin")

    n_hops = (len(x) - win_n) // hop_n + 1
    idx = np.arange(win_n)[None, :] + hop_n * np.arange(n_hops)[:, None]
    spec = np.fft.rfft(x[idx] * window[None, :], n=nfft, axis=1)
    mag = np.abs(spec[:, lo - 1:hi + 2])     # one guard bin each side
    band = mag[:, 1:-1]
    j = np.argmax(band, axis=1) + 1
    logmag = np.log(np.maximum(mag, 1e-300))
    delta = _parabolic_refine(logmag, j)
    freqs = (lo - 1 + j + delta) * df
    freqs = np.clip(freqs, center_hz - halfwidth_hz, center_hz + halfwidth_hz)
    trace = EnfTrace(t0 + 0.5 * stft.window_s,
                     hop_n / fs, freqs)
    if not return_prominence:
        return trace
    peak = band[np.arange(n_hops), j - 1]
    floor = np.median(band, axis=1)
    prom = 20.0 * np.log10(np.maximum(peak, 1e-300)
                           / np.maximum(floor, 1e-300))
    return trace, prom


def normalize_to_baseband(raw: EnfTrace, order_m: int,
                          grid: GridConfig) -> EnfTrace:
    """Map a trace tracked at harmonic m of the flicker down to the ENF.

    The flicker line sits at 2*f_e, its m-th harmonic at 2*m*f_e, so the
    raw track divides by 2*m.
    """
    if order_m < 1:
        raise ValueError("order_m must be at least 1")
    return EnfTrace(raw.t0, raw.step, raw.values / (2.0 * order_m))


def smoothness(values) -> float:
    """Total variation of a trace segment: sum of |f[n] - f[n-1]|.

    Lower is smoother; real ENF moves little between adjacent samples, so
    a corrupted harmonic's jitter shows up as a large value.
    """
    v = values.values if isinstance(values, EnfTrace) else np.asarray(values, dtype=np.float64)
    if len(v) < 2:
        raise ValueError("need at least two samples to score smoothness")
    return float(np.sum(np.abs(np.diff(v))))


def _segment_bounds(n: int, step: float, segment_s: float) -> list[tuple[int, int]]:
    seg_len = max(1, int(round(segment_s / step)))
    return [(i, min(i + seg_len, n)) for i in range(0, n, seg_len)]


def _select_segments(traces: HarmonicTraces, cfg: HarmonicConfig):
    """Per-segment winning order plus the stitched values.

    Each segment of segment_s seconds goes to the harmonic with the
    smallest total variation, ties to the lower order.  A trailing
    segment shorter than two samples cannot be scored and inherits the
    previous winner.
    """
    orders = traces.orders
    ref = traces.per_order[orders[0]]
    bounds = _segment_bounds(len(ref), ref.step, cfg.segment_s)
    winners = []
    values = np.empty(len(ref))
    prev = orders[0]
    for (i, j) in bounds:
        if j - i >= 2:
            scores = [(smoothness(traces.per_order[m].values[i:j]), m)
                      for m in orders]
            _, best = min(scores)
        else:
            best = prev
        winners.append(best)
        values[i:j] = traces.per_order[best].values[i:j]
        prev = best
    return values, winners, bounds


def harmonic_select(traces: HarmonicTraces, cfg: HarmonicConfig) -> EnfTrace:
    """Stitch the smoothest harmonic per segment into one baseband trace."""
    ref = traces.per_order[traces.orders[0]]
    values, _, _ = _select_segments(traces, cfg)
    return EnfTrace(ref.t0, ref.step, values)


@dataclass(frozen=True)
class EenfResult:
    """Full extraction output: the trace plus per-segment diagnostics."""

    trace: EnfTrace
    harmonics: HarmonicTraces
    winners: list[int]
    segment_bounds: list[tuple[int, int]]
    low_confidence: np.ndarray           # bool per segment
    prominence_db: dict[int, np.ndarray]  # per order, per hop

    @property
    def all_low_confidence(self) -> bool:
        return bool(np.all(self.low_confidence))


def extract_eenf_detailed(stream: EventStream, grid: GridConfig,
                          sampling: SamplingConfig = SamplingConfig(),
                          stft: StftConfig = StftConfig(),
                          harmonics: HarmonicConfig = HarmonicConfig()) -> EenfResult:
    """Run the full event-to-ENF pipeline and keep the diagnostics.

    Harmonics whose analysis band would cross the sequence Nyquist are
    skipped with a warning.  Segments whose winning harmonic shows a
    median peak prominence under stft.min_prominence_db are flagged
    low-confidence.
    """
    slices = temporal_sample(stream, sampling)
    seq = spatial_vote(slices)
    if (len(seq) - 1) * seq.step < stft.window_s:
        raise ValueError("stream shorter than the analysis window")
    fs = seq.sample_rate
    flicker = grid.flicker_hz

    per_order: dict[int, EnfTrace] = {}
    prominence: dict[int, np.ndarray] = {}
    for m in range(1, harmonics.max_order_m + 1):
        center = m * flicker
        band_hw = m * harmonics.band_halfwidth_hz
        if center + 2.0 * m * stft.search_halfwidth_hz >= fs / 2.0 \
                or center + band_hw >= fs / 2.0:
            log.warning("skipping harmonic m=%d at %.0f Hz: above Nyquist "
                        "(fs=%.0f Hz)", m, center, fs)
            continue
        filtered = bandpass(seq, center, band_hw)
        raw, prom = stft_peak_track(filtered, fs, stft, center,
                                    halfwidth_hz=2.0 * m * stft.search_halfwidth_hz,
                                    t0=seq.t0, return_prominence=True)
        per_order[m] = normalize_to_baseband(raw, m, grid)
        prominence[m] = prom
    if not per_order:
        raise ValueError("no usable harmonic below Nyquist")

    traces = HarmonicTraces(per_order)
    values, winners, bounds = _select_segments(traces, harmonics)
    ref = traces.per_order[traces.orders[0]]
    lowconf = np.array([
        float(np.median(prominence[m][i:j])) < stft.min_prominence_db
        for (i, j), m in zip(bounds, winners)
    ])
    return EenfResult(EnfTrace(ref.t0, ref.step, values), traces, winners,
                      bounds, lowconf, prominence)


def extract_eenf(stream: EventStream, grid: GridConfig,
                 sampling: SamplingConfig = SamplingConfig(),
                 stft: StftConfig = StftConfig(),
                 harmonics: HarmonicConfig = HarmonicConfig()) -> EnfTrace:
    """Event stream in, baseband ENF trace out."""
    return extract_eenf_detailed(stream, grid, sampling, stft,
                                 harmonics).trace
