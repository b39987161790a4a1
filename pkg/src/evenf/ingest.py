"""CSV / PGM ingestion and the mains-reference extractor.

All text formats are plain CSV with optional ``#`` comment lines so the
repo stays free of serialization dependencies.  Timestamps are written
with nine decimals (nanosecond resolution), frequencies with six.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import EnfTrace, EventStream, GridConfig, PolaritySequence
from .eenf import StftConfig, stft_peak_track
from .simulate import FrameSequence

__all__ = [
    "ReferenceSignal",
    "read_events_csv",
    "write_events_csv",
    "read_trace_csv",
    "write_trace_csv",
    "read_polarity_csv",
    "write_polarity_csv",
    "read_reference_csv",
    "write_reference_csv",
    "reference_enf",
    "read_frames",
    "write_frames",
]

_DIMS_RE = re.compile(r"#\s*width\s*=\s*(\d+)\s*,\s*height\s*=\s*(\d+)")


@dataclass(frozen=True)
class ReferenceSignal:
    """Directly sampled mains waveform (or a proxy of it)."""

    sample_rate: float
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        s = np.ascontiguousarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or len(s) < 2:
            raise ValueError("samples must be a 1-d array of length >= 2")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)


def write_events_csv(stream: EventStream, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# width={stream.sensor_width},height={stream.sensor_height}\n")
        fh.write("t_s,x,y,p\n")
        for i in range(len(stream)):
            fh.write(f"{stream.t[i]:.9f},{stream.x[i]},{stream.y[i]},{stream.p[i]}\n")


def read_events_csv(path) -> EventStream:
    """Read an event CSV (header ``t_s,x,y,p``).

    Polarity 0 is accepted as an alias for -1 (the unsigned convention
    some tools emit).  Sensor dimensions come from a
    ``# width=..,height=..`` comment, or are inferred as max+1.
    Malformed rows fail with their line number.
    """
    width = height = None
    ts, xs, ys, ps = [], [], [], []
    header_seen = False
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _DIMS_RE.match(line)
                if m:
                    width, height = int(m.group(1)), int(m.group(2))
                continue
            if not header_seen:
                if [c.strip() for c in line.split(",")] != ["t_s", "x", "y", "p"]:
                    raise ValueError(f"line {lineno}: expected header t_s,x,y,p")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: expected 4 fields, got {len(parts)}")
            try:
                ts.append(float(parts[0]))
            except ValueError:
                raise ValueError(f"line {lineno}: unparsable t_s {parts[0]!r}") from None
            try:
                xs.append(int(parts[1]))
            except ValueError:
                raise ValueError(f"line {lineno}: unparsable x {parts[1]!r}") from None
            try:
                ys.append(int(parts[2]))
            except ValueError:
                raise ValueError(f"line {lineno}: unparsable y {parts[2]!r}") from None
            try:
                p = int(parts[3])
            except ValueError:
                raise ValueError(f"line {lineno}: unparsable polarity {parts[3]!r}") from None
            if p == 0:
                p = -1
            if p not in (-1, 1):
                raise ValueError(f"line {lineno}: polarity must be -1, 0, or +1")
            ps.append(p)
    if not header_seen:
        raise ValueError("missing header t_s,x,y,p")
    t = np.asarray(ts, dtype=np.float64)
    x = np.asarray(xs, dtype=np.int64)
    y = np.asarray(ys, dtype=np.int64)
    p = np.asarray(ps, dtype=np.int64)
    if width is None:
        width = int(x.max()) + 1 if len(x) else 1
        height = int(y.max()) + 1 if len(y) else 1
    sort = len(t) > 1 and bool(np.any(np.diff(t) < 0))
    return EventStream.from_arrays(width, height, t, x, y, p, sort=sort)


def write_trace_csv(trace: EnfTrace, path, comments: list[str] | None = None) -> None:
    times = trace.times
    with open(path, "w") as fh:
        for c in comments or []:
            fh.write(f"# {c}\n")
        fh.write("t_s,f_hz\n")
        for i in range(len(trace)):
            fh.write(f"{times[i]:.6f},{trace.values[i]:.6f}\n")


def read_trace_csv(path) -> EnfTrace:
    ts, fs = [], []
    header_seen = False
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if [c.strip() for c in line.split(",")] != ["t_s", "f_hz"]:
                    raise ValueError(f"line {lineno}: expected header t_s,f_hz")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 2 fields")
            try:
                ts.append(float(parts[0]))
                fs.append(float(parts[1]))
            except ValueError:
                raise ValueError(f"line {lineno}: unparsable number") from None
    if len(ts) < 1:
        raise ValueError("trace file holds no samples")
    t = np.asarray(ts)
    if len(t) == 1:
        return EnfTrace(float(t[0]), 1.0, np.asarray(fs))
    step = (t[-1] - t[0]) / (len(t) - 1)
    if step <= 0 or np.max(np.abs(np.diff(t) - step)) > 2e-6:
        raise ValueError("trace sampling is not uniform")
    return EnfTrace(float(t[0]), float(step), np.asarray(fs))


def write_polarity_csv(seq: PolaritySequence, path) -> None:
    times = seq.times
    with open(path, "w") as fh:
        fh.write("t_s,polarity\n")
        for i in range(len(seq)):
            fh.write(f"{times[i]:.6f},{seq.values[i]}\n")


def read_polarity_csv(path) -> PolaritySequence:
    ts, vs = [], []
    header_seen = False
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if [c.strip() for c in line.split(",")] != ["t_s", "polarity"]:
                    raise ValueError(f"line {lineno}: expected header t_s,polarity")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 2 fields")
            try:
                ts.append(float(parts[0]))
                vs.append(int(parts[1]))
            except ValueError:
                raise ValueError(f"line {lineno}: unparsable value") from None
    if len(ts) < 2:
        raise ValueError("polarity file needs at least two samples")
    t = np.asarray(ts)
    step = (t[-1] - t[0]) / (len(t) - 1)
    if step <= 0 or np.max(np.abs(np.diff(t) - step)) > 2e-6:
        raise ValueError("polarity sampling is not uniform")
    return PolaritySequence(float(t[0]), float(step), np.asarray(vs))


def write_reference_csv(sig: ReferenceSignal, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# sample_rate={sig.sample_rate:g}\n")
        fh.write("v\n")
        for v in sig.samples:
            fh.write(f"{v:.9f}\n")


def read_reference_csv(path) -> ReferenceSignal:
    rate = None
    vals = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = re.match(r"#\s*sample_rate\s*=\s*([0-9.eE+-]+)", line)
                if m:
                    rate = float(m.group(1))
                continue
            if line == "v":
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise ValueError(f"line {lineno}: unparsable sample {line!r}") from None
    if rate is None:
        raise ValueError("missing '# sample_rate=' comment")
    return ReferenceSignal(rate, np.asarray(vals))


def reference_enf(sig: ReferenceSignal, stft: StftConfig = StftConfig(),
                  grid: GridConfig = GridConfig(50.0)) -> EnfTrace:
    """Ground-truth ENF from a directly recorded mains waveform.

    Tracks the spectral peak in [nominal - 0.5, nominal + 0.5] Hz with
    the same windowed tracker the event pipeline uses.
    """
    if sig.sample_rate < 8.0 * grid.nominal_hz:
        raise ValueError("reference sample rate must be >= 8x nominal")
    return stft_peak_track(sig.samples, sig.sample_rate, stft,
                           float(grid.nominal_hz), halfwidth_hz=0.5)


def write_frames(seq: FrameSequence, directory) -> None:
    """Dump a frame sequence as 8-bit binary PGM files plus a manifest."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "manifest.txt", "w") as fh:
        fh.write(f"fps={seq.fps:g}\n")
        fh.write(f"shutter={seq.shutter}\n")
        fh.write(f"row_readout_s={seq.row_readout:.9f}\n")
        fh.write(f"count={len(seq)}\n")
    header = f"P5\n{seq.width} {seq.height}\n255\n".encode("ascii")
    for k in range(len(seq)):
        data = np.round(seq.frames[k] * 255.0).astype(np.uint8)
        with open(d / f"frame_{k:06d}.pgm", "wb") as fh:
            fh.write(header)
            fh.write(data.tobytes())


def _read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if blob[pos:pos + 1] == b"#":
            while pos < len(blob) and blob[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    pos += 1   # single whitespace after maxval
    raster = np.frombuffer(blob, dtype=np.uint8, count=w * h, offset=pos)
    return raster.reshape(h, w).astype(np.float64) / float(maxval)


def read_frames(directory) -> FrameSequence:
    d = Path(directory)
    meta = {}
    with open(d / "manifest.txt", "r") as fh:
        for line in fh:
            line = line.strip()
            if not line or "=" not in line:
                continue
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    fps = float(meta["fps"])
    shutter = meta["shutter"]
    row_readout = float(meta.get("row_readout_s", "0"))
    paths = sorted(d.glob("frame_*.pgm"))
    if not paths:
        raise ValueError(f"no frame_*.pgm files in {directory}")
    frames = np.stack([_read_pgm(p) for p in paths])
    return FrameSequence(frames.shape[2], frames.shape[1], fps, shutter,
                         row_readout, frames)
