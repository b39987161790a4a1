"""Command-line interface.

Subcommands: simulate, extract-eenf, extract-venf, reference, evaluate,
plot.  All diagnostics go to stderr; files named by --out options are the
only stdout-silent outputs, so runs are scriptable.  Exit codes: 0 ok,
1 usage or data error, 2 extraction succeeded but every segment is
low-confidence, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import evaluate as ev
from .core import GridConfig
from .eenf import (HarmonicConfig, SamplingConfig, StftConfig,
                   extract_eenf_detailed)
from .ingest import (read_events_csv, read_frames, read_reference_csv,
                     read_trace_csv, reference_enf, write_events_csv,
                     write_frames, write_trace_csv)
from .simulate import (ContaminationConfig, EnfProcessConfig, FrameConfig,
                       IlluminationModel, OccluderConfig, SensorConfig,
                       simulate_events, simulate_frames, synthesize_enf)
from .svgplot import render_line_chart
from .venf import VenfConfig, extract_venf

log = logging.getLogger("evenf")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_LOW_CONFIDENCE = 2
EXIT_IO = 3


class _UsageError(Exception):
    def __init__(self, code, message=""):
        super().__init__(message)
        self.code = code
        self.message = message


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(EXIT_USAGE, f"error: {message}")


def _load_sections(path) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise OSError(f"cannot read config file {path}")
    return {s: dict(cp[s]) for s in cp.sections()}


def _build(cls, section: dict[str, str] | None, **overrides):
    """Instantiate a config dataclass from a flat key=value section."""
    kwargs = {}
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key, raw in (section or {}).items():
        if key not in fields:
            raise ValueError(f"unknown key {key!r} for {cls.__name__}")
        ftype = fields[key].type
        if raw.strip().lower() == "none" and "Optional" in str(ftype):
            kwargs[key] = None
        elif "int" in str(ftype):
            kwargs[key] = int(raw)
        elif "float" in str(ftype):
            kwargs[key] = float(raw)
        else:
            kwargs[key] = raw
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return cls(**kwargs)


def _log_effective(name: str, obj) -> None:
    pairs = " ".join(f"{f.name}={getattr(obj, f.name)!r}"
                     for f in dataclasses.fields(obj)
                     if not dataclasses.is_dataclass(getattr(obj, f.name)))
    log.info("config %s: %s", name, pairs)


def _grid(sections, value) -> GridConfig:
    sec = sections.get("grid", {})
    nominal = value if value is not None else float(sec.get("nominal_hz", 50.0))
    return GridConfig(float(nominal))


def _stack_configs(sections, grid):
    enf = _build(EnfProcessConfig, sections.get("enf"), grid=grid)
    illum = _build(IlluminationModel, sections.get("illumination"))
    sensor = _build(SensorConfig, sections.get("sensor"))
    contamination = _build(ContaminationConfig, sections.get("contamination"))
    sampling = _build(SamplingConfig, sections.get("sampling"))
    stft = _build(StftConfig, sections.get("stft"))
    harmonics = _build(HarmonicConfig, sections.get("harmonics"))
    frames = _build(FrameConfig, sections.get("frames"))
    return enf, illum, sensor, contamination, sampling, stft, harmonics, frames


def _cmd_simulate(args) -> int:
    sections = _load_sections(args.config) if args.config else {}
    grid = _grid(sections, args.grid)
    enf_cfg, illum, sensor, contamination, _, _, _, frames_cfg = \
        _stack_configs(sections, grid)
    for name, obj in (("grid", grid), ("enf", enf_cfg),
                      ("illumination", illum), ("sensor", sensor),
                      ("contamination", contamination)):
        _log_effective(name, obj)
    truth = synthesize_enf(enf_cfg, args.duration, seed=args.seed)
    stream = simulate_events(sensor, illum, truth, contamination,
                             seed=args.seed)
    log.info("simulated %d events over %.1f s", len(stream), args.duration)
    write_events_csv(stream, args.out_events)
    write_trace_csv(truth, args.out_truth)
    if args.out_frames:
        _log_effective("frames", frames_cfg)
        scen = sections.get("scenario", {})
        lo = float(scen.get("texture_low", 0.25))
        hi = float(scen.get("texture_high", 0.85))
        rng = np.random.default_rng([args.seed, 711])
        texture = rng.uniform(lo, hi, (frames_cfg.height, frames_cfg.width))
        seq = simulate_frames(illum, truth, frames_cfg, texture,
                              seed=args.seed)
        write_frames(seq, args.out_frames)
        log.info("wrote %d frames to %s", len(seq), args.out_frames)
    return EXIT_OK


def _cmd_extract_eenf(args) -> int:
    sections = _load_sections(args.config) if args.config else {}
    grid = _grid(sections, args.grid)
    sampling = _build(SamplingConfig, sections.get("sampling"),
                      delta_t=args.delta_t)
    stft = _build(StftConfig, sections.get("stft"))
    harmonics = _build(HarmonicConfig, sections.get("harmonics"),
                       max_order_m=args.harmonics)
    for name, obj in (("grid", grid), ("sampling", sampling),
                      ("stft", stft), ("harmonics", harmonics)):
        _log_effective(name, obj)
    stream = read_events_csv(args.events)
    log.info("read %d events from %s", len(stream), args.events)
    res = extract_eenf_detailed(stream, grid, sampling, stft, harmonics)
    lowconf = [i for i, bad in enumerate(res.low_confidence) if bad]
    comments = [
        "segment_winners=" + ",".join(str(m) for m in res.winners),
        "low_confidence_segments=" + ",".join(str(i) for i in lowconf),
    ]
    write_trace_csv(res.trace, args.out, comments=comments)
    if args.per_harmonic_out:
        d = Path(args.per_harmonic_out)
        d.mkdir(parents=True, exist_ok=True)
        for m, tr in res.harmonics.per_order.items():
            write_trace_csv(tr, d / f"harmonic_{m}.csv")
    if lowconf:
        log.warning("%d of %d segments are low-confidence",
                    len(lowconf), len(res.winners))
    if res.all_low_confidence:
        log.warning("every segment is low-confidence; treat the trace "
                    "as unreliable")
        return EXIT_LOW_CONFIDENCE
    return EXIT_OK


def _cmd_extract_venf(args) -> int:
    sections = _load_sections(args.config) if args.config else {}
    grid = _grid(sections, args.grid)
    stft = _build(StftConfig, sections.get("stft"))
    vcfg = _build(VenfConfig, sections.get("venf"), mode=args.mode,
                  detrend=args.detrend)
    vcfg = dataclasses.replace(vcfg, grid=grid, stft=stft)
    _log_effective("grid", grid)
    _log_effective("stft", stft)
    _log_effective("venf", vcfg)
    frames = read_frames(args.frames)
    log.info("read %d frames from %s", len(frames), args.frames)
    trace = extract_venf(frames, vcfg)
    write_trace_csv(trace, args.out)
    return EXIT_OK


def _cmd_reference(args) -> int:
    sections = _load_sections(args.config) if args.config else {}
    grid = _grid(sections, args.grid)
    stft = _build(StftConfig, sections.get("stft"))
    _log_effective("grid", grid)
    _log_effective("stft", stft)
    sig = read_reference_csv(args.signal)
    trace = reference_enf(sig, stft, grid)
    write_trace_csv(trace, args.out)
    return EXIT_OK


def _scenario_config(sections) -> ev.ScenarioConfig:
    grid = _grid(sections, None)
    enf_cfg, illum, sensor, _, sampling, stft, harmonics, frames_cfg = \
        _stack_configs(sections, grid)
    venf_cfg = _build(VenfConfig, sections.get("venf"))
    venf_cfg = dataclasses.replace(venf_cfg, grid=grid, stft=stft)
    occ = _build(OccluderConfig, sections.get("occluder"))
    scen = sections.get("scenario", {})
    extras = {}
    for key in ("enf_step", "motion_rate_factor", "motion_burst_fraction",
                "texture_low", "texture_high", "extreme_texture_scale"):
        if key in scen:
            extras[key] = float(scen[key])
    return ev.ScenarioConfig(grid=grid, enf=enf_cfg, illumination=illum,
                             sensor=sensor, sampling=sampling, stft=stft,
                             harmonics=harmonics, frames=frames_cfg,
                             venf=venf_cfg, occluder=occ, **extras)


def _cmd_evaluate(args) -> int:
    sections = _load_sections(args.config) if args.config else {}
    cfg = _scenario_config(sections)
    for name, obj in (("grid", cfg.grid), ("enf", cfg.enf),
                      ("illumination", cfg.illumination),
                      ("sensor", cfg.sensor), ("stft", cfg.stft),
                      ("harmonics", cfg.harmonics), ("frames", cfg.frames),
                      ("venf", cfg.venf), ("scenario", cfg)):
        _log_effective(name, obj)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    if not seeds:
        raise ValueError("need at least one seed")
    names = list(ev.SCENARIOS) if args.scenario == "all" else [args.scenario]
    reports = [ev.run_scenario(name, seeds, args.duration, cfg)
               for name in names]
    report = ev.merge_reports(reports)
    detail, summary = ev.emit_report(report, args.out)
    log.info("wrote %s and %s", detail, summary)
    for f in report.flags:
        log.warning("flag: %s", f)
    return EXIT_OK


def _cmd_plot(args) -> int:
    series = []
    for spec in args.trace:
        if "=" in spec:
            label, path = spec.split("=", 1)
        else:
            label, path = Path(spec).stem, spec
        tr = read_trace_csv(path)
        series.append((label, tr.times, tr.values))
    render_line_chart(series, args.out, title=args.title)
    csv_path = Path(args.out).with_suffix(".csv")
    with open(csv_path, "w") as fh:
        fh.write("label,t_s,f_hz\n")
        for label, times, values in series:
            for t, v in zip(times, values):
                fh.write(f"{label},{t:.6f},{v:.6f}\n")
    log.info("wrote %s and %s", args.out, csv_path)
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="evenf",
                     description="ENF extraction from event streams, with "
                                 "a simulator and a frame-video baseline")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("simulate", help="synthesize ENF, events, frames")
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=float, choices=[50.0, 60.0])
    p.add_argument("--config")
    p.add_argument("--out-events", required=True)
    p.add_argument("--out-truth", required=True)
    p.add_argument("--out-frames")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("extract-eenf", help="events CSV -> ENF trace CSV")
    p.add_argument("--events", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=float, choices=[50.0, 60.0])
    p.add_argument("--delta-t", type=float, dest="delta_t")
    p.add_argument("--harmonics", type=int)
    p.add_argument("--per-harmonic-out")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_extract_eenf)

    p = sub.add_parser("extract-venf", help="frame dir -> ENF trace CSV")
    p.add_argument("--frames", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=float, choices=[50.0, 60.0])
    p.add_argument("--mode", choices=["global_mean", "row_mean"])
    p.add_argument("--detrend", choices=["none", "consecutive_pair"])
    p.add_argument("--config")
    p.set_defaults(func=_cmd_extract_venf)

    p = sub.add_parser("reference", help="mains waveform CSV -> ENF trace")
    p.add_argument("--signal", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=float, choices=[50.0, 60.0])
    p.add_argument("--config")
    p.set_defaults(func=_cmd_reference)

    p = sub.add_parser("evaluate", help="run scenario benchmark")
    p.add_argument("--scenario", default="all",
                   choices=list(ev.SCENARIOS) + ["all"])
    p.add_argument("--seeds", default="1,2,3",
                   help="comma-separated integer seeds")
    p.add_argument("--duration", type=float, default=120.0)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("plot", help="overlay trace CSVs as an SVG chart")
    p.add_argument("--trace", action="append", required=True,
                   metavar="LABEL=PATH")
    p.add_argument("--out", required=True)
    p.add_argument("--title", default="")
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(e.message, file=sys.stderr)
        return e.code
    logging.basicConfig(stream=sys.stderr, level=args.log_level,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OSError as e:
        log.error("I/O failure: %s", e)
        return EXIT_IO
    except ValueError as e:
        log.error("%s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
