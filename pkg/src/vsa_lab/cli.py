"""Command-line entry point: ``vsa-lab <scenario> [options]``."""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments as E
from .config import SCENARIOS, Config, load_config
from .control import MixMode
from .errors import ConfigError, DomainError, IntegrationError
from .output import write_svg, write_table, write_trace_csv

OUT_ENV = "VSA_LAB_OUT"
DEFAULT_OUT = "vsa_lab_out"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vsa-lab", description="Run simulated bench scenarios of the "
                "two-motor variable stiffness actuator and write traces.")
    p.add_argument("scenario", choices=SCENARIOS + ("all",),
                   help="scenario to run, or 'all'")
    p.add_argument("--config", default="defaults",
                   help="JSON configuration file, or 'defaults' (default)")
    p.add_argument("--out", help=f"output directory (default: config, then ${OUT_ENV}, "
                   f"then ./{DEFAULT_OUT})")
    p.add_argument("--format", choices=("csv", "svg", "both"), default="csv")
    p.add_argument("--mode", choices=[m.value for m in MixMode],
                   help="motor velocity mixing law (overrides the config)")
    p.add_argument("--friction", choices=("on", "off"),
                   help="deflection-path friction (overrides the config)")
    return p


def resolve_output_dir(cli_out, cfg: Config) -> Path:
    for candidate in (cli_out, cfg.output_dir, os.environ.get(OUT_ENV)):
        if candidate:
            return Path(candidate)
    return Path(DEFAULT_OUT)


class _Writer:
    def __init__(self, out: Path, fmt: str):
        self.out = out
        self.csv = fmt in ("csv", "both")
        self.svg = fmt in ("svg", "both")
        self.files = []

    def trace(self, trace, plots=()):
        if self.csv:
            self.files.append(write_trace_csv(trace, self.out / f"{trace.name}.csv"))
        if self.svg:
            for suffix, series, kw in plots:
                self.files.append(write_svg(self.out / f"{trace.name}{suffix}.svg", series, **kw))

    def table(self, name, header, rows):
        if self.csv:
            self.files.append(write_table(self.out / f"{name}.csv", header, rows))

    def chart(self, name, series, **kw):
        if self.svg:
            self.files.append(write_svg(self.out / f"{name}.svg", series, **kw))


def _time_plot(trace, cols, ylabel, scale=1.0):
    series = [(c, trace.t, trace[c] * scale) for c in cols]
    return ("", series, dict(title=trace.name, xlabel="t [s]", ylabel=ylabel))


def _calibrate(cfg, w):
    res = E.run_calibration(cfg)
    rows = []
    for pt in res.points:
        w.trace(pt.trace, [("", [("tau", pt.trace["theta_tau"], pt.trace["tau"])],
                            dict(title=pt.trace.name, xlabel="theta_tau [rad]",
                                 ylabel="tau [Nm]"))])
        rows.append((pt.l_s, pt.expected_stiffness, pt.slope, pt.relative_error, pt.r2,
                     pt.hysteresis_area, int(pt.skipped)))
    w.table("calibrate_summary", ("l_s", "expected_stiffness", "slope", "relative_error",
                                  "r2", "hysteresis_area", "skipped"), rows)
    fitted = res.fitted()
    errs = [p.relative_error for p in fitted if p.l_s >= 0.005]
    return [("calibrate", "points fitted", f"{len(fitted)}/{len(res.points)}"),
            ("calibrate", "max slope error", f"{max(errs) * 100:.3g} %"),
            ("calibrate", "min R^2", f"{min(p.r2 for p in fitted):.6f}"),
            ("calibrate", "max hysteresis area", f"{max(p.hysteresis_area for p in fitted):.4g} J")]


def _regulate(cfg, w):
    res = E.run_stiffness_regulation(cfg)
    for tr in (res.sine, res.step):
        w.trace(tr, [_time_plot(tr, ("l_s", "l_s_cmd"), "l_s [mm]", 1e3)])
    return [("regulate", "sine RMS error", f"{res.rms_error * 1e3:.3g} mm"),
            ("regulate", "step 90% rise", f"{res.rise_time_90:.3f} s"),
            ("regulate", "overshoot reversal", "flagged" if res.reversal_flag else "none")]


def _torque(cfg, w):
    rows = []
    for preset in ("low", "high"):
        res = E.run_torque_control(cfg, preset)
        for tr in (res.sine, res.step):
            w.trace(tr, [_time_plot(tr, ("tau", "tau_cmd"), "tau [Nm]")])
        rows += [(f"torque/{preset}", "sine RMS error", f"{res.rms_error:.3g} Nm"),
                 (f"torque/{preset}", "step 90% rise", f"{res.rise_time_90:.3f} s"),
                 (f"torque/{preset}", "step 90% fall", f"{res.fall_time_90:.3f} s")]
    return rows


def _decouple(cfg, w):
    res = E.run_decoupling_comparison(cfg)
    for tr in (res.decoupled, res.coupled):
        w.trace(tr, [_time_plot(tr, ("l_s_cmd", "l_s"), "pivot [mm]", 1e3)])
    return [("decouple", "pivot cmd s.d. (decoupled)", f"{res.pivot_std_decoupled * 1e3:.3g} mm"),
            ("decouple", f"pivot cmd s.d. (coupled, beta={res.beta:g})",
             f"{res.pivot_std_coupled * 1e3:.3g} mm")]


def _loadshare(cfg, w):
    res = E.run_load_sharing(cfg)
    tr = res.trace
    w.trace(tr)
    w.chart("loadshare_torques", [("RG-T", tr.t, res.rg_t), ("SG-T", tr.t, res.sg_t),
                                  ("output", tr.t, res.output_torque)],
            title="load sharing", xlabel="t [s]", ylabel="torque [Nm]")
    valid = res.ratio[np.isfinite(res.ratio)]
    spread = f"{valid.min():.9f} .. {valid.max():.9f}" if valid.size else "n/a"
    return [("loadshare", "RG-T / SG-T", spread),
            ("loadshare", "samples used", f"{valid.size}/{len(tr)}")]


def _curves(cfg, w):
    c = E.run_stiffness_curves(cfg)
    w.table("curves", ("l_s", "stiffness", "max_deflection"),
            zip(c.l_s, c.stiffness, c.max_deflection))
    per_deg = np.where(np.isfinite(c.stiffness), c.stiffness * math.pi / 180.0, np.nan)
    w.chart("curves_stiffness", [("stiffness", c.l_s * 1e3, per_deg)],
            title="stiffness vs pivot position", xlabel="l_s [mm]", ylabel="Nm/deg")
    w.chart("curves_max_deflection", [("limit", c.l_s * 1e3, np.degrees(c.max_deflection))],
            title="max deflection vs pivot position", xlabel="l_s [mm]", ylabel="deg")
    return [("curves", "regime crossover", f"{c.crossover * 1e3:.2f} mm")]


RUNNERS = {"calibrate": _calibrate, "regulate": _regulate, "torque": _torque,
           "decouple": _decouple, "loadshare": _loadshare, "curves": _curves}


def print_table(rows, stream=None):
    stream = stream or sys.stdout
    if not rows:
        return
    widths = [max(len(str(r[i])) for r in rows + [("scenario", "metric", "value")])
              for i in range(3)]
    fmt = "  ".join(f"{{:<{n}}}" for n in widths)
    print(fmt.format("scenario", "metric", "value"), file=stream)
    print(fmt.format(*("-" * n for n in widths)), file=stream)
    for r in rows:
        print(fmt.format(*r), file=stream)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = Config() if args.config == "defaults" else load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"vsa-lab: configuration error: {exc}", file=sys.stderr)
        return 1
    if args.mode:
        cfg = replace(cfg, mixing_mode=MixMode(args.mode))
    friction_on = cfg.friction.enabled if args.friction is None else args.friction == "on"
    cfg = replace(cfg, friction=replace(cfg.friction, enabled=friction_on))
    out = resolve_output_dir(args.out, cfg)
    writer = _Writer(out, args.format)
    names = cfg.scenarios if args.scenario == "all" else (args.scenario,)
    rows = []
    try:
        for name in names:
            rows += RUNNERS[name](cfg, writer)
    except (ConfigError, DomainError, IntegrationError) as exc:
        print_table(rows)
        print(f"vsa-lab: {name} failed: {exc}", file=sys.stderr)
        return 1
    print_table(rows)
    print(f"\n{len(writer.files)} file(s) written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
