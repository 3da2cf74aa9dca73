"""Command-line front end: ``slpris --config exp.json --out rows.csv``.

Exit status is 0 on success, 2 for configuration errors and 3 for runtime or
I/O errors.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .config import DEFAULT_SWEEP_VALUES, SweepConfig
from .errors import ConfigError, SlpRisError
from .montecarlo import run_sweep

log = logging.getLogger("slpris")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
CSV_HEADER = ("scheme", "sweep_value", "avg_power_dbm", "trials", "std_dev_db")
RAW_HEADER = ("seed", "realization", "block", "scheme", "power_linear", "sweep_value")
AXIS_FLAGS = {"block-length": "block_length", "ris-elements": "ris_elements", "users": "users"}
AXIS_LABELS = {"block_length": "Block length L", "ris_elements": "Number of RIS elements N",
               "users": "Number of users K"}


@dataclass(frozen=True)
class CliInvocation:
    config_path: Path
    output_csv: Path
    sweep: str = None
    seed: int = None
    realizations: int = None
    plot_svg: Path = None
    raw_dump: Path = None
    workers: int = 1


def build_parser():
    p = argparse.ArgumentParser(
        prog="slpris",
        description="Monte-Carlo transmit-power sweeps for RIS-assisted symbol-level precoding.")
    p.add_argument("--config", required=True, type=Path, help="JSON experiment file")
    p.add_argument("--sweep", choices=sorted(AXIS_FLAGS), help="override the sweep axis")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--realizations", type=int, help="override the number of channel realisations")
    p.add_argument("--out", required=True, type=Path, help="aggregated CSV output")
    p.add_argument("--plot", type=Path, help="optional SVG line chart")
    p.add_argument("--raw", type=Path, help="optional per-trial CSV dump")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config_dict(path):
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", field="config") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}", field="config") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}", field="config") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object", field="config")
    return data


def resolve_config(data, sweep=None, seed=None, realizations=None):
    """Apply CLI overrides to the raw file contents and validate."""
    data = dict(data)
    file_axis = data.get("sweep_axis", SweepConfig.sweep_axis)
    axis = AXIS_FLAGS.get(sweep, sweep) if sweep else file_axis
    if axis != file_axis or "sweep_values" not in data:
        if axis in DEFAULT_SWEEP_VALUES:
            data["sweep_values"] = list(DEFAULT_SWEEP_VALUES[axis])
    data["sweep_axis"] = axis
    if seed is not None:
        data["seed"] = seed
    if realizations is not None:
        data["realizations"] = realizations
    try:
        return SweepConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def parse_and_validate(argv=None):
    args = build_parser().parse_args(argv)
    inv = CliInvocation(
        config_path=args.config, output_csv=args.out, sweep=args.sweep, seed=args.seed,
        realizations=args.realizations, plot_svg=args.plot, raw_dump=args.raw,
        workers=args.workers)
    cfg = resolve_config(load_config_dict(args.config), args.sweep, args.seed, args.realizations)
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1", field="workers")
    if cfg.zf_overloaded():
        log.warning("more users than BS antennas at some sweep point: zero-forcing rows "
                    "will fail per trial and report NaN")
    return cfg, inv


def _fmt(v):
    return "nan" if isinstance(v, float) and math.isnan(v) else repr(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.scheme, r.sweep_value, _fmt(r.avg_power_dbm), r.trials, _fmt(r.std_dev_db)])
    return buf.getvalue()


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RAW_HEADER)
    for rec in records:
        for scheme, p in rec.powers.items():
            w.writerow([rec.seed, rec.realization, rec.block, scheme, _fmt(p), rec.sweep_value])
    return buf.getvalue()


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f")


def rows_to_svg(rows, xlabel="sweep value", width=640, height=420):
    """Static line chart: one polyline per scheme, power in dBm against the sweep value."""
    schemes = list(dict.fromkeys(r.scheme for r in rows))
    pts = [(r.sweep_value, r.avg_power_dbm) for r in rows if math.isfinite(r.avg_power_dbm)]
    xs = [p[0] for p in pts] or [0, 1]
    ys = [p[1] for p in pts] or [0, 1]
    x0, x1 = min(xs), max(xs)
    y0, y1 = math.floor(min(ys)) - 1, math.ceil(max(ys)) + 1
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    left, right, top, bottom = 70, 190, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for x in sorted(set(xs)):
        out.append(f'<text x="{sx(x):.2f}" y="{top + ph + 16}" text-anchor="middle">{x}</text>')
    for k in range(5):
        y = y0 + k * (y1 - y0) / 4
        out.append(f'<text x="{left - 6}" y="{sy(y) + 4:.2f}" text-anchor="end">{y:.1f}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">Average transmit power (dBm)</text>')
    for i, scheme in enumerate(schemes):
        color = _COLORS[i % len(_COLORS)]
        line = " ".join(f"{sx(r.sweep_value):.2f},{sy(r.avg_power_dbm):.2f}"
                        for r in rows if r.scheme == scheme and math.isfinite(r.avg_power_dbm))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{line}">'
                   f'<title>{scheme}</title></polyline>')
        ly = top + 14 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly - 4}" x2="{left + pw + 32}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 36}" y="{ly}">{scheme}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_outputs(rows, invocation: CliInvocation, records=None, xlabel="sweep value"):
    if not rows:
        raise ValueError("no rows to write")
    _write(invocation.output_csv, rows_to_csv(rows))
    if invocation.plot_svg is not None:
        _write(invocation.plot_svg, rows_to_svg(rows, xlabel))
    if invocation.raw_dump is not None and records is not None:
        _write(invocation.raw_dump, records_to_csv(records))


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        cfg, inv = parse_and_validate(argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if "-v" in (argv or sys.argv[1:]) or "--verbose" in (argv or sys.argv[1:]):
        log.setLevel(logging.DEBUG)
    try:
        rows, records = run_sweep(cfg, workers=inv.workers, return_records=True)
        emit_outputs(rows, inv, records, AXIS_LABELS[cfg.sweep_axis])
    except (OSError, SlpRisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
