"""Experiment configuration, presets and the ``irshard`` command line.

A configuration is a nested mapping (TOML or JSON on disk)::

    kind = "density"            # density | sweep | single
    samples = 100000
    seed = 0

    [system]
    alpha_d = 4.0
    ...
    aoa_irs = { azimuth = "30deg", elevation = "60deg" }

    [tx]
    nx = 2
    ...

Angles must carry a unit, either as a ``"<value>deg"`` / ``"<value>rad"``
string or as ``{ value = ..., unit = "deg" }``. Every output file embeds the
resolved configuration, so ``irshard run <output file>`` regenerates it.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import ScalingModel, check_eigen_conditions, hardening_fit
from .channel import SystemParams
from .errors import ConfigError, DomainError, IRSError, NumericalError
from .geometry import ArrayGeometry, Direction
from .montecarlo import SWEEP_MODES, CampaignConfig, ChannelSetup, SweepRecord, run_campaign, sweep_N

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentSpec",
    "PRESETS",
    "FIG2_GRID",
    "RECORD_COLUMNS",
    "parse_config",
    "emit_config",
    "run_experiment",
    "main",
]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

KINDS = ("density", "sweep", "single")
FORMATS = ("csv", "json")

RECORD_COLUMNS = (
    "N", "Nx", "Ny", "spacing_x", "spacing_y", "q", "lambda_max",
    "mu_C_analytic", "var_C_analytic", "mean_C_mc", "var_C_mc",
    "ks_distance", "samples", "seed",
)

# intermediate sizes are our choice: every perfect square from 8^2 to 36^2 in steps of 4 per side
FIG2_GRID = (64, 144, 256, 400, 576, 784, 1024, 1296)
FIG2_GRID_NOTE = "perfect-square grid 8^2..36^2 (side step 4), chosen by irshard"

SYSTEM_FIELDS = (
    "alpha_d", "alpha_s", "alpha_r", "kappa_r", "rho",
    "area_tx_element", "area_irs_element", "aoa_irs", "aod_irs", "aod_tx",
)
ANGLE_FIELDS = ("aoa_irs", "aod_irs", "aod_tx")
GEOMETRY_FIELDS = ("nx", "ny", "dx", "dy", "wavelength")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    config: CampaignConfig
    output_path: str = "irshard-out"
    output_format: str = "csv"
    emit_histogram: bool = False
    emit_analytic_overlay: bool = False
    n_values: tuple[int, ...] = ()
    sweep_mode: str = "fixed-spacing"
    label: str = "custom"


def _half_wave_preset(kind):
    lam = 1.0
    d = lam / 2
    area = d * d
    return {
        "kind": kind,
        "samples": 100_000,
        "seed": 0,
        "workers": 1,
        "bins": 100,
        "system": {
            # normalized so that alpha * area = 1 on every link
            "alpha_d": 1 / area,
            "alpha_s": 1 / area,
            "alpha_r": 1 / area,
            "kappa_r": 1.0,
            "rho": 1.0,
            "area_tx_element": area,
            "area_irs_element": area,
            "aoa_irs": {"azimuth": _rad(math.pi / 6), "elevation": _rad(math.pi / 3)},
            "aod_irs": {"azimuth": _rad(math.pi / 8), "elevation": _rad(2 * math.pi / 3)},
            "aod_tx": {"azimuth": _rad(math.pi / 7), "elevation": _rad(math.pi / 5)},
        },
        "tx": {"nx": 2, "ny": 2, "dx": d, "dy": d, "wavelength": lam},
        "irs": {"nx": 8, "ny": 32, "dx": d, "dy": d, "wavelength": lam},
    }


def _fig1():
    cfg = _half_wave_preset("density")
    cfg["label"] = "fig1"
    cfg["output"] = {"format": "csv", "emit_histogram": True, "emit_analytic_overlay": True}
    return cfg


def _fig2():
    cfg = _half_wave_preset("sweep")
    cfg["label"] = "fig2"
    cfg["irs"].update(nx=8, ny=8)
    cfg["sweep"] = {"n_values": list(FIG2_GRID), "mode": "fixed-spacing"}
    cfg["output"] = {"format": "csv", "emit_histogram": False, "emit_analytic_overlay": False}
    return cfg


PRESETS = {"fig1": _fig1, "fig2": _fig2}


# -- angles ---------------------------------------------------------------------------

_ANGLE_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(deg|rad)\s*$")


def _rad(x: float) -> str:
    return f"{x!r}rad"


def _parse_angle(value, where):
    if isinstance(value, dict):
        unit = value.get("unit")
        if "value" not in value or unit not in ("deg", "rad"):
            raise ConfigError(f"{where}: angle table needs 'value' and unit 'deg' or 'rad'")
        number = float(value["value"])
    elif isinstance(value, str):
        m = _ANGLE_RE.match(value)
        if not m:
            raise ConfigError(f"{where}: cannot parse angle {value!r}; use e.g. '30deg' or '0.5rad'")
        number, unit = float(m.group(1)), m.group(2)
    else:
        raise ConfigError(f"{where}: angle {value!r} has no unit; write '{value}deg' or '{value}rad'")
    return math.radians(number) if unit == "deg" else number


def _parse_direction(value, where):
    if not isinstance(value, dict) or "azimuth" not in value or "elevation" not in value:
        raise ConfigError(f"{where}: needs 'azimuth' and 'elevation'")
    return Direction(
        _parse_angle(value["azimuth"], f"{where}.azimuth"),
        _parse_angle(value["elevation"], f"{where}.elevation"),
    )


# -- parsing --------------------------------------------------------------------------


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _set_dotted(d: dict, key: str, value):
    *head, last = key.split(".")
    for h in head:
        d = d.setdefault(h, {})
    d[last] = value


def _missing(raw: dict) -> list[str]:
    missing = [] if "kind" in raw else ["kind"]
    for section, fields in (("system", SYSTEM_FIELDS), ("tx", GEOMETRY_FIELDS), ("irs", GEOMETRY_FIELDS)):
        sec = raw.get(section)
        sec = sec if isinstance(sec, dict) else {}
        missing += [f"{section}.{f}" for f in fields if f not in sec]
    if raw.get("kind") == "sweep":
        sweep = raw.get("sweep") if isinstance(raw.get("sweep"), dict) else {}
        if "n_values" not in sweep:
            missing.append("sweep.n_values")
    return missing


def _number(section, name, kind=float):
    try:
        value = section[name]
        if isinstance(value, bool):
            raise TypeError
        out = kind(value)
        if kind is int and out != value:
            raise ValueError
        return out
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected {kind.__name__}, got {section[name]!r}") from None


def _geometry(section, where):
    try:
        return ArrayGeometry(
            _number(section, "nx", int), _number(section, "ny", int),
            _number(section, "dx"), _number(section, "dy"), _number(section, "wavelength"),
        )
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_config_file(path) -> dict:
    """Read a TOML/JSON configuration, or the configuration embedded in an output file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix == ".toml":
            return tomllib.loads(text)
        if path.suffix == ".csv":
            for line in text.splitlines():
                if line.startswith("# config: "):
                    return json.loads(line[len("# config: "):])
            raise ConfigError(f"{path} carries no embedded config line")
        data = json.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if isinstance(data, dict) and "metadata" in data:
        data = data["metadata"]
    if isinstance(data, dict) and "config" in data:
        data = data["config"]
    return data


def parse_config(path=None, *, preset: str | None = None, data: dict | None = None, overrides: dict | None = None) -> ExperimentSpec:
    """Resolve a preset, a config file and flag overrides into a validated spec.

    Later sources win: preset, then file (or ``data``), then ``overrides``,
    whose keys may be dotted (``"output.format"``).
    """
    raw: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; available: {', '.join(PRESETS)}")
        raw = PRESETS[preset]()
    if path is not None:
        raw = _merge(raw, load_config_file(path))
    if data is not None:
        raw = _merge(raw, data)
    for key, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(raw, key, value)

    missing = _missing(raw)
    if missing:
        raise ConfigError("missing required fields: " + ", ".join(missing))

    kind = raw["kind"]
    if kind not in KINDS:
        raise ConfigError(f"kind: expected one of {KINDS}, got {kind!r}")

    sysraw = raw["system"]
    try:
        system = SystemParams(
            **{f: _number(sysraw, f) for f in SYSTEM_FIELDS if f not in ANGLE_FIELDS},
            **{f: _parse_direction(sysraw[f], f"system.{f}") for f in ANGLE_FIELDS},
        )
    except DomainError as exc:
        raise ConfigError(f"system: {exc}") from None
    tx = _geometry(raw["tx"], "tx")
    irs = _geometry(raw["irs"], "irs")

    scaling = None
    if raw.get("scaling") is not None:
        try:
            scaling = ScalingModel(_number(raw["scaling"], "A0"), _number(raw["scaling"], "q"))
        except (DomainError, KeyError) as exc:
            raise ConfigError(f"scaling: {exc}") from None

    n_values: tuple[int, ...] = ()
    mode = "fixed-spacing"
    if kind == "sweep":
        sweep = raw["sweep"]
        mode = sweep.get("mode", mode)
        if mode not in SWEEP_MODES:
            raise ConfigError(f"sweep.mode: expected one of {SWEEP_MODES}, got {mode!r}")
        try:
            n_values = tuple(int(n) for n in sweep["n_values"])
        except (TypeError, ValueError):
            raise ConfigError(f"sweep.n_values: expected integers, got {sweep['n_values']!r}") from None
        bad = [n for n in n_values if n < 1 or math.isqrt(n) ** 2 != n]
        if bad:
            raise ConfigError(f"sweep.n_values: not perfect squares: {bad}")
        if not n_values:
            raise ConfigError("sweep.n_values: empty")
        if mode != "fixed-spacing" and scaling is None:
            raise ConfigError(f"sweep mode {mode!r} needs a [scaling] section")

    try:
        config = CampaignConfig(
            system=system, tx_geometry=tx, irs_geometry=irs, scaling=scaling,
            samples=_number(raw, "samples", int) if "samples" in raw else 100_000,
            seed=_number(raw, "seed", int) if "seed" in raw else 0,
            workers=_number(raw, "workers", int) if "workers" in raw else 1,
            bins=_number(raw, "bins", int) if "bins" in raw else 100,
            block_size=_number(raw, "block_size", int) if "block_size" in raw else 1024,
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None

    out = raw.get("output") or {}
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"output.format: expected one of {FORMATS}, got {fmt!r}")
    return ExperimentSpec(
        kind=kind,
        config=config,
        output_path=str(out.get("path", "irshard-out")),
        output_format=fmt,
        emit_histogram=bool(out.get("emit_histogram", kind == "density")),
        emit_analytic_overlay=bool(out.get("emit_analytic_overlay", kind == "density")),
        n_values=n_values,
        sweep_mode=mode,
        label=str(raw.get("label", "custom")),
    )


def emit_config(spec: ExperimentSpec) -> dict:
    """Inverse of :func:`parse_config`: a plain mapping with every field resolved."""
    c = spec.config
    s = c.system

    def direction(d):
        return {"azimuth": _rad(d.azimuth), "elevation": _rad(d.elevation)}

    def geometry(g):
        return {"nx": g.nx, "ny": g.ny, "dx": g.dx, "dy": g.dy, "wavelength": g.wavelength}

    out = {
        "kind": spec.kind,
        "label": spec.label,
        "samples": c.samples,
        "seed": c.seed,
        "workers": c.workers,
        "bins": c.bins,
        "block_size": c.block_size,
        "system": {
            **{f: getattr(s, f) for f in SYSTEM_FIELDS if f not in ANGLE_FIELDS},
            **{f: direction(getattr(s, f)) for f in ANGLE_FIELDS},
        },
        "tx": geometry(c.tx_geometry),
        "irs": geometry(c.irs_geometry),
        "output": {
            "path": spec.output_path,
            "format": spec.output_format,
            "emit_histogram": spec.emit_histogram,
            "emit_analytic_overlay": spec.emit_analytic_overlay,
        },
    }
    if c.scaling is not None:
        out["scaling"] = {"A0": c.scaling.A0, "q": c.scaling.q}
    if spec.kind == "sweep":
        out["sweep"] = {"n_values": list(spec.n_values), "mode": spec.sweep_mode}
    return out


# -- running --------------------------------------------------------------------------


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _record_row(rec: SweepRecord, spec: ExperimentSpec) -> dict:
    emp = rec.empirical
    return {
        "N": rec.N, "Nx": rec.nx, "Ny": rec.ny,
        "spacing_x": rec.spacing_x, "spacing_y": rec.spacing_y, "q": rec.q,
        "lambda_max": rec.lambda_max,
        "mu_C_analytic": rec.analytic.mu_C, "var_C_analytic": rec.analytic.var_C,
        "mean_C_mc": emp.mean, "var_C_mc": emp.variance, "ks_distance": emp.ks_distance,
        "samples": emp.sample_count, "seed": spec.config.seed,
    }


def _hardening_summary(records: list[SweepRecord], spec: ExperimentSpec) -> dict:
    c = spec.config
    if spec.sweep_mode == "fixed-spacing":
        scaling = ScalingModel(c.irs_geometry.element_area, 0.0)
    elif spec.sweep_mode == "fixed-aperture":
        scaling = ScalingModel(c.scaling.A0, 1.0)
    else:
        scaling = c.scaling
    summary = {"grid_note": FIG2_GRID_NOTE if tuple(spec.n_values) == FIG2_GRID else "user grid"}
    if len(records) < 4:
        summary["status"] = "skipped: fewer than 4 sweep points"
        return summary
    eig = check_eigen_conditions([(r.N, r.lambda_max) for r in records], scaling)
    mc = hardening_fit(
        [(r.N, r.empirical.variance) for r in records], eig.u_hat, scaling.q,
        mu_values=[r.empirical.mean for r in records],
    )
    an = hardening_fit(
        [(r.N, r.analytic.var_C) for r in records], eig.u_hat, scaling.q,
        mu_values=[r.analytic.mu_C for r in records],
    )
    summary.update(
        u_hat=eig.u_hat,
        u_r2=eig.u_r2,
        lambda_ratio_decreasing=eig.lambda_ratio_decreasing,
        inverse_aperture_decreasing=eig.inverse_aperture_decreasing,
        decay_slope=mc.decay_slope,
        decay_r2=mc.decay_r2,
        b_hat=mc.b_hat,
        c_hat=mc.c_hat,
        passed=mc.passed,
        decay_slope_analytic=an.decay_slope,
    )
    return summary


def _histogram_rows(emp, with_overlay):
    h = emp.histogram
    rows = []
    stats = emp.analytic
    for left, right, count, dens, center in zip(h.edges[:-1], h.edges[1:], h.counts, h.density, h.centers):
        row = {"bin_left": left, "bin_right": right, "count": int(count), "density": dens}
        if with_overlay:
            pdf = None
            if stats is not None and stats.sigma_C > 0:
                z = (center - stats.mu_C) / stats.sigma_C
                pdf = math.exp(-0.5 * z * z) / (stats.sigma_C * math.sqrt(2 * math.pi))
            row["analytic_pdf"] = pdf
        rows.append(row)
    return rows


def _render(rows, columns, fmt, metadata, extra_comments=None, extra_json=None) -> str:
    if fmt == "json":
        doc = {"metadata": metadata, "rows": _jsonable(rows)}
        if extra_json:
            doc.update(_jsonable(extra_json))
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(metadata["config"], sort_keys=False) + "\n")
    buf.write(f"# irshard_version: {metadata['irshard_version']}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    for key, value in (extra_comments or {}).items():
        buf.write(f"# hardening_fit.{key}={_fmt(value) if not isinstance(value, str) else value}\n")
    return buf.getvalue()


def _metadata(spec: ExperimentSpec) -> dict:
    return {
        "irshard_version": __version__,
        "numpy_version": np.__version__,
        "config": emit_config(spec),
    }


def _write_all(outdir: Path, files: dict[str, str]):
    """Write every file or none of them."""
    if outdir.exists() and not outdir.is_dir():
        raise OSError(f"output path {outdir} exists and is not a directory")
    created = False
    if not outdir.exists():
        outdir.mkdir()
        created = True
    tmp = []
    try:
        for name, text in files.items():
            p = outdir / f".{name}.partial"
            p.write_text(text, encoding="utf-8")
            tmp.append((p, outdir / name))
        for p, final in tmp:
            os.replace(p, final)
    except OSError:
        for p, _ in tmp:
            p.unlink(missing_ok=True)
        if created:
            try:
                outdir.rmdir()
            except OSError:
                pass
        raise


def run_experiment(spec: ExperimentSpec) -> dict:
    """Run the experiment and write its files; returns a summary mapping.

    The summary holds ``rows``, optional ``hardening_fit`` and ``histogram``
    entries and ``files``, the list of paths written.
    """
    c = spec.config
    metadata = _metadata(spec)
    ext = spec.output_format
    if spec.kind == "sweep":
        log.info("sweep over N=%s (%s)", list(spec.n_values), spec.sweep_mode)
        records = sweep_N(c, spec.n_values, spec.sweep_mode)
    else:
        g = c.irs_geometry
        setup = ChannelSetup.build(c.system, c.tx_geometry, g)
        emp = run_campaign(c, setup)
        lam_max = setup.cov.lambda_max
        q = c.scaling.q if c.scaling is not None else 0.0
        records = [SweepRecord(g.total, g.nx, g.ny, g.dx, g.dy, q, lam_max, emp.analytic, emp)]

    rows = [_record_row(r, spec) for r in records]
    summary = {"rows": rows}
    files = {}
    fit = None
    if spec.kind == "sweep":
        fit = _hardening_summary(records, spec)
        summary["hardening_fit"] = fit
        metadata["hardening_fit"] = _jsonable(fit)
    files[f"records.{ext}"] = _render(
        rows, RECORD_COLUMNS, ext, metadata,
        extra_comments=fit, extra_json={"hardening_fit": fit} if fit else None,
    )
    if spec.emit_histogram and spec.kind != "sweep":
        hrows = _histogram_rows(records[0].empirical, spec.emit_analytic_overlay)
        cols = ["bin_left", "bin_right", "count", "density"] + (["analytic_pdf"] if spec.emit_analytic_overlay else [])
        files[f"histogram.{ext}"] = _render(hrows, cols, ext, metadata)
        summary["histogram"] = hrows
    files["metadata.json"] = json.dumps(_jsonable(metadata), indent=2) + "\n"

    outdir = Path(spec.output_path)
    _write_all(outdir, files)
    summary["files"] = [str(outdir / name) for name in files]
    return summary


# -- command line ---------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, help="realizations per campaign")
    common.add_argument("--seed", type=int, help="64-bit master seed")
    common.add_argument("--workers", type=int, help="worker threads")
    common.add_argument("--output", help="output directory")
    common.add_argument("--format", choices=FORMATS, help="records/histogram file format")
    common.add_argument("--bins", type=int, help="histogram bins")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="irshard", description="IRS channel hardening experiments")
    parser.add_argument("--version", action="version", version=f"irshard {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run a config file (TOML/JSON or a previous output)")
    run.add_argument("config")
    pre = sub.add_parser("preset", parents=[common], help="run a built-in experiment")
    pre.add_argument("name", choices=sorted(PRESETS))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    overrides = {
        "samples": args.samples, "seed": args.seed, "workers": args.workers, "bins": args.bins,
        "output.path": args.output, "output.format": args.format,
    }
    try:
        if args.command == "preset":
            spec = parse_config(preset=args.name, overrides=overrides)
        else:
            spec = parse_config(args.config, overrides=overrides)
        summary = run_experiment(spec)
    except (ConfigError, DomainError) as exc:
        print(f"irshard: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, IRSError, np.linalg.LinAlgError) as exc:
        print(f"irshard: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"irshard: io-error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in summary["files"]:
        print(path)
    return EXIT_OK
