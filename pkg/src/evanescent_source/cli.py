"""Command-line entry point: evaluations, scans and figure datasets.

Every command writes one table. CSV output starts with ``# key=value``
metadata lines followed by a fixed header row; JSON output is an object with
``metadata`` and ``records``. Floats use the shortest round-trip
representation, so identical configurations give byte-identical files.

Exit codes: 0 success, 2 usage or domain errors, 3 numerical failures. On
failure a one-line JSON error record goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from importlib import metadata as importlib_metadata
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__
from .analysis import classify_crossings, dit_amplitude_map, dit_first_minimum_time, ratio_R
from .asymptotics import density_pole, density_saddle, psi_interference, psi_pole, psi_saddle
from .errors import DomainError, InvalidInput, NoMinimum, PoleProximity, SourceModelError
from .model import flux, make_params, norm_factor, psi_exact
from .oracles import psi_quadrature

EXIT_USAGE = 2
EXIT_NUMERICAL = 3

COLUMNS = {
    "density": ("v0", "x", "t", "norm", "density_N", "density_S", "density_0", "psi_int", "density_approx"),
    "flux": ("v0", "x", "t", "J"),
    "ratio": ("v0", "x", "t", "R"),
    "times": (
        "v0",
        "x",
        "t_c",
        "bl_time",
        "t_max_saddle",
        "scenario",
        "n_crossings",
        "t_p",
        "density_at_tp",
        "t_dit1",
    ),
    "dit-map": ("v0", "x", "t_min1", "amplitude"),
    "oracle-check": ("index", "v0", "x", "t", "exact_re", "exact_im", "quad_re", "quad_im", "rel_err"),
}


@dataclass(frozen=True)
class Preset:
    table: str
    v0: str
    x: str
    t: str
    description: str


PRESETS = {
    "flux-origin": Preset("flux", "0.001,0.25,0.5,0.999", "0", "0.01:50:400:log", "flux J(0, t) at the source"),
    "ratio": Preset("ratio", "0.1", "0.1,1,2.5,4", "0.01:1000:600:log", "R = |psi_0/psi_S|^2 against time"),
    "tp": Preset("times", "0.1,0.25,0.5,0.9", "0.01:10:60:log", "", "t_p against position"),
    "tp-density": Preset("times", "0.1,0.25,0.5,0.9", "0.01:10:60:log", "", "|psi_N(x, t_p)|^2 against position"),
    "dit-map": Preset("dit-map", "0.01:0.999:30:log", "0.05:50:40:log", "", "normalized |psi_Int| at the first minimum"),
    "dit-trace": Preset("density", "0.05", "1.5", "0.1:40:2000", "density and its pieces at x=1.5, v0=0.05"),
}

DEFAULTS = {
    "v0": None,
    "x": None,
    "t": None,
    "grid": (),
    "out": "-",
    "format": "csv",
    "preset": None,
    "tol_quad": 1e-10,
    "seed": 0,
    "n_points": 100,
    "workers": 1,
}


class UsageError(Exception):
    pass


class CellError(Exception):
    """A numerical failure tagged with the grid cell that produced it."""

    def __init__(self, cell: dict, cause: Exception):
        super().__init__(str(cause))
        self.cell = cell
        self.cause = cause


# ---------------------------------------------------------------- parsing


def parse_axis(text: str) -> list[float]:
    """``value``, ``a,b,c`` or ``min:max:count[:lin|log]`` to a list of floats."""
    text = text.strip()
    if not text:
        raise UsageError("empty grid specification")
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise UsageError(f"grid {text!r} must be min:max:count[:lin|log]")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise UsageError(f"grid {text!r}: {exc}") from None
        spacing = parts[3] if len(parts) == 4 else "lin"
        if count < 2:
            raise UsageError(f"grid {text!r}: count must be at least 2")
        if spacing == "lin":
            return [float(v) for v in np.linspace(lo, hi, count)]
        if spacing == "log":
            if lo <= 0 or hi <= 0:
                raise UsageError(f"grid {text!r}: log spacing needs positive bounds")
            return [float(v) for v in np.geomspace(lo, hi, count)]
        raise UsageError(f"grid {text!r}: spacing must be lin or log")
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"grid {text!r}: {exc}") from None
    if any(math.isnan(v) for v in values):
        raise UsageError(f"grid {text!r} contains NaN")
    return values


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment; keys match the long flags."""
    cfg: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{number}: unknown key {key!r}")
        if key == "grid":
            cfg.setdefault("grid", [])
            cfg["grid"].append(value)  # type: ignore[union-attr]
        else:
            cfg[key] = value
    return cfg


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("UsageError", message, None, EXIT_USAGE)
        self.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evanescent-source", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {_tool_version()}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--v0", help="value, list a,b,c or grid min:max:count[:lin|log]")
    common.add_argument("--x", help="positions (same syntax as --v0)")
    common.add_argument("--t", help="times (same syntax as --v0)")
    common.add_argument(
        "--grid", action="append", metavar="AXIS=SPEC", help="alternative axis syntax, e.g. v0=0.01:1:20:log"
    )
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--tol-quad", dest="tol_quad", type=float, help="relative quadrature tolerance")
    common.add_argument("--seed", type=int, help="seed for random test points (oracle-check)")
    common.add_argument("--n-points", dest="n_points", type=int, help="number of random points (oracle-check)")
    common.add_argument("--workers", type=int, help="worker processes for scans (default 1)")
    common.add_argument("--config", help="flat key = value file; command-line flags win")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("density", parents=[common], help="exact density and its asymptotic pieces")
    sub.add_parser("flux", parents=[common], help="probability current J(x, t)")
    sub.add_parser("times", parents=[common], help="characteristic times per (v0, x)")
    sub.add_parser("dit-map", parents=[common], help="interference amplitude at the first minimum")
    fig = sub.add_parser("figure", parents=[common], help="figure dataset from a named preset")
    fig.add_argument("figure_id", nargs="?", choices=sorted(PRESETS))
    sub.add_parser("oracle-check", parents=[common], help="exact solution against contour quadrature")
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge built-in defaults, the config file and the flags (in rising priority)."""
    cfg = read_config(args.config) if args.config else {}
    out: dict[str, Any] = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        if key == "grid":
            out[key] = tuple(cfg.get("grid", ())) + tuple(flag or ())
        elif flag is not None:
            out[key] = flag
        elif key in cfg:
            out[key] = cfg[key]
        else:
            out[key] = default
    try:
        out["tol_quad"] = float(out["tol_quad"])
        out["seed"] = int(out["seed"])
        out["n_points"] = int(out["n_points"])
        out["workers"] = int(out["workers"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if out["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {out['format']!r}")
    if not 0 < out["tol_quad"] < 1:
        raise UsageError("tol-quad must lie in (0, 1)")
    if out["workers"] < 1 or out["n_points"] < 1:
        raise UsageError("workers and n-points must be positive")
    command = args.command
    preset_name = getattr(args, "figure_id", None) or out["preset"]
    if command == "figure" and preset_name is None:
        raise UsageError("figure needs a preset name")
    out["table"] = command
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise UsageError(f"unknown preset {preset_name!r}")
        preset = PRESETS[preset_name]
        if command not in ("figure", preset.table):
            raise UsageError(f"preset {preset_name!r} produces the {preset.table} table, not {command}")
        out.update(v0=out["v0"] or preset.v0, x=out["x"] or preset.x, t=out["t"] or preset.t or None)
        out["table"] = preset.table
        out["preset"] = preset_name
    for spec in out["grid"]:
        axis, _, text = spec.partition("=")
        if axis not in ("v0", "x", "t") or not text:
            raise UsageError(f"--grid expects v0=..., x=... or t=..., got {spec!r}")
        out[axis] = text
    return out


# ---------------------------------------------------------------- tables


def _axis(cfg: dict, name: str, required: bool = True) -> Optional[list[float]]:
    text = cfg.get(name)
    if text is None:
        if required:
            raise UsageError(f"--{name} is required for {cfg['table']}")
        return None
    return parse_axis(str(text))


def _norm(v0: float, rtol: float) -> float:
    return 1.0 if v0 == 0 else norm_factor(make_params(v0), rtol=rtol)


def _density_cell(cell, rtol):
    v0, x, t = cell
    p = make_params(v0)
    n = _norm(v0, rtol)
    s, o = complex(psi_saddle(p, x, t)), complex(psi_pole(p, x, t))
    return (
        v0,
        x,
        t,
        n,
        abs(complex(psi_exact(p, x, t))) ** 2 / n,
        float(density_saddle(p, x, t)) / n,
        float(density_pole(p, x, t)) / n,
        float(psi_interference(p, x, t)) / n,
        abs(s + o) ** 2 / n,
    )


def _flux_cell(cell, rtol):
    v0, x, t = cell
    return v0, x, t, float(flux(make_params(v0), x, t))


def _ratio_cell(cell, rtol):
    v0, x, t = cell
    return v0, x, t, float(ratio_R(make_params(v0), x, t))


def _times_cell(cell, rtol):
    v0, x = cell
    p = make_params(v0)
    scales = classify_crossings(p, x)
    density = None
    if scales.t_p is not None:
        density = abs(complex(psi_exact(p, x, scales.t_p))) ** 2 / norm_factor(p, rtol=rtol)
    try:
        t_dit = dit_first_minimum_time(p, x)
    except NoMinimum:
        t_dit = None
    return (
        v0,
        x,
        scales.t_c,
        scales.bl_time,
        scales.t_max_saddle,
        scales.scenario.value,
        len(scales.crossings),
        scales.t_p,
        density,
        t_dit,
    )


def _run_cell(fn: Callable, names: Sequence[str], rtol: float, cell):
    try:
        return fn(cell, rtol)
    except SourceModelError as exc:
        raise CellError(dict(zip(names, cell)), exc) from exc


def _scan(fn, names, cells, rtol, workers):
    job = partial(_run_cell, fn, names, rtol)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, cells, chunksize=16))
    else:
        rows = [job(c) for c in cells]
    return sorted(rows, key=lambda r: tuple(r[: len(names)]))


def build_table(cfg: dict) -> tuple[list[tuple], dict]:
    table = cfg["table"]
    rtol = cfg["tol_quad"]
    workers = cfg["workers"]
    extra: dict[str, Any] = {}
    if table in ("density", "flux", "ratio"):
        v0s, xs, ts = _axis(cfg, "v0"), _axis(cfg, "x"), _axis(cfg, "t")
        cells = [(v, x, t) for v in v0s for x in xs for t in ts]
        fn = {"density": _density_cell, "flux": _flux_cell, "ratio": _ratio_cell}[table]
        rows = _scan(fn, ("v0", "x", "t"), cells, rtol, workers)
    elif table == "times":
        v0s, xs = _axis(cfg, "v0"), _axis(cfg, "x")
        rows = _scan(_times_cell, ("v0", "x"), [(v, x) for v in v0s for x in xs], rtol, workers)
    elif table == "dit-map":
        v0s, xs = _axis(cfg, "v0"), _axis(cfg, "x")
        try:
            points = dit_amplitude_map(v0s, xs)
        except SourceModelError as exc:
            raise CellError({"v0": v0s, "x": xs}, exc) from exc
        rows = [(q.v0, q.x, q.t_min1, q.amplitude) for q in points]
    elif table == "oracle-check":
        rows, extra = _oracle_rows(cfg)
    else:  # pragma: no cover - guarded by argparse
        raise UsageError(f"unknown table {table!r}")
    return rows, extra


def _oracle_rows(cfg):
    rng = np.random.default_rng(cfg["seed"])
    rows = []
    skipped = 0
    while len(rows) < cfg["n_points"]:
        v0 = float(rng.uniform(0.0, 1.0))
        x = float(rng.uniform(0.1, 10.0))
        t = float(rng.uniform(0.05, 50.0))
        p = make_params(v0)
        if abs(t - float(p.t_c(x))) < 0.01:
            skipped += 1
            continue
        try:
            quad_value = psi_quadrature(p, x, t, tol=min(cfg["tol_quad"], 1e-12))
        except PoleProximity:
            skipped += 1
            continue
        except SourceModelError as exc:
            raise CellError({"v0": v0, "x": x, "t": t}, exc) from exc
        exact = complex(psi_exact(p, x, t))
        err = abs(exact - quad_value) / abs(quad_value)
        rows.append((len(rows), v0, x, t, exact.real, exact.imag, quad_value.real, quad_value.imag, err))
    worst = max(r[-1] for r in rows)
    return rows, {"max_rel_err": worst, "skipped_near_pole": skipped}


# ---------------------------------------------------------------- output


def _tool_version() -> str:
    try:
        return importlib_metadata.version("artifact")
    except importlib_metadata.PackageNotFoundError:
        return __version__


def format_number(value) -> str:
    """Shortest round-trip text; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def _json_value(value):
    if isinstance(value, (float, np.floating)) and not math.isfinite(float(value)):
        return format_number(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def render(columns: Sequence[str], rows: Sequence[tuple], meta: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "metadata": {k: _json_value(v) for k, v in meta.items()},
            "records": [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}={format_number(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def _metadata(cfg: dict, extra: dict) -> dict:
    meta = {
        "tool": "evanescent-source",
        "version": _tool_version(),
        "command": cfg["table"],
        "preset": cfg.get("preset") or "",
        "v0": cfg.get("v0") or "",
        "x": cfg.get("x") or "",
        "t": cfg.get("t") or "",
        "tol_quad": cfg["tol_quad"],
        "units": "lengths 1/Im k0, times 2m/(hbar (Im k0)^2)",
    }
    if cfg["table"] == "oracle-check":
        meta["seed"] = cfg["seed"]
        meta["n_points"] = cfg["n_points"]
    meta.update(extra)
    return meta


def _emit_error(kind: str, message: str, cell: Optional[dict], code: int) -> None:
    record = {"error": kind, "message": message, "exit_code": code}
    if cell is not None:
        record["cell"] = {k: _json_value(v) for k, v in cell.items()}
    sys.stderr.write(json.dumps(record) + "\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        rows, extra = build_table(cfg)
        text = render(COLUMNS[cfg["table"]], rows, _metadata(cfg, extra), cfg["format"])
        if cfg["out"] == "-":
            sys.stdout.write(text)
        else:
            try:
                with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
            except OSError as exc:
                raise UsageError(f"cannot write {cfg['out']!r}: {exc}") from None
    except UsageError as exc:
        _emit_error("UsageError", str(exc), None, EXIT_USAGE)
        return EXIT_USAGE
    except CellError as exc:
        code = EXIT_USAGE if isinstance(exc.cause, (DomainError, InvalidInput)) else EXIT_NUMERICAL
        _emit_error(type(exc.cause).__name__, str(exc.cause), exc.cell, code)
        return code
    except SourceModelError as exc:
        code = EXIT_USAGE if isinstance(exc, (DomainError, InvalidInput)) else EXIT_NUMERICAL
        _emit_error(type(exc).__name__, str(exc), None, code)
        return code
    return 0


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream reader closed early (e.g. ``| head``); not an error of ours
        sys.stdout = None  # type: ignore[assignment]
        code = 0
    sys.exit(code)


__all__ = ["COLUMNS", "PRESETS", "build_parser", "main", "parse_axis", "render", "run"]
