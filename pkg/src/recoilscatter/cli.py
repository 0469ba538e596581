"""Command-line front end.

Subcommands: ``spectrum``, ``point``, ``peaks``, ``ld-limit`` and
``validate``.  Runs are configured by a flat TOML document and/or flags;
flags win over config keys.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 unconverged points, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import re
import sys
from dataclasses import dataclass

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

import numpy as np

from .channels import outgoing_frequency
from .kernel import QuadratureConfig
from .limits import ld_amplitudes
from .model import ModelParams
from .spectrum import SweepRequest, find_peaks, solve_point, sweep
from .validation import run_validation

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "serialize_config",
    "build_config",
    "run_spectrum",
    "format_points",
    "main",
]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_UNCONVERGED = 3
EXIT_IO = 4

BASE_COLUMNS = ("omega_k_over_Omega", "R", "T", "unitarity_defect", "n_max_used", "converged")
PHYSICS_KEYS = ("epsilon_ld", "omega_ratio", "gamma_ratio")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    epsilon_ld: float
    omega_ratio: float
    gamma_ratio: float
    omega_k_min: float = 0.7
    omega_k_max: float = 2.2
    n_points: int = 400
    n_max: int | None = None
    auto_truncation: bool = True
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    output: str = "-"
    format: str = "csv"
    channel_detail: bool = False

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.epsilon_ld, self.omega_ratio, self.gamma_ratio)

    def sweep_request(self) -> SweepRequest:
        return SweepRequest(
            params=self.params,
            omega_k_min=self.omega_k_min,
            omega_k_max=self.omega_k_max,
            n_points=self.n_points,
            n_max=self.n_max,
            quad=QuadratureConfig(abs_tol=self.abs_tol, rel_tol=self.rel_tol),
            auto_truncation=self.auto_truncation,
        )


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_FLOAT_KEYS = {"epsilon_ld", "omega_ratio", "gamma_ratio", "omega_k_min", "omega_k_max",
               "abs_tol", "rel_tol"}
_INT_KEYS = {"n_points", "n_max"}
_BOOL_KEYS = {"auto_truncation", "channel_detail"}
_STR_KEYS = {"output", "format"}


def _line_of(key, text):
    if text is None:
        return None
    pat = re.compile(rf'^\s*(?:{re.escape(key)}|"{re.escape(key)}"|\'{re.escape(key)}\')\s*=')
    for i, line in enumerate(text.splitlines(), 1):
        if pat.match(line):
            return i
    return None


def _where(key, text):
    line = _line_of(key, text)
    return f" (line {line})" if line is not None else ""


def _coerce(key, value, text):
    if key in _FLOAT_KEYS:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        want = "a number"
        value = float(value) if ok else value
    elif key in _INT_KEYS:
        ok = isinstance(value, int) and not isinstance(value, bool)
        want = "an integer"
    elif key in _BOOL_KEYS:
        ok = isinstance(value, bool)
        want = "true or false"
    else:
        ok = isinstance(value, str)
        want = "a string"
    if not ok:
        raise ConfigError(f"type mismatch for '{key}'{_where(key, text)}: expected {want}, "
                          f"got {type(value).__name__} {value!r}")
    return value


def build_config(values: dict, text: str | None = None, require=PHYSICS_KEYS) -> RunConfig:
    """Validate a flat mapping of config keys and fill in defaults.

    `text` is the source document, used only to point errors at a line.
    Keys in `require` must be present; other missing physics keys get a
    placeholder of 1.0 (used by subcommands that ignore them).
    """
    for key, value in values.items():
        if isinstance(value, dict):
            raise ConfigError(f"config must be flat; '{key}' is a table")
    unknown = sorted(set(values) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config key '{unknown[0]}'{_where(unknown[0], text)}")
    clean = {key: _coerce(key, value, text) for key, value in values.items()}
    for key in PHYSICS_KEYS:
        if key not in clean:
            if key in require:
                raise ConfigError(f"missing required config key '{key}'")
            clean[key] = 1.0

    for key in _FLOAT_KEYS:
        if key in clean and not (math.isfinite(clean[key]) and clean[key] > 0):
            raise ConfigError(f"'{key}' must be positive and finite, got {clean[key]!r}"
                              f"{_where(key, text)}")
    cfg = RunConfig(**clean)
    if not cfg.omega_k_max > cfg.omega_k_min:
        raise ConfigError("omega_k_max must exceed omega_k_min")
    if cfg.n_points < 2:
        raise ConfigError(f"n_points must be at least 2{_where('n_points', text)}")
    if cfg.n_max is not None and cfg.n_max < 0:
        raise ConfigError(f"n_max must be non-negative{_where('n_max', text)}")
    if not cfg.auto_truncation and cfg.n_max is None:
        raise ConfigError("auto_truncation = false needs an explicit n_max")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be 'csv' or 'json', got {cfg.format!r}{_where('format', text)}")
    if not cfg.output:
        raise ConfigError("output must be a path or '-'")
    return cfg


def parse_config(text: str, require=PHYSICS_KEYS) -> RunConfig:
    """Parse a flat TOML document into a `RunConfig`."""
    try:
        values = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    return build_config(values, text, require)


def serialize_config(cfg: RunConfig) -> str:
    """Flat TOML text that `parse_config` maps back to `cfg`."""
    lines = []
    for name in _FIELDS:
        value = getattr(cfg, name)
        if value is None:
            continue
        if isinstance(value, bool):
            lines.append(f"{name} = {'true' if value else 'false'}")
        elif isinstance(value, float):
            lines.append(f"{name} = {value!r}")
        elif isinstance(value, int):
            lines.append(f"{name} = {value}")
        else:
            # JSON string escapes are valid TOML basic-string escapes, except
            # that TOML wants DEL escaped and no surrogate pairs
            quoted = json.dumps(value, ensure_ascii=False).replace("\x7f", "\\u007f")
            lines.append(f"{name} = {quoted}")
    return "\n".join(lines) + "\n"


# -- output -----------------------------------------------------------------

def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _channel_columns(points):
    width = 0
    for p in points:
        if p.channels is not None:
            width = max(width, p.channels.n_channels)
    cols = []
    for n in range(width):
        cols += [f"k_{n}", f"r2_{n}", f"t2_{n}"]
    return width, cols


def _rows(points, channel_detail, omega):
    width, extra = _channel_columns(points) if channel_detail else (0, [])
    header = list(BASE_COLUMNS) + extra
    rows = []
    for p in points:
        row = [p.omega_k_over_Omega, p.R, p.T, p.unitarity_defect, p.n_max_used, bool(p.converged)]
        if channel_detail:
            ch = p.channels
            for n in range(width):
                k_n = p.omega_k_over_Omega - n * omega
                if ch is not None and n < ch.n_channels:
                    row += [ch.k[n], abs(ch.r[n]) ** 2, abs(ch.t[n]) ** 2]
                elif ch is None:
                    row += [k_n, math.nan, math.nan]
                else:
                    row += [k_n, 0.0, 0.0]
        rows.append(row)
    return header, rows


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def format_points(points, fmt="csv", channel_detail=False, omega=0.0) -> str:
    """Serialize spectrum points as CSV (17 significant digits) or JSON."""
    header, rows = _rows(points, channel_detail, omega)
    if fmt == "json":
        objs = [{h: _json_value(v) for h, v in zip(header, row)} for row in rows]
        return json.dumps(objs, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def _write(text, path):
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def run_spectrum(cfg: RunConfig, progress=None):
    """Sweep, write the table, return ``(exit_code, points)``."""
    points = sweep(cfg.sweep_request(), progress=progress)
    text = format_points(points, cfg.format, cfg.channel_detail, cfg.omega_ratio)
    try:
        _write(text, cfg.output)
    except OSError as exc:
        print(f"error: cannot write {cfg.output}: {exc}", file=sys.stderr)
        return EXIT_IO, points
    bad = [p for p in points if not p.converged]
    if bad:
        print(f"warning: {len(bad)} of {len(points)} points unconverged "
              f"(first at omega_k = {bad[0].omega_k_over_Omega:.6g})", file=sys.stderr)
        return EXIT_UNCONVERGED, points
    return EXIT_OK, points


# -- argument handling -------------------------------------------------------

def _add_run_options(p, grid=True):
    p.add_argument("--config", help="flat TOML config file")
    p.add_argument("--epsilon-ld", type=float)
    p.add_argument("--omega-ratio", type=float)
    p.add_argument("--gamma-ratio", type=float)
    if grid:
        p.add_argument("--omega-k-min", type=float)
        p.add_argument("--omega-k-max", type=float)
        p.add_argument("--n-points", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--auto-truncation", dest="auto_truncation", action="store_true", default=None)
    p.add_argument("--fixed-truncation", dest="auto_truncation", action="store_false")
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--channel-detail", dest="channel_detail", action="store_true", default=None)


def _parser():
    ap = argparse.ArgumentParser(prog="recoilscatter",
                                 description="Single-photon scattering off a trapped two-level scatterer.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="reflection/transmission over an omega_k grid")
    _add_run_options(p)

    p = sub.add_parser("point", help="channel-resolved amplitudes at one omega_k")
    _add_run_options(p, grid=False)
    p.add_argument("--omega-k", type=float, required=True)

    p = sub.add_parser("peaks", help="sweep and list reflection peaks")
    _add_run_options(p)
    p.add_argument("--min-prominence", type=float, default=0.02)

    p = sub.add_parser("ld-limit", help="analytic Lorentzian spectrum without recoil")
    _add_run_options(p)

    p = sub.add_parser("validate", help="run the built-in invariant suite")
    p.add_argument("--quick", action="store_true", help="skip the slow kernel oracle")
    return ap


def _config_from_args(args, require=PHYSICS_KEYS):
    values, text = {}, None
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise _IOFailure(f"cannot read config {args.config}: {exc}") from None
        try:
            values = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config syntax error: {exc}") from None
    for name in _FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return build_config(values, text, require)


class _IOFailure(Exception):
    pass


def _cmd_spectrum(args):
    cfg = _config_from_args(args)
    code, _ = run_spectrum(cfg)
    return code


def _cmd_point(args):
    cfg = _config_from_args(args)
    if not args.omega_k > 0:
        raise ConfigError("--omega-k must be positive")
    params = cfg.params
    quad = QuadratureConfig(abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol)
    pt = solve_point(args.omega_k, params, cfg.n_max, quad, escalate=cfg.auto_truncation)
    ch = pt.channels
    rows = []
    for n in range(ch.n_channels):
        is_open = bool(ch.open[n])
        w_out = outgoing_frequency(n, args.omega_k, params) if is_open else math.nan
        rows.append({"n": n, "open": is_open, "k_n": float(ch.k[n]), "omega_out": w_out,
                     "r2_n": float(abs(ch.r[n]) ** 2), "t2_n": float(abs(ch.t[n]) ** 2)})
    if cfg.format == "json":
        doc = {"omega_k_over_Omega": pt.omega_k_over_Omega, "R": pt.R, "T": pt.T,
               "unitarity_defect": pt.unitarity_defect, "n_max_used": pt.n_max_used,
               "converged": pt.converged,
               "channels": [{k: _json_value(v) for k, v in r.items()} for r in rows]}
        text = json.dumps(doc, indent=1) + "\n"
    else:
        out = io.StringIO()
        out.write(f"omega_k/Omega = {_num(pt.omega_k_over_Omega)}  R = {_num(pt.R)}  T = {_num(pt.T)}  "
                  f"|R+T-1| = {pt.unitarity_defect:.3e}  n_max = {pt.n_max_used}  "
                  f"converged = {_num(pt.converged)}\n")
        out.write(f"{'n':>4} {'open':>5} {'k_n':>12} {'omega_out':>12} {'|r_n|^2':>14} {'|t_n|^2':>14}\n")
        for r in rows:
            w = f"{r['omega_out']:12.6f}" if r["open"] else f"{'-':>12}"
            out.write(f"{r['n']:>4} {str(r['open']).lower():>5} {r['k_n']:12.6f} {w} "
                      f"{r['r2_n']:14.6e} {r['t2_n']:14.6e}\n")
        text = out.getvalue()
    _write_or_fail(text, cfg.output)
    return EXIT_OK if pt.converged else EXIT_UNCONVERGED


def _write_or_fail(text, path):
    try:
        _write(text, path)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from None


def _cmd_peaks(args):
    cfg = _config_from_args(args)
    if not args.min_prominence > 0:
        raise ConfigError("--min-prominence must be positive")
    points = sweep(cfg.sweep_request())
    peaks = find_peaks(points, args.min_prominence, cfg.omega_ratio)
    cols = ("location", "height", "nearest_resonance_index", "shift", "prominence")
    if cfg.format == "json":
        text = json.dumps([{c: _json_value(getattr(p, c)) for c in cols} for p in peaks], indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for p in peaks:
            w.writerow([_num(getattr(p, c)) for c in cols])
        text = buf.getvalue()
    _write_or_fail(text, cfg.output)
    return EXIT_OK if all(p.converged for p in points) else EXIT_UNCONVERGED


def _cmd_ld_limit(args):
    cfg = _config_from_args(args, require=("gamma_ratio",))
    grid = np.linspace(cfg.omega_k_min, cfg.omega_k_max, cfg.n_points)
    t, r = ld_amplitudes(grid, 1.0, cfg.gamma_ratio)
    R = np.abs(r) ** 2
    T = np.abs(t) ** 2
    cols = ("omega_k_over_Omega", "R", "T")
    if cfg.format == "json":
        text = json.dumps([dict(zip(cols, map(float, row))) for row in zip(grid, R, T)], indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in zip(grid, R, T):
            w.writerow([_num(v) for v in row])
        text = buf.getvalue()
    _write_or_fail(text, cfg.output)
    return EXIT_OK


def _cmd_validate(args):
    results = run_validation(quick=args.quick)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "point": _cmd_point,
    "peaks": _cmd_peaks,
    "ld-limit": _cmd_ld_limit,
    "validate": _cmd_validate,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (_IOFailure, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
