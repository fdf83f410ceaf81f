"""Command-line runner: scenario verification, parameter sweeps, exact analysis tables.

    python -m biharm verify scenario.json
    python -m biharm sweep --entry small_hypersphere --param a --from 0.5 --to 0.95 --step 0.05 --check residual_general
    python -m biharm analysis --m-from 2 --m-to 12 --c -1,1
    python -m biharm catalog list

Exit status: 0 all expectations met, 1 expectation failure, 2 configuration
error, 3 engine error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from typing import Callable

import numpy as np

from . import analysis, biharmonic, catalog, geometry, spectral
from .jetcalc import FdScheme

SCHEMA = "biharm-scenario/1"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ENGINE = 0, 1, 2, 3
DEFAULT_GRID = 5
DEFAULT_VALUE_TOL = 1e-6
MAX_GRID = 12


class ConfigError(ValueError):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


# ---------------------------------------------------------------------------
# settings and checks


class Settings:
    def __init__(self, grid=DEFAULT_GRID, tol=biharmonic.DEFAULT_TOL, fd_step=1e-3, stencil_order=4,
                 richardson=True, resolution=None, value_tol=DEFAULT_VALUE_TOL, spectral_tol=spectral.SPECTRAL_TOL):
        self.grid = int(grid)
        self.tol = float(tol)
        self.scheme = FdScheme(step=float(fd_step), stencil_order=int(stencil_order), richardson=bool(richardson))
        self.resolution = resolution
        self.value_tol = float(value_tol)
        self.spectral_tol = float(spectral_tol)

    def echo(self) -> dict:
        return {"grid": self.grid, "tol": self.tol, "fd_step": self.scheme.step,
                "stencil_order": self.scheme.stencil_order, "richardson": self.scheme.richardson,
                "resolution": self.resolution, "value_tol": self.value_tol, "spectral_tol": self.spectral_tol}


def _points(patch, s: Settings):
    return patch.sample_points(s.grid)


def _check_residual_general(patch, s):
    r = biharmonic.residual_general(patch, _points(patch, s), s.scheme, s.tol)
    return {**r.max_norms, "tension_max": r.tension_max, "verdict": r.verdict, "failures": r.failures}


def _check_residual_hypersurface(patch, s):
    r = biharmonic.residual_hypersurface(patch, _points(patch, s), s.scheme, s.tol)
    return {**r.max_norms, "tension_max": r.tension_max, "verdict": r.verdict,
            "A_squared": r.extras.get("A_squared_max"), "A_squared_minus_mc": r.extras.get("A_squared_minus_mc"),
            "cmc": r.extras.get("cmc"), "failures": r.failures}


def _check_bitension(patch, s):
    r = biharmonic.bitension_report(patch, _points(patch, s), s.scheme, s.tol)
    return {"tau2": r.max_norms["tau2"], "tension_max": r.tension_max, "verdict": r.verdict,
            "tangency": r.extras.get("tangency")}


def _check_identity_cmc(patch, s):
    r = biharmonic.identity_cmc(patch, _points(patch, s), s.scheme, s.tol)
    return {"residual": r.residual, "slack": r.slack, "holds": r.holds}


def _check_pseudo_umbilical(patch, s):
    r = biharmonic.pseudo_umbilical_check(patch, _points(patch, s), s.scheme, s.tol)
    return {"is_pu": r.is_pu, "deviation": r.deviation, "second_residual": r.second_residual,
            "lambda": [float(v) for v in np.mean(r.lambda_values, axis=0)]}


def _check_parallel_H(patch, s):
    v = biharmonic.max_normal_derivative(patch, _points(patch, s), s.scheme)
    return {"parallel": v <= s.tol, "max_nabla_H": v}


def _check_composition(patch, s):
    if patch.radius is None or not 0 < patch.radius < 1:
        raise ConfigError("composition_codim2 needs an entry declared in a sphere of radius a in (0, 1)")
    r = biharmonic.composition_codim2(patch, float(patch.radius), _points(patch, s), s.scheme, s.tol)
    return {"a": r.a, "tau_residual": r.tau_residual, "tau2_residual": r.tau2_residual,
            "tau_j_sq": float(np.mean(r.tau_j_sq)), "tau_j_sq_required": r.tau_j_sq_required,
            "tau_j_sq_error": r.tau_j_sq_error, "verdict": r.verdict}


def _mesh(patch, s):
    return spectral.build_mesh(patch, s.resolution, open_ok=True)


def _check_chen_type(patch, s):
    mesh = _mesh(patch, s)
    r = spectral.chen_type(mesh, 3, s.spectral_tol)
    return {"chen_type": r.k, "eigenvalues": r.eigenvalues, "residual": r.residual,
            "inconclusive": r.inconclusive, "note": r.note, "resolution": list(mesh.resolution),
            "open_mesh": not patch.fully_periodic}


def _check_caract_HH(patch, s):
    mesh = _mesh(patch, s)
    r = spectral.verify_caract_bih_HH(mesh)
    return {"residual": r.residual, "weighted_rms": r.weighted_rms, "mean_curvature": r.mean_curvature,
            "resolution": list(mesh.resolution)}


def _check_scalar_curvature(patch, s):
    v = geometry.scalar_curvature(patch, _points(patch, s))
    return {"min": float(v.min()), "max": float(v.max())}


def _check_quasi_umbilical(patch, s):
    return {"quasi_umbilical": geometry.quasi_umbilical_check(patch, _points(patch, s))}


CHECKS: dict[str, Callable] = {
    "residual_general": _check_residual_general,
    "residual_hypersurface": _check_residual_hypersurface,
    "bitension": _check_bitension,
    "identity_cmc": _check_identity_cmc,
    "pseudo_umbilical": _check_pseudo_umbilical,
    "parallel_H": _check_parallel_H,
    "composition_codim2": _check_composition,
    "chen_type": _check_chen_type,
    "caract_bih_HH": _check_caract_HH,
    "scalar_curvature": _check_scalar_curvature,
    "quasi_umbilical": _check_quasi_umbilical,
}

# catalog expectation key -> (check, field)
CATALOG_KEYS = {
    "verdict": [("residual_general", "verdict"), ("residual_hypersurface", "verdict"), ("bitension", "verdict")],
    "normal_residual": [("residual_hypersurface", "first")],
    "chen_type": [("chen_type", "chen_type")],
    "eigenvalues": [("chen_type", "eigenvalues")],
    "pseudo_umbilical": [("pseudo_umbilical", "is_pu")],
    "parallel_H": [("parallel_H", "parallel")],
}


# ---------------------------------------------------------------------------
# expectations


def _compare(value, expected, tol):
    if isinstance(expected, (bool, str)) or expected is None:
        return value == expected
    if isinstance(expected, (list, tuple)):
        if not isinstance(value, (list, tuple)) or len(value) != len(expected):
            return False
        return all(_compare(v, e, tol) for v, e in zip(sorted(value), sorted(expected)))
    if value is None or isinstance(value, (str, bool)):
        return False
    return abs(float(value) - float(expected)) <= tol


def _expectation_items(entry_name, params, checks, scenario_expect):
    """Yield (check, field, expected, tol, provenance)."""
    items = []
    if entry_name in catalog.ENTRIES:
        for key, exp in catalog.expectations(entry_name, params).items():
            tol = exp.tol if exp.tol is not None else DEFAULT_VALUE_TOL
            if key == "mean_curvature":
                items.append(("mean_curvature", "value", exp.value, tol, exp.provenance))
            for check, fld in CATALOG_KEYS.get(key, []):
                if check in checks:
                    items.append((check, fld, exp.value, tol, exp.provenance))
    overridden = {(c, f) for c, fields in scenario_expect.items() for f in fields}
    items = [it for it in items if (it[0], it[1]) not in overridden]
    for check, fields in scenario_expect.items():
        for fld, val in fields.items():
            tol = DEFAULT_VALUE_TOL
            if isinstance(val, dict):
                tol = float(val.get("tol", tol))
                val = val["value"]
            items.append((check, fld, val, tol, "scenario"))
    return items


# ---------------------------------------------------------------------------
# scenario


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def load_scenario(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}") from None
    _require(isinstance(data, dict), "scenario must be a JSON object")
    _require(data.get("schema") == SCHEMA, f"field 'schema': expected {SCHEMA!r}")
    _require(data.get("entry") in catalog.ENTRIES, f"field 'entry': unknown catalog entry {data.get('entry')!r}")
    params = data.get("params", {})
    _require(isinstance(params, dict), "field 'params' must be an object")
    checks = data.get("checks", [])
    _require(isinstance(checks, list) and checks, "field 'checks' must be a non-empty list")
    for i, c in enumerate(checks):
        _require(c in CHECKS, f"field 'checks[{i}]': unknown check {c!r}")
    grid = data.get("grid", DEFAULT_GRID)
    _require(isinstance(grid, int) and 1 <= grid <= MAX_GRID, f"field 'grid': integer in [1, {MAX_GRID}]")
    res = data.get("resolution")
    if res is not None:
        res_list = res if isinstance(res, list) else [res]
        _require(all(isinstance(r, int) and spectral.MIN_RESOLUTION <= r <= 512 for r in res_list),
                 f"field 'resolution': integers in [{spectral.MIN_RESOLUTION}, 512]")
    expect = data.get("expect", {})
    _require(isinstance(expect, dict) and all(isinstance(v, dict) for v in expect.values()),
             "field 'expect' must map check names to objects")
    for c in expect:
        _require(c in CHECKS or c == "mean_curvature", f"field 'expect.{c}': unknown check")
    return data


def _settings_from(data: dict, overrides: dict) -> Settings:
    kw = {k: data[k] for k in ("grid", "tol", "fd_step", "stencil_order", "richardson", "resolution",
                               "value_tol", "spectral_tol") if k in data}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Settings(**kw)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"settings: {err}") from None


def run_scenario(data: dict, overrides: dict | None = None) -> tuple[dict, int]:
    """Execute a parsed scenario; returns (report, exit status)."""
    s = _settings_from(data, overrides or {})
    name = data["entry"]
    params = data.get("params", {})
    try:
        patch = catalog.build(name, params)
        geometry.validate_patch(patch)
    except (catalog.CatalogError, TypeError) as err:
        raise ConfigError(f"field 'params': {err}") from None
    checks = list(data["checks"])
    results, timing, engine_error = {}, {}, False
    for c in checks:
        t0 = time.perf_counter()
        try:
            results[c] = _jsonable(CHECKS[c](patch, s))
        except ConfigError:
            raise
        except Exception as err:  # engine errors are reported per check
            results[c] = {"error": f"{type(err).__name__}: {err}"}
            engine_error = True
        timing[c] = time.perf_counter() - t0
    H = np.linalg.norm(geometry.mean_curvature(patch, _points(patch, s)), axis=-1)
    results["mean_curvature"] = {"value": float(H.mean()), "min": float(H.min()), "max": float(H.max())}

    expectations = []
    all_ok = True
    for check, fld, val, tol, prov in _expectation_items(name, params, checks, data.get("expect", {})):
        got = results.get(check, {}).get(fld)
        ok = _compare(got, _jsonable(val), tol) if "error" not in results.get(check, {}) else False
        all_ok &= ok
        expectations.append({"check": check, "field": fld, "expected": _jsonable(val), "value": got,
                             "tol": tol, "provenance": prov, "pass": ok})
    status = EXIT_ENGINE if engine_error else (EXIT_OK if all_ok else EXIT_FAIL)
    report = {"scenario": {"schema": SCHEMA, "entry": name, "params": _jsonable(params), "checks": checks,
                           "patch": patch.name},
              "settings": s.echo(), "results": results, "expectations": expectations,
              "pass": all_ok and not engine_error, "exit_status": status,
              "timing": {k: round(v, 4) for k, v in timing.items()}}
    return report, status


# ---------------------------------------------------------------------------
# sweep


SWEEP_CHECKS = ("residual_general", "residual_hypersurface", "bitension")


def sweep_values(start: float, stop: float, step: float, include=()) -> list:
    if step <= 0 or stop < start:
        raise ConfigError("sweep needs step > 0 and to >= from")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    vals = {round(start + i * step, 12) for i in range(n)}
    vals.update(float(v) for v in include)
    return sorted(vals)


def sweep(entry: str, param: str, values, check: str = "residual_general", settings: Settings | None = None,
          base_params: dict | None = None) -> list:
    """One row per parameter value with residual norms, tension and verdict."""
    s = settings or Settings()
    if entry not in catalog.ENTRIES:
        raise ConfigError(f"unknown catalog entry {entry!r}")
    pdefs = catalog.ENTRIES[entry].params
    if param not in pdefs or pdefs[param].kind not in (int, float):
        raise ConfigError(f"entry {entry!r} has no numeric parameter {param!r}")
    if check not in SWEEP_CHECKS:
        raise ConfigError(f"sweep check must be one of {SWEEP_CHECKS}")
    rows = []
    for v in values:
        params = dict(base_params or {})
        params[param] = pdefs[param].kind(v)
        if entry == "clifford_product" and param == "r1":
            params["r2"] = math.sqrt(1.0 - v * v)
        patch = catalog.build(entry, params)
        pts = _points(patch, s)
        if check == "residual_general":
            rep = biharmonic.residual_general(patch, pts, s.scheme, s.tol)
        elif check == "residual_hypersurface":
            rep = biharmonic.residual_hypersurface(patch, pts, s.scheme, s.tol)
        else:
            rep = biharmonic.bitension_report(patch, pts, s.scheme, s.tol)
        row = {param: float(v)}
        row.update(rep.max_norms)
        row["residual"] = rep.max_residual
        row["tension"] = rep.tension_max
        row["verdict"] = rep.verdict
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# output


def to_csv(rows: list) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def to_table(rows: list) -> str:
    if not rows:
        return ""
    cols = list(rows[0].keys())
    cells = [[f"{r[c]:.6g}" if isinstance(r[c], float) else str(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _report_rows(report: dict) -> list:
    rows = []
    for e in report["expectations"]:
        rows.append({"check": e["check"], "field": e["field"], "value": _short(e["value"]),
                     "expected": _short(e["expected"]), "status": "pass" if e["pass"] else "FAIL"})
    for c, res in report["results"].items():
        if "error" in res:
            rows.append({"check": c, "field": "error", "value": res["error"], "expected": "", "status": "ERROR"})
    return rows


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# argument parsing


def _resolution_arg(text):
    vals = [int(v) for v in text.split(",") if v.strip()]
    return vals[0] if len(vals) == 1 else vals


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "table", "csv"], default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--fd-step", type=float, default=None)
    common.add_argument("--resolution", type=_resolution_arg, default=None)
    common.add_argument("--out", default=None)

    p = argparse.ArgumentParser(prog="biharm", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a scenario file")
    v.add_argument("scenario")

    sw = sub.add_parser("sweep", parents=[common], help="residuals along a parameter range (CSV)")
    sw.add_argument("--entry", required=True)
    sw.add_argument("--param", required=True)
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--step", type=float, required=True)
    sw.add_argument("--check", default="residual_general")
    sw.add_argument("--include", type=_float_list, default=[], help="extra parameter values, comma separated")
    sw.add_argument("--grid", type=int, default=3)

    a = sub.add_parser("analysis", parents=[common], help="exact verdict table")
    a.add_argument("--m-from", type=int, default=2)
    a.add_argument("--m-to", type=int, default=12)
    a.add_argument("--c", default="-1,1")

    c = sub.add_parser("catalog", parents=[common], help="catalog commands")
    c.add_argument("action", choices=["list"])
    return p


def _join_negative_values(argv: list) -> list:
    """Let ``--c -1,1`` through: argparse would read a leading dash as an option."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in ("--c", "--include") and i + 1 < len(argv) and argv[i + 1][:1] == "-":
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return _dispatch(args)
    except ConfigError as err:
        sys.stderr.write(f"configuration error: {err}\n")
        return EXIT_CONFIG
    except OSError as err:
        sys.stderr.write(f"configuration error: {err}\n")
        return EXIT_CONFIG


def _dispatch(args) -> int:
    fmt = args.format
    if args.command == "verify":
        with open(args.scenario, encoding="utf-8") as fh:
            data = load_scenario(fh.read())
        overrides = {"tol": args.tol, "fd_step": args.fd_step, "resolution": args.resolution}
        report, status = run_scenario(data, overrides)
        fmt = fmt or "json"
        if fmt == "json":
            _emit(to_json(report), args.out)
        elif fmt == "csv":
            _emit(to_csv(_report_rows(report)), args.out)
        else:
            head = f"{report['scenario']['patch']}: {'PASS' if report['pass'] else 'FAIL'}\n"
            _emit(head + to_table(_report_rows(report)), args.out)
        return status

    if args.command == "sweep":
        s = _settings_from({"grid": args.grid}, {"tol": args.tol, "fd_step": args.fd_step})
        values = sweep_values(args.start, args.stop, args.step, args.include)
        try:
            rows = sweep(args.entry, args.param, values, args.check, s)
        except catalog.CatalogError as err:
            raise ConfigError(str(err)) from None
        fmt = fmt or "csv"
        _emit(to_json(rows) if fmt == "json" else to_table(rows) if fmt == "table" else to_csv(rows), args.out)
        return EXIT_OK

    if args.command == "analysis":
        try:
            cs = [Fraction(c.strip()) for c in args.c.split(",") if c.strip()]
        except ValueError:
            raise ConfigError(f"--c: cannot parse {args.c!r}") from None
        if args.m_from < 1 or args.m_to < args.m_from:
            raise ConfigError("--m-from must be >= 1 and <= --m-to")
        rows = analysis.analysis_table(range(args.m_from, args.m_to + 1), cs)
        fmt = fmt or "table"
        _emit(to_json(rows) if fmt == "json" else to_csv(rows) if fmt == "csv" else to_table(rows), args.out)
        return EXIT_OK

    rows = []
    for name, e in catalog.ENTRIES.items():
        params = ", ".join(f"{k}={p.default if p.default is not None else '-'} ({p.valid})" for k, p in e.params.items())
        rows.append({"name": name, "params": params, "description": e.doc})
    fmt = fmt or "table"
    _emit(to_json(rows) if fmt == "json" else to_csv(rows) if fmt == "csv" else to_table(rows), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
