"""Command-line front end: configuration, dispatch and reproducible reports.

Usage::

    gkdv-stability indices --preset p5-near-solitary
    gkdv-stability sweep --p 5 --a 0:0.02:5 --E -0.05:-0.0001:5 --format csv --out map.csv
    gkdv-stability validate --config run.json

Settings are resolved in the order defaults < preset < config file < flags.
Reports are canonical JSON (sorted keys, shortest round-trip floats) or CSV,
and carry the software version and a SHA-256 hash of the resolved config, so
identical inputs produce identical bytes.

Exit status: 0 success, 2 configuration error, 3 computation error,
4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from typing import Any, Dict, List, Optional, Sequence, Tuple

import jsonschema
import numpy as np

from . import __version__
from .errors import ConfigError, GKdVError
from .indices import classify, compute_indices
from .monodromy import monodromy_derivatives
from .nonlinearity import Nonlinearity, WaveParameters
from .profile import (QUANTITIES, PARAMETERS, conserved_quantities, find_turning_points,
                      gradients, reconstruct_profile)
from .spectrum import (BandPoint, hill_spectrum, kappa_grid, normal_form_roots, real_axis_scan,
                       trace_bands)
from .validation import gradient_identity_errors, jacobian_relation_errors, run_invariant_suite

SCHEMA_VERSION = "1.0"
COMMANDS = ("wave", "indices", "band-trace", "real-scan", "hill", "sweep", "validate")
EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_VALIDATION = 0, 2, 3, 4

PRESETS: Dict[str, Dict[str, Any]] = {
    # KdV cnoidal waves
    "kdv-cnoidal": {"p": 1.0, "a": 0.0, "E": -0.1, "c": 1.0},
    # modified KdV, right-hand well
    "mkdv": {"p": 2.0, "a": 0.0, "E": -0.1, "c": 1.0},
    # p = 5 close to the solitary wave (long period)
    "p5-near-solitary": {"p": 5.0, "a": 1e-4, "E": -1e-6, "c": 1.0},
    "p5-long-period": {"p": 5.0, "a": 0.0, "E": -1e-4, "c": 1.0},
    # stability map over (a, E) for p = 5
    "p5-sweep": {"p": 5.0, "a": {"start": 0.0, "stop": 0.02, "num": 5},
                 "E": {"start": -0.05, "stop": -1e-4, "num": 5}, "c": 1.0},
}

BAND_COLUMNS = ("branch", "kappa", "re_mu", "im_mu", "residual")
SWEEP_COLUMNS = ("index", "p", "a", "E", "c", "status", "error", "T", "tr2", "tr3",
                 "orientation_jacobian", "delta", "modulational", "real_axis")


# ----------------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Resolved run settings; grids are explicit lists of floats."""

    command: str = "indices"
    p: float = 1.0
    a: List[float] = field(default_factory=lambda: [0.0])
    E: List[float] = field(default_factory=lambda: [-0.1])
    c: List[float] = field(default_factory=lambda: [1.0])
    tol: float = 1e-13
    nodes: int = 512
    kappa_max: float = 0.2
    kappa_steps: int = 16
    mu_max: Optional[float] = None
    scan_n: int = 2048
    hill_N: int = 128
    gamma: List[float] = field(default_factory=lambda: [0.0, 0.05, 0.1, 0.2])
    workers: int = 1
    format: str = "json"
    out: Optional[str] = None
    preset: Optional[str] = None

    def canonical(self) -> Dict[str, Any]:
        """Everything that influences the report content (the output path does not)."""
        d = asdict(self)
        d.pop("out")
        return d

    def config_hash(self) -> str:
        text = json.dumps(_clean(self.canonical()), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def single(self) -> WaveParameters:
        for name in ("a", "E", "c"):
            if len(getattr(self, name)) != 1:
                raise ConfigError(f"command '{self.command}' needs a single value for {name}")
        return WaveParameters(self.a[0], self.E[0], self.c[0], Nonlinearity.power(self.p))


def _load_schema(name: str) -> dict:
    return json.loads(resources.files(__package__).joinpath("schemas", name).read_text())


def parse_grid(value: Any) -> List[float]:
    """Grid from a number, a list, ``{start, stop, num}``, ``"start:stop:num"`` or ``"x,y,z"``."""
    if isinstance(value, bool):
        raise ConfigError(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, list):
        return [float(v) for v in value]
    if isinstance(value, dict):
        return [float(v) for v in np.linspace(value["start"], value["stop"], int(value["num"]))]
    if isinstance(value, str):
        text = value.strip()
        try:
            if ":" in text:
                start, stop, num = text.split(":")
                n = int(num)
                if n < 0:
                    raise ValueError
                return [float(v) for v in np.linspace(float(start), float(stop), n)]
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"cannot parse grid {value!r}; use start:stop:num or x,y,z")
    raise ConfigError(f"cannot parse grid {value!r}")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, preset, config file and command-line flags; validate the result."""
    merged: Dict[str, Any] = {}
    file_cfg: Dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        try:
            jsonschema.validate(file_cfg, _load_schema("config.schema.json"))
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config {args.config} is invalid: {exc.message}")
    preset = args.preset or file_cfg.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
        merged["preset"] = preset
    merged.update({k: v for k, v in file_cfg.items() if k != "command"})
    flag_map = {"p": "p", "a": "a", "E": "E", "c": "c", "tol": "tol", "nodes": "nodes",
                "kappa_max": "kappa_max", "kappa_steps": "kappa_steps", "mu_max": "mu_max",
                "scan_n": "scan_n", "hill_N": "hill_N", "gamma": "gamma", "workers": "workers",
                "format": "format", "out": "out"}
    for attr, key in flag_map.items():
        val = getattr(args, attr, None)
        if val is not None:
            merged[key] = val
    cfg = RunConfig(command=args.command)
    for f in fields(RunConfig):
        if f.name in merged and f.name != "command":
            val = merged[f.name]
            if f.name in ("a", "E", "c"):
                val = parse_grid(val)
            elif f.name == "gamma":
                val = parse_grid(val) if not isinstance(val, list) else [float(v) for v in val]
            setattr(cfg, f.name, val)
    _check_config(cfg)
    return cfg


def _check_config(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if not cfg.p > 0:
        raise ConfigError("p must be positive")
    for name in ("a", "E", "c"):
        grid = getattr(cfg, name)
        if not grid:
            raise ConfigError(f"grid for {name} is empty")
        if not all(math.isfinite(v) for v in grid):
            raise ConfigError(f"grid for {name} has non-finite values")
    if not (cfg.tol > 0 and math.isfinite(cfg.tol)):
        raise ConfigError("tol must be positive")
    if cfg.tol < 1e-13:
        raise ConfigError("tol below 1e-13 is not attainable in double precision")
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    if cfg.kappa_max <= 0 or cfg.kappa_steps < 2:
        raise ConfigError("kappa_max must be positive and kappa_steps at least 2")
    if cfg.hill_N < 32:
        raise ConfigError("hill_N must be at least 32")
    if cfg.nodes < 64:
        raise ConfigError("nodes must be at least 64")
    if cfg.mu_max is not None and cfg.mu_max <= 0:
        raise ConfigError("mu_max must be positive")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    if cfg.command != "sweep":
        for name in ("a", "E", "c"):
            if len(getattr(cfg, name)) != 1:
                raise ConfigError(f"command '{cfg.command}' needs a single value for {name}; "
                                  "use sweep for grids")


# ----------------------------------------------------------------------------
# serialization helpers
# ----------------------------------------------------------------------------

def _clean(obj: Any) -> Any:
    """Convert numpy scalars, complex numbers and non-finite floats to JSON values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_json(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(columns: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def band_rows(bands: Sequence[Sequence[BandPoint]]) -> List[Dict[str, Any]]:
    return [{"branch": b.branch, "kappa": b.kappa, "re_mu": b.mu.real, "im_mu": b.mu.imag,
             "residual": b.residual} for branch in bands for b in branch]


def read_band_csv(text: str) -> List[BandPoint]:
    """Inverse of the band-trace CSV writer."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != BAND_COLUMNS:
        raise ValueError(f"unexpected band CSV columns {reader.fieldnames}")
    return [BandPoint(branch=int(r["branch"]), kappa=float(r["kappa"]),
                      mu=complex(float(r["re_mu"]), float(r["im_mu"])),
                      residual=float(r["residual"])) for r in reader]


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------

def _params_dict(params: WaveParameters) -> dict:
    return {"p": params.nonlinearity.p, "a": params.a, "E": params.E, "c": params.c}


def _tp_dict(tp) -> dict:
    return {"u_minus": tp.u_minus, "u_plus": tp.u_plus, "v_prime_minus": tp.v_prime_minus,
            "v_prime_plus": tp.v_prime_plus, "u_min": tp.u_min, "v_min": tp.v_min}


def _conserved_dict(cs) -> dict:
    return {"T": cs.T, "M": cs.M, "P": cs.P, "H": cs.H, "K": cs.K, "errors": dict(cs.errors)}


def cmd_wave(cfg: RunConfig) -> Tuple[dict, str]:
    params = cfg.single()
    tp = find_turning_points(params)
    cs = conserved_quantities(params, tp=tp)
    prof = reconstruct_profile(params, cfg.nodes, conserved=cs)
    result = {"parameters": _params_dict(params), "turning_points": _tp_dict(tp),
              "conserved": _conserved_dict(cs),
              "profile": {"x": prof.x, "u": prof.u, "ux": prof.ux, "uxx": prof.uxx,
                          "energy_residual_max": float(np.max(prof.energy_residual())),
                          "closure_error": prof.closure_error()}}
    rows = [{"x": x, "u": u, "ux": ux, "uxx": uxx}
            for x, u, ux, uxx in zip(prof.x, prof.u, prof.ux, prof.uxx)]
    return result, write_csv(("x", "u", "ux", "uxx"), rows)


def _check_list(named: Dict[str, float], tol: float, prefix: str) -> List[dict]:
    return [{"name": f"{prefix}{k}", "value": v, "tolerance": tol, "passed": bool(v <= tol),
             "detail": ""} for k, v in named.items()]


def cmd_indices(cfg: RunConfig) -> Tuple[dict, str]:
    params = cfg.single()
    g = gradients(params)
    prof = reconstruct_profile(params, cfg.nodes, with_variational=True, conserved=g.values)
    derivs = monodromy_derivatives(prof, 3, cfg.tol)
    idx = compute_indices(g, derivs)
    cls = classify(idx)
    checks = (_check_list(gradient_identity_errors(g), 1e-5, "gradients.")
              + _check_list(jacobian_relation_errors(g), 1e-4, "gradients.jacobian_")
              + _check_list({"tr2_identity": idx.cross_check["tr2_rel_err"],
                             "tr3_identity": idx.cross_check["tr3_rel_err"]}, 1e-3, "monodromy.")
              + _check_list({"tr1": idx.cross_check["tr1_abs"]}, 1e-6, "monodromy."))
    result = {
        "parameters": _params_dict(params),
        "turning_points": _tp_dict(g.values.turning_points),
        "conserved": _conserved_dict(g.values),
        "gradients": {"rows": list(QUANTITIES), "columns": list(PARAMETERS),
                      "matrix": g.matrix, "steps": g.steps,
                      "self_convergence": g.self_convergence},
        "indices": idx.as_dict(),
        "classification": cls.as_dict(),
        "checks": checks,
    }
    row = dict(_params_dict(params), T=g.values.T, M=g.values.M, P=g.values.P, H=g.values.H,
               K=g.values.K, tr2=idx.tr2, tr3=idx.tr3,
               orientation_jacobian=idx.orientation_jacobian, delta=idx.delta,
               modulational=cls.modulational.value, real_axis=cls.real_axis.value)
    cols = ("p", "a", "E", "c", "T", "M", "P", "H", "K", "tr2", "tr3", "orientation_jacobian",
            "delta", "modulational", "real_axis")
    return result, write_csv(cols, [row])


def _profile_and_indices(cfg: RunConfig):
    params = cfg.single()
    g = gradients(params)
    prof = reconstruct_profile(params, cfg.nodes, with_variational=True, conserved=g.values)
    return params, g, prof, compute_indices(g)


def cmd_band_trace(cfg: RunConfig) -> Tuple[dict, str]:
    params, g, prof, idx = _profile_and_indices(cfg)
    nf = normal_form_roots(idx)
    grid = kappa_grid(cfg.kappa_max, cfg.kappa_steps)
    bands = trace_bands(prof, idx, cfg.kappa_max, kappas=grid, tol=max(cfg.tol, 1e-12))
    rows = band_rows(bands)
    result = {"parameters": _params_dict(params),
              "normal_form": {"y": list(nf.y), "slopes": list(nf.slopes), "delta": nf.delta,
                              "residual": nf.residual, "consistent": nf.consistent},
              "bands": [{"branch": r["branch"], "kappa": r["kappa"],
                         "mu": [r["re_mu"], r["im_mu"]], "residual": r["residual"]}
                        for r in rows]}
    return result, write_csv(BAND_COLUMNS, rows)


def cmd_real_scan(cfg: RunConfig) -> Tuple[dict, str]:
    params, g, prof, idx = _profile_and_indices(cfg)
    scan = real_axis_scan(prof, idx.tr3, cfg.mu_max, cfg.scan_n)
    result = {"parameters": _params_dict(params), "tr3": idx.tr3, "scan": scan.as_dict()}
    rows = ([{"kind": "periodic", "mu": m} for m in scan.periodic]
            + [{"kind": "antiperiodic", "mu": m} for m in scan.antiperiodic])
    return result, write_csv(("kind", "mu"), rows)


def cmd_hill(cfg: RunConfig) -> Tuple[dict, str]:
    params = cfg.single()
    cs = conserved_quantities(params)
    prof = reconstruct_profile(params, max(cfg.nodes, 4 * cfg.hill_N), conserved=cs)
    spectra, rows = [], []
    for gam in cfg.gamma:
        h = hill_spectrum(prof, gam, cfg.hill_N)
        ev = h.eigenvalues[np.lexsort((h.eigenvalues.imag, h.eigenvalues.real))]
        spectra.append({"gamma": gam, "near_origin": list(h.near_origin),
                        "convergence": h.convergence, "eigenvalues": list(ev)})
        rows += [{"gamma": gam, "re_mu": z.real, "im_mu": z.imag} for z in ev]
    result = {"parameters": _params_dict(params), "N": cfg.hill_N, "spectra": spectra}
    return result, write_csv(("gamma", "re_mu", "im_mu"), rows)


def _sweep_point(task: Tuple[int, float, float, float, float]) -> Dict[str, Any]:
    i, p, a, E, c = task
    row: Dict[str, Any] = {"index": i, "p": p, "a": a, "E": E, "c": c}
    try:
        g = gradients(WaveParameters(a, E, c, Nonlinearity.power(p)))
        idx = compute_indices(g)
        cls = classify(idx)
    except GKdVError as exc:
        row.update(status="error", error=type(exc).__name__)
        return row
    row.update(status="ok", error=None, T=g.values.T, tr2=idx.tr2, tr3=idx.tr3,
               orientation_jacobian=idx.orientation_jacobian, delta=idx.delta,
               modulational=cls.modulational.value, real_axis=cls.real_axis.value)
    return row


def sweep_tasks(cfg: RunConfig) -> List[Tuple[int, float, float, float, float]]:
    tasks = []
    for c in cfg.c:
        for a in cfg.a:
            for E in cfg.E:
                tasks.append((len(tasks), cfg.p, a, E, c))
    return tasks


def cmd_sweep(cfg: RunConfig) -> Tuple[dict, str]:
    tasks = sweep_tasks(cfg)
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))  # map keeps grid order
    else:
        rows = [_sweep_point(t) for t in tasks]
    result = {"columns": list(SWEEP_COLUMNS), "rows": rows}
    return result, write_csv(SWEEP_COLUMNS, rows)


def cmd_validate(cfg: RunConfig) -> Tuple[dict, str]:
    params = cfg.single()
    res = run_invariant_suite(params, tol=cfg.tol, nodes=cfg.nodes, hill_N=cfg.hill_N)
    checks = [c.as_dict() for c in res.checks]
    result = {"parameters": _params_dict(params), "passed": res.passed, "checks": checks}
    return result, write_csv(("name", "value", "tolerance", "passed", "detail"), checks)


HANDLERS = {"wave": cmd_wave, "indices": cmd_indices, "band-trace": cmd_band_trace,
            "real-scan": cmd_real_scan, "hill": cmd_hill, "sweep": cmd_sweep,
            "validate": cmd_validate}


# ----------------------------------------------------------------------------
# run / emit
# ----------------------------------------------------------------------------

def run(command: str, cfg: RunConfig) -> Tuple[int, dict, str]:
    """Execute one command; returns (exit status, report, CSV text)."""
    cfg.command = command
    report = {"schema_version": SCHEMA_VERSION, "software_version": __version__,
              "command": command, "config": cfg.canonical(), "config_hash": cfg.config_hash(),
              "status": "ok", "error": None, "result": None}
    csv_text = ""
    code = EXIT_OK
    try:
        result, csv_text = HANDLERS[command](cfg)
        report["result"] = result
        if command == "validate" and not result["passed"]:
            report["status"] = "validation_failed"
            code = EXIT_VALIDATION
        if command == "sweep":
            failed = [r for r in result["rows"] if r["status"] != "ok"]
            if failed:
                # the map is still emitted; the failed points are marked per row
                report["status"] = "error"
                report["error"] = {"type": failed[0]["error"],
                                   "message": f"{len(failed)} of {len(result['rows'])} grid "
                                              f"points failed; first at index {failed[0]['index']}"}
                code = EXIT_COMPUTE
    except GKdVError as exc:
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_COMPUTE
    return code, _clean(report), csv_text


def validate_report(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if the report breaks the shipped schema."""
    jsonschema.validate(report, _load_schema("report.schema.json"))


def emit(report: dict, csv_text: str, fmt: str, out: Optional[str]) -> str:
    text = dumps_json(report) if fmt == "json" else csv_text
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gkdv-stability",
        description="Stability indices and spectra of periodic gKdV traveling waves.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config file (RunConfig schema)")
    ap.add_argument("--preset", help=f"named parameter set: {', '.join(sorted(PRESETS))}")
    ap.add_argument("--p", type=float, help="power-law exponent, f(u) = u^(p+1)")
    ap.add_argument("--a", help="a value or range start:stop:num")
    ap.add_argument("--E", help="E value or range start:stop:num")
    ap.add_argument("--c", help="c value or range start:stop:num")
    ap.add_argument("--tol", type=float, help="ODE tolerance for monodromy integration")
    ap.add_argument("--nodes", type=int, help="profile grid size")
    ap.add_argument("--kappa-max", dest="kappa_max", type=float)
    ap.add_argument("--kappa-steps", dest="kappa_steps", type=int)
    ap.add_argument("--mu-max", dest="mu_max", type=float, help="real-axis scan bound")
    ap.add_argument("--scan-n", dest="scan_n", type=int)
    ap.add_argument("--hill-N", dest="hill_N", type=int, help="Fourier modes -N..N")
    ap.add_argument("--gamma", help="Bloch exponents, comma separated")
    ap.add_argument("--workers", type=int, help="worker processes for sweeps")
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--out", help="output path (default: stdout)")
    return ap


_VALUE_FLAGS = ("--a", "--E", "--c", "--gamma", "--mu-max", "--tol", "--p")


def _attach_negative_values(argv: Sequence[str]) -> List[str]:
    # argparse reads "-0.1,-0.05" as an option; bind such values to their flag
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2] in "0123456789.":
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    argv = _attach_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on bad usage
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, report, csv_text = run(args.command, cfg)
    if report["error"]:
        print(f"{report['error']['type']}: {report['error']['message']}", file=sys.stderr)
    try:
        emit(report, csv_text, cfg.format, cfg.out)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())
