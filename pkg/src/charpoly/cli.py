"""Command-line entry point: one JSON config in, one report out.

Exit status: 0 when every comparison passes, 1 on a failed comparison (or a
numerical flag under ``--strict``), 2 on an invalid configuration.
"""

from __future__ import annotations

import argparse
import copy
import csv
import datetime as _dt
import io
import json
import logging
import math
import sys
import time
from pathlib import Path

import jsonschema

from . import asymptotics, ginue, hciz, mc
from .distributions import EntryDistributionSpec, cumulant_22
from .points import PointConfig

log = logging.getLogger("charpoly")

COMMANDS = ("estimate", "exact", "predict", "verify-theorem", "hciz-verify", "f1-check")
CSV_COLUMNS = ("n", "m", "z0_re", "z0_im", "kappa22", "estimate_log", "stderr_log", "prediction_log", "z_score")

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "n": {"oneOf": [{"type": "integer", "minimum": 1},
                        {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}]},
        "z0": _COMPLEX,
        "zetas": {"type": "array", "items": _COMPLEX, "minItems": 1},
        "distribution": {
            "oneOf": [
                {"type": "string"},
                {"type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {"kind": {"type": "string"}, "q": {"type": "number"}}},
            ]
        },
        "kappa22": {"type": ["number", "null"]},
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "rel_tol": {"type": "number", "minimum": 0},
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "samples": {"type": "integer", "minimum": 1},
                "chunk_size": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "threads": {"type": ["integer", "null"], "minimum": 1},
            },
        },
        "hciz": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "a": {"type": "array", "items": _COMPLEX, "minItems": 1},
                "b": {"type": "array", "items": _COMPLEX, "minItems": 1},
                "z": _COMPLEX,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": ["string", "null"]}, "format": {"enum": ["json", "csv"]}},
        },
    },
}

DEFAULTS = {
    "n": 32,
    "z0": 0.0,
    "zetas": [0.0, 1.0],
    "distribution": "complex-gaussian",
    "kappa22": None,
    "sigma": 4.0,
    "rel_tol": 0.0,
    "mc": {"samples": 100_000, "chunk_size": 1000, "seed": 0, "threads": None},
    "hciz": {"a": [0.0, 1.0], "b": [0.0, 1.0], "z": 1.0},
    "output": {"path": None, "format": "json"},
}


class ConfigError(ValueError):
    pass


def _complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def _encode_complex(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def validate_config(raw: dict) -> dict:
    """Schema-check ``raw`` and fill defaults; raises ConfigError naming the offending key."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            raise ConfigError(f"unknown key(s) {', '.join(map(repr, extra))} at {where}") from None
        raise ConfigError(f"invalid value for {where!r}: {err.message}") from None
    cfg = {"command": raw["command"], **copy.deepcopy(DEFAULTS)}
    for key, value in raw.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    try:
        EntryDistributionSpec.parse(cfg["distribution"])
        if abs(_complex(cfg["z0"])) >= 1:
            raise ValueError("z0 must satisfy |z0| < 1")
    except ValueError as err:
        key = "z0" if "z0" in str(err) else "distribution"
        raise ConfigError(f"invalid value for {key!r}: {err}") from None
    return cfg


def _ns(cfg) -> list:
    return cfg["n"] if isinstance(cfg["n"], list) else [cfg["n"]]


def _points(cfg, n) -> PointConfig:
    return PointConfig(_complex(cfg["z0"]), [_complex(z) for z in cfg["zetas"]], n)


def _kappa(cfg, spec) -> float:
    return cfg["kappa22"] if cfg["kappa22"] is not None else cumulant_22(spec)


def _result(name, log_value=None, stderr=None, z_score=None, **extra):
    out = {"name": name, "log_value": _finite(log_value), "stderr": _finite(stderr), "z_score": _finite(z_score)}
    out.update(extra)
    return out


def _passes(z_score, log_diff, cfg) -> bool:
    if z_score is not None and abs(z_score) <= cfg["sigma"]:
        return True
    return cfg["rel_tol"] > 0 and abs(math.expm1(log_diff)) <= cfg["rel_tol"]


def _row(n, m, z0, kappa, est=None, se=None, pred=None, z=None):
    return dict(zip(CSV_COLUMNS, (n, m, z0.real, z0.imag, kappa, _finite(est), _finite(se), _finite(pred), _finite(z))))


def _mc_config(cfg, points, spec) -> mc.MCConfig:
    return mc.MCConfig(points, spec, cfg["mc"]["samples"], cfg["mc"]["chunk_size"], cfg["mc"]["seed"])


def _run_estimate(cfg, spec, threads, out):
    for n in _ns(cfg):
        p = _points(cfg, n)
        est = mc.estimate_Fm(_mc_config(cfg, p, spec), threads)
        out["results"].append(_result("log_F_m", est.log_value, est.jackknife_stderr_log, n=n,
                                      value=est.value, samples=est.samples))
        out["flags"] += [f"n={n}: {f}" for f in est.flags]
        out["rows"].append(_row(n, p.m, p.z0, cumulant_22(spec), est.log_value, est.jackknife_stderr_log))


def _run_exact(cfg, spec, threads, out):
    for n in _ns(cfg):
        p = _points(cfg, n)
        f = ginue.ginue_Fm_scaled(p)
        out["results"].append(_result("log_F_m_exact", f.log_abs, 0.0, n=n, value=f.value))
        pred = None
        if p.m > 1 and len(ginue.group_points(p.zetas)) == p.m:
            r = ginue.ginue_theorem_ratio_exact(p)
            pred = r.log_abs
            out["results"].append(_result("theorem_ratio_exact", r.log_abs, 0.0, n=n, value=r.value))
        out["rows"].append(_row(n, p.m, p.z0, 0.0, f.log_abs, 0.0, pred))


def _run_predict(cfg, spec, threads, out):
    kappa = _kappa(cfg, spec)
    zetas = [_complex(z) for z in cfg["zetas"]]
    z0, m = _complex(cfg["z0"]), len(zetas)
    confluent = len(ginue.group_points(zetas)) < m
    for n in _ns(cfg):
        if confluent:
            if len(ginue.group_points(zetas)) != 1 or zetas[0] != 0:
                raise ConfigError("predict covers distinct zetas or all zetas equal to 0")
            v = asymptotics.moment_prediction(m, z0, n, kappa)
            out["results"].append(_result("moment_prediction", v.log_abs, n=n, value=v.value))
        else:
            v = asymptotics.theorem1_prediction(zetas, z0, kappa)
            out["results"].append(_result("theorem1_prediction", v.log_value, n=n, value=v.value,
                                          kernel_det=v.kernel_det, vandermonde_sq=v.vandermonde_sq,
                                          kappa_factor=v.kappa_factor))
        out["rows"].append(_row(n, m, z0, kappa, pred=out["results"][-1]["log_value"]))


def _run_verify_theorem(cfg, spec, threads, out):
    kappa = _kappa(cfg, spec)
    ok = True
    for n in _ns(cfg):
        p = _points(cfg, n)
        c = _mc_config(cfg, p, spec)
        est = mc.estimate_theorem_ratio(c, threads)
        pred = asymptotics.theorem1_prediction(p.zetas, p.z0, kappa)
        out["results"].append(_result("mc_ratio", est.log_value, est.jackknife_stderr_log, n=n,
                                      value=est.value, samples=est.samples))
        zp = est.z_score(pred.log_value)
        passed = _passes(zp, est.log_value - pred.log_value, cfg)
        ok &= passed
        out["results"].append(_result("theorem1_prediction", pred.log_value, None, zp, n=n,
                                      value=pred.value, passed=passed))
        if spec.kind == "complex-gaussian":
            ex = ginue.ginue_theorem_ratio_exact(p)
            ze = est.z_score(ex.log_abs)
            passed = _passes(ze, est.log_value - ex.log_abs, cfg)
            ok &= passed
            out["results"].append(_result("ginue_ratio_exact", ex.log_abs, 0.0, ze, n=n, value=ex.value,
                                          passed=passed))
        out["flags"] += [f"n={n}: {f}" for f in est.flags]
        out["rows"].append(_row(n, p.m, p.z0, kappa, est.log_value, est.jackknife_stderr_log, pred.log_value, zp))
    return ok


def _run_hciz(cfg, spec, threads, out):
    h = cfg["hciz"]
    inp = hciz.HCIZInput([_complex(x) for x in h["a"]], [_complex(x) for x in h["b"]], _complex(h["z"]))
    exact = hciz.hciz_closed_form(inp)
    est = hciz.hciz_mc(inp, cfg["mc"]["samples"], cfg["mc"]["seed"])
    z = est.z_score(exact)
    out["results"].append(_result("hciz_closed_form", math.log(abs(exact)), 0.0, value=_encode_complex(exact)))
    out["results"].append(_result("hciz_mc", math.log(abs(est.mean)), max(est.stderr_re, est.stderr_im), z,
                                  value=_encode_complex(est.mean), stderr_re=est.stderr_re, stderr_im=est.stderr_im,
                                  samples=est.samples))
    return z <= cfg["sigma"]


def _run_f1(cfg, spec, threads, out):
    z = _complex(cfg["z0"])
    ok = True
    for n in _ns(cfg):
        q, info = asymptotics.f1_quadrature(z, n, full_output=True)
        ex = ginue.ginue_Fm_scaled(PointConfig(z, (0.0,), n))
        asym = asymptotics.f1_asymptote(z, n)
        rel = math.expm1(q.log_abs - ex.log_abs)
        passed = abs(rel) <= 1e-8
        ok &= passed
        out["results"].append(_result("f1_quadrature", q.log_abs, n=n, rel_tail_bound=info["rel_tail_bound"]))
        out["results"].append(_result("f1_exact", ex.log_abs, 0.0, n=n, rel_diff_quadrature=rel, passed=passed))
        out["results"].append(_result("f1_asymptote", asym.log_abs, n=n,
                                      ratio_quadrature=math.exp(q.log_abs - asym.log_abs)))
        out["rows"].append(_row(n, 1, z, 0.0, q.log_abs, None, asym.log_abs))
    return ok


_RUNNERS = {
    "estimate": _run_estimate,
    "exact": _run_exact,
    "predict": _run_predict,
    "verify-theorem": _run_verify_theorem,
    "hciz-verify": _run_hciz,
    "f1-check": _run_f1,
}


def run(cfg: dict, threads: int | None = None, strict: bool = False):
    """Execute a validated config. Returns (report dict, exit status)."""
    spec = EntryDistributionSpec.parse(cfg["distribution"])
    out = {"command": cfg["command"], "config": cfg, "seed": cfg["mc"]["seed"], "results": [], "rows": [],
           "flags": []}
    t0 = time.perf_counter()
    try:
        ok = _RUNNERS[cfg["command"]](cfg, spec, threads, out)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    out["wall_time_s"] = time.perf_counter() - t0
    out["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    status = 0 if ok is not False else 1
    if strict and out["flags"] and status == 0:
        status = 1
    out["passed"] = status == 0
    return out, status


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def write_report(report: dict, path: str | None, fmt: str = "json") -> None:
    text = json.dumps(report, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path.write_text(rows_to_csv(report["rows"]))
        path.with_suffix(".json").write_text(text)
    else:
        path.write_text(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="charpoly", description=__doc__.splitlines()[0])
    p.add_argument("command", nargs="?", choices=COMMANDS, help="overrides the config's command")
    p.add_argument("--config", help="JSON config file (default: built-in defaults)")
    p.add_argument("--seed", type=int, help="master seed, overrides mc.seed")
    p.add_argument("--threads", type=int, help=f"worker threads (default ${mc.THREADS_ENV} or all cores)")
    p.add_argument("--strict", action="store_true", help="numerical flags make the run fail")
    p.add_argument("--out", help="report path, overrides output.path")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = {}
        if args.config:
            try:
                raw = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as err:
                raise ConfigError(f"cannot read config {args.config}: {err}") from None
            if not isinstance(raw, dict):
                raise ConfigError("config must be a JSON object")
        if args.command:
            raw["command"] = args.command
        if args.seed is not None:
            raw.setdefault("mc", {})["seed"] = args.seed
        if args.out:
            raw.setdefault("output", {})["path"] = args.out
        cfg = validate_config(raw)
        threads = args.threads or cfg["mc"]["threads"]
        report, status = run(cfg, threads, args.strict)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    write_report(report, cfg["output"]["path"], cfg["output"]["format"])
    for flag in report["flags"]:
        log.warning(flag)
    return status


if __name__ == "__main__":
    sys.exit(main())
