"""Command-line entry point.

Exit status: 0 success, 1 a scenario assertion failed (the report is still
written), 2 invalid configuration, usage or unknown scenario, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np

from ..diagnostics import inflation_check, localization_scan, volume_c
from ..domain import UNWEIGHTED, build_domain
from ..errors import BergmanLabError, ConfigError, UnknownScenario
from ..kernel import kernel_closed, kernel_series
from ..operator import berezin_quad
from .cache import Cache
from .compute import cached_basis, cached_toeplitz, compactness_cached
from .config import (RunConfig, complex_value, config_from_dict, load_config, parse_domain_arg,
                     point_value)
from .scenarios import SCENARIOS, ScenarioResult, run_scenario

EXIT_OK, EXIT_ASSERTION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to exit status 2."""

    def error(self, message):
        raise ConfigError(message)


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory (default: runs)")
    common.add_argument("--seed", type=_u64)
    common.add_argument("--order", type=_positive, help="quadrature order floor")
    common.add_argument("--truncation", type=_positive,
                        help="N_outer on C^1, grade bound on C^n, degree on lenses")
    common.add_argument("--cache-dir", help="cache directory")
    common.add_argument("--no-cache", action="store_true", help="bypass the cache")
    common.add_argument("--domain", help="kind[:key=value,...], e.g. annulus:eps=0.5")
    common.add_argument("--r", type=float, dest="weight_r", help="weight exponent")
    common.add_argument("--rho", choices=("algebraic", "distance"), dest="weight_rho")
    common.add_argument("--symbol", action="append", help="symbol text (repeatable)")

    p = _Parser(prog="bergmanlab", description="Bergman kernels and Toeplitz operators "
                "on Reinhardt domains")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", parents=[common], help="kernel K(w, z) by series and closed form")
    k.add_argument("--w", required=True, help="point, comma separated coordinates")
    k.add_argument("--z", required=True, help="point, comma separated coordinates")

    t = sub.add_parser("toeplitz", parents=[common], help="finite section of T_phi as CSV")
    t.add_argument("--size", type=_positive, help="leading block size")

    b = sub.add_parser("berezin", parents=[common], help="Berezin transform by two routes")
    b.add_argument("--z", required=True, help="point, comma separated coordinates")

    sub.add_parser("diagnose", parents=[common], help="tail indicator of T_phi")
    lo = sub.add_parser("localize", parents=[common], help="localization ratios near a boundary point")
    lo.add_argument("--p", help="boundary point (default 1)")
    sub.add_parser("inflate", parents=[common], help="inflation identity check")

    s = sub.add_parser("scenario", parents=[common], help="run a named scenario")
    s.add_argument("name", help=", ".join(SCENARIOS))

    c = sub.add_parser("cache", help="inspect or clear the cache")
    c.add_argument("action", choices=("stat", "clear"))
    c.add_argument("--cache-dir", help="cache directory")
    return p


# ---------------------------------------------------------------------------
# configuration and output

def resolve_config(args) -> RunConfig:
    cfg = load_config(getattr(args, "config", None))
    over = {"out": Path(args.out) if getattr(args, "out", None) else None,
            "seed": getattr(args, "seed", None),
            "order": getattr(args, "order", None),
            "truncation": getattr(args, "truncation", None),
            "cache_dir": Path(args.cache_dir) if getattr(args, "cache_dir", None) else None,
            "symbol": tuple(args.symbol) if getattr(args, "symbol", None) else None}
    if getattr(args, "domain", None):
        over["domain"] = parse_domain_arg(args.domain)
    weight = dict(cfg.weight or {})
    if getattr(args, "weight_r", None) is not None:
        weight["r"] = args.weight_r
    if getattr(args, "weight_rho", None) is not None:
        weight["rho"] = args.weight_rho
    if weight:
        over["weight"] = weight
    cfg = cfg.with_overrides(**over)
    # validate the merged settings the same way as a config file
    return config_from_dict(cfg.to_table())


def open_cache(cfg: RunConfig, args) -> Cache | None:
    if getattr(args, "no_cache", False):
        return None
    return Cache(cfg.cache_dir)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if hasattr(x, "__dataclass_fields__"):
        return _jsonable({k: getattr(x, k) for k in x.__dataclass_fields__})
    return x


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_outputs(out: Path, stem: str, report: dict, curves: dict, cfg: RunConfig) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in curves.items():
        write_csv(out / f"{stem}_{name}.csv", header, rows)
    doc = {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
           "command": stem, "config": cfg.to_dict(), **report}
    path = out / f"{stem}.json"
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# subcommands

def _domain(cfg, default=None):
    return cfg.build_domain(default or build_domain("disc"))


def _weight(cfg):
    return cfg.build_weight(UNWEIGHTED)


def _symbol(cfg, default: str) -> str:
    return cfg.symbol[0] if cfg.symbol else default


def cmd_kernel(args, cfg, cache):
    D, W = _domain(cfg), _weight(cfg)
    w = point_value(args.w.split(","), D.n, "--w")
    z = point_value(args.z.split(","), D.n, "--z")
    wq, zq = (w[0], z[0]) if D.n == 1 else (w, z)
    s = kernel_series(D, W, wq, zq)
    report = {"domain": str(D), "weight": W.key(), "w": list(w), "z": list(z),
              "series": s.value, "N": s.N, "tail_estimate": s.tail}
    try:
        report["closed"] = kernel_closed(D, W, wq, zq)
    except BergmanLabError as exc:
        report["closed"] = None
        report["closed_unavailable"] = str(exc)
    print(f"K = {s.value!r}  (N = {s.N})")
    return report, {}, True


def cmd_toeplitz(args, cfg, cache):
    from ..diagnostics import standard_basis
    D, W = _domain(cfg), _weight(cfg)
    phi = _symbol(cfg, "abs(z1)^2")
    trunc = cfg.truncation or (120 if D.n == 1 else 12)
    if D.kind == "lens":
        basis = standard_basis(D, W, trunc, cfg.order)
    else:
        basis = cached_basis(cache, D, W, standard_basis(D, W, trunc).N)
    T = cached_toeplitz(cache, basis, W, phi, args.size, cfg.order)
    A = T.entries
    rows = [(i, j, A[i, j].real, A[i, j].imag) for i in range(T.N) for j in range(T.N)
            if A[i, j] != 0]
    report = {"domain": str(D), "weight": W.key(), "symbol": T.symbol, "size": T.N,
              "hermitian": T.hermitian, "quad_order": T.quad_order, "richardson": T.richardson}
    print(f"T_phi: {T.N} x {T.N}, {len(rows)} nonzero entries")
    return report, {"entries": (("row", "col", "re", "im"), rows)}, True


def cmd_berezin(args, cfg, cache):
    D, W = _domain(cfg), _weight(cfg)
    phi = _symbol(cfg, "abs(z1)^2")
    z = point_value(args.z.split(","), D.n, "--z")
    zq = z[0] if D.n == 1 else z
    s = berezin_quad(D, W, phi, zq, cfg.order or 64, cfg.truncation or 200)
    print(f"Berezin: quadrature {s.quad_value!r}, matrix {s.matrix_value!r}")
    return ({"domain": str(D), "weight": W.key(), "symbol": phi, "z": list(z),
             "quadrature": s.quad_value, "matrix": s.matrix_value, "N": s.N,
             "discrepancy": s.discrepancy}, {}, True)


def cmd_diagnose(args, cfg, cache):
    D, W = _domain(cfg), _weight(cfg)
    trunc = cfg.truncation or (120 if D.n == 1 and D.kind != "lens" else 12)
    rows, reports = [], []
    for phi in cfg.symbol or ("1 - abs(z1)^2",):
        rep = compactness_cached(cache, D, W, phi, trunc, cfg.cuts, cfg.order, cfg.thresholds)
        reports.append(rep.to_dict())
        rows += [(rep.symbol, c, s) for c, s in zip(rep.cuts, rep.tail)]
        print(f"{rep.symbol}: {rep.verdict} (ratio {rep.ratio:.4g}, boundary sup "
              f"{rep.boundary_sup:.4g})")
    return {"reports": reports}, {"tail": (("symbol", "cut", "s"), rows)}, True


def cmd_localize(args, cfg, cache):
    D = _domain(cfg, build_domain("annulus", eps=0.5))
    W = _weight(cfg)
    p = complex_value(args.p if args.p is not None else cfg.probe.get("point", 1), "--p")
    loc = cfg.localization
    rep = localization_scan(D, p, float(loc.get("R1", 0.2)), float(loc.get("R2", 0.4)), W,
                            None, int(loc.get("maxdeg", 20)), int(loc.get("step", 5)), cfg.order)
    print(f"C = {rep.C:.6g} (next degree {rep.C_next:.6g}), slope {rep.slope:.3g}")
    rows = [(z.real, z.imag, d, a, b) for z, d, a, b in
            zip(rep.grid, rep.dists, rep.ratios, rep.ratios_next)]
    return ({"domain": rep.domain, "p": p, "C": rep.C, "C_next": rep.C_next,
             "stabilization": rep.stabilization, "slope": rep.slope, "note": rep.note},
            {"ratios": (("z_re", "z_im", "dist", "ratio", "ratio_next"), rows)}, True)


def cmd_inflate(args, cfg, cache):
    rs = (int(cfg.weight["r"]),) if cfg.weight and "r" in cfg.weight else (1, 2)
    reports, rows = [], []
    for r in rs:
        rep = inflation_check(r, seed=cfg.seed)
        reports.append(rep.to_dict())
        rows += [(r, q) for q in rep.ratios]
        print(f"r={r}: mean ratio {rep.mean!r}, volume {volume_c(r, r).value!r}, "
              f"spread {rep.spread:.3g}")
    return {"reports": reports}, {"ratios": (("r", "ratio"), rows)}, True


def cmd_scenario(args, cfg, cache):
    res: ScenarioResult = run_scenario(args.name, cfg, cache)
    for c in res.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  [{c.detail}]")
    report = {"scenario": res.name, "passed": res.passed,
              "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                         for c in res.checks], **res.report}
    return report, res.curves, res.passed


COMMANDS = {"kernel": cmd_kernel, "toeplitz": cmd_toeplitz, "berezin": cmd_berezin,
            "diagnose": cmd_diagnose, "localize": cmd_localize, "inflate": cmd_inflate,
            "scenario": cmd_scenario}


def cmd_cache(args) -> int:
    cache = Cache(Path(args.cache_dir) if args.cache_dir else None)
    if args.action == "stat":
        print(json.dumps(cache.stat(), indent=2, sort_keys=True))
    else:
        print(f"removed {cache.clear()} entries from {cache.root}")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "cache":
            return cmd_cache(args)
        cfg = resolve_config(args)
        cache = open_cache(cfg, args)
        report, curves, passed = COMMANDS[args.command](args, cfg, cache)
    except (ConfigError, UnknownScenario) as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BergmanLabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    stem = args.name if args.command == "scenario" else args.command
    path = write_outputs(cfg.out, stem, report, curves, cfg)
    print(f"report: {path}")
    return EXIT_OK if passed else EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
