"""Named scenarios: each computes a report, CSV curves and a list of checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..diagnostics import (berezin_profile, coherent, inflation_check, kernel_ratio,
                           localization_grid, localization_scan, sample_pairs, volume_c,
                           volume_c_closed, weak_probe)
from ..domain import UNWEIGHTED, WeightSpec, build_domain
from ..errors import UnknownScenario
from ..kernel import LENS_MAX_DEGREE, kernel_diag
from ..operator import berezin_quad, toeplitz_product_residual
from ..symbol import RadialBump, as_symbol, eval_points, symbol_text
from .cache import Cache
from .compute import cached_basis, cached_toeplitz, compactness_cached
from .config import RunConfig, complex_value


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class ScenarioResult:
    name: str
    report: dict
    curves: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed, detail: str = ""):
        self.checks.append(Check(name, bool(passed), detail))


DISC_BATTERY = ("1 - abs(z1)^2", "bump(0, 0.5)", "(1 - abs(z1)^2)*re(z1)",
                "1", "abs(z1)^2", "re(z1) + 1.5")
BIDISC_BATTERY = ("(1 - abs(z1)^2)*(1 - abs(z2)^2)", "bump(0, 0.5)",
                  "(1 - abs(z1)^2)*(1 - abs(z2)^2)*re(z1)",
                  "1", "abs(z1)^2 + abs(z2)^2", "re(z1) + 1.5")
BIDISC_SUPPLEMENT = ("((1 - abs(z1)^2)*(1 - abs(z2)^2))^2",)
DISC_CUTS = (0, 30, 60, 90, 118)
GRADE12_CUTS = (0, 3, 6, 9, 11)


def _tail_rows(report, label: str | None = None):
    label = report.symbol if label is None else label
    return [(label, c, s) for c, s in zip(report.cuts, report.tail)]


def _dichotomy_checks(res: ScenarioResult, rep, thresholds):
    """Expected branch from the boundary values of the symbol."""
    decay, persist = thresholds
    sup = rep.boundary_sup
    if sup < 0.05:
        res.check(f"{rep.symbol}: decaying", rep.verdict == "decaying" and rep.ratio < decay,
                  f"ratio {rep.ratio:.6g}, boundary sup {sup:.3g}")
    elif sup > 0.5:
        res.check(f"{rep.symbol}: non-decaying",
                  rep.verdict == "non-decaying" and rep.tail[-1] > 0.5 * sup,
                  f"ratio {rep.ratio:.6g}, s_last {rep.tail[-1]:.6g}, boundary sup {sup:.3g}")
    res.check(f"{rep.symbol}: coherent", coherent(rep, 0.05, 0.5),
              f"verdict {rep.verdict}, boundary sup {sup:.3g}")


def _battery(name, cfg, cache, domain, weight, battery, truncation, cuts, order, supplement=()):
    res = ScenarioResult(name, {})
    symbols = cfg.symbol or battery
    rows, reports = [], []
    for text in symbols:
        rep = compactness_cached(cache, domain, weight, text, truncation, cuts, order,
                                 cfg.thresholds)
        reports.append(rep.to_dict())
        rows += _tail_rows(rep)
        _dichotomy_checks(res, rep, cfg.thresholds)
    extra = []
    if cfg.symbol is None:
        for text in supplement:
            rep = compactness_cached(cache, domain, weight, text, truncation, cuts, order,
                                     cfg.thresholds)
            extra.append(rep.to_dict())
            rows += _tail_rows(rep)
            _dichotomy_checks(res, rep, cfg.thresholds)
    res.report = {"domain": str(domain), "weight": weight.key(), "truncation": truncation,
                  "cuts": list(cuts), "order": order, "reports": reports,
                  "supplementary": extra}
    res.curves["tail"] = (("symbol", "cut", "s"), rows)
    return res


def _disc_dichotomy(name, cfg, cache, r_default):
    domain = cfg.build_domain(build_domain("disc"))
    weight = cfg.build_weight(WeightSpec(float(r_default)))
    truncation = cfg.truncation or 120
    cuts = cfg.cuts or (DISC_CUTS if truncation == 120 and domain.n == 1 else None)
    return _battery(name, cfg, cache, domain, weight, DISC_BATTERY, truncation, cuts, cfg.order)


def scenario_dichotomy(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    return _disc_dichotomy("dichotomy", cfg, cache, 0)


def scenario_weighted_dichotomy(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    return _disc_dichotomy("weighted-dichotomy", cfg, cache, 1)


def scenario_polydisc_dichotomy(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    domain = cfg.build_domain(build_domain("polydisc", n=2))
    weight = cfg.build_weight(UNWEIGHTED)
    maxdeg = cfg.truncation or 12
    cuts = cfg.cuts or (GRADE12_CUTS if maxdeg == 12 else None)
    res = _battery("polydisc-dichotomy", cfg, cache, domain, weight, BIDISC_BATTERY, maxdeg,
                   cuts, cfg.order, BIDISC_SUPPLEMENT)
    # how the ratio of the product symbol falls with the resolution
    study = []
    if cfg.symbol is None:
        for m in (12, 24, 40):
            rep = compactness_cached(cache, domain, weight, BIDISC_BATTERY[0], m, (0, m - 1),
                                     None, cfg.thresholds)
            study.append((m, rep.ratio))
    res.report["resolution_study"] = [{"maxdeg": m, "ratio": r} for m, r in study]
    res.curves["resolution"] = (("maxdeg", "ratio"), study)
    return res


def scenario_example1(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    res = ScenarioResult("example1", {})
    phi = "bump(0, 0.5)"
    truncation = cfg.truncation or 120
    disc, punct = build_domain("disc"), build_domain("punctured_disc")
    Td = cached_toeplitz(cache, cached_basis(cache, disc, UNWEIGHTED, truncation - 1),
                         UNWEIGHTED, phi, order=cfg.order)
    Tp = cached_toeplitz(cache, cached_basis(cache, punct, UNWEIGHTED, truncation - 1),
                         UNWEIGHTED, phi, order=cfg.order)
    diff = float(np.max(np.abs(Td.entries - Tp.entries)))
    res.check("punctured-disc matrix equals the disc's", diff <= 1e-12, f"max |difference| {diff:.3g}")
    cuts = cfg.cuts or (DISC_CUTS if truncation == 120 else None)
    rep = compactness_cached(cache, punct, UNWEIGHTED, phi, truncation, cuts, cfg.order,
                             cfg.thresholds)
    value_at_0 = float(abs(eval_points(as_symbol(phi), np.zeros((1, 1))))[0])
    res.check("tail verdict decaying", rep.verdict == "decaying", f"ratio {rep.ratio:.3g}")
    res.check("symbol does not vanish on the boundary", rep.boundary_sup >= 0.99 and value_at_0 == 1.0,
              f"phi(0) = {value_at_0}, boundary sup {rep.boundary_sup:.3g}")
    dists = cfg.probe.get("dists", [0.1, 0.01, 0.001])
    probe = weak_probe(punct, UNWEIGHTED, "1", 0, list(dists) + [0.0])
    limit = probe[-1][1]
    res.check("weak probe stays away from 0", min(v for _, v in probe) >= 0.9,
              f"min value {min(v for _, v in probe):.6g}")
    res.check("|f(0)|^2 / K(0,0) = pi", abs(limit - math.pi) <= 1e-10,
              f"value {limit!r}, K(0,0) = {kernel_diag(punct, None, 0.0)!r}")
    res.report = {"matrix_difference": diff, "compactness": rep.to_dict(),
                  "weak_probe": [{"dist": d, "value": v} for d, v in probe], "limit": limit}
    res.curves["tail"] = (("symbol", "cut", "s"), _tail_rows(rep))
    res.curves["weak_probe"] = (("dist", "value"), probe)
    return res


def scenario_example3(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    res = ScenarioResult("example3", {})
    domain = build_domain("shell", n=2, r_in=1.0, r_out=2.0)
    maxdeg = cfg.truncation or 12
    cuts = cfg.cuts or (GRADE12_CUTS if maxdeg == 12 else None)
    shell_bump = RadialBump(1.225, 0.175)
    inner = "bump(0, 1.5)"
    reports, rows = [], []
    for phi in (shell_bump, inner):
        rep = compactness_cached(cache, domain, UNWEIGHTED, phi, maxdeg, cuts, cfg.order,
                                 cfg.thresholds)
        reports.append(rep.to_dict())
        rows += _tail_rows(rep)
        res.check(f"{symbol_text(phi)}: decaying (ratio < 0.1)",
                  rep.verdict == "decaying" and rep.ratio < 0.1, f"ratio {rep.ratio:.3g}")
    on_inner = float(abs(eval_points(as_symbol(inner), np.array([[1.0, 0.0]], dtype=complex))[0]))
    res.check(f"{inner} is nonzero on the inner sphere", on_inner > 0.4, f"value {on_inner:.6g}")
    res.report = {"domain": str(domain), "maxdeg": maxdeg, "cuts": list(cuts), "reports": reports,
                  "inner_sphere_value": on_inner,
                  "note": "holomorphic functions extend across the hole, so compact "
                          "supports inside the outer ball give compact operators"}
    res.curves["tail"] = (("symbol", "cut", "s"), rows)
    return res


def scenario_inflation(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    res = ScenarioResult("inflation", {})
    rs = (int(cfg.weight["r"]),) if cfg.weight and "r" in cfg.weight else (1, 2)
    closed = {1: math.pi, 2: math.pi**2 / 2}
    count = int(cfg.inflation.get("pairs", 20))
    samples = int(cfg.inflation.get("samples", 10_000_000))
    rows, reports = [], []
    pairs = sample_pairs(count, seed=cfg.seed)
    for r in rs:
        rep = inflation_check(r, pairs)
        reports.append(rep.to_dict())
        rows += [(r, i, a.real, a.imag, b.real, b.imag, q)
                 for i, ((a, b), q) in enumerate(zip(rep.pairs, rep.ratios))]
        res.check(f"r={r}: constant ratio", rep.spread < 1e-6, f"relative spread {rep.spread:.3g}")
        res.check(f"r={r}: ratio equals the volume constant", rep.deviation <= 1e-8,
                  f"mean {rep.mean!r}, volume {rep.expected!r}")
        if r in closed:
            res.check(f"r={r}: closed form", abs(rep.mean - closed[r]) <= 1e-8,
                      f"mean {rep.mean!r}, closed form {closed[r]!r}")
        mc = volume_c(r, r, "monte_carlo", seed=cfg.seed, samples=samples)
        q = volume_c(r, r)
        gap = abs(mc.value - q.value)
        # on C^1 the region fills the sampling box and the estimate is exact
        z = gap / mc.stderr if mc.stderr > 0 else (0.0 if gap <= 1e-12 else math.inf)
        reports[-1]["monte_carlo"] = {"value": mc.value, "stderr": mc.stderr, "samples": mc.samples,
                                      "seed": mc.seed, "z_score": z}
        res.check(f"r={r}: Monte Carlo volume within 3 standard errors", z <= 3, f"z = {z:.3g}")
        reports[-1]["volume_closed"] = volume_c_closed(r, r)
    res.report = {"reports": reports, "seed": cfg.seed}
    res.curves["ratios"] = (("r", "pair", "xi_re", "xi_im", "z_re", "z_im", "ratio"), rows)
    return res


def scenario_localization(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    res = ScenarioResult("localization", {})
    omega = cfg.build_domain(build_domain("annulus", eps=0.5))
    weight = cfg.build_weight(UNWEIGHTED)
    p = complex_value(cfg.probe.get("point", 1), "probe.point")
    loc = cfg.localization
    R1, R2 = float(loc.get("R1", 0.2)), float(loc.get("R2", 0.4))
    maxdeg, step = int(loc.get("maxdeg", 20)), int(loc.get("step", 5))
    rep = localization_scan(omega, p, R1, R2, weight, localization_grid(p), maxdeg, step)
    res.check("C is finite", math.isfinite(rep.C) and rep.C > 0, f"C = {rep.C!r}")
    res.check("C stable between degrees", rep.stabilization < 0.1,
              f"{rep.maxdeg}: {rep.C:.6g} -> {rep.C_next:.6g} ({rep.stabilization:.3g})")
    res.check("no growth toward the boundary", rep.slope <= 0.1, f"slope {rep.slope:.3g}")
    res.check("30 grid points", len(rep.grid) == 30 and min(rep.dists) >= 1e-3,
              f"{len(rep.grid)} points, min dist {min(rep.dists):.3g}")
    # the kernel comparison that the localization rests on
    kernel_rows = []
    for dom, U, q in kernel_ratio_configs():
        lhs, rhs = kernel_ratio(dom, U, weight, q)
        kernel_rows.append((str(dom), str(U), q.real, q.imag, lhs, rhs))
    worst = max(r[4] - r[5] for r in kernel_rows)
    res.check(f"kernel comparison holds on {len(kernel_rows)} configurations", worst <= 1e-10,
              f"max lhs - rhs {worst:.3g}")
    disc = build_domain("disc")
    lhs, rhs = kernel_ratio(disc, build_domain("lens", parent=disc, center=0, radius=0.5),
                            UNWEIGHTED, 0)
    res.check("equality case: both sides 1/4", max(abs(lhs - 0.25), abs(rhs - 0.25)) <= 1e-10,
              f"lhs {lhs!r}, rhs {rhs!r}")
    res.report = {"domain": str(omega), "p": [p.real, p.imag], "R1": R1, "R2": R2,
                  "maxdeg": list(rep.maxdeg), "C": rep.C, "C_next": rep.C_next,
                  "stabilization": rep.stabilization, "slope": rep.slope,
                  "fit": {"model": rep.fit.model, "params": list(rep.fit.params),
                          "residual": rep.fit.residual},
                  "retained": list(rep.retained), "gram_residual": list(rep.gram_residual),
                  "note": rep.note, "kernel_comparisons": len(kernel_rows)}
    rows = [(z.real, z.imag, d, a, b) for z, d, a, b in
            zip(rep.grid, rep.dists, rep.ratios, rep.ratios_next)]
    rows.sort(key=lambda t: (t[2], t[1]))
    res.curves["ratios"] = (("z_re", "z_im", "dist", "ratio", "ratio_next"), rows)
    res.curves["kernel_ratio"] = (("domain", "U", "q_re", "q_im", "lhs", "rhs"), kernel_rows)
    return res


def kernel_ratio_configs():
    """25 triples ``(Omega, U, q)``: inner discs of the unit disc and of annulus(0.5)."""
    disc, ann = build_domain("disc"), build_domain("annulus", eps=0.5)
    out = []
    for c, R in ((0, 0.5), (0.3, 0.4), (-0.2j, 0.6), (0.5 + 0.1j, 0.3)):
        U = build_domain("lens", parent=disc, center=c, radius=R)
        for q in (c, c + 0.3 * R, c - 0.5j * R):
            out.append((disc, U, complex(q)))
    out.append((disc, disc, 0.4 + 0.2j))
    for c in (0.75, -0.75j, 0.7 + 0.1j, 0.72 * np.exp(2.5j)):
        U = build_domain("lens", parent=ann, center=complex(c), radius=0.2)
        for q in (c, c + 0.1, c - 0.15j):
            out.append((ann, U, complex(q)))
    return out


def scenario_lens_compactness(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    res = ScenarioResult("lens-compactness", {})
    parent = build_domain("annulus", eps=0.5)
    U = cfg.build_domain(build_domain("lens", parent=parent, center=1.0, radius=0.4))
    weight = cfg.build_weight(UNWEIGHTED)
    maxdeg = cfg.truncation or LENS_MAX_DEGREE
    cuts = cfg.cuts
    symbols = cfg.symbol or ("(1 - abs(z1)^2)*bump(1, 0.4)", "1", "abs(z1)^2")
    reports, rows = [], []
    for text in symbols:
        rep = compactness_cached(cache, U, weight, text, maxdeg, cuts, cfg.order, cfg.thresholds)
        reports.append(rep.to_dict())
        rows += _tail_rows(rep)
        _dichotomy_checks(res, rep, cfg.thresholds)
    res.report = {"domain": str(U), "maxdeg": maxdeg, "reports": reports}
    res.curves["tail"] = (("symbol", "cut", "s"), rows)
    return res


def scenario_berezin_boundary(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    res = ScenarioResult("berezin-boundary", {})
    domain = cfg.build_domain(build_domain("disc"))
    weight = cfg.build_weight(UNWEIGHTED)
    radii = [float(r) for r in cfg.probe.get("radii", [0.5, 0.7, 0.9, 0.99])]
    p = complex_value(cfg.probe.get("point", 1), "probe.point")
    rows = []
    expect = {"1 - abs(z1)^2": (-1, 0.0), "abs(z1)^2": (1, 1.0)}
    symbols = cfg.symbol or tuple(expect)
    for text in symbols:
        prof = berezin_profile(domain, weight, text, p, radii)
        vals = [v for _, v in prof]
        rows += [(text, t, d, v) for t, (d, v) in zip(radii, prof)]
        if text in expect:
            sign, limit = expect[text]
            steps = np.diff(vals) * sign
            res.check(f"{text}: monotone toward {limit}", np.all(steps > 0)
                      and abs(vals[-1] - limit) < abs(vals[0] - limit),
                      "values " + ", ".join(f"{v:.6g}" for v in vals))
    agreement = []
    for text in symbols:
        for z in (0.0, 0.5, 0.9 * p / abs(p)):
            s = berezin_quad(domain, weight, text, z, quad=cfg.order or 64,
                             N=200 if abs(z) < 0.95 else 400)
            agreement.append((text, complex(z).real, complex(z).imag, s.quad_value.real,
                              s.matrix_value.real, s.discrepancy))
    worst = max(a[-1] for a in agreement)
    res.check("quadrature and matrix routes agree", worst <= 1e-7, f"max discrepancy {worst:.3g}")
    res.report = {"domain": str(domain), "weight": weight.key(), "radii": radii,
                  "max_discrepancy": worst}
    res.curves["profile"] = (("symbol", "radius", "dist", "value"), rows)
    res.curves["routes"] = (("symbol", "z_re", "z_im", "quad", "matrix", "discrepancy"), agreement)
    return res


def scenario_product_identity(cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    res = ScenarioResult("product-identity", {})
    domain = cfg.build_domain(build_domain("disc"))
    weight = cfg.build_weight(UNWEIGHTED)
    phi = (cfg.symbol or ("abs(z1)^2",))[0]
    N = cfg.truncation or 20
    outers = (40, 80, 120)
    basis = cached_basis(cache, domain, weight, max(outers) - 1 if domain.kind != "annulus"
                         else (max(outers) - 1) // 2)
    rows = [(n_out, toeplitz_product_residual(basis, weight, phi, (1,), (1,), N, n_out, cfg.order))
            for n_out in outers]
    vals = [v for _, v in rows]
    res.check("residual decreases with the outer section",
              all(b <= a + 1e-12 for a, b in zip(vals, vals[1:])),
              ", ".join(f"{v:.3g}" for v in vals))
    res.check("residual small at the largest section", vals[-1] <= 1e-8, f"{vals[-1]:.3g}")
    res.report = {"domain": str(domain), "symbol": phi, "N": N, "K": [1], "L": [1],
                  "residuals": [{"N_outer": n, "residual": v} for n, v in rows]}
    res.curves["residual"] = (("N_outer", "residual"), rows)
    return res


SCENARIOS = {
    "dichotomy": scenario_dichotomy,
    "weighted-dichotomy": scenario_weighted_dichotomy,
    "example1": scenario_example1,
    "example3": scenario_example3,
    "polydisc-dichotomy": scenario_polydisc_dichotomy,
    "inflation": scenario_inflation,
    "localization": scenario_localization,
    "lens-compactness": scenario_lens_compactness,
    "berezin-boundary": scenario_berezin_boundary,
    "product-identity": scenario_product_identity,
}


def run_scenario(name: str, cfg: RunConfig, cache: Cache | None) -> ScenarioResult:
    try:
        fn = SCENARIOS[name]
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    return fn(cfg, cache)
