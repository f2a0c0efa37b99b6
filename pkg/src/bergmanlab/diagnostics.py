"""Executable versions of the compactness, localization and inflation statements.

No finite computation certifies compactness.  The tail indicator reports how
the norms of trailing blocks of a finite section decay, and a verdict against
explicit thresholds; the verdicts are heuristics at a stated resolution.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .domain import (UNWEIGHTED, DomainSpec, WeightSpec, as_points, build_domain, quadrature,
                     rho, translated_disc_rule)
from .errors import InvalidParameter, TruncationInsufficient, UnsupportedDomain
from .kernel import (inner_disc, inner_disc_kernel_diag, kernel_diag, kernel_diag_numeric,
                     kernel_series, lens_orthobasis, monomial_basis, normalized_kernel)
from .operator import (MAX_DIM, OperatorMatrix, berezin_quad, singular_values,
                       toeplitz)
from .symbol import as_symbol, boundary_sup, eval_points

DECAY_THRESHOLD = 0.05
PERSIST_THRESHOLD = 0.5


# ---------------------------------------------------------------------------
# compactness

@dataclass(frozen=True)
class CompactnessReport:
    symbol: str
    domain: str
    weight: str
    N_outer: int
    cuts: tuple
    tail: tuple
    boundary_sup: float | None
    verdict: str
    thresholds: tuple = (DECAY_THRESHOLD, PERSIST_THRESHOLD)
    note: str = "finite-section heuristic; thresholds are not certificates"

    @property
    def ratio(self) -> float:
        return self.tail[-1] / self.tail[0] if self.tail[0] > 0 else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ratio"] = self.ratio
        return d


def verdict_for(ratio: float, thresholds=(DECAY_THRESHOLD, PERSIST_THRESHOLD)) -> str:
    decay, persist = thresholds
    if ratio < decay:
        return "decaying"
    if ratio > persist:
        return "non-decaying"
    return "inconclusive"


def default_cuts(top: int) -> list[int]:
    """Grades ``0, top/8, top/4, top/2, 3 top/4, top - 1`` (deduplicated)."""
    cuts = {0, top // 8, top // 4, top // 2, 3 * top // 4, max(top - 1, 0)}
    return sorted(cuts)


def tail_indicator(T: OperatorMatrix, cuts=None, thresholds=(DECAY_THRESHOLD, PERSIST_THRESHOLD),
                   boundary_sup: float | None = None) -> CompactnessReport:
    """Largest singular value ``s_j`` of the block of ``T`` on basis elements of grade ``>= j``.

    Verdict ``decaying`` when ``s_last / s_first`` falls below the first
    threshold, ``non-decaying`` above the second, otherwise ``inconclusive``.

    Examples
    --------
    >>> from bergmanlab.domain import build_domain
    >>> from bergmanlab.kernel import monomial_basis
    >>> from bergmanlab.operator import toeplitz
    >>> T = toeplitz(monomial_basis(build_domain("disc"), None, 19), None, "1 - abs(z1)^2")
    >>> r = tail_indicator(T, [0, 8, 18])
    >>> [round(s, 12) for s in r.tail], r.verdict
    ([0.5, 0.1, 0.05], 'inconclusive')
    """
    grades = T.grades
    top = int(grades.max())
    cuts = default_cuts(top) if cuts is None else [int(c) for c in cuts]
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise InvalidParameter("cuts must be strictly increasing")
    if not cuts or cuts[0] < 0 or cuts[-1] > top - 1:
        raise InvalidParameter(f"cuts must lie in [0, {top - 1}]")
    A = T.entries
    tail = []
    for j in cuts:
        sel = np.nonzero(grades >= j)[0]
        tail.append(float(singular_values(A[np.ix_(sel, sel)])[0]))
    ratio = tail[-1] / tail[0] if tail[0] > 0 else 0.0
    dom = T.basis.domain
    return CompactnessReport(T.symbol, str(dom), T.basis.weight.key(), T.N, tuple(cuts),
                             tuple(tail), boundary_sup, verdict_for(ratio, thresholds),
                             tuple(thresholds))


def standard_basis(domain: DomainSpec, weight: WeightSpec | None, truncation: int,
                   order: int | None = None):
    """Basis at a standard resolution.

    ``truncation`` counts basis functions on planar Reinhardt domains (the
    section size ``N_outer``), is the grade bound on domains in C^n with
    ``n >= 2``, and is the polynomial degree on lenses.
    """
    weight = weight or UNWEIGHTED
    if domain.kind == "lens":
        return lens_orthobasis(domain, truncation, order, weight)
    if domain.n == 1:
        grade = (truncation - 1) // 2 if domain.kind == "annulus" else truncation - 1
        return monomial_basis(domain, weight, grade)
    return monomial_basis(domain, weight, truncation)


def compactness(domain: DomainSpec, weight: WeightSpec | None, phi, truncation: int,
                cuts=None, order: int | None = None,
                thresholds=(DECAY_THRESHOLD, PERSIST_THRESHOLD),
                richardson: bool | None = None) -> CompactnessReport:
    """Tail indicator of ``T_phi`` together with ``sup |phi|`` on the boundary."""
    phi = as_symbol(phi)
    basis = standard_basis(domain, weight, truncation, order)
    T = toeplitz(basis, weight, phi, quad=order, richardson=richardson)
    return tail_indicator(T, cuts, thresholds, boundary_sup(phi, domain, 64))


def coherent(report: CompactnessReport, decay_sup: float = 0.05, persist_sup: float = 0.5) -> bool:
    """Decay only where the symbol is small on the boundary; persistence where it is large."""
    if report.boundary_sup is None:
        return True
    if report.verdict == "decaying" and not report.boundary_sup < decay_sup:
        return False
    if report.boundary_sup > persist_sup and report.verdict != "non-decaying":
        return False
    return True


# ---------------------------------------------------------------------------
# Berezin transform and weak convergence

def _ray_points(domain: DomainSpec, p, radii):
    pv = as_points(p, domain.n)[0][0]
    norm = np.linalg.norm(pv)
    if norm == 0:
        raise InvalidParameter("the ray needs a nonzero boundary point")
    return [float(t) * pv / norm for t in radii]


def _distance(domain: DomainSpec, z) -> float:
    return float(-np.asarray(rho(domain, "distance", as_points(z, domain.n)[0]))[0])


def _auto_grade(domain: DomainSpec, weight, z, tol: float) -> int:
    q = float(np.max(np.abs(np.ravel(z)))) ** 2 if domain.kind != "ball" else float(np.linalg.norm(z)) ** 2
    N = 16 if q == 0 else max(16, int(math.ceil(math.log(tol) / math.log(q))))
    if domain.n > 1:
        return N
    while N < MAX_DIM - 1:
        try:
            normalized_kernel(domain, weight, z, N, tol=tol)
            return N
        except TruncationInsufficient:
            N = int(N * 1.25) + 1
    raise TruncationInsufficient(f"no truncation below {MAX_DIM} reaches {tol:g}")


def berezin_profile(domain: DomainSpec, weight: WeightSpec | None, phi, p, radii,
                    N: int | None = None, order: int = 64, squared: bool = False,
                    tol: float = 1e-10) -> list[tuple[float, float]]:
    """Berezin transform of ``T_phi`` along the ray ``t p / |p|``.

    With ``squared`` the symbol ``|phi|^2`` is used.  Returns ``(dist, value)``
    pairs; ``N=None`` picks the truncation per point so that the normalized
    kernel misses less than ``tol`` of its mass.
    """
    weight = weight or UNWEIGHTED
    phi = as_symbol(phi)
    if squared:
        base = phi
        phi = lambda Z: np.abs(eval_points(base, Z)) ** 2  # noqa: E731
    out = []
    for z in _ray_points(domain, p, radii):
        d = _distance(domain, z)
        if d < 1e-3:
            raise InvalidParameter(f"point at boundary distance {d:.3g} < 1e-3")
        n_z = N or _auto_grade(domain, weight, z, tol)
        zz = z[0] if domain.n == 1 else z
        s = berezin_quad(domain, weight, phi, zz, order, n_z, tol=max(tol, 1e-6))
        out.append((d, float(s.quad_value.real)))
    return out


def weak_probe(domain: DomainSpec, weight: WeightSpec | None, f, p, dists,
               direction=None) -> list[tuple[float, float]]:
    """``|f(z)|^2 / K(z, z)`` at ``z = p + d u`` for each distance ``d``.

    ``u`` defaults to the inward direction at ``p``; for ``p = 0`` (the
    puncture) it is the positive real axis.
    """
    weight = weight or UNWEIGHTED
    f = as_symbol(f)
    pv = as_points(p, domain.n)[0][0]
    if direction is None:
        norm = np.linalg.norm(pv)
        if norm == 0:
            u = np.zeros(domain.n, dtype=complex)
            u[0] = 1
        else:
            u = -pv / norm
            if _distance(domain, pv + 1e-6 * u) <= 0:
                u = -u
    else:
        u = as_points(direction, domain.n)[0][0]
        u = u / np.linalg.norm(u)
    out = []
    for d in dists:
        z = pv + float(d) * u
        zq = z[0] if domain.n == 1 else z
        K = kernel_diag(domain, weight, zq)
        fz = eval_points(f, z.reshape(1, -1))[0]
        out.append((float(d), float(abs(fz) ** 2 / K)))
    return out


# ---------------------------------------------------------------------------
# kernel comparison on subdomains

def kernel_ratio(omega: DomainSpec, U: DomainSpec, weight: WeightSpec | None, q,
                 quad: int = 64) -> tuple[float, float]:
    """``(K_Omega(q,q) / K_U(q,q), integral over U of |k_q|^2 |rho|^r)``.

    ``U`` is ``omega`` itself or an inner disc (a lens whose ball lies inside
    ``omega``).  The first entry never exceeds the second.
    """
    weight = weight or UNWEIGHTED
    if omega.kind not in ("disc", "punctured_disc", "annulus"):
        raise UnsupportedDomain("kernel_ratio works on planar disc-type domains")
    qv = complex(np.ravel(q)[0])
    K_om = kernel_diag(omega, weight, qv)
    if U == omega:
        return 1.0, float(_mass_on(omega, weight, qv, K_om, None, quad))
    if not inner_disc(U) or U.parent != omega:
        raise UnsupportedDomain("U must be omega or a disc inside omega")
    K_u = inner_disc_kernel_diag(U, weight, qv)
    return K_om / K_u, float(_mass_on(omega, weight, qv, K_om, U, quad))


def _mass_on(omega, weight, q, K_om, U, quad):
    if U is None:
        nodes_w = quadrature(omega, quad, weight)
        pts, w = nodes_w.nodes[:, 0], nodes_w.weights
        reach = omega.radius_bound
    else:
        pts, w = translated_disc_rule(U.center[0], U.radius, quad)
        w = w * (np.abs(np.asarray(rho(omega, weight.rho, pts[:, None]))) ** weight.r
                 if not weight.trivial else 1.0)
        reach = abs(U.center[0]) + U.radius
    qq = abs(q) * reach
    if omega.kind == "annulus":
        qq = max(qq, omega.eps**2 / max(abs(q) * float(np.abs(pts).min()), 1e-300))
    N = 8 if qq == 0 else max(8, int(math.ceil(math.log(1e-16) / math.log(qq))) + 8)
    basis = monomial_basis(omega, weight, N)
    kq = basis.values(pts[:, None]) @ np.conj(basis.values(q)[0]) / math.sqrt(K_om)
    return np.sum(w * np.abs(kq) ** 2)


# ---------------------------------------------------------------------------
# localization

@dataclass(frozen=True)
class DecayFit:
    model: str
    params: tuple
    residual: float
    x_range: tuple

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.x_range[0]) or np.any(x > self.x_range[1]):
            raise InvalidParameter("no extrapolation beyond the sampled range")
        a, b = self.params
        if self.model == "power":
            return a * x**b
        return a / np.log(x) + b


def fit_decay(x, y, model: str = "power") -> DecayFit:
    """Least-squares fit of ``y = a x^b`` (in logs) or ``y = a / log(x) + b``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if model == "power":
        b, loga = np.polyfit(np.log(x), np.log(y), 1)
        pred = loga + b * np.log(x)
        res = float(np.sqrt(np.mean((np.log(y) - pred) ** 2)))
        return DecayFit("power", (float(np.exp(loga)), float(b)), res, (float(x.min()), float(x.max())))
    if model == "log":
        a, b = np.polyfit(1 / np.log(x), y, 1)
        res = float(np.sqrt(np.mean((y - (a / np.log(x) + b)) ** 2)))
        return DecayFit("log", (float(a), float(b)), res, (float(x.min()), float(x.max())))
    raise InvalidParameter(f"unknown decay model {model!r}")


@dataclass(frozen=True)
class LocalizationReport:
    domain: str
    p: complex
    R1: float
    R2: float
    maxdeg: tuple
    grid: tuple
    dists: tuple
    ratios: tuple
    ratios_next: tuple
    C: float
    C_next: float
    fit: DecayFit
    retained: tuple
    gram_residual: tuple
    note: str = "K_V is a polynomial lower bound, so C can only be under-reported"

    @property
    def stabilization(self) -> float:
        return abs(self.C_next - self.C) / self.C

    @property
    def slope(self) -> float:
        return self.fit.params[1]


def localization_grid(p: complex = 1.0, dists=None, angles=(-0.08, 0.0, 0.08)) -> np.ndarray:
    """Points ``(1 - d) p e^{i theta}`` approaching ``p`` on the unit circle."""
    dists = np.logspace(-3, math.log10(0.15), 10) if dists is None else np.asarray(dists)
    u = p / abs(p)
    return np.array([(1 - d) * u * np.exp(1j * a) for d in dists for a in angles])


def localization_scan(omega: DomainSpec, p, R1: float, R2: float, weight: WeightSpec | None = None,
                      grid=None, maxdeg: int = 20, step: int = 5,
                      order: int | None = None) -> LocalizationReport:
    """Ratios ``K_V(z,z) / K_Omega(z,z)`` for ``V = Omega & B(p, R2)`` on ``B(p, R1)``.

    ``K_V`` comes from lens bases of degree ``maxdeg`` and ``maxdeg + step``.
    """
    weight = weight or UNWEIGHTED
    if not 0 < R1 < R2:
        raise InvalidParameter("need 0 < R1 < R2")
    p = complex(p)
    V = build_domain("lens", parent=omega, center=p, radius=R2)
    Z = localization_grid(p) if grid is None else np.asarray(grid, dtype=complex).ravel()
    dists = -np.asarray(rho(omega, "distance", Z[:, None]))
    if np.any(dists < 1e-3):
        raise InvalidParameter("grid points must keep boundary distance >= 1e-3")
    if np.any(np.abs(Z - p) >= R1):
        raise InvalidParameter("grid points must lie in B(p, R1)")
    bases = [lens_orthobasis(V, m, order, weight) for m in (maxdeg, maxdeg + step)]
    K_om = np.array([kernel_series(omega, weight, z, z).value.real for z in Z])
    ratios = [kernel_diag_numeric(b, Z) / K_om for b in bases]
    fit = fit_decay(1 / dists, ratios[0], "power")
    return LocalizationReport(str(omega), p, R1, R2, (maxdeg, maxdeg + step), tuple(Z),
                              tuple(map(float, dists)), tuple(map(float, ratios[0])),
                              tuple(map(float, ratios[1])), float(ratios[0].max()),
                              float(ratios[1].max()), fit,
                              tuple(b.retained for b in bases),
                              tuple(b.gram_residual for b in bases))


# ---------------------------------------------------------------------------
# inflation

@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    method: str
    samples: int = 0
    seed: int | None = None

    def __float__(self):
        return self.value


def volume_c_closed(m: int, s: float) -> float:
    """``(2 pi / p)^m Gamma(2/p)^m / Gamma(2m/p + 1)`` with ``p = 2m/s``."""
    p = 2 * m / s
    return math.exp(m * math.log(2 * math.pi / p) + m * gammaln(2 / p) - gammaln(2 * m / p + 1))


def volume_c(m: int, s: float, method: str = "quadrature", seed: int = 0,
             samples: int = 10_000_000) -> VolumeEstimate:
    """Volume of ``{w in C^m : sum |w_j|^(2m/s) < 1}``.

    ``quadrature`` peels one modulus at a time: the slice at ``|w_1| = t`` is a
    copy of the region in C^(m-1) scaled by ``(1 - t^p)^(1/p)``.
    ``monte_carlo`` samples the unit polydisc with the given seed.
    """
    if not 1 <= int(m) <= 3 or not s > 0:
        raise InvalidParameter("volume_c needs 1 <= m <= 3 and s > 0")
    m = int(m)
    p = 2 * m / s
    if method == "quadrature":
        I = 0.5
        for k in range(2, m + 1):
            g = 2 * (k - 1) / p
            val, _ = integrate.quad(lambda t: t * (1 - t**p) ** g, 0, 1, epsabs=0, epsrel=1e-13,
                                    limit=200)
            I *= val
        return VolumeEstimate((2 * math.pi) ** m * I, 0.0, "quadrature")
    if method == "monte_carlo":
        rng = np.random.default_rng(seed)
        hits = 0
        left = int(samples)
        while left > 0:
            n = min(left, 1_000_000)
            U = rng.random((n, m))
            hits += int(np.count_nonzero((U ** (p / 2)).sum(axis=1) < 1))
            left -= n
        frac = hits / samples
        scale = math.pi**m
        return VolumeEstimate(scale * frac, scale * math.sqrt(frac * (1 - frac) / samples),
                              "monte_carlo", int(samples), int(seed))
    raise InvalidParameter(f"unknown method {method!r}")


@dataclass(frozen=True)
class InflationReport:
    r: int
    pairs: tuple
    ratios: tuple
    mean: float
    spread: float
    expected: float
    deviation: float

    def to_dict(self) -> dict:
        return {"r": self.r, "mean": self.mean, "spread": self.spread, "expected": self.expected,
                "deviation": self.deviation, "n_pairs": len(self.pairs)}


def sample_pairs(count: int = 20, radius: float = 0.8, seed: int = 0) -> list[tuple[complex, complex]]:
    rng = np.random.default_rng(seed)
    mod = radius * np.sqrt(rng.random((count, 2)))
    ang = 2 * math.pi * rng.random((count, 2))
    pts = mod * np.exp(1j * ang)
    return [(complex(a), complex(b)) for a, b in pts]


def inflation_check(r: int, pairs=None, seed: int = 0) -> InflationReport:
    """Ratio of the weighted disc kernel to the ball kernel on ``C x {0}``.

    Both kernels are summed as series; the ratio should be the volume
    constant ``c_{r,r}`` at every pair.
    """
    if r not in (1, 2):
        raise InvalidParameter("inflation check covers r in {1, 2}")
    pairs = sample_pairs(seed=seed) if pairs is None else [(complex(a), complex(b)) for a, b in pairs]
    disc = build_domain("disc")
    ball = build_domain("ball", n=1 + r)
    w = WeightSpec(float(r), "algebraic")
    ratios = []
    for xi, z in pairs:
        if max(abs(xi), abs(z)) > 0.8 + 1e-12:
            raise InvalidParameter("pairs must satisfy |xi|, |z| <= 0.8")
        Kd = kernel_series(disc, w, xi, z).value
        lift = lambda v: np.array([v] + [0] * r, dtype=complex)  # noqa: E731
        Kb = kernel_series(ball, UNWEIGHTED, lift(xi), lift(z)).value
        ratios.append(Kd / Kb)
    ratios = np.array(ratios)
    mean = complex(ratios.mean())
    spread = float((np.abs(ratios - mean)).max() / abs(mean))
    expected = float(volume_c(r, r))
    return InflationReport(r, tuple(pairs), tuple(ratios.real), mean.real, spread, expected,
                           abs(mean - expected))
