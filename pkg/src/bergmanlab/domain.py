"""Model domains, defining functions, weights and quadrature rules.

Every domain is bounded.  Reinhardt kinds (disc, polydisc, ball, annulus,
punctured disc, shell) get tensor rules in polar coordinates: Gauss-Jacobi
nodes in the moduli times equispaced angles in every coordinate.  The weight
``|rho|^r`` is folded into the Jacobi weight function so that endpoint
singularities of the weight never reach the integrand.  Lens domains
``parent & B(p, R)`` get a cellwise product rule in polar coordinates about
``p``.

Points in C^n are handled as complex arrays of shape ``(M, n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import ndimage
from scipy.special import roots_jacobi, roots_legendre

from .errors import DisconnectedPatch, InvalidParameter, UnsupportedOrder

REINHARDT_KINDS = ("disc", "polydisc", "ball", "annulus", "punctured_disc", "shell")
KINDS = REINHARDT_KINDS + ("lens",)
RHO_CHOICES = ("algebraic", "distance")

# points per cell of the lens product rule, in each direction
LENS_CELL_POINTS = 8


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    n: int = 1
    eps: float | None = None
    r_in: float | None = None
    r_out: float | None = None
    parent: DomainSpec | None = None
    center: tuple = ()
    radius: float | None = None

    @property
    def is_reinhardt(self) -> bool:
        return self.kind in REINHARDT_KINDS

    @property
    def radius_bound(self) -> float:
        """Upper bound for ``|z|`` over the closure of the domain."""
        if self.kind in ("disc", "ball", "annulus", "punctured_disc"):
            return 1.0
        if self.kind == "polydisc":
            return math.sqrt(self.n)
        if self.kind == "shell":
            return self.r_out
        return min(self.parent.radius_bound, abs(self.center[0]) + self.radius)

    @property
    def diameter(self) -> float:
        if self.kind == "lens":
            return min(2 * self.radius, 2 * self.parent.radius_bound)
        return 2 * self.radius_bound

    def fingerprint(self) -> str:
        if self.kind == "lens":
            c = self.center[0]
            return (f"lens[{self.parent.fingerprint()};"
                    f"p={c.real!r},{c.imag!r};R={self.radius!r}]")
        if self.kind == "annulus":
            return f"annulus[eps={self.eps!r}]"
        if self.kind == "shell":
            return f"shell[n={self.n};{self.r_in!r},{self.r_out!r}]"
        return f"{self.kind}[n={self.n}]"

    def contains(self, z) -> np.ndarray:
        return np.asarray(rho(self, "distance", z)) < 0

    def __str__(self):
        return self.fingerprint()


@dataclass(frozen=True)
class WeightSpec:
    """The weight ``|rho|^r`` for a choice of defining function."""

    r: float = 0.0
    rho: str = "algebraic"

    def __post_init__(self):
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise InvalidParameter(f"weight exponent must be >= 0, got {self.r}")
        if self.rho not in RHO_CHOICES:
            raise InvalidParameter(f"unknown defining function choice {self.rho!r}")

    @property
    def trivial(self) -> bool:
        return self.r == 0

    def key(self) -> str:
        if self.trivial:
            return "r=0"
        return f"r={self.r!r};rho={self.rho}"


UNWEIGHTED = WeightSpec()


def as_points(z, n: int) -> tuple[np.ndarray, bool]:
    """Return ``(points of shape (M, n), single)``; ``single`` marks one-point input."""
    arr = np.asarray(z, dtype=complex)
    if n == 1:
        if arr.ndim == 0:
            return arr.reshape(1, 1), True
        return arr.reshape(-1, 1), False
    if arr.ndim == 1:
        if arr.shape[0] != n:
            raise InvalidParameter(f"expected a point in C^{n}, got shape {arr.shape}")
        return arr.reshape(1, n), True
    if arr.shape[-1] != n:
        raise InvalidParameter(f"expected points in C^{n}, got shape {arr.shape}")
    return arr.reshape(-1, n), False


def _unwrap(values: np.ndarray, single: bool):
    return values[0] if single else values


# ---------------------------------------------------------------------------
# construction

def build_domain(kind: str, **params) -> DomainSpec:
    """Validate parameters and build a :class:`DomainSpec`.

    ``disc``, ``punctured_disc``; ``polydisc`` and ``ball`` take ``n``;
    ``annulus`` takes ``eps``; ``shell`` takes ``r_in``, ``r_out`` (and ``n``,
    default 2); ``lens`` takes ``parent``, ``center`` and ``radius``.
    """
    if kind == "bidisc":
        kind, params = "polydisc", {**params, "n": 2}
    if kind not in KINDS:
        raise InvalidParameter(f"unknown domain kind {kind!r}")

    def take(name, default=None):
        value = params.pop(name, default)
        if value is None:
            raise InvalidParameter(f"{kind} needs parameter {name!r}")
        return value

    if kind in ("disc", "punctured_disc"):
        n = int(take("n", 1))
        if n != 1:
            raise InvalidParameter(f"{kind} lives in C^1")
        dom = DomainSpec(kind, 1)
    elif kind in ("polydisc", "ball"):
        n = int(take("n", 2))
        if n < 1:
            raise InvalidParameter("dimension must be >= 1")
        dom = DomainSpec(kind, n)
    elif kind == "annulus":
        eps = float(take("eps"))
        if not 0 < eps < 1:
            raise InvalidParameter(f"annulus needs eps in (0, 1), got {eps}")
        dom = DomainSpec(kind, 1, eps=eps)
    elif kind == "shell":
        n = int(take("n", 2))
        r_in, r_out = float(take("r_in", 1.0)), float(take("r_out", 2.0))
        if n < 2:
            raise InvalidParameter("shell domains live in C^n with n >= 2")
        if not 0 < r_in < r_out:
            raise InvalidParameter(f"shell needs 0 < r_in < r_out, got {r_in}, {r_out}")
        dom = DomainSpec(kind, n, r_in=r_in, r_out=r_out)
    else:
        dom = _build_lens(take("parent"), take("center"), take("radius"))
    if params:
        raise InvalidParameter(f"unexpected parameters for {kind}: {sorted(params)}")
    return dom


def _build_lens(parent, center, radius) -> DomainSpec:
    if not isinstance(parent, DomainSpec):
        raise InvalidParameter("lens needs a parent DomainSpec")
    if parent.kind not in ("disc", "annulus", "punctured_disc"):
        raise InvalidParameter("lens parents must be planar disc-type domains")
    p = complex(np.ravel(np.asarray(center, dtype=complex))[0])
    R = float(radius)
    if not R > 0:
        raise InvalidParameter(f"lens radius must be positive, got {R}")
    if abs(p) > 1 + 1e-12:
        raise InvalidParameter("lens center must lie in the closure of the parent")
    if parent.kind == "annulus" and abs(p) - R < parent.eps:
        raise InvalidParameter("lens ball must not reach the inner boundary circle")
    dom = DomainSpec("lens", 1, parent=parent, center=(p,), radius=R)
    _check_lens_connected(dom)
    return dom


def _check_lens_connected(dom: DomainSpec, grid: int = 241):
    p, R = dom.center[0], dom.radius
    xs = np.linspace(p.real - R, p.real + R, grid)
    ys = np.linspace(p.imag - R, p.imag + R, grid)
    Z = xs[None, :] + 1j * ys[:, None]
    mask = dom.contains(Z.reshape(-1)).reshape(Z.shape)
    if not mask.any():
        raise InvalidParameter("lens is empty")
    _, count = ndimage.label(mask)
    if count != 1:
        raise DisconnectedPatch(f"lens has {count} components on the sample grid")


# ---------------------------------------------------------------------------
# defining functions and weights

def _rho_points(domain: DomainSpec, choice: str, Z: np.ndarray) -> np.ndarray:
    kind = domain.kind
    a = np.abs(Z)
    if kind == "lens":
        parent = _rho_points(domain.parent, choice, Z)
        d = np.abs(Z[:, 0] - domain.center[0])
        own = d**2 - domain.radius**2 if choice == "algebraic" else d - domain.radius
        return np.maximum(parent, own)
    if kind in ("disc", "punctured_disc") and not (kind == "punctured_disc" and choice == "distance"):
        t = a[:, 0]
        return t**2 - 1 if choice == "algebraic" else t - 1
    if kind == "punctured_disc":
        t = a[:, 0]
        return np.maximum(t - 1, -t)
    if kind == "annulus":
        t, e = a[:, 0], domain.eps
        if choice == "algebraic":
            return (t**2 - 1) * (t**2 - e**2)
        return np.maximum(t - 1, e - t)
    if kind == "polydisc":
        if choice == "distance":
            return np.max(a - 1, axis=1)
        inside = np.all(a <= 1, axis=1)
        return np.where(inside, -np.prod(1 - a**2, axis=1), np.max(a**2 - 1, axis=1))
    tau = np.linalg.norm(a, axis=1)
    if kind == "ball":
        return tau**2 - 1 if choice == "algebraic" else tau - 1
    lo, hi = domain.r_in, domain.r_out
    if choice == "algebraic":
        return (tau**2 - hi**2) * (tau**2 - lo**2)
    return np.maximum(tau - hi, lo - tau)


def rho(domain: DomainSpec, choice: str, z):
    """Defining function: negative inside, zero on the boundary, positive outside.

    ``choice="distance"`` equals minus the boundary distance inside the domain.
    The algebraic choices are ``|z|^2-1`` (disc, ball), ``-(1-|z1|^2)...(1-|zn|^2)``
    (polydisc, inside), ``(|z|^2-1)(|z|^2-eps^2)`` (annulus) and
    ``(|z|^2-r_out^2)(|z|^2-r_in^2)`` (shell).  The punctured disc uses the disc's
    algebraic function, which does not see the puncture; its distance function
    does.
    """
    if choice not in RHO_CHOICES:
        raise InvalidParameter(f"unknown defining function choice {choice!r}")
    Z, single = as_points(z, domain.n)
    return _unwrap(_rho_points(domain, choice, Z), single)


def weight_value(domain: DomainSpec, weight: WeightSpec, z):
    """``|rho(z)|^r``; a lens carries the weight of its parent domain."""
    Z, single = as_points(z, domain.n)
    if weight.trivial:
        return _unwrap(np.ones(len(Z)), single)
    base = domain.parent if domain.kind == "lens" else domain
    return _unwrap(np.abs(_rho_points(base, weight.rho, Z)) ** weight.r, single)


# ---------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True)
class ReinhardtStructure:
    """Tensor structure of a polar rule: radial nodes times ``n_angles**n`` angles.

    ``radial_weights`` integrate ``g(t) * h(t) * t_1 ... t_n dt`` over the radial
    region, so a full node carries ``radial_weight * (2 pi / n_angles)**n``.
    ``radial_degree`` is the largest total degree in ``(z, zbar)`` whose
    angle-surviving part the radial rule integrates exactly.
    """

    moduli: np.ndarray
    radial_weights: np.ndarray
    n_angles: int
    radial_degree: int


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    domain: DomainSpec
    weight: WeightSpec
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    exactness_degree: int
    structure: ReinhardtStructure | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.weights)

    def integrate(self, values) -> complex:
        return complex(np.dot(self.weights, values))


def _gauss_jacobi(n: int, a: float, b: float, alpha: float = 0.0, beta: float = 0.0):
    """Nodes/weights for the integral of ``f(x) (b-x)^alpha (x-a)^beta`` over ``[a, b]``."""
    x, w = _reference_jacobi(n, float(alpha), float(beta))
    half = (b - a) / 2
    return a + half * (x + 1), w * half ** (1 + alpha + beta)


@lru_cache(maxsize=256)
def _reference_jacobi(n, alpha, beta):
    if alpha == 0 and beta == 0:
        x, w = roots_legendre(n)
    else:
        x, w = roots_jacobi(n, alpha, beta)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _simplex_rule(d: int, o: int):
    """Collapsed Gauss rule on ``{v >= 0, sum(v) <= 1}`` in R^d (Lebesgue measure)."""
    if d == 0:
        return np.zeros((1, 0)), np.ones(1)
    axes = [_gauss_jacobi(o, 0.0, 1.0, alpha=d - k) for k in range(1, d + 1)]
    grids = np.meshgrid(*[x for x, _ in axes], indexing="ij")
    wgrids = np.meshgrid(*[w for _, w in axes], indexing="ij")
    X = np.stack([g.reshape(-1) for g in grids], axis=1)
    W = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=1), axis=1)
    V = np.empty_like(X)
    rest = np.ones(len(X))
    for k in range(d):
        V[:, k] = X[:, k] * rest
        rest = rest * (1 - X[:, k])
    return V, W


def _radial_disc(domain, weight, o, oa=None):
    r = weight.r
    if weight.trivial or weight.rho == "algebraic":
        u, w = _gauss_jacobi(o, 0.0, 1.0, alpha=r)
        return np.sqrt(u)[:, None], w / 2, 4 * o - 2
    if domain.kind == "punctured_disc":
        return _radial_annulus_distance(0.0, r, o)
    t, w = _gauss_jacobi(o, 0.0, 1.0, alpha=r, beta=1.0)
    return t[:, None], w, 2 * o - 2


def _radial_annulus_distance(eps, r, o):
    mid = (1 + eps) / 2
    t1, w1 = _gauss_jacobi(o, mid, 1.0, alpha=r)
    t0, w0 = _gauss_jacobi(o, eps, mid, beta=r)
    t = np.concatenate([t0, t1])
    return t[:, None], np.concatenate([w0, w1]) * t, 2 * o - 2


def _radial_annulus(domain, weight, o, oa=None):
    eps, r = domain.eps, weight.r
    if weight.trivial or weight.rho == "algebraic":
        u, w = _gauss_jacobi(o, eps**2, 1.0, alpha=r, beta=r)
        return np.sqrt(u)[:, None], w / 2, 4 * o - 2
    return _radial_annulus_distance(eps, r, o)


def _radial_polydisc(domain, weight, o, oa=None):
    n, r = domain.n, weight.r
    if weight.trivial or weight.rho == "algebraic":
        u, w = _gauss_jacobi(o, 0.0, 1.0, alpha=r)
        grids = np.meshgrid(*([np.sqrt(u)] * n), indexing="ij")
        wgrids = np.meshgrid(*([w / 2] * n), indexing="ij")
        T = np.stack([g.reshape(-1) for g in grids], axis=1)
        W = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=1), axis=1)
        return T, W, 4 * o - 2
    # split the cube by which coordinate carries the largest modulus
    s, ws = _gauss_jacobi(o, 0.0, 1.0, alpha=r, beta=2 * n - 1)
    y, wy = _gauss_jacobi(o, 0.0, 1.0, beta=1.0)
    blocks, wblocks = [], []
    for k in range(n):
        grids = np.meshgrid(s, *([y] * (n - 1)), indexing="ij")
        wgrids = np.meshgrid(ws, *([wy] * (n - 1)), indexing="ij")
        S = grids[0].reshape(-1)
        Ys = [g.reshape(-1) for g in grids[1:]]
        W = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=1), axis=1)
        cols = Ys[:k] + [None] + Ys[k:]
        T = np.stack([S if c is None else S * c for c in cols], axis=1)
        blocks.append(T)
        wblocks.append(W)
    return np.concatenate(blocks), np.concatenate(wblocks), 2 * o - 2


def _spread_on_simplex(s, ws, n, o):
    """Lift radial nodes in ``s = |z|^2`` to moduli vectors through the simplex."""
    V, wv = _simplex_rule(n - 1, o)
    full = np.concatenate([V, 1 - V.sum(axis=1, keepdims=True)], axis=1)
    U = s[:, None, None] * full[None, :, :]
    W = ws[:, None] * wv[None, :] / 2**n
    return np.sqrt(np.clip(U, 0, None)).reshape(-1, n), W.reshape(-1)


def _radial_ball(domain, weight, o, oa):
    n, r = domain.n, weight.r
    if weight.trivial or weight.rho == "algebraic":
        s, ws = _gauss_jacobi(o, 0.0, 1.0, alpha=r, beta=n - 1)
        T, W = _spread_on_simplex(s, ws, n, oa)
        return T, W, 4 * min(o, oa) - 2
    tau, wt = _gauss_jacobi(o, 0.0, 1.0, alpha=r, beta=2 * n - 1)
    T, W = _spread_on_simplex(tau**2, 2 * wt, n, oa)
    return T, W, min(2 * o, 4 * oa) - 2


def _radial_shell(domain, weight, o, oa):
    n, r = domain.n, weight.r
    lo, hi = domain.r_in, domain.r_out
    if weight.trivial or weight.rho == "algebraic":
        s, ws = _gauss_jacobi(o, lo**2, hi**2, alpha=r, beta=r)
        T, W = _spread_on_simplex(s, ws * s ** (n - 1), n, oa)
        return T, W, min(4 * o - 2 * n, 4 * oa - 2)
    mid = (lo + hi) / 2
    t1, w1 = _gauss_jacobi(o, mid, hi, alpha=r)
    t0, w0 = _gauss_jacobi(o, lo, mid, beta=r)
    tau = np.concatenate([t0, t1])
    wt = np.concatenate([w0, w1]) * 2 * tau ** (2 * n - 1)
    T, W = _spread_on_simplex(tau**2, wt, n, oa)
    return T, W, min(2 * o - 2 * n, 4 * oa - 2)


_RADIAL = {
    "disc": _radial_disc,
    "punctured_disc": _radial_disc,
    "annulus": _radial_annulus,
    "polydisc": _radial_polydisc,
    "ball": _radial_ball,
    "shell": _radial_shell,
}


def reinhardt_structure(domain: DomainSpec, order: int, weight: WeightSpec | None = None,
                        n_angles: int | None = None,
                        aux_order: int | None = None) -> ReinhardtStructure:
    """Radial part of the polar rule plus the angle count, without materializing nodes.

    On balls and shells ``aux_order`` (default ``order``) is the number of
    nodes per direction of the simplex factor that spreads ``|z|^2`` over the
    coordinates; other kinds ignore it.
    """
    weight = weight or UNWEIGHTED
    order = int(order)
    aux_order = order if aux_order is None else int(aux_order)
    if min(order, aux_order) < 4:
        raise UnsupportedOrder(f"quadrature order must be >= 4, got {min(order, aux_order)}")
    if not domain.is_reinhardt:
        raise UnsupportedOrder(f"{domain.kind} has no polar tensor rule")
    M = int(n_angles) if n_angles is not None else 2 * order
    if M < 1:
        raise UnsupportedOrder("need at least one angle per coordinate")
    T, W, radial_degree = _radial_rule(domain.kind, domain, weight, order, aux_order)
    return ReinhardtStructure(T, W, M, radial_degree)


@lru_cache(maxsize=64)
def _radial_rule(kind, domain, weight, order, aux_order):
    T, W, deg = _RADIAL[kind](domain, weight, order, aux_order)
    T.setflags(write=False)
    W.setflags(write=False)
    return T, W, deg


def quadrature(domain: DomainSpec, order: int, weight: WeightSpec | None = None,
               n_angles: int | None = None) -> QuadratureRule:
    """Quadrature rule integrating ``f |rho|^r dV`` over the domain.

    For Reinhardt kinds ``order`` is the number of Gauss nodes per radial
    variable and ``n_angles`` (default ``2*order``) the number of equispaced
    angles per coordinate.  For lenses ``order`` sets the number of cells of the
    fixed 8x8 product rule (about ``order/8`` per direction and segment).
    """
    weight = weight or UNWEIGHTED
    order = int(order)
    if order < 4:
        raise UnsupportedOrder(f"quadrature order must be >= 4, got {order}")
    if domain.kind == "lens":
        return _lens_rule(domain, order, weight)
    structure = reinhardt_structure(domain, order, weight, n_angles)
    nodes, weights = structure_nodes(structure, domain.n)
    return QuadratureRule(domain, weight, nodes, weights, order,
                          min(structure.radial_degree, structure.n_angles - 1), structure)


def angle_grid(M: int) -> np.ndarray:
    return 2 * np.pi * np.arange(M) / M


def angle_phases(M: int, n: int) -> np.ndarray:
    """All ``M**n`` phase vectors ``exp(i theta)``, first coordinate slowest."""
    grids = np.meshgrid(*([np.exp(1j * angle_grid(M))] * n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def structure_nodes(st: ReinhardtStructure, n: int, rows=slice(None)):
    """Nodes and weights of the tensor rule for a subset of radial nodes.

    Nodes are ordered radial-major, then angles as in :func:`angle_phases`.
    """
    M = st.n_angles
    P = angle_phases(M, n)
    nodes = (st.moduli[rows][:, None, :] * P[None, :, :]).reshape(-1, n)
    weights = np.repeat(st.radial_weights[rows] * (2 * np.pi / M) ** n, M**n)
    return nodes, weights


def translated_disc_rule(center: complex, radius: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Unweighted polar rule on the disc ``B(center, radius)`` in C^1: ``(points, weights)``."""
    rule = quadrature(build_domain("disc"), order)
    return center + radius * rule.nodes[:, 0], rule.weights * radius**2


# ---------------------------------------------------------------------------
# lens rule

def _lens_geometry(domain):
    p = domain.center[0]
    R = domain.radius
    a = abs(p)

    def rho_out(psi):
        c = np.real(np.conj(p) * np.exp(1j * psi))
        return -c + np.sqrt(np.maximum(c * c + 1 - a * a, 0.0))

    if a > 1 - 1e-12:
        phi = np.angle(p)
        lo, hi = phi + np.pi / 2, phi + 3 * np.pi / 2
        full = False
    else:
        phi = np.angle(p) if a > 0 else 0.0
        lo, hi = phi, phi + 2 * np.pi
        full = True
    breaks = []
    if a > 0:
        kappa = (1 - a * a - R * R) / (2 * R * a)
        if -1 < kappa < 1:
            ac = math.acos(kappa)
            for b in (phi + ac, phi - ac, phi + 2 * np.pi - ac):
                if lo + 1e-14 < b < hi - 1e-14:
                    breaks.append(b)
    breaks = sorted(set(breaks))
    return rho_out, lo, hi, full, breaks


def _lens_rule(domain: DomainSpec, order: int, weight: WeightSpec) -> QuadratureRule:
    p, R = domain.center[0], domain.radius
    parent = domain.parent
    rho_out, lo, hi, full, breaks = _lens_geometry(domain)
    m = max(1, order // LENS_CELL_POINTS)
    q = LENS_CELL_POINTS
    gl_x, gl_w = roots_legendre(q)

    if full and not breaks:
        K = q * m
        psi = lo + 2 * np.pi * np.arange(K) / K
        wpsi = np.full(K, 2 * np.pi / K)
    else:
        edges = [lo] + breaks + [hi]
        psi_l, w_l = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            cells = np.linspace(a, b, m + 1)
            for c0, c1 in zip(cells[:-1], cells[1:]):
                h = (c1 - c0) / 2
                psi_l.append(c0 + h * (gl_x + 1))
                w_l.append(h * gl_w)
        psi, wpsi = np.concatenate(psi_l), np.concatenate(w_l)

    rmax_parent = rho_out(psi)
    upper = np.minimum(R, rmax_parent)
    on_parent = rmax_parent < R
    r = weight.r
    kink = None
    if not weight.trivial and weight.rho == "distance":
        inner = parent.eps if parent.kind == "annulus" else (0.0 if parent.kind == "punctured_disc" else None)
        if inner is not None:
            kink = (1 + inner) / 2

    nodes, weights = [], []
    for k in range(len(psi)):
        e = np.exp(1j * psi[k])
        top = upper[k]
        pieces = [0.0, top]
        if kink is not None:
            # radii along the ray where |p + s e| crosses the kink circle
            c = np.real(np.conj(p) * e)
            disc = c * c - abs(p) ** 2 + kink**2
            if disc > 0:
                for s0 in (-c - math.sqrt(disc), -c + math.sqrt(disc)):
                    if 1e-12 < s0 < top - 1e-12:
                        pieces.append(s0)
        pieces = sorted(pieces)
        for a, b in zip(pieces[:-1], pieces[1:]):
            cells = np.linspace(a, b, m + 1)
            for j, (c0, c1) in enumerate(zip(cells[:-1], cells[1:])):
                jac = r > 0 and on_parent[k] and c1 == top
                if jac:
                    s, ws = _gauss_jacobi(q, c0, c1, alpha=r)
                else:
                    h = (c1 - c0) / 2
                    s, ws = c0 + h * (gl_x + 1), h * gl_w
                z = p + s * e
                hv = weight_value(domain, weight, z) if r > 0 else np.ones(q)
                if jac:
                    hv = hv / (top - s) ** r
                nodes.append(z)
                weights.append(wpsi[k] * ws * s * hv)
    nodes = np.concatenate(nodes)[:, None]
    weights = np.concatenate(weights)
    return QuadratureRule(domain, weight, nodes, weights, order, 2 * q - 1)


# ---------------------------------------------------------------------------
# boundary sampling

def _sphere_moduli(n: int, m: int) -> np.ndarray:
    """Moduli vectors ``(t_1..t_n)`` on the positive orthant of the unit sphere."""
    if n == 1:
        return np.ones((1, 1))
    ang = np.linspace(0, np.pi / 2, m)
    rest = _sphere_moduli(n - 1, m)
    head = np.cos(ang)[:, None]
    tail = np.sin(ang)[:, None, None] * rest[None, :, :]
    return np.concatenate([np.repeat(head[:, None, :], len(rest), axis=1), tail], axis=2).reshape(-1, n)


def _sphere_points(n: int, m: int, radius: float) -> np.ndarray:
    T = _sphere_moduli(n, m)
    theta = angle_grid(m)
    grids = np.meshgrid(*([np.exp(1j * theta)] * n), indexing="ij")
    P = np.stack([g.reshape(-1) for g in grids], axis=1)
    return radius * (T[:, None, :] * P[None, :, :]).reshape(-1, n)


def boundary_grid(domain: DomainSpec, m: int) -> np.ndarray:
    """Points on every boundary component, shape ``(M, n)``.

    Planar circles get ``m`` points each; the punctured disc adds the
    puncture.  Spheres and the polydisc's faces use tensor grids with ``m``
    samples per angle.
    """
    m = int(m)
    if m < 1:
        raise InvalidParameter("need at least one boundary sample")
    circle = np.exp(1j * angle_grid(m))
    kind = domain.kind
    if kind == "disc":
        return circle[:, None]
    if kind == "punctured_disc":
        return np.concatenate([circle, [0.0]])[:, None]
    if kind == "annulus":
        return np.concatenate([circle, domain.eps * circle])[:, None]
    if kind == "ball":
        return _sphere_points(domain.n, m, 1.0)
    if kind == "shell":
        return np.concatenate([_sphere_points(domain.n, m, domain.r_in),
                               _sphere_points(domain.n, m, domain.r_out)])
    if kind == "polydisc":
        n = domain.n
        closed = np.concatenate([[0.0], 0.5 * circle, circle])
        faces = []
        for j in range(n):
            axes = [closed] * n
            axes[j] = circle
            grids = np.meshgrid(*axes, indexing="ij")
            faces.append(np.stack([g.reshape(-1) for g in grids], axis=1))
        return np.concatenate(faces)
    # lens: parent arcs inside the ball plus the ball's arc inside the parent
    p, R = domain.center[0], domain.radius
    parent_pts = boundary_grid(domain.parent, 8 * m)[:, 0]
    parent_pts = parent_pts[np.abs(parent_pts - p) <= R]
    arc = p + R * np.exp(1j * angle_grid(8 * m))
    arc = arc[rho(domain.parent, "distance", arc) <= 0]
    pts = np.concatenate([parent_pts, arc])
    idx = np.linspace(0, len(pts) - 1, min(len(pts), 2 * m)).round().astype(int)
    return pts[np.unique(idx)][:, None]


def interior_grid(domain: DomainSpec, m: int = 12, min_dist: float = 1e-3) -> np.ndarray:
    """Deterministic interior sample with boundary distance at least ``min_dist``."""
    n = domain.n
    R = domain.radius_bound
    if domain.kind == "lens":
        p = domain.center[0]
        xs = np.linspace(p.real - domain.radius, p.real + domain.radius, 4 * m)
        ys = np.linspace(p.imag - domain.radius, p.imag + domain.radius, 4 * m)
        Z = (xs[None, :] + 1j * ys[:, None]).reshape(-1, 1)
    else:
        side = np.linspace(-R, R, m if n > 1 else 4 * m)
        axes = [side[:, None] + 1j * side[None, :]] * n
        flat = [a.reshape(-1) for a in axes]
        grids = np.meshgrid(*flat, indexing="ij")
        Z = np.stack([g.reshape(-1) for g in grids], axis=1)
    d = -np.asarray(rho(domain, "distance", Z))
    return Z[d >= min_dist]
