"""Orthonormal bases and weighted Bergman kernels.

On Reinhardt domains the monomials ``z^alpha`` are orthogonal, so the kernel
is the series ``sum_alpha w^alpha conj(z)^alpha / ||z^alpha||^2``.  Norms are
kept as logarithms throughout so that high grades neither overflow nor
underflow.  Lens domains get a numerical orthonormal polynomial basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
from scipy import linalg
from scipy.special import betainc, betaln, comb, gammaln, logsumexp

from .domain import (UNWEIGHTED, DomainSpec, QuadratureRule, WeightSpec, as_points,
                     quadrature)
from .errors import (InvalidParameter, NonHolomorphicSymbol, QuadratureTooCoarse,
                     TruncationInsufficient, UnsupportedDomain, UnsupportedIndex)
from .symbol import as_symbol, eval_points, is_holomorphic_polynomial

LENS_MAX_DEGREE = 40
GRAM_CUTOFF = 1e-13
GRAM_TOLERANCE = 1e-8
SERIES_TOL = 1e-13


# ---------------------------------------------------------------------------
# index sets

def graded_indices(n: int, N: int) -> np.ndarray:
    """Multi-indices in N^n with ``|alpha| <= N``, by grade, lexicographically descending."""
    rows = []
    for g in range(N + 1):
        shell = []
        for combo in combinations_with_replacement(range(n), g):
            alpha = [0] * n
            for j in combo:
                alpha[j] += 1
            shell.append(tuple(alpha))
        rows.extend(sorted(set(shell), reverse=True))
    return np.array(rows, dtype=np.int64).reshape(len(rows), n)


def annulus_indices(N: int) -> np.ndarray:
    """``0, 1, -1, 2, -2, ..., N, -N`` as a column."""
    ks = [0]
    for k in range(1, N + 1):
        ks += [k, -k]
    return np.array(ks, dtype=np.int64)[:, None]


def index_grades(domain: DomainSpec, indices: np.ndarray) -> np.ndarray:
    return np.abs(indices).sum(axis=1)


# ---------------------------------------------------------------------------
# norms

def _log_norm2_closed(domain: DomainSpec, weight: WeightSpec, A: np.ndarray):
    """Logarithm of the closed-form norms, or ``None`` when no closed form applies."""
    kind, n, r = domain.kind, domain.n, weight.r
    alg = weight.trivial or weight.rho == "algebraic"
    A = np.asarray(A, dtype=float)
    g = A.sum(axis=1)
    lfact = gammaln(A + 1).sum(axis=1)
    if kind in ("disc", "punctured_disc"):
        k = A[:, 0]
        if alg:
            return math.log(math.pi) + gammaln(k + 1) + gammaln(r + 1) - gammaln(k + r + 2)
        if kind == "disc":
            return math.log(2 * math.pi) + betaln(2 * k + 2, r + 1)
        return None
    if kind == "polydisc":
        if alg:
            return (n * math.log(math.pi) + lfact + n * gammaln(r + 1)
                    - gammaln(A + r + 2).sum(axis=1))
        a = 2 * A + 1
        # the coordinate of largest modulus carries the weight
        others = -np.log(a + 1)
        terms = others.sum(axis=1, keepdims=True) - others
        return (n * math.log(2 * math.pi) + logsumexp(terms, axis=1)
                + betaln(a.sum(axis=1) + n, r + 1))
    if kind == "ball":
        if alg:
            return n * math.log(math.pi) + lfact + gammaln(r + 1) - gammaln(n + g + r + 1)
        return (math.log(2) + n * math.log(math.pi) + lfact - gammaln(n + g)
                + betaln(2 * g + 2 * n, r + 1))
    if kind == "annulus" and weight.trivial:
        le = math.log(domain.eps)
        m = A[:, 0] + 1
        out = np.empty_like(m)
        pos, neg, zero = m > 0, m < 0, m == 0
        out[pos] = np.log(-np.expm1(2 * m[pos] * le)) - np.log(m[pos])
        x = 2 * m[neg] * le
        out[neg] = x + np.log1p(-np.exp(-x)) - np.log(-m[neg])
        out[zero] = math.log(2.0) + math.log(-le)
        return math.log(math.pi) + out
    if kind == "shell" and weight.trivial:
        p = 2 * g + 2 * n
        lo, hi = math.log(domain.r_in), math.log(domain.r_out)
        radial = p * hi + np.log(-np.expm1(p * (lo - hi))) - np.log(p)
        return math.log(2) + n * math.log(math.pi) + lfact - gammaln(n + g) + radial
    return None


def _radial_order(domain: DomainSpec, A: np.ndarray) -> int:
    g = int(np.abs(A).sum(axis=1).max(initial=0))
    o = g + 2 * domain.n + 16
    if domain.kind == "annulus":
        o = max(o, 2 * int(np.abs(A).max(initial=0)) + 64)
    return max(o, 32)


def _log_norm2_quadrature(domain: DomainSpec, weight: WeightSpec, A: np.ndarray,
                          order: int | None = None):
    rule = quadrature(domain, order or _radial_order(domain, A), weight, n_angles=1)
    st = rule.structure
    logt = np.log(st.moduli)  # (R, n)
    expo = 2 * np.asarray(A, dtype=float) @ logt.T  # (D, R)
    return domain.n * math.log(2 * math.pi) + logsumexp(expo + np.log(st.radial_weights), axis=1)


def _check_indices(domain: DomainSpec, weight: WeightSpec, A: np.ndarray):
    if domain.kind == "lens":
        raise UnsupportedDomain("lens domains have no monomial basis; use lens_orthobasis")
    if A.ndim != 2 or A.shape[1] != domain.n:
        raise UnsupportedIndex(f"indices must have {domain.n} components")
    if domain.kind != "annulus" and np.any(A < 0):
        raise UnsupportedIndex(f"negative index on {domain.kind}")
    if domain.kind == "punctured_disc" and not weight.trivial and weight.rho == "distance":
        raise UnsupportedDomain("distance weights see the puncture; no monomial basis implemented")


def log_norm2(domain: DomainSpec, weight: WeightSpec, indices, method: str = "auto",
              order: int | None = None) -> np.ndarray:
    """Logarithms of ``||z^alpha||^2`` in ``L^2(domain, |rho|^r)`` for rows of ``indices``."""
    A = np.atleast_2d(np.asarray(indices, dtype=np.int64))
    if domain.n == 1 and A.shape[0] == 1 and A.shape[1] != 1:
        A = A.T
    _check_indices(domain, weight, A)
    if method not in ("auto", "closed", "quadrature"):
        raise InvalidParameter(f"unknown norm method {method!r}")
    if method != "quadrature":
        closed = _log_norm2_closed(domain, weight, A)
        if closed is not None:
            return np.asarray(closed, dtype=float)
        if method == "closed":
            raise UnsupportedDomain(f"no closed form on {domain} with weight {weight.key()}")
    return _log_norm2_quadrature(domain, weight, A, order)


def monomial_norm2(domain: DomainSpec, weight: WeightSpec | None, alpha,
                   method: str = "auto") -> float:
    """``||z^alpha||^2`` in ``L^2(domain, |rho|^r)``.

    Examples
    --------
    >>> from bergmanlab.domain import build_domain, WeightSpec
    >>> round(monomial_norm2(build_domain("disc"), WeightSpec(1.0), 1) * 6 / math.pi, 12)
    1.0
    """
    weight = weight or UNWEIGHTED
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.int64)).reshape(1, -1)
    return float(np.exp(log_norm2(domain, weight, alpha, method)[0]))


# ---------------------------------------------------------------------------
# bases

@dataclass(frozen=True, eq=False)
class MonomialBasis:
    """Orthonormal basis ``e_alpha = z^alpha / ||z^alpha||`` up to grade ``N``."""

    domain: DomainSpec
    weight: WeightSpec
    N: int
    indices: np.ndarray
    log_norm2: np.ndarray
    grades: np.ndarray

    def __len__(self):
        return len(self.indices)

    @property
    def norm2(self) -> np.ndarray:
        return np.exp(self.log_norm2)

    def log_monomials(self, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Real and imaginary parts of ``log z^alpha``, shape ``(M, D)``."""
        with np.errstate(divide="ignore"):
            logabs = np.log(np.abs(Z))
        arg = np.angle(Z)
        A = self.indices.astype(float)
        re = np.zeros((len(Z), len(A)))
        for j in range(A.shape[1]):
            a = A[:, j]
            nz = a != 0
            re[:, nz] += logabs[:, j:j + 1] * a[nz]
        return re, arg @ A.T

    def values(self, z) -> np.ndarray:
        """``e_alpha(z)``, shape ``(M, D)`` for points ``(M, n)``."""
        Z, _ = as_points(z, self.domain.n)
        re, im = self.log_monomials(Z)
        return np.exp(re - 0.5 * self.log_norm2) * np.exp(1j * im)

    def count(self, grade: int) -> int:
        """Number of basis elements of grade at most ``grade``."""
        return int(np.searchsorted(self.grades, grade, side="right"))


@lru_cache(maxsize=64)
def monomial_basis(domain: DomainSpec, weight: WeightSpec | None = None, N: int = 20,
                   method: str = "auto") -> MonomialBasis:
    """Monomial orthonormal basis of ``A^2(domain, |rho|^r)`` up to grade ``N``."""
    weight = weight or UNWEIGHTED
    N = int(N)
    if N < 0:
        raise InvalidParameter("grade bound must be >= 0")
    if domain.kind == "annulus":
        idx = annulus_indices(N)
    else:
        idx = graded_indices(domain.n, N)
    ln = log_norm2(domain, weight, idx, method)
    grades = index_grades(domain, idx)
    for arr in (idx, ln, grades):
        arr.setflags(write=False)
    return MonomialBasis(domain, weight, N, idx, ln, grades)


# ---------------------------------------------------------------------------
# kernel values

@dataclass(frozen=True)
class KernelValue:
    value: complex
    N: int
    tail: float


def _shell_tail(shell_sums: np.ndarray) -> float:
    """Geometric estimate of the sum beyond the last grade shell."""
    if len(shell_sums) < 2:
        return math.inf
    last, prev = shell_sums[-1], shell_sums[-2]
    if last == 0:
        return 0.0
    if prev == 0:
        return math.inf
    q = last / prev
    return math.inf if q >= 1 else float(last * q / (1 - q))


def _series(basis: MonomialBasis, w: np.ndarray, z: np.ndarray):
    W = w.reshape(1, -1)
    Zc = z.reshape(1, -1)
    rw, iw = basis.log_monomials(W)
    rz, iz = basis.log_monomials(Zc)
    terms = np.exp(rw[0] + rz[0] - basis.log_norm2) * np.exp(1j * (iw[0] - iz[0]))
    shells = np.bincount(basis.grades, weights=np.abs(terms), minlength=basis.N + 1)
    return complex(terms.sum()), shells


def _initial_truncation(domain: DomainSpec, w, z, tol) -> int:
    if domain.kind == "shell":
        q = float(np.linalg.norm(w) * np.linalg.norm(z)) / domain.r_out**2
    elif domain.kind == "ball":
        q = float(np.linalg.norm(w) * np.linalg.norm(z))
    else:
        q = float(np.max(np.abs(w) * np.abs(z)))
        if domain.kind == "annulus":
            m = float(np.min(np.abs(w) * np.abs(z)))
            q = max(q, domain.eps**2 / m if m > 0 else 1.0)
    if not q < 1:
        raise InvalidParameter("kernel points must lie strictly inside the domain")
    if q == 0:
        return 4
    return max(8, int(math.ceil(math.log(tol) / math.log(q))))


def _series_cap(n: int) -> int:
    return {1: 200000, 2: 600, 3: 90}.get(n, 30)


@lru_cache(maxsize=64)
def _restricted_basis(domain: DomainSpec, weight: WeightSpec, N: int,
                      support: tuple[int, ...]) -> MonomialBasis:
    """Monomials supported on the coordinates ``support`` (the others have exponent 0)."""
    sub = graded_indices(len(support), N)
    idx = np.zeros((len(sub), domain.n), dtype=np.int64)
    idx[:, list(support)] = sub
    ln = log_norm2(domain, weight, idx)
    return MonomialBasis(domain, weight, N, idx, ln, idx.sum(axis=1))


def _series_basis(domain: DomainSpec, weight: WeightSpec, N: int, w, z):
    """Basis for the kernel sum at ``(w, z)``.

    Monomials with a positive exponent where ``w`` or ``z`` vanishes contribute
    nothing, so they are dropped.
    """
    if domain.kind != "annulus" and domain.n > 1:
        support = tuple(int(j) for j in np.flatnonzero((w != 0) & (z != 0)))
        if len(support) < domain.n:
            return _restricted_basis(domain, weight, N, support)
    return monomial_basis(domain, weight, N)


def _require_inside(domain: DomainSpec, *points):
    # the puncture is removable for Bergman functions
    host = DomainSpec("disc", 1) if domain.kind == "punctured_disc" else domain
    for pt in points:
        if not np.all(host.contains(pt[None, :])):
            raise InvalidParameter(f"point {pt.tolist()} is not inside {domain}")


def kernel_series(domain: DomainSpec, weight: WeightSpec | None, w, z, N: int | None = None,
                  tol: float | None = None) -> KernelValue:
    """Partial sum of the kernel series over grades ``<= N``.

    With ``N=None`` the truncation grows until the geometric tail estimate is
    below ``tol`` (default 1e-13) relative to the value.  With an explicit
    ``N`` and a ``tol``, an insufficient truncation raises
    :class:`TruncationInsufficient`.
    """
    weight = weight or UNWEIGHTED
    w = as_points(w, domain.n)[0][0]
    z = as_points(z, domain.n)[0][0]
    _require_inside(domain, w, z)
    target = SERIES_TOL if tol is None else tol
    if N is not None:
        if N < 1:
            raise InvalidParameter("truncation must be >= 1")
        value, shells = _series(_series_basis(domain, weight, int(N), w, z), w, z)
        tail = _shell_tail(shells)
        if tol is not None and tail > tol * max(abs(value), 1e-300):
            raise TruncationInsufficient(f"tail estimate {tail:.3g} exceeds tolerance at N={N}")
        return KernelValue(value, int(N), tail)
    N = _initial_truncation(domain, w, z, target)
    active = int(np.count_nonzero((w != 0) & (z != 0))) if domain.kind != "annulus" else 1
    cap = _series_cap(max(active, 1))
    while True:
        N = min(N, cap)
        value, shells = _series(_series_basis(domain, weight, N, w, z), w, z)
        tail = _shell_tail(shells)
        if tail <= target * abs(value):
            return KernelValue(value, N, tail)
        if N >= cap:
            raise TruncationInsufficient(f"tail estimate {tail:.3g} at the truncation cap N={cap}")
        N = int(math.ceil(1.5 * N))


def kernel_closed(domain: DomainSpec, weight: WeightSpec | None, w, z) -> complex:
    """Classical closed-form kernel ``K(w, z)`` on disc, polydisc and ball.

    Weights must be algebraic (or trivial).  The punctured disc shares the
    disc's kernel.  A lens whose ball lies inside a disc-type parent (a
    translated disc) is supported without weight.
    """
    weight = weight or UNWEIGHTED
    kind, n, r = domain.kind, domain.n, weight.r
    if not (weight.trivial or weight.rho == "algebraic"):
        raise UnsupportedDomain("closed forms need the algebraic defining function")
    wv = as_points(w, n)[0][0]
    zv = as_points(z, n)[0][0]
    if kind in ("disc", "punctured_disc"):
        return complex((r + 1) / math.pi * (1 - wv[0] * np.conj(zv[0])) ** (-(r + 2)))
    if kind == "polydisc":
        return complex(np.prod((r + 1) / math.pi * (1 - wv * np.conj(zv)) ** (-(r + 2))))
    if kind == "ball":
        c = math.exp(gammaln(n + 1 + r) - n * math.log(math.pi) - gammaln(r + 1))
        return complex(c * (1 - np.vdot(zv, wv)) ** (-(n + 1 + r)))
    if kind == "lens" and inner_disc(domain) and weight.trivial:
        c, a = domain.center[0], domain.radius
        return complex(a * a / (math.pi * (a * a - (wv[0] - c) * np.conj(zv[0] - c)) ** 2))
    raise UnsupportedDomain(f"no closed-form kernel on {domain}")


def inner_disc(domain: DomainSpec) -> bool:
    """True for a lens whose ball lies entirely inside its parent."""
    if domain.kind != "lens":
        return False
    c, a = abs(domain.center[0]), domain.radius
    if c + a > 1 + 1e-15:
        return False
    if domain.parent.kind == "annulus":
        return c - a >= domain.parent.eps - 1e-15
    return True


def inner_disc_kernel_diag(domain: DomainSpec, weight: WeightSpec | None, z) -> float:
    """``K_U(z, z)`` for an inner disc ``U`` under the parent's weight.

    Unweighted discs use the translated closed form.  A disc concentric with a
    disc parent under the algebraic weight ``(1-|z|^2)^r`` uses the series with
    incomplete-Beta norms ``pi B(a^2; k+1, r+1)``.
    """
    weight = weight or UNWEIGHTED
    if not inner_disc(domain):
        raise UnsupportedDomain("expected a disc inside its parent")
    if weight.trivial:
        return kernel_closed(domain, weight, z, z).real
    if domain.center[0] != 0 or domain.parent.kind not in ("disc", "punctured_disc") \
            or weight.rho != "algebraic":
        raise UnsupportedDomain("weighted inner discs must be concentric with a disc parent")
    a2 = domain.radius**2
    t = abs(complex(np.ravel(z)[0])) ** 2
    if not t < a2:
        raise InvalidParameter("point outside the inner disc")
    r = weight.r
    N = max(16, int(math.ceil(math.log(SERIES_TOL) / math.log(t / a2)))) if t > 0 else 1
    k = np.arange(N + 1, dtype=float)
    lognorm = math.log(math.pi) + betaln(k + 1, r + 1) + np.log(betainc(k + 1, r + 1, a2))
    with np.errstate(divide="ignore"):
        terms = np.exp(k * math.log(t) - lognorm) if t > 0 else np.where(k == 0, np.exp(-lognorm), 0.0)
    return float(terms.sum())


def kernel_diag(domain: DomainSpec, weight: WeightSpec | None, z) -> float:
    """``K(z, z)`` by the closed form when available, else by the series."""
    try:
        return kernel_closed(domain, weight, z, z).real
    except UnsupportedDomain:
        return kernel_series(domain, weight, z, z).value.real


# ---------------------------------------------------------------------------
# normalized kernel and reproducing defect

def normalized_kernel(domain: DomainSpec, weight: WeightSpec | None, z, N: int,
                      tol: float = 1e-6) -> np.ndarray:
    """Coefficients ``conj(e_alpha(z)) / sqrt(K(z, z))`` of ``k_z`` up to grade ``N``.

    ``K(z, z)`` is taken from the closed form when one exists, so the missing
    mass ``1 - ||c||^2`` measures the truncation directly; otherwise from the
    series, with the geometric tail estimate.  Raises
    :class:`TruncationInsufficient` when that deficit exceeds ``tol``.
    """
    weight = weight or UNWEIGHTED
    basis = monomial_basis(domain, weight, int(N))
    ev = basis.values(as_points(z, domain.n)[0])[0]
    mass = float(np.sum(np.abs(ev) ** 2))
    try:
        K = kernel_closed(domain, weight, z, z).real
        deficit = 1 - mass / K
    except UnsupportedDomain:
        shells = np.bincount(basis.grades, weights=np.abs(ev) ** 2, minlength=basis.N + 1)
        K = mass
        deficit = _shell_tail(shells) / mass
    if deficit > tol:
        raise TruncationInsufficient(f"normalized kernel misses {deficit:.3g} of its mass at N={N}")
    return np.conj(ev) / math.sqrt(K)


def reproduce_residual(domain: DomainSpec, weight: WeightSpec | None, f, z, N: int,
                       quad: int | QuadratureRule = 64) -> float:
    """``|f(z) - <f, K_z>|`` with the inner product realized by quadrature.

    ``f`` is a holomorphic polynomial symbol, or a callable on ``(M, n)``
    points (trusted to be holomorphic, e.g. negative powers on the annulus).
    On a lens the kernel comes from :func:`lens_orthobasis` of degree ``N``.
    """
    weight = weight or UNWEIGHTED
    f = as_symbol(f)
    if not callable(f) and not is_holomorphic_polynomial(f):
        raise NonHolomorphicSymbol("reproducing check needs a holomorphic polynomial")
    zp = as_points(z, domain.n)[0]
    fz = eval_points(f, zp)[0]
    if domain.kind == "lens":
        if isinstance(quad, QuadratureRule):
            rule = quad
        else:
            rule = quadrature(domain, quad, weight)
        basis = lens_orthobasis(domain, N, rule)
        V = basis.values(rule.nodes)
        ez = basis.values(zp)[0]
        proj = V.conj().T @ (rule.weights * eval_points(f, rule.nodes))
        return float(abs(fz - proj @ ez))
    basis = monomial_basis(domain, weight, int(N))
    if isinstance(quad, QuadratureRule):
        rule = quad
    else:
        span = 2 * int(np.abs(basis.indices).max(initial=0)) + 8
        rule = quadrature(domain, int(quad), weight, n_angles=max(span, 8))
    from .operator import project  # local import: operator builds on this module
    coeffs = project(basis, rule, f)
    ez = basis.values(zp)[0]
    return float(abs(fz - coeffs @ ez))


# ---------------------------------------------------------------------------
# lens bases

@dataclass(frozen=True, eq=False)
class NumericalBasis:
    """Orthonormal polynomials on a lens.

    Internally the polynomials are expanded in ``((z - c)/s)^k``, where ``c`` is
    the weighted centroid of the quadrature nodes and ``s`` their largest
    distance from it.  This keeps the Gram matrix well conditioned even when
    the lens center lies on the boundary.  Column ``j`` of ``coefficients``
    holds the expansion of ``p_j``; ``shifted_coefficients`` converts to the
    monomials ``(z - p)^k`` about the lens center ``p``.
    """

    domain: DomainSpec
    weight: WeightSpec
    maxdeg: int
    coefficients: np.ndarray
    gram_residual: float
    retained: int
    discarded: int
    order: int
    center: complex
    scale: float

    def __len__(self):
        return self.retained

    def monomials(self, z) -> np.ndarray:
        Z = as_points(z, 1)[0][:, 0]
        u = (Z - self.center) / self.scale
        return u[:, None] ** np.arange(self.maxdeg + 1)[None, :]

    def values(self, z) -> np.ndarray:
        """``p_j(z)``, shape ``(M, retained)``."""
        return self.monomials(z) @ self.coefficients

    def shifted_coefficients(self) -> np.ndarray:
        """Coefficients in the monomials ``(z - p)^k``, ``p`` the lens center."""
        k = np.arange(self.maxdeg + 1)
        d = self.domain.center[0] - self.center
        # ((z - c)/s)^k = s^-k sum_j C(k, j) d^(k-j) (z - p)^j
        e = k[None, :] - k[:, None]
        T = comb(k[None, :], k[:, None]) * np.where(e >= 0, d ** np.maximum(e, 0), 0)
        T = T / self.scale ** k[None, :]
        return T @ self.coefficients


def _orthonormalize(G: np.ndarray, cutoff: float):
    lam, Q = np.linalg.eigh(G)
    keep = lam > cutoff * lam.max()
    B = Q[:, keep] / np.sqrt(lam[keep])
    return B, int((~keep).sum())


def lens_orthobasis(lens: DomainSpec, maxdeg: int, quad: int | QuadratureRule | None = None,
                    weight: WeightSpec | None = None) -> NumericalBasis:
    """Orthonormal polynomials of degree ``<= maxdeg`` on a planar lens.

    The Gram matrix of the centered, scaled monomials is diagonalized and directions
    with eigenvalue below ``1e-13`` of the largest are discarded.  A second
    pass orthonormalizes against the Gram matrix of the resulting functions.
    Finally a QR step of the projected monomials rotates the basis into graded
    form: the first ``j`` functions span the projections of the first ``j``
    monomials, with positive leading coefficients.
    """
    if lens.kind != "lens" or lens.n != 1:
        raise UnsupportedDomain("lens_orthobasis needs a planar lens")
    maxdeg = int(maxdeg)
    if not 0 <= maxdeg <= LENS_MAX_DEGREE:
        raise InvalidParameter(f"lens basis degree must be in [0, {LENS_MAX_DEGREE}], got {maxdeg}")
    if isinstance(quad, QuadratureRule):
        rule = quad
        weight = rule.weight
    else:
        weight = weight or UNWEIGHTED
        rule = quadrature(lens, quad or 8 * (maxdeg // 2 + 8), weight)
    nodes = rule.nodes[:, 0]
    c = complex(np.sum(rule.weights * nodes) / np.sum(rule.weights))
    sc = float(np.max(np.abs(nodes - c)))
    V = ((nodes - c) / sc)[:, None] ** np.arange(maxdeg + 1)[None, :]
    W = rule.weights[:, None]
    G = V.conj().T @ (W * V)
    B, dropped = _orthonormalize(G, GRAM_CUTOFF)
    # second pass on the Gram matrix of the new functions themselves
    F = V @ B
    lam, Q = np.linalg.eigh(F.conj().T @ (W * F))
    B = B @ (Q / np.sqrt(lam)) @ Q.conj().T
    # graded form: the first j functions span the projections of the first j monomials
    Q, Rm = linalg.qr((V @ B).conj().T @ (W * V))
    d = B.shape[1]
    diag = np.diag(Rm[:, :d])
    B = (B @ Q) * (np.abs(diag) / np.where(diag == 0, 1, diag))[None, :]
    F = V @ B
    gram = F.conj().T @ (W * F)
    residual = float(np.max(np.abs(gram - np.eye(B.shape[1]))))
    if residual > GRAM_TOLERANCE:
        raise QuadratureTooCoarse(f"lens Gram residual {residual:.3g} exceeds {GRAM_TOLERANCE}")
    B.setflags(write=False)
    return NumericalBasis(lens, weight, maxdeg, B, residual, B.shape[1], dropped, rule.order,
                          c, sc)


def kernel_diag_numeric(basis: NumericalBasis, z) -> float | np.ndarray:
    """``sum_j |p_j(z)|^2``, a lower approximation of the lens kernel on the diagonal."""
    arr = np.asarray(z, dtype=complex)
    vals = np.sum(np.abs(basis.values(arr)) ** 2, axis=1)
    return float(vals[0]) if arr.ndim == 0 else vals
