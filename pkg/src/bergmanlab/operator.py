"""Truncated Toeplitz, multiplication and Hankel Gram matrices.

On a Reinhardt rule the entry ``<g e_b, e_a>`` factors through the angular
Fourier coefficients of ``g`` on each radial node::

    (2 pi)^n sum_R w_R E_a(t_R) E_b(t_R) G_R(alpha_a - alpha_b)

where ``E_a(t) = t^alpha_a / ||z^alpha_a||`` and ``G_R`` is the discrete
Fourier transform of ``g`` over the angle grid.  Radial nodes are processed in
chunks, so the full tensor grid is never held in memory, and pairs whose
difference carries no Fourier mass are skipped.  Lens bases use the dense
node sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import (UNWEIGHTED, QuadratureRule, ReinhardtStructure, WeightSpec, quadrature,
                     reinhardt_structure, structure_nodes)
from .errors import InvalidParameter, NoConvergence, QuadratureTooCoarse
from .kernel import MonomialBasis, NumericalBasis, monomial_basis, normalized_kernel
from .symbol import (as_symbol, conj_monomial, eval_points, monomial, polynomial_degree,
                     product, symbol_text)

SURROGATE_DEGREE = 8
RICHARDSON_TOL = 1e-9
BAND_SKIP = 1e-14
MAX_DIM = 2000
MAX_REFINE = 8
NODE_BUDGET = 60_000_000
CHUNK_NODES = 1 << 20


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Finite section of an operator in an orthonormal basis."""

    basis: MonomialBasis | NumericalBasis
    entries: np.ndarray
    hermitian: bool
    symbol: str
    kind: str
    quad_order: int
    n_angles: int | None = None
    richardson: float | None = None
    aux_order: int | None = None

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    @property
    def grades(self) -> np.ndarray:
        if isinstance(self.basis, MonomialBasis):
            return np.asarray(self.basis.grades[: self.N])
        return np.arange(self.N)

    def to_rows(self):
        """``(row, col, re, im)`` tuples in row-major order."""
        A = self.entries
        for i in range(A.shape[0]):
            for j in range(A.shape[1]):
                yield i, j, A[i, j].real, A[i, j].imag


@dataclass(frozen=True)
class BerezinSample:
    z: complex | tuple
    quad_value: complex
    matrix_value: complex
    N: int

    @property
    def discrepancy(self) -> float:
        return abs(self.quad_value - self.matrix_value)

    @property
    def value(self) -> complex:
        return self.quad_value


# ---------------------------------------------------------------------------
# tensor grids

@dataclass(frozen=True, eq=False)
class TensorGrid:
    """A polar tensor rule kept in factored form (radial nodes times angle grid).

    ``aux_order`` is the simplex order on balls and shells (see
    :func:`~bergmanlab.domain.reinhardt_structure`) and equals ``order``
    elsewhere.
    """

    domain: object
    weight: WeightSpec
    order: int
    structure: ReinhardtStructure
    aux_order: int

    @property
    def n_angles(self) -> int:
        return self.structure.n_angles

    @property
    def n_radial(self) -> int:
        return len(self.structure.radial_weights)

    @property
    def n_nodes(self) -> int:
        return self.n_radial * self.n_angles ** self.domain.n

    @property
    def directions(self) -> tuple[str, ...]:
        """Independently refinable factors of the rule."""
        if self.domain.kind in ("ball", "shell") and self.domain.n > 1:
            return ("radial", "aux", "angles")
        return ("radial", "angles")

    def chunks(self, budget: int = CHUNK_NODES):
        """Yield ``(rows, nodes, weights)`` over blocks of radial nodes."""
        per = self.n_angles ** self.domain.n
        step = max(1, budget // per)
        for start in range(0, self.n_radial, step):
            rows = slice(start, min(start + step, self.n_radial))
            nodes, weights = structure_nodes(self.structure, self.domain.n, rows)
            yield rows, nodes, weights

    def rule(self) -> QuadratureRule:
        """Materialized node list."""
        nodes, weights = structure_nodes(self.structure, self.domain.n)
        st = self.structure
        return QuadratureRule(self.domain, self.weight, nodes, weights, self.order,
                              min(st.radial_degree, st.n_angles - 1), st)

    def refined(self, directions) -> TensorGrid | None:
        """The grid with the named factors doubled, or None beyond the node budget."""
        o = 2 * self.order if "radial" in directions else self.order
        oa = 2 * self.aux_order if "aux" in directions else self.aux_order
        M = 2 * self.n_angles if "angles" in directions else self.n_angles
        if "aux" not in self.directions:
            oa = o
        R = len(reinhardt_structure(self.domain, o, self.weight, 1, oa).radial_weights)
        if R * M**self.domain.n > NODE_BUDGET:
            return None
        return make_grid(self.domain, self.weight, o, M, oa)

    def resolves(self, g_fn, samples: int = 64) -> bool:
        """Whether ``g`` has no angular Fourier mass in the upper half band."""
        step = max(1, self.n_radial // samples)
        nodes, _ = structure_nodes(self.structure, self.domain.n, slice(None, None, step))
        n, M = self.domain.n, self.n_angles
        Phi = _spectrum(self, np.asarray(g_fn(nodes), dtype=complex)).reshape((-1,) + (M,) * n)
        mass = np.abs(Phi).max(axis=0)
        k = np.abs(np.fft.fftfreq(M, 1.0 / M))
        high = np.zeros(mass.shape, dtype=bool)
        for j in range(n):
            shape = [1] * n
            shape[j] = M
            high |= (k > M // 4).reshape(shape)
        return bool(mass[high].max(initial=0.0) <= BAND_SKIP * max(mass.max(), 1e-300))


def make_grid(domain, weight: WeightSpec | None, order: int, n_angles: int,
              aux_order: int | None = None) -> TensorGrid:
    aux = int(order) if aux_order is None else int(aux_order)
    st = reinhardt_structure(domain, order, weight, n_angles, aux)
    return TensorGrid(domain, weight or UNWEIGHTED, int(order), st, aux)


def _as_grid(rule) -> TensorGrid:
    if isinstance(rule, TensorGrid):
        return rule
    if rule.structure is None:
        raise QuadratureTooCoarse("monomial bases need a Reinhardt rule")
    return TensorGrid(rule.domain, rule.weight, rule.order, rule.structure, rule.order)


def _radial_degree(domain, weight: WeightSpec, order: int) -> int:
    alg = weight.trivial or weight.rho == "algebraic"
    if domain.kind == "shell":
        return (4 if alg else 2) * order - 2 * domain.n
    return (4 if alg else 2) * order - 2


def _angular_span(basis: MonomialBasis, D: int) -> int:
    idx = basis.indices[:D]
    return int((idx.max(axis=0) - idx.min(axis=0)).max(initial=0))


def _nice(m: int) -> int:
    """Smallest integer ``>= m`` with no prime factor above 5 (fast FFT lengths)."""
    m = max(int(m), 1)
    while True:
        k = m
        for p in (2, 3, 5):
            while k % p == 0:
                k //= p
        if k == 1:
            return m
        m += 1


def tensor_grid(basis: MonomialBasis, D: int, degree: int, order: int = 0,
                n_angles: int | None = None) -> TensorGrid:
    """Grid exact for the products ``e_a conj(e_b) g`` with ``deg g <= degree``.

    ``order`` is a floor: it is raised until the radial part has enough
    exactness for the top grade of the first ``D`` basis elements.
    """
    dom, weight = basis.domain, basis.weight
    top = int(basis.grades[D - 1])
    need = 2 * top + degree
    o = max(int(order), 4)
    while _radial_degree(dom, weight, o) < need:
        o += 1
    if dom.kind == "annulus":
        # negative powers are not polynomial in the radial variable
        o = max(o, 2 * top + 32)
    M = n_angles or _nice(_angular_span(basis, D) + degree + 1)
    return make_grid(dom, weight, o, max(int(M), 4))


def _check_grid(basis: MonomialBasis, D: int, degree: int, grid: TensorGrid):
    st = grid.structure
    top = int(basis.grades[D - 1])
    if st.radial_degree < 2 * top + degree or st.n_angles <= _angular_span(basis, D) + degree:
        raise QuadratureTooCoarse(
            f"rule (radial degree {st.radial_degree}, {st.n_angles} angles) too coarse "
            f"for grade {top} and symbol degree {degree}")


# ---------------------------------------------------------------------------
# assembly

def _radial_factors(basis: MonomialBasis, D: int, moduli: np.ndarray) -> np.ndarray:
    """``E[R, a] = t_R^alpha_a / ||z^alpha_a||``."""
    A = basis.indices[:D].astype(float)
    return np.exp(np.log(moduli) @ A.T - 0.5 * basis.log_norm2[:D])


def _flat_index(indices: np.ndarray, M: int) -> np.ndarray:
    """Position of ``indices mod M`` in the flattened ``M^n`` spectrum."""
    flat = np.zeros(indices.shape[:-1], dtype=np.int64)
    for j in range(indices.shape[-1]):
        flat = flat * M + indices[..., j] % M
    return flat


def _spectrum(grid: TensorGrid, g: np.ndarray) -> np.ndarray:
    n, M = grid.domain.n, grid.n_angles
    G = g.reshape((-1,) + (M,) * n)
    return (np.fft.fftn(G, axes=tuple(range(1, n + 1))) / M**n).reshape(G.shape[0], -1)


def _gram_grid(basis: MonomialBasis, D: int, grid: TensorGrid, g_fn) -> np.ndarray:
    st = grid.structure
    idx = basis.indices[:D]
    flat = _flat_index(idx[:, None, :] - idx[None, :, :], grid.n_angles)
    out = np.zeros((D, D), dtype=complex)
    for rows, nodes, _ in grid.chunks():
        Phi = _spectrum(grid, np.asarray(g_fn(nodes), dtype=complex))
        mass = np.abs(Phi).max(axis=0)
        top = mass.max()
        if top == 0:
            continue
        ai, bi = np.nonzero(mass[flat] > BAND_SKIP * top)
        E = _radial_factors(basis, D, st.moduli[rows])
        Ew = E * st.radial_weights[rows][:, None]
        step = max(1, CHUNK_NODES // E.shape[0])
        for s in range(0, len(ai), step):
            a, b = ai[s:s + step], bi[s:s + step]
            out[a, b] += np.einsum("rp,rp,rp->p", Ew[:, a], E[:, b], Phi[:, flat[a, b]])
    return out * (2 * math.pi) ** grid.domain.n


def gram(basis, g_fn, D: int | None = None, rule=None) -> np.ndarray:
    """Matrix of ``<g e_b, e_a>`` for a pointwise function ``g_fn(points)``."""
    D = len(basis) if D is None else int(D)
    if isinstance(basis, MonomialBasis):
        return _gram_grid(basis, D, _as_grid(rule), g_fn)
    V = basis.values(rule.nodes)[:, :D]
    g = np.asarray(g_fn(rule.nodes), dtype=complex)
    return V.conj().T @ ((rule.weights * g)[:, None] * V)


def _is_real_symbol(phi, rule) -> bool:
    nodes = next(rule.chunks(1 << 14))[1] if isinstance(rule, TensorGrid) else rule.nodes
    sample = eval_points(phi, nodes[:: max(1, len(nodes) // 4096)])
    return bool(np.all(np.abs(sample.imag) <= 1e-14 * max(1.0, np.abs(sample).max())))


def _richardson(basis, g_fn, D, rule, A, explicit, symbol, kind):
    """Double the rule until refinement no longer changes the matrix.

    Monomial grids are refined one factor at a time (radial nodes, simplex
    nodes, angles).  Tensor-rule errors add over the factors, so a factor is
    accepted once doubling it alone moves no entry by more than its share of
    ``RICHARDSON_TOL``.  An angle grid that leaves no Fourier mass in its upper
    half band is exact for the symbol and is not refined.  With an explicit
    rule the check is reported but never raised.
    """
    if not isinstance(rule, TensorGrid):
        fine = quadrature(rule.domain, 2 * rule.order, rule.weight)
        check = float(np.max(np.abs(gram(basis, g_fn, D, fine) - A)))
        if check > RICHARDSON_TOL and not explicit:
            raise QuadratureTooCoarse(
                f"{kind} of {symbol}: order {rule.order} and {fine.order} differ by {check:.3g}")
        return A, rule, check
    share = RICHARDSON_TOL / len(rule.directions)
    open_dirs = [d for d in rule.directions if d != "angles" or not rule.resolves(g_fn)]
    changes: dict[str, float] = {}
    for _ in range(MAX_REFINE + 1):
        changes = {}
        for d in open_dirs:
            fine = rule.refined((d,))
            if fine is None:
                raise QuadratureTooCoarse(
                    f"{kind} of {symbol}: refining the {d} factor of the order-{rule.order} "
                    f"rule exceeds the node budget")
            changes[d] = float(np.max(np.abs(gram(basis, g_fn, D, fine) - A)))
        open_dirs = [d for d in open_dirs if changes[d] > share]
        if explicit or not open_dirs:
            break
        fine = rule.refined(tuple(open_dirs))
        if fine is None:
            break
        rule, A = fine, gram(basis, g_fn, D, fine)
    check = float(sum(changes.values()))
    if open_dirs and not explicit:
        worst = max(open_dirs, key=changes.get)
        raise QuadratureTooCoarse(
            f"{kind} of {symbol}: doubling the {worst} factor of the order-{rule.order} "
            f"rule changes entries by {changes[worst]:.3g}")
    return A, rule, check


def _assemble(basis, weight, g_fn, degree, N, quad, richardson, symbol, kind):
    weight = weight or basis.weight
    if weight != basis.weight:
        raise InvalidParameter("weight does not match the basis")
    D = len(basis) if N is None else int(N)
    if not 1 <= D <= len(basis):
        raise InvalidParameter(f"truncation {D} outside 1..{len(basis)}")
    if D > MAX_DIM:
        raise InvalidParameter(f"truncation {D} exceeds {MAX_DIM}")
    smooth = degree is not None
    deg = degree if smooth else SURROGATE_DEGREE
    explicit = isinstance(quad, (QuadratureRule, TensorGrid))
    if isinstance(basis, NumericalBasis):
        rule = quad if explicit else quadrature(basis.domain, quad or basis.order, weight)
    elif explicit:
        rule = _as_grid(quad)
        _check_grid(basis, D, deg, rule)
    else:
        rule = tensor_grid(basis, D, deg, quad or 0)
    A = gram(basis, g_fn, D, rule)
    check = None
    if richardson or (richardson is None and not smooth):
        A, rule, check = _richardson(basis, g_fn, D, rule, A, explicit, symbol, kind)
    return A, rule, check


def _finish(basis, A, rule, check, symbol, kind, hermitian):
    if hermitian:
        A = 0.5 * (A + A.conj().T)
    A.setflags(write=False)
    grid = isinstance(rule, TensorGrid)
    return OperatorMatrix(basis, A, hermitian, symbol, kind, rule.order,
                          rule.n_angles if grid else None, check,
                          rule.aux_order if grid else None)


def toeplitz(basis, weight: WeightSpec | None, phi, N: int | None = None,
             quad: int | QuadratureRule | TensorGrid | None = None,
             richardson: bool | None = None) -> OperatorMatrix:
    """Finite section ``<phi e_b, e_a>`` of ``T_phi`` on the first ``N`` basis elements.

    ``quad`` is a quadrature order (raised as needed to reach exactness
    ``2 * grade + deg(phi)``) or an explicit rule, which is checked.  For
    symbols that are not polynomials the degree surrogate 8 is used and the
    rule is doubled until two successive results agree to 1e-9
    (``richardson``, on by default for such symbols).

    Examples
    --------
    >>> from bergmanlab.domain import build_domain
    >>> from bergmanlab.kernel import monomial_basis
    >>> B = monomial_basis(build_domain("disc"), None, 3)
    >>> np.round(np.diag(toeplitz(B, None, "abs(z1)^2").entries).real, 12)
    array([0.5       , 0.66666667, 0.75      , 0.8       ])
    """
    phi = as_symbol(phi)
    text = symbol_text(phi)
    A, rule, check = _assemble(basis, weight, lambda Z: eval_points(phi, Z),
                               polynomial_degree(phi), N, quad, richardson, text, "toeplitz")
    return _finish(basis, A, rule, check, text, "toeplitz",
                   _is_real_symbol(phi, rule))


def mult_gram(basis, weight: WeightSpec | None, phi, N: int | None = None,
              quad: int | QuadratureRule | TensorGrid | None = None,
              richardson: bool | None = None) -> OperatorMatrix:
    """``<phi e_b, phi e_a>``, the compression of ``M_phi^* M_phi``."""
    phi = as_symbol(phi)
    text = symbol_text(phi)
    deg = polynomial_degree(phi)
    A, rule, check = _assemble(basis, weight, lambda Z: np.abs(eval_points(phi, Z)) ** 2,
                               None if deg is None else 2 * deg, N, quad, richardson, text,
                               "mult_gram")
    return _finish(basis, A, rule, check, text, "mult_gram", True)


def hankel_gram(basis, weight: WeightSpec | None, phi, N: int | None = None,
                quad: int | QuadratureRule | TensorGrid | None = None,
                richardson: bool | None = None) -> OperatorMatrix:
    """``M^* M - T^* T``, the compression of ``H_phi^* H_phi``.

    On monomial bases ``T`` keeps every row that ``phi e_b`` can reach, that is
    grades up to ``deg(phi)`` (8 for non-polynomial symbols) beyond the
    section, so polynomial symbols give the exact compression.  Lens bases use
    matched truncation, which over-estimates ``H^* H`` by a positive
    semidefinite defect.
    """
    phi = as_symbol(phi)
    M = mult_gram(basis, weight, phi, N, quad, richardson)
    D = M.N
    if isinstance(basis, MonomialBasis):
        extra = polynomial_degree(phi)
        extra = SURROGATE_DEGREE if extra is None else extra
        top = int(basis.grades[D - 1])
        big = monomial_basis(basis.domain, basis.weight, max(basis.N, top + extra))
        # an explicit rule sized for the section is too coarse for the taller T
        q = None if isinstance(quad, (QuadratureRule, TensorGrid)) else quad
        T = toeplitz(big, weight, phi, big.count(top + extra), q, richardson)
        Tc = T.entries[:, :D]
    else:
        T = toeplitz(basis, weight, phi, D, quad, richardson)
        Tc = T.entries
    H = M.entries - Tc.conj().T @ Tc
    H = 0.5 * (H + H.conj().T)
    H.setflags(write=False)
    return OperatorMatrix(basis, H, True, M.symbol, "hankel_gram",
                          max(M.quad_order, T.quad_order), M.n_angles, M.richardson, M.aux_order)


# ---------------------------------------------------------------------------
# projection, synthesis and the Berezin transform

def project(basis: MonomialBasis, rule, f) -> np.ndarray:
    """Quadrature inner products ``<f, e_alpha>`` for every basis element."""
    grid = _as_grid(rule)
    f = as_symbol(f)
    st = grid.structure
    flat = _flat_index(basis.indices, grid.n_angles)
    out = np.zeros(len(basis), dtype=complex)
    for rows, nodes, _ in grid.chunks():
        F = _spectrum(grid, np.asarray(eval_points(f, nodes), dtype=complex))
        E = _radial_factors(basis, len(basis), st.moduli[rows])
        out += np.einsum("r,ra,ra->a", st.radial_weights[rows], E, F[:, flat])
    return (2 * math.pi) ** grid.domain.n * out


def _synthesize_rows(basis: MonomialBasis, coeffs: np.ndarray, grid: TensorGrid, rows):
    n, M = grid.domain.n, grid.n_angles
    D = len(coeffs)
    E = _radial_factors(basis, D, grid.structure.moduli[rows]) * coeffs[None, :]
    flat = _flat_index(basis.indices[:D], M)
    G = np.zeros((E.shape[0], M**n), dtype=complex)
    for r in range(E.shape[0]):
        G[r] = np.bincount(flat, weights=E[r].real, minlength=M**n) \
            + 1j * np.bincount(flat, weights=E[r].imag, minlength=M**n)
    G = G.reshape((-1,) + (M,) * n)
    return (np.fft.ifftn(G, axes=tuple(range(1, n + 1))) * M**n).reshape(-1)


def synthesize(basis, coeffs: np.ndarray, rule) -> np.ndarray:
    """Values of ``sum_a coeffs[a] e_a`` at the rule's nodes."""
    if isinstance(basis, NumericalBasis) or getattr(rule, "structure", None) is None:
        return basis.values(rule.nodes)[:, : len(coeffs)] @ coeffs
    grid = _as_grid(rule)
    return np.concatenate([_synthesize_rows(basis, coeffs, grid, rows)
                           for rows, _, _ in grid.chunks()])


def berezin_quad(domain, weight: WeightSpec | None, phi, z, quad: int = 64, N: int = 200,
                 tol: float = 1e-6) -> BerezinSample:
    """Berezin transform of ``T_phi`` at ``z`` by two routes.

    The quadrature route integrates ``phi |k_z|^2 |rho|^r``; the matrix route
    forms ``c^* T c`` with ``c`` the coefficients of ``k_z``.  Points whose
    normalized kernel loses more than ``tol`` of its mass at grade ``N`` are
    refused with :class:`TruncationInsufficient`.
    """
    phi = as_symbol(phi)
    basis = monomial_basis(domain, weight, int(N))
    c = normalized_kernel(domain, weight, z, N, tol=tol)
    T = toeplitz(basis, weight, phi, quad=quad, richardson=False)
    grid = make_grid(domain, basis.weight, T.quad_order, T.n_angles, T.aux_order)
    quad_value = 0j
    for rows, nodes, weights in grid.chunks():
        k = _synthesize_rows(basis, c, grid, rows)
        quad_value += np.sum(weights * eval_points(phi, nodes) * np.abs(k) ** 2)
    matrix_value = complex(np.vdot(c, T.entries @ c))
    zt = complex(np.ravel(z)[0]) if domain.n == 1 else tuple(np.ravel(z).astype(complex))
    return BerezinSample(zt, complex(quad_value), matrix_value, int(N))


# ---------------------------------------------------------------------------
# identities and spectra

def toeplitz_product_residual(basis: MonomialBasis, weight: WeightSpec | None, phi, K, L,
                              N: int, N_outer: int, quad: int | None = None) -> float:
    """Norm of the leading ``N x N`` block of ``T_{conj(z)^K} T_phi T_{z^L} - T_{conj(z)^K phi z^L}``.

    The three factors are sections of size ``N_outer``.
    """
    K = tuple(int(k) for k in np.atleast_1d(K))
    L = tuple(int(k) for k in np.atleast_1d(L))
    if max(sum(K), sum(L)) > 4 or min(K + L) < 0:
        raise InvalidParameter("product residual supports |K|, |L| <= 4")
    if not 0 < N < N_outer <= len(basis):
        raise InvalidParameter("need 0 < N < N_outer <= basis size")
    phi = as_symbol(phi)
    left = toeplitz(basis, weight, conj_monomial(K), N_outer, quad)
    mid = toeplitz(basis, weight, phi, N_outer, quad)
    right = toeplitz(basis, weight, monomial(L), N_outer, quad)
    whole = toeplitz(basis, weight, product(conj_monomial(K), phi, monomial(L)), N_outer, quad)
    P = left.entries @ mid.entries @ right.entries
    return float(singular_values((P - whole.entries)[:N, :N])[0])


def singular_values(matrix) -> np.ndarray:
    """Singular values in descending order.

    Hermitian input goes through the symmetric eigensolver (absolute
    eigenvalues), other matrices through LAPACK's SVD.
    """
    A = matrix.entries if isinstance(matrix, OperatorMatrix) else np.asarray(matrix)
    if A.ndim != 2:
        raise InvalidParameter("expected a matrix")
    if max(A.shape) > MAX_DIM:
        raise InvalidParameter(f"dimension {max(A.shape)} exceeds {MAX_DIM}")
    if A.size == 0:
        return np.zeros(0)
    try:
        scale = float(np.abs(A).max())
        if A.shape[0] == A.shape[1] and np.abs(A - A.conj().T).max() <= 1e-14 * max(scale, 1e-300):
            s = np.abs(np.linalg.eigvalsh(0.5 * (A + A.conj().T)))
        else:
            s = np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return np.sort(s)[::-1]


def jacobi_eigvalsh(A, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations (ascending)."""
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    A = 0.5 * (A + A.conj().T)
    scale = np.linalg.norm(A)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * max(scale, 1e-300):
            return np.sort(np.diag(A).real)
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = A[p, q]
                ag = abs(g)
                if ag <= 1e-300:
                    continue
                tau = (A[q, q].real - A[p, p].real) / (2 * ag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1 + tau * tau))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                e = g / ag
                # J = I except J_pp = J_qq = c, J_pq = s e, J_qp = -s conj(e)
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * np.conj(e) * cq
                A[:, q] = s * e * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * e * rq
                A[q, :] = s * np.conj(e) * rp + c * rq
                A[q, p] = 0.0
                A[p, q] = 0.0
    raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
