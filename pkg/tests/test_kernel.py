import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergmanlab.domain import UNWEIGHTED, WeightSpec, build_domain, interior_grid, quadrature
from bergmanlab.errors import (InvalidParameter, NonHolomorphicSymbol, UnsupportedDomain,
                               UnsupportedIndex)
from bergmanlab.kernel import (inner_disc_kernel_diag, kernel_closed, kernel_diag,
                               kernel_diag_numeric, kernel_series, lens_orthobasis, log_norm2,
                               monomial_basis, monomial_norm2, normalized_kernel,
                               reproduce_residual)

DISC = build_domain("disc")
ANNULUS = build_domain("annulus", eps=0.5)
BALL = build_domain("ball", n=2)
BIDISC = build_domain("polydisc", n=2)
SHELL = build_domain("shell", n=2, r_in=1.0, r_out=2.0)


def test_norm_examples():
    assert monomial_norm2(DISC, UNWEIGHTED, 0) == pytest.approx(math.pi, rel=1e-14)
    assert monomial_norm2(DISC, WeightSpec(1.0), 1) == pytest.approx(math.pi / 6, rel=1e-14)
    assert monomial_norm2(ANNULUS, UNWEIGHTED, -1) == pytest.approx(2 * math.pi * math.log(2), rel=1e-14)
    assert monomial_norm2(BALL, UNWEIGHTED, (0, 0)) == pytest.approx(math.pi**2 / 2, rel=1e-14)
    with pytest.raises(UnsupportedIndex):
        monomial_norm2(DISC, UNWEIGHTED, -1)


@pytest.mark.parametrize("domain,weight", [
    (DISC, WeightSpec(2.5)),
    (DISC, WeightSpec(1.0, "distance")),
    (BALL, WeightSpec(1.0)),
    (BIDISC, UNWEIGHTED),
    (ANNULUS, UNWEIGHTED),
])
def test_closed_and_quadrature_norms_agree(domain, weight):
    basis = monomial_basis(domain, weight, 6)
    quad = log_norm2(domain, weight, basis.indices, "quadrature")
    assert np.max(np.abs(quad - basis.log_norm2)) <= 1e-12


def test_shell_norms_positive_and_graded():
    basis = monomial_basis(SHELL, UNWEIGHTED, 5)
    assert np.all(np.isfinite(basis.norm2)) and np.all(basis.norm2 > 0)
    assert np.all(np.diff(basis.grades) >= 0)
    assert len({tuple(a) for a in basis.indices}) == len(basis)


@pytest.mark.parametrize("domain", [DISC, ANNULUS, BIDISC, BALL, SHELL], ids=str)
def test_monomials_orthogonal(domain):
    basis = monomial_basis(domain, UNWEIGHTED, 4)
    rule = quadrature(domain, 24 if domain.n == 1 else 12)
    E = basis.values(rule.nodes)
    G = (E.conj().T * rule.weights) @ E
    assert np.max(np.abs(G - np.eye(len(basis)))) <= 1e-12


def test_kernel_series_examples():
    assert kernel_series(DISC, UNWEIGHTED, 0, 0).value == pytest.approx(1 / math.pi, rel=1e-14)
    assert kernel_series(DISC, WeightSpec(2.0), 0, 0).value == pytest.approx(3 / math.pi, rel=1e-14)
    assert kernel_series(BALL, UNWEIGHTED, (0, 0), (0, 0)).value == pytest.approx(2 / math.pi**2, rel=1e-14)


def test_kernel_closed_examples():
    assert kernel_closed(DISC, UNWEIGHTED, 0.5, 0.5) == pytest.approx(16 / (9 * math.pi), rel=1e-14)
    assert kernel_closed(DISC, UNWEIGHTED, 0.5, 0.25) == pytest.approx(1 / (math.pi * 0.875**2), rel=1e-14)
    with pytest.raises(UnsupportedDomain):
        kernel_closed(ANNULUS, UNWEIGHTED, 0.7, 0.7)


_point = st.builds(lambda t, a: t * complex(math.cos(a), math.sin(a)),
                   st.floats(0, 0.8), st.floats(0, 2 * math.pi))


@settings(max_examples=40, deadline=None)
@given(_point, _point, st.sampled_from([0.0, 1.0, 2.5]))
def test_series_matches_closed_form_on_disc(w, z, r):
    wt = WeightSpec(r)
    s = kernel_series(DISC, wt, w, z, 200).value
    c = kernel_closed(DISC, wt, w, z)
    assert abs(s - c) <= 1e-9 * abs(c)


@settings(max_examples=40, deadline=None)
@given(_point, _point)
def test_hermitian_symmetry(w, z):
    for dom in (DISC, ANNULUS):
        a = kernel_series(dom, UNWEIGHTED, w if dom is DISC else 0.6 + 0.1 * w,
                          z if dom is DISC else 0.6 + 0.1 * z).value
        b = kernel_series(dom, UNWEIGHTED, z if dom is DISC else 0.6 + 0.1 * z,
                          w if dom is DISC else 0.6 + 0.1 * w).value
        assert abs(a - np.conj(b)) <= 1e-13 * abs(a)


def test_diagonal_partial_sums_nondecreasing():
    z = 0.7 + 0.2j
    vals = [kernel_series(DISC, UNWEIGHTED, z, z, N).value.real for N in range(1, 60, 5)]
    assert np.all(np.diff(vals) >= 0)
    assert all(v > 0 for v in vals)


def test_normalized_kernel_examples():
    c = normalized_kernel(DISC, UNWEIGHTED, 0, 20)
    assert c[0] == pytest.approx(1) and np.all(c[1:] == 0)
    c = normalized_kernel(DISC, WeightSpec(1.0), 0, 20)
    assert c[0] == pytest.approx(1) and np.all(c[1:] == 0)
    c = normalized_kernel(DISC, UNWEIGHTED, 0.5, 200)
    assert abs(np.linalg.norm(c) - 1) <= 1e-10


def test_reproduce_examples():
    assert reproduce_residual(DISC, UNWEIGHTED, "1", 0.3, 20) <= 1e-12
    assert reproduce_residual(DISC, UNWEIGHTED, "z1^3", 0.4, 100, 64) <= 1e-8
    with pytest.raises(NonHolomorphicSymbol):
        reproduce_residual(DISC, UNWEIGHTED, "abs(z1)", 0.3, 20)


def test_cauchy_schwarz_and_extremal_function():
    rng = np.random.default_rng(11)
    basis = monomial_basis(DISC, WeightSpec(1.0), 150)
    for z in (0.0, 0.4 + 0.3j, -0.7j):
        K = kernel_diag(DISC, WeightSpec(1.0), z)
        e = basis.values(z)[0]
        for _ in range(50):
            c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
            c[rng.random(len(basis)) < 0.5] = 0
            fz = c @ e
            assert abs(fz) ** 2 <= np.sum(np.abs(c) ** 2) * K * (1 + 1e-12)
        # f = K_z attains the bound
        c = np.conj(e)
        assert abs(abs(c @ e) ** 2 / np.sum(np.abs(c) ** 2) - K) <= 1e-8 * K


def test_inner_disc_kernel_dominates():
    U = build_domain("lens", parent=DISC, center=0.2, radius=0.5)
    for q in (0.2, 0.35 + 0.1j, -0.1):
        assert inner_disc_kernel_diag(U, UNWEIGHTED, q) >= kernel_diag(DISC, UNWEIGHTED, q)


def test_lens_equal_to_disc_recovers_monomials():
    lens = build_domain("lens", parent=DISC, center=0.0, radius=2.0)
    nb = lens_orthobasis(lens, 5, 32)
    coeffs = nb.shifted_coefficients()
    expected = np.diag([math.sqrt((k + 1) / math.pi) for k in range(6)])
    # orthonormal polynomials are determined up to a unimodular factor
    assert np.max(np.abs(np.abs(coeffs) - expected)) <= 1e-8
    assert kernel_diag_numeric(nb, 0.0) == pytest.approx(1 / math.pi, abs=1e-8)


def test_lens_basis_gram_and_monotone_diagonal():
    lens = build_domain("lens", parent=ANNULUS, center=1.0, radius=0.4)
    b20 = lens_orthobasis(lens, 20)
    assert b20.gram_residual <= 1e-8
    assert b20.retained <= 21
    b10 = lens_orthobasis(lens, 10)
    Z = interior_grid(lens, 6)
    v10, v20 = kernel_diag_numeric(b10, Z), kernel_diag_numeric(b20, Z)
    assert np.all(v10 <= v20 * (1 + 1e-10))
    assert np.all(np.isfinite(v20)) and np.all(v20 > 0)
    with pytest.raises(InvalidParameter):
        lens_orthobasis(lens, 41)


@pytest.mark.parametrize("domain,r", [(DISC, 0), (DISC, 1), (ANNULUS, 0), (ANNULUS, 1),
                                      (BIDISC, 0), (BALL, 1), (SHELL, 0)], ids=str)
def test_reproducing_property_low_degree(domain, r):
    w = WeightSpec(float(r))
    z = 0.3 + 0.2j if domain.n == 1 else (0.3 + 0.2j, -0.25j)
    if domain.kind == "annulus":
        z = 0.7 + 0.1j
    if domain.kind == "shell":
        z = (1.1, 0.3j)
    terms = ["1", "z1", "z1^3", "z1^5"] + (["z1*z2^2", "z2^5"] if domain.n == 2 else [])
    N, order = (60, 48) if domain.n == 1 else (20, 24)
    for f in terms:
        assert reproduce_residual(domain, w, f, z, N, order) <= 1e-8
