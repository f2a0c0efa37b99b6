import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergmanlab.domain import UNWEIGHTED, WeightSpec, build_domain, quadrature
from bergmanlab.errors import InvalidParameter
from bergmanlab.kernel import lens_orthobasis, monomial_basis
from bergmanlab.operator import (berezin_quad, hankel_gram, jacobi_eigvalsh, mult_gram,
                                 singular_values, toeplitz, toeplitz_product_residual)

DISC = build_domain("disc")
ANNULUS = build_domain("annulus", eps=0.5)
BIDISC = build_domain("polydisc", n=2)


def _disc_basis(N=30, r=0.0):
    return monomial_basis(DISC, WeightSpec(r), N)


def test_identity_symbol():
    for basis in (_disc_basis(), monomial_basis(ANNULUS, UNWEIGHTED, 10),
                  monomial_basis(BIDISC, UNWEIGHTED, 4)):
        T = toeplitz(basis, basis.weight, "1")
        assert np.max(np.abs(T.entries - np.eye(T.N))) <= 1e-12
        assert T.hermitian


@pytest.mark.parametrize("r", [0.0, 1.0, 2.0])
def test_radial_diagonal_closed_form(r):
    basis = _disc_basis(50, r)
    T = toeplitz(basis, basis.weight, "abs(z1)^2")
    k = np.arange(51)
    assert np.max(np.abs(np.diag(T.entries) - (k + 1) / (k + r + 2))) <= 1e-10
    off = T.entries - np.diag(np.diag(T.entries))
    assert np.max(np.abs(off)) <= 1e-12


def test_entries_are_read_only():
    T = toeplitz(_disc_basis(5), None, "abs(z1)^2")
    with pytest.raises(ValueError):
        T.entries[0, 0] = 1


def test_mult_gram_examples():
    basis = _disc_basis(20)
    M = mult_gram(basis, None, "1")
    assert np.max(np.abs(M.entries - np.eye(M.N))) <= 1e-12
    M = mult_gram(basis, None, "conj(z1)")
    k = np.arange(21)
    assert np.max(np.abs(np.diag(M.entries) - (k + 1) / (k + 2))) <= 1e-12
    M = mult_gram(basis, None, "re(z1) + bump(0.3, 0.4)")
    assert np.linalg.eigvalsh(M.entries).min() >= -1e-10


def test_hankel_examples():
    basis = _disc_basis(41)
    H = hankel_gram(basis, None, "conj(z1)")
    k = np.arange(41)
    assert np.max(np.abs(np.diag(H.entries)[:41] - 1 / ((k + 1) * (k + 2)))) <= 1e-9
    for phi in ("z1", "z1^3 - 2*z1", "1"):
        assert np.max(np.abs(hankel_gram(basis, None, phi).entries)) <= 1e-10
    H2 = hankel_gram(monomial_basis(BIDISC, UNWEIGHTED, 5), None, "z1*z2 + z2^2")
    assert np.max(np.abs(H2.entries)) <= 1e-10


def test_defect_identity():
    basis = _disc_basis(25)
    phi = "(1 - abs(z1)^2)*re(z1) + conj(z1)^2"
    M = mult_gram(basis, None, phi)
    H = hankel_gram(basis, None, phi)
    big = monomial_basis(DISC, UNWEIGHTED, 40)
    T = toeplitz(big, None, phi).entries[:, :26]
    assert np.max(np.abs(M.entries - (T.conj().T @ T + H.entries))) <= 1e-10
    assert np.linalg.eigvalsh(H.entries).min() >= -1e-10


@pytest.mark.parametrize("phi", ["re(z1)", "abs(z1)^2 + im(z1)", "bump(0.2, 0.6)",
                                 "(1 - abs(z1)^2)*re(z1)"])
def test_real_symbols_hermitian_and_contractive(phi):
    basis = monomial_basis(ANNULUS, UNWEIGHTED, 8)
    T = toeplitz(basis, None, phi)
    assert T.hermitian
    A = T.entries
    assert np.max(np.abs(A - A.conj().T)) <= 1e-10
    rule = quadrature(ANNULUS, 32)
    from bergmanlab.symbol import eval_points, parse
    sup = np.abs(eval_points(parse(phi), rule.nodes)).max()
    assert singular_values(A)[0] <= sup + 1e-8


def test_radial_symbols_diagonal():
    for dom, N in ((DISC, 20), (ANNULUS, 10), (BIDISC, 4)):
        basis = monomial_basis(dom, UNWEIGHTED, N)
        for phi in ("bump(0, 0.7)", "exp(-abs(z1)^2)"):
            if dom is BIDISC and phi.startswith("bump"):
                continue
            A = toeplitz(basis, None, phi).entries
            assert np.max(np.abs(A - np.diag(np.diag(A)))) <= 1e-12


def test_lens_toeplitz_identity():
    lens = build_domain("lens", parent=DISC, center=1.0, radius=0.4)
    nb = lens_orthobasis(lens, 10)
    T = toeplitz(nb, None, "1")
    assert np.max(np.abs(T.entries - np.eye(T.N))) <= 1e-8


def test_berezin_examples():
    s = berezin_quad(DISC, None, "1", 0.6 + 0.2j)
    assert abs(s.quad_value - 1) <= 1e-10 and abs(s.matrix_value - 1) <= 1e-10
    s = berezin_quad(DISC, None, "abs(z1)^2", 0)
    assert s.quad_value == pytest.approx(0.5, abs=1e-12)
    s = berezin_quad(DISC, None, "re(z1) + abs(z1)^2", 0.3 - 0.4j)
    assert abs(s.quad_value.imag) <= 1e-12 and abs(s.matrix_value.imag) <= 1e-12


@settings(max_examples=12, deadline=None)
@given(st.floats(0, 0.9), st.floats(0, 2 * math.pi),
       st.sampled_from(["abs(z1)^2", "1 - abs(z1)^2", "re(z1)*im(z1)", "conj(z1)^2*z1"]))
def test_berezin_routes_agree(t, angle, phi):
    z = t * complex(math.cos(angle), math.sin(angle))
    s = berezin_quad(DISC, None, phi, z, 64, 200)
    assert s.discrepancy <= 1e-7


def test_product_residual_examples():
    basis = _disc_basis(119)
    assert toeplitz_product_residual(basis, None, "abs(z1)^2", (0,), (0,), 20, 40) <= 1e-12
    r60 = toeplitz_product_residual(basis, None, "abs(z1)^2", (1,), (1,), 20, 60)
    assert r60 <= 1e-8
    r40 = toeplitz_product_residual(basis, None, "abs(z1)^2", (1,), (1,), 20, 40)
    r80 = toeplitz_product_residual(basis, None, "abs(z1)^2", (1,), (1,), 20, 80)
    assert r40 >= r80 - 1e-12
    with pytest.raises(InvalidParameter):
        toeplitz_product_residual(basis, None, "1", (5,), (0,), 20, 40)


def test_singular_value_examples():
    assert np.allclose(singular_values(np.eye(10)), 1)
    d = 1 / (np.arange(12) + 2)
    assert np.allclose(singular_values(np.diag(d[::-1])), d)
    with pytest.raises(InvalidParameter):
        singular_values(np.zeros((2001, 2)))


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_eigensolvers_agree(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50))
    A = X + X.conj().T
    a = np.sort(np.abs(jacobi_eigvalsh(A)))[::-1]
    b = singular_values(A)
    assert np.max(np.abs(a - b)) <= 1e-9 * np.abs(b).max()


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=6))
def test_singular_values_sorted_and_scaled(vals):
    A = np.diag(vals) + 0.1 * np.triu(np.ones((len(vals), len(vals))), 1)
    s = singular_values(A)
    assert np.all(np.diff(s) <= 1e-15)
    assert np.allclose(s, np.linalg.svd(A, compute_uv=False), atol=1e-12)
