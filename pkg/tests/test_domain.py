import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergmanlab.domain import (UNWEIGHTED, WeightSpec, boundary_grid, build_domain, interior_grid,
                               quadrature, rho, weight_value)
from bergmanlab.errors import InvalidParameter, UnsupportedOrder
from bergmanlab.kernel import monomial_norm2

DISC = build_domain("disc")
ANNULUS = build_domain("annulus", eps=0.5)
SHELL = build_domain("shell", n=2, r_in=1.0, r_out=2.0)

ALL_DOMAINS = [
    DISC,
    build_domain("punctured_disc"),
    build_domain("polydisc", n=2),
    build_domain("ball", n=2),
    ANNULUS,
    SHELL,
    build_domain("lens", parent=DISC, center=1.0, radius=0.4),
    build_domain("lens", parent=ANNULUS, center=-1.0, radius=0.3),
]


def test_weight_values():
    assert weight_value(DISC, UNWEIGHTED, 0.3 + 0.2j) == 1.0
    assert weight_value(DISC, WeightSpec(2.0), 0.0) == pytest.approx(1.0, abs=1e-15)
    assert weight_value(DISC, WeightSpec(1.0), 0.6) == pytest.approx(0.64, abs=1e-15)


def test_invalid_parameters():
    with pytest.raises(InvalidParameter):
        build_domain("annulus", eps=1.5)
    with pytest.raises(InvalidParameter):
        build_domain("shell", n=2, r_in=2.0, r_out=1.0)
    with pytest.raises(InvalidParameter):
        WeightSpec(-1.0)
    with pytest.raises(InvalidParameter):
        WeightSpec(1.0, "harmonic")


@pytest.mark.parametrize("domain", ALL_DOMAINS, ids=str)
@pytest.mark.parametrize("choice", ["algebraic", "distance"])
def test_rho_negative_on_interior(domain, choice):
    Z = interior_grid(domain)
    assert len(Z) > 0
    assert np.all(np.asarray(rho(domain, choice, Z)) < 0)


@pytest.mark.parametrize("domain", [d for d in ALL_DOMAINS if d.kind != "lens"], ids=str)
def test_defining_functions_comparable(domain):
    Z = interior_grid(domain, 16, 1e-3)
    ratio = np.asarray(rho(domain, "algebraic", Z)) / np.asarray(rho(domain, "distance", Z))
    assert np.all(np.isfinite(ratio))
    assert ratio.min() > 0
    assert ratio.max() / ratio.min() < 50


def test_quadrature_areas():
    assert quadrature(DISC, 32).weights.sum() == pytest.approx(math.pi, abs=1e-12)
    rule = quadrature(DISC, 32)
    vals = 1 - np.abs(rule.nodes[:, 0]) ** 2
    assert vals @ rule.weights == pytest.approx(math.pi / 2, abs=1e-12)
    assert quadrature(ANNULUS, 32).weights.sum() == pytest.approx(3 * math.pi / 4, abs=1e-12)
    assert quadrature(SHELL, 16).weights.sum() == pytest.approx(15 * math.pi**2 / 2, rel=1e-12)


def test_quadrature_rejects_low_order():
    with pytest.raises(UnsupportedOrder):
        quadrature(DISC, 3)


def test_lens_quadrature_area():
    # a lens covering the whole disc
    lens = build_domain("lens", parent=DISC, center=0.0, radius=2.0)
    assert quadrature(lens, 32).weights.sum() == pytest.approx(math.pi, rel=1e-10)
    # intersection of two unit-scale discs with known area
    half = build_domain("lens", parent=DISC, center=1.0, radius=1.0)
    area = 2 * math.pi / 3 - math.sqrt(3) / 2
    assert quadrature(half, 32).weights.sum() == pytest.approx(area, rel=1e-10)


@pytest.mark.parametrize("domain", ALL_DOMAINS, ids=str)
def test_quadrature_positive_and_interior(domain):
    rule = quadrature(domain, 16)
    assert np.all(rule.weights > 0)
    assert np.all(domain.contains(rule.nodes))


@pytest.mark.parametrize("domain", [DISC, ANNULUS, build_domain("polydisc", n=2),
                                    build_domain("ball", n=2)], ids=str)
@pytest.mark.parametrize("r", [0.0, 1.0])
def test_quadrature_moment_exactness(domain, r):
    w = WeightSpec(r)
    rule = quadrature(domain, 24, w)
    deg = rule.exactness_degree
    assert deg >= 16
    n = domain.n
    rng = np.random.default_rng(3)
    Z = rule.nodes
    for _ in range(25):
        a = rng.integers(0, deg // (2 * n) + 1, n)
        b = a.copy() if rng.random() < 0.5 else rng.integers(0, deg // (2 * n) + 1, n)
        if domain.kind == "annulus":
            a, b = a - 2, b - 2
            if (np.abs(a) + np.abs(b)).sum() > deg:
                continue
        if a.sum() + b.sum() > deg:
            continue
        val = np.prod(Z ** a * np.conj(Z) ** b, axis=1) @ rule.weights
        if np.array_equal(a, b):
            exact = monomial_norm2(domain, w, a)
            assert abs(val - exact) <= 1e-12 * exact
        else:
            assert abs(val) <= 1e-12


def test_boundary_grids():
    pts = boundary_grid(DISC, 8)
    assert np.allclose(np.abs(pts[:, 0]), 1)
    mods = np.sort(np.abs(boundary_grid(ANNULUS, 8)[:, 0]))
    assert np.allclose(mods[:8], 0.5) and np.allclose(mods[8:], 1.0)
    norms = np.linalg.norm(boundary_grid(SHELL, 16), axis=1)
    assert np.all(np.isclose(norms, 1) | np.isclose(norms, 2))
    assert np.any(np.isclose(norms, 1)) and np.any(np.isclose(norms, 2))
    assert np.any(np.all(boundary_grid(build_domain("punctured_disc"), 8) == 0, axis=1))


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 0.999), st.floats(0, 2 * math.pi))
def test_distance_function_on_disc(t, angle):
    z = t * np.exp(1j * angle)
    assert float(rho(DISC, "distance", z)) == pytest.approx(t - 1, abs=1e-15)
    assert float(rho(DISC, "algebraic", z)) == pytest.approx(t * t - 1, abs=1e-15)


def test_fingerprints_distinguish_domains():
    fps = {d.fingerprint() for d in ALL_DOMAINS}
    assert len(fps) == len(ALL_DOMAINS)
