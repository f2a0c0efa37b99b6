import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergmanlab.diagnostics import (berezin_profile, coherent, compactness, fit_decay,
                                    inflation_check, kernel_ratio, localization_grid,
                                    localization_scan, tail_indicator, verdict_for, volume_c,
                                    volume_c_closed, weak_probe)
from bergmanlab.domain import UNWEIGHTED, WeightSpec, build_domain
from bergmanlab.errors import InvalidParameter
from bergmanlab.kernel import monomial_basis
from bergmanlab.operator import toeplitz

DISC = build_domain("disc")
ANNULUS = build_domain("annulus", eps=0.5)


def test_tail_indicator_examples():
    basis = monomial_basis(DISC, UNWEIGHTED, 119)
    T = toeplitz(basis, None, "1")
    rep = tail_indicator(T, [0, 30, 60, 118])
    assert rep.tail == pytest.approx((1, 1, 1, 1)) and rep.verdict == "non-decaying"
    T = toeplitz(basis, None, "1 - abs(z1)^2")
    rep = tail_indicator(T, [0, 30, 60, 90, 118])
    assert np.allclose(rep.tail, [1 / (j + 2) for j in rep.cuts], rtol=0, atol=1e-13)
    assert rep.verdict == "decaying"
    T = toeplitz(basis, None, "abs(z1)^2")
    rep = tail_indicator(T, [0, 30, 60, 90, 118])
    assert np.allclose(rep.tail, 120 / 121, atol=1e-13)
    assert rep.verdict == "non-decaying"
    with pytest.raises(InvalidParameter):
        tail_indicator(T, [0, 119])
    with pytest.raises(InvalidParameter):
        tail_indicator(T, [5, 3])


@pytest.mark.parametrize("phi", ["re(z1) + 1.5", "bump(0.3, 0.5)", "(1 - abs(z1)^2)*im(z1)",
                                 "abs(z1 - 0.5)^2"])
def test_tail_nonincreasing(phi):
    rep = compactness(DISC, None, phi, 60)
    assert np.all(np.diff(rep.tail) <= 1e-12)
    assert rep.tail[0] <= max(rep.boundary_sup, 1.0) * 2.5


def test_verdict_thresholds():
    assert verdict_for(0.01) == "decaying"
    assert verdict_for(0.2) == "inconclusive"
    assert verdict_for(0.9) == "non-decaying"
    assert verdict_for(0.2, (0.3, 0.6)) == "decaying"


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_weighted_dichotomy_coherent(r):
    w = WeightSpec(r)
    for phi in ("1 - abs(z1)^2", "bump(0, 0.5)", "1", "abs(z1)^2", "re(z1) + 1.5"):
        rep = compactness(DISC, w, phi, 120, [0, 30, 60, 90, 118])
        assert coherent(rep)


def test_berezin_profiles():
    radii = [0.5, 0.7, 0.9, 0.99]
    const = berezin_profile(DISC, None, "1", 1, radii)
    assert np.allclose([v for _, v in const], 1, atol=1e-10)
    down = [v for _, v in berezin_profile(DISC, None, "1 - abs(z1)^2", 1, radii)]
    assert np.all(np.diff(down) < 0)
    up = [v for _, v in berezin_profile(DISC, None, "abs(z1)^2", 1, radii)]
    assert np.all(np.diff(up) > 0) and up[-1] < 1
    sq = [v for _, v in berezin_profile(DISC, None, "1 - abs(z1)^2", 1, radii, squared=True)]
    assert np.all(np.diff(sq) < 0)
    with pytest.raises(InvalidParameter):
        berezin_profile(DISC, None, "1", 1, [0.9999])


def test_weak_probe_examples():
    vals = weak_probe(DISC, None, "1", 1, [0.1, 0.01, 0.001])
    for d, v in vals:
        assert v == pytest.approx(math.pi * (1 - (1 - d) ** 2) ** 2, rel=1e-12)
    punct = build_domain("punctured_disc")
    vals = weak_probe(punct, None, "1", 0, [0.1, 0.01, 0.001, 0.0])
    assert vals[-1][1] == pytest.approx(math.pi, abs=1e-10)
    assert min(v for _, v in vals) >= 0.9 * math.pi * 0.9
    vanish = weak_probe(DISC, None, "1 - z1", 1, [0.1, 0.01, 0.001])
    assert vanish[-1][1] < vanish[0][1] < 1e-1


def test_kernel_ratio_examples():
    assert kernel_ratio(DISC, DISC, None, 0.3) == pytest.approx((1, 1), abs=1e-10)
    half = build_domain("lens", parent=DISC, center=0, radius=0.5)
    lhs, rhs = kernel_ratio(DISC, half, None, 0)
    assert lhs == pytest.approx(0.25, abs=1e-10) and rhs == pytest.approx(0.25, abs=1e-10)
    lhs, rhs = kernel_ratio(DISC, half, None, 0.3)
    assert 0 < lhs <= rhs + 1e-10 < 1


@settings(max_examples=8, deadline=None)
@given(st.floats(0.15, 0.5), st.floats(0, 2 * math.pi), st.floats(0, 0.9), st.floats(0, 2 * math.pi))
def test_kernel_ratio_inequality(R, a, t, b):
    c = (0.9 - R) * 0.8 * complex(math.cos(a), math.sin(a))
    U = build_domain("lens", parent=DISC, center=c, radius=R)
    q = c + t * R * complex(math.cos(b), math.sin(b))
    lhs, rhs = kernel_ratio(DISC, U, None, q)
    assert lhs <= rhs + 1e-10


@settings(max_examples=8, deadline=None)
@given(st.floats(0.15, 0.9), st.floats(0, 0.9), st.floats(0, 2 * math.pi))
def test_weighted_kernel_ratio_inequality(R, t, b):
    # weighted inner discs are concentric with the disc
    U = build_domain("lens", parent=DISC, center=0, radius=R)
    q = t * R * complex(math.cos(b), math.sin(b))
    lhs, rhs = kernel_ratio(DISC, U, WeightSpec(1.0), q)
    assert lhs <= rhs + 1e-10


def test_localization_degenerate_patch():
    # the patch covers the whole disc, so the ratio is one
    grid = localization_grid(1.0, [0.5, 0.4, 0.3])
    rep = localization_scan(DISC, 1.0, 0.6, 2.5, None, grid, 35, 5)
    assert np.allclose(rep.ratios, 1, atol=1e-6)


def test_localization_preconditions():
    with pytest.raises(InvalidParameter):
        localization_scan(ANNULUS, 1.0, 0.2, 0.4, None, [1 - 1e-4], 10, 5)
    with pytest.raises(InvalidParameter):
        localization_scan(ANNULUS, 1.0, 0.4, 0.2)


def test_fit_decay_recovers_power_law():
    x = np.logspace(0, 3, 20)
    fit = fit_decay(x, 2.0 * x**-0.5, "power")
    assert fit.params[0] == pytest.approx(2.0, rel=1e-10)
    assert fit.params[1] == pytest.approx(-0.5, abs=1e-10)


def test_volume_constants():
    for s in (0.5, 1.0, 3.0):
        assert volume_c(1, s).value == pytest.approx(math.pi, rel=1e-13)
    assert volume_c(2, 2).value == pytest.approx(math.pi**2 / 2, rel=1e-13)
    assert volume_c(2, 1).value == pytest.approx(math.pi**3 / 4, rel=1e-13)
    assert volume_c(3, 3).value == pytest.approx(math.pi**3 / 6, rel=1e-13)
    for m, s in ((2, 1.5), (3, 1.0), (3, 2.0)):
        assert volume_c(m, s).value == pytest.approx(volume_c_closed(m, s), rel=1e-12)


def test_volume_monte_carlo_seeded():
    a = volume_c(2, 1, "monte_carlo", seed=7, samples=200_000)
    b = volume_c(2, 1, "monte_carlo", seed=7, samples=200_000)
    assert a == b
    assert abs(a.value - math.pi**3 / 4) <= 4 * a.stderr


def test_inflation_examples():
    for r, expected in ((1, math.pi), (2, math.pi**2 / 2)):
        rep = inflation_check(r, seed=3)
        assert rep.spread < 1e-8
        assert rep.mean == pytest.approx(expected, abs=1e-8)
    rep = inflation_check(1, [(0, 0)])
    assert rep.mean == pytest.approx(math.pi, rel=1e-14)
    with pytest.raises(InvalidParameter):
        inflation_check(1, [(0.9, 0)])
