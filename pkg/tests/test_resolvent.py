import cmath
import math

import numpy as np
import pytest

from latspec.conformal import dist_to_band
from latspec.resolvent import (
    green_auto,
    green_boundary,
    green_time,
    green_torus,
    resolvent_identity_residual,
)


def _watson_band_edge() -> float:
    # classical closed form for the simple-cubic return integral, by Gamma
    # factors; the kernel value at the band edge is minus one third of it
    g = math.gamma
    w = math.sqrt(6.0) / (32.0 * math.pi ** 3)
    return -w * g(1 / 24) * g(5 / 24) * g(7 / 24) * g(11 / 24) / 3.0


def test_watson_band_edge_value():
    got = green_boundary((0, 0, 0), 3.0, "plus", 3)
    assert got.value.real == pytest.approx(_watson_band_edge(), abs=1e-8)
    assert abs(got.value.imag) < 1e-10


def test_torus_matches_time_far_from_band(rng):
    worst = 0.0
    for _ in range(12):
        lam = complex(rng.uniform(-5, 5), rng.uniform(-3, 3))
        if dist_to_band(lam, 3) < 0.5:
            lam += 2j * (1 if lam.imag >= 0 else -1)
        n = tuple(int(c) for c in rng.integers(-2, 3, 3))
        a = green_torus(n, lam, 3).value
        b = green_time(n, lam, 3).value
        worst = max(worst, abs(a - b))
    assert worst <= 1e-8


def test_conjugation_symmetry():
    lam = 1.3 + 0.8j
    for n in ((0, 0, 0), (1, 0, 0), (1, -2, 1)):
        up = green_auto(n, lam, 3).value
        dn = green_auto(n, lam.conjugate(), 3).value
        assert dn == pytest.approx(up.conjugate(), rel=1e-12)


def test_lattice_symmetry():
    # G depends on |n_j| only, in any coordinate order
    lam = 0.4 + 1.1j
    vals = [green_auto(n, lam, 3).value for n in ((1, 2, 0), (2, 1, 0), (-1, 0, -2), (0, -2, 1))]
    for v in vals[1:]:
        assert v == pytest.approx(vals[0], rel=1e-11)


def test_defining_difference_equation():
    # sum of neighbor values / 2 minus lam * G must reproduce delta_0
    lam = 0.7 + 0.9j
    d = 3

    def g(n):
        return green_auto(n, lam, d).value

    for n in ((0, 0, 0), (1, 0, 0), (1, 1, -1)):
        acc = 0.0 + 0.0j
        for j in range(d):
            for s in (-1, 1):
                m = list(n)
                m[j] += s
                acc += 0.5 * g(tuple(m))
        lhs = acc - lam * g(n)
        target = 1.0 if n == (0, 0, 0) else 0.0
        assert lhs == pytest.approx(target, abs=5e-12)


def test_free_green_large_lambda_asymptote():
    # G(0, lam) ~ -1/lam as |lam| -> infinity
    lam = 250.0 + 40.0j
    v = green_auto((0, 0, 0), lam, 3).value
    assert v == pytest.approx(-1.0 / lam, rel=1e-3)


def test_green_auto_continuity_at_switch():
    # the engine seam must not show in the values
    for t in (0.0, 0.4, 1.1):
        lam_near = (3 + 0.349) * cmath.exp(1j * t)
        lam_far = (3 + 0.351) * cmath.exp(1j * t)
        a = green_auto((1, 1, 0), lam_near, 3).value
        b = green_auto((1, 1, 0), lam_far, 3).value
        assert abs(a - b) < 2e-3  # plain continuity, not equality


def test_boundary_two_sides_conjugate():
    up = green_boundary((1, 0, 0), 1.0, "plus", 3).value
    dn = green_boundary((1, 0, 0), 1.0, "minus", 3).value
    assert dn == pytest.approx(up.conjugate(), rel=1e-10)
    # interior band point: strictly positive spectral density on the plus side
    assert up.imag > 0.1


def test_boundary_matches_small_epsilon_limit():
    lam0 = 1.0
    b = green_boundary((0, 0, 0), lam0, "plus", 3).value
    seq = [green_auto((0, 0, 0), lam0 + 1j * eps, 3).value for eps in (1e-4, 1e-5, 1e-6)]
    # the limiting value must be approached monotonically in eps; at the
    # smallest offset the truncated time integral dominates the error
    errs = [abs(s - b) for s in seq]
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 2e-3


def test_boundary_extrapolated_method_at_edge():
    exact = _watson_band_edge()
    with pytest.warns(UserWarning):
        got = green_boundary((0, 0, 0), 3.0, "plus", 3, method="extrapolated")
    assert got.value.real == pytest.approx(exact, abs=1e-5)
    # the reported uncertainty covers the true gap
    assert abs(got.value.real - exact) <= 10.0 * got.err_estimate


def test_boundary_rejects_outside_band():
    with pytest.raises(ValueError):
        green_boundary((0, 0, 0), 3.5, "plus", 3)
    with pytest.raises(ValueError):
        green_boundary((0, 0, 0), 1.0, "sideways", 3)


def test_resolvent_identity():
    # first resolvent identity residual, summed over a truncation ball
    res = resolvent_identity_residual((1, 0, 0), 0.5 + 2.0j, -1.0 + 1.5j, 3, m_radius=14)
    assert res < 5e-3


def test_error_estimates_are_honest():
    lam = 2.0 + 1.5j
    for n in ((0, 0, 0), (2, 1, 0)):
        a = green_torus(n, lam, 3)
        b = green_time(n, lam, 3)
        true_gap = abs(a.value - b.value)
        assert true_gap <= 10.0 * (a.err_estimate + b.err_estimate) + 1e-12
