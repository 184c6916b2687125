import cmath
import math

import numpy as np
import pytest

from latspec.conformal import lambda_of_z
from latspec.determinant import (
    PathRefinementError,
    QuadPolicy,
    det_eval,
    hinf_constant,
    log_det_path,
    moment_relation_check,
    taylor_coeffs,
)
from latspec.lattice import Potential
from latspec.resolvent import green_auto


def test_empty_potential_det_is_one():
    V = Potential(3, [])
    s = det_eval(V, 0.4 + 0.2j)
    assert s.value == 1.0 + 0.0j and s.err_estimate == 0.0


def test_det_at_origin_is_one():
    V = Potential(3, [((0, 0, 0), 1.0 + 2.0j)])
    s = det_eval(V, 0.0)
    assert s.value == 1.0 + 0.0j


def test_rank_one_identity(rng):
    # lone site: the matrix determinant collapses to 1 + v G(0, lam(z))
    worst = 0.0
    for _ in range(25):
        v = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        z = rng.uniform(0.05, 0.95) * cmath.exp(2j * math.pi * rng.uniform(0, 1))
        V = Potential(3, [((0, 0, 0), v)])
        got = det_eval(V, z).value
        ref = 1.0 + v * green_auto((0, 0, 0), lambda_of_z(z, 3), 3).value
        worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
    assert worst <= 1e-12


def test_conjugation_symmetry_real_potential():
    V = Potential(3, [((0, 0, 0), 2.0), ((1, 0, 0), -0.7)])
    for z in (0.3 + 0.4j, -0.2 + 0.6j):
        a = det_eval(V, z).value
        b = det_eval(V, z.conjugate()).value
        assert b == pytest.approx(a.conjugate(), rel=1e-12)


def test_engine_consistency(mix3):
    z = 0.35 - 0.55j  # far side: torus-eligible distances
    auto = det_eval(mix3, z, QuadPolicy(engine="auto")).value
    torus = det_eval(mix3, z, QuadPolicy(engine="torus")).value
    time_ = det_eval(mix3, z, QuadPolicy(engine="time")).value
    assert abs(auto - torus) < 1e-9
    assert abs(auto - time_) < 1e-9


def test_rim_refusal_and_boundary_dispatch(v3):
    # strictly inside but within the guard margin: refused
    with pytest.raises(ValueError):
        det_eval(v3, 0.9995)
    # exactly on the rim: boundary limiting values are used instead
    s = det_eval(v3, cmath.exp(0.7j))
    assert np.isfinite(s.value.real) and np.isfinite(s.value.imag)


def test_det_error_estimate_scales_with_matrix(mix3):
    s = det_eval(mix3, 0.5 + 0.1j)
    assert s.err_estimate > 0.0
    # the estimate is a tiny multiple of the value for well-conditioned cases
    assert s.err_estimate < 1e-10 * max(1.0, abs(s.value))


def test_log_det_path_matches_principal_log(mix3):
    # a short radial path from near zero: continuous log equals principal log
    path = [0.01 * k * (0.6 + 0.3j) for k in range(1, 101)]
    samples = log_det_path(mix3, path)
    for smp in samples[:: 20]:
        direct = cmath.log(smp.value)
        assert smp.log_value == pytest.approx(direct, abs=1e-9)


def test_log_det_path_winding_continuity(v3):
    # encircling the lone zero z1 ~ 0.55: the phase must advance by 2 pi;
    # the radial lead-in runs off-axis so it cannot cross the real zero
    dir0 = cmath.exp(0.3j)
    ramp = [(0.005 + 0.71 * k / 80) * dir0 for k in range(81)]
    n = 160
    circle = [0.715 * cmath.exp(1j * (0.3 + 2.0 * math.pi * k / n)) for k in range(n + 1)]
    samples = log_det_path(v3, ramp + circle)
    dphi = samples[-1].log_value.imag - samples[len(ramp)].log_value.imag
    assert dphi == pytest.approx(2.0 * math.pi, abs=1e-6)


def test_log_det_path_refuses_coarse_jumps(v3):
    # stepping right over the zero forces a phase jump beyond the guard
    path = [0.05, 0.56, 0.05 + 0.4j]
    with pytest.raises((PathRefinementError, ValueError)):
        log_det_path(v3, path, jump_guard=0.5)


def test_taylor_radius_independence(v3):
    # c stores [c1..c4]; the constant term vanishes identically and is not kept
    a = taylor_coeffs(v3, 0.03)
    b = taylor_coeffs(v3, 0.015)
    for n in range(4):
        assert a.c[n] == pytest.approx(b.c[n], abs=1e-6)
        # err estimates honest: the two radii differ by about the stated errs
        assert abs(a.c[n] - b.c[n]) <= 10.0 * (a.err_estimate[n] + b.err_estimate[n]) + 1e-12


def test_taylor_c1_matches_trace(v3):
    tc = taylor_coeffs(v3, 0.03)
    # c1 = (2/d) * sum V for d = 3
    assert tc.c[0] == pytest.approx(2.0, abs=1e-8)


def test_taylor_rejects_enclosed_zero(v3):
    # r = 0.7 circle encloses z1 ~ 0.55: winding makes the log ill-defined
    with pytest.raises(ValueError):
        taylor_coeffs(v3, 0.7)


def test_moment_relation_unique_winner(v3, tc_v3):
    rep = moment_relation_check(v3, tc_v3)
    assert rep["winner"] in ("A", "B")
    win = rep["relations"][rep["winner"]]
    lose = rep["relations"]["A" if rep["winner"] == "B" else "B"]
    assert win["pass_n2_to_n4"] and not lose["pass_n2_to_n4"]
    assert max(win["residual_rel"][1:]) <= 1e-6
    assert max(lose["residual_rel"][1:]) > 1e-2


def test_hinf_constant_report(v3):
    rep = hinf_constant(v3, n_radii=4, n_angles=16, r_max=0.99)
    assert rep["c_emp"] > 0.0
    assert rep["max_log_mod"] == pytest.approx(rep["c_emp"] * rep["quasi_norm"], rel=1e-12)
    assert abs(rep["argmax_z"]) <= 0.99
