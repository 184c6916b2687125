import cmath
import math

import pytest
from scipy.optimize import brentq

from latspec.conformal import lambda_of_z
from latspec.lattice import Potential
from latspec.resolvent import green_auto
from latspec.zeros import (
    AnnularSector,
    coupling_threshold,
    count_zeros,
    find_zeros,
)


def _scalar_eigenvalue(v: float) -> float:
    # root of 1 + v G(0, lam) = 0 above the band, bisected independently
    f = lambda lam: 1.0 + v * green_auto((0, 0, 0), lam, 3).value.real
    return brentq(f, 3.0 + 1e-6, 12.0, xtol=1e-13)


def test_annular_sector_validation():
    AnnularSector(0.1, 0.9)
    with pytest.raises(ValueError):
        AnnularSector(0.9, 0.1)
    with pytest.raises(ValueError):
        AnnularSector(0.1, 1.5)
    with pytest.raises(ValueError):
        AnnularSector(0.1, 0.9, 0.0, 7.0)  # angular span > 2 pi


def test_count_zeros_full_disc(v3):
    assert count_zeros(v3, AnnularSector(1e-3, 0.999)) == 1


def test_count_zeros_empty_region(v3):
    # z1 ~ 0.55: an annulus that excludes it must count zero
    assert count_zeros(v3, AnnularSector(0.7, 0.999)) == 0
    assert count_zeros(v3, AnnularSector(1e-3, 0.4)) == 0


def test_count_zeros_sector_additivity(v3):
    whole = count_zeros(v3, AnnularSector(0.3, 0.8))
    left = count_zeros(v3, AnnularSector(0.3, 0.8, 0.9, 0.9 + math.pi))
    right = count_zeros(v3, AnnularSector(0.3, 0.8, 0.9 + math.pi, 0.9 + 2.0 * math.pi))
    assert left + right == whole == 1


def test_find_zeros_strong_single_site(v3, zeros_v3):
    assert len(zeros_v3) == 1
    rec = zeros_v3[0]
    assert rec.multiplicity == 1
    assert abs(rec.z.imag) < 1e-10  # real potential, real zero
    assert rec.residual < 1e-12
    lam_ref = _scalar_eigenvalue(3.0)
    assert rec.lam.real == pytest.approx(lam_ref, abs=1e-10)
    assert rec.lam == pytest.approx(lambda_of_z(rec.z, 3), rel=1e-14)


def test_find_zeros_mirror_negative_site():
    V = Potential(3, [((0, 0, 0), -3.0 + 0j)])
    recs = find_zeros(V, tol=1e-12)
    assert len(recs) == 1
    # eigenvalue below the band mirrors the positive case
    assert recs[0].lam.real == pytest.approx(-_scalar_eigenvalue(3.0), abs=1e-10)


def test_find_zeros_below_threshold_is_empty():
    V = Potential(3, [((0, 0, 0), 1.5 + 0j)])
    assert find_zeros(V) == []


def test_find_zeros_weak_complex_potential_binds_nothing(mix3):
    # total strength well below threshold: empty spectrum off the band
    assert find_zeros(mix3) == []


def test_find_zeros_complex_multi_site(mix3):
    recs = find_zeros(mix3.scale(4.0), tol=1e-11)
    assert len(recs) == 3
    for rec in recs:
        # the determinant really vanishes there
        assert rec.residual < 1e-9
        assert abs(rec.z) < 1.0
    # genuinely complex spectrum: some zero off the real axis
    assert any(abs(r.z.imag) > 0.05 for r in recs)
    # records arrive sorted by modulus then phase
    keys = [(abs(r.z), cmath.phase(r.z) % (2.0 * math.pi)) for r in recs]
    assert keys == sorted(keys)


def test_find_zeros_deterministic(v3, zeros_v3):
    again = find_zeros(v3, tol=1e-12)
    assert len(again) == len(zeros_v3)
    assert again[0].z == zeros_v3[0].z  # bitwise equality, same code path


def test_coupling_threshold_value():
    thr = coupling_threshold(3)
    assert 1.968 <= thr <= 1.989
    # threshold is where the band-edge determinant hits zero
    assert coupling_threshold(3, site_value_sign=-1) == pytest.approx(thr, rel=1e-12)
    with pytest.raises(ValueError):
        coupling_threshold(2)


def test_threshold_bracketing():
    thr = coupling_threshold(3)
    below = Potential(3, [((0, 0, 0), 0.95 * thr + 0j)])
    above = Potential(3, [((0, 0, 0), 1.05 * thr + 0j)])
    assert find_zeros(below) == []
    assert len(find_zeros(above)) == 1
