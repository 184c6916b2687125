"""Perturbation determinant det(I + V R0(lambda(z))) on the unit disc.

The potential has finite support S, so the Birman-Schwinger operator
V R0 restricted to S is an |S| x |S| matrix and the determinant is an
ordinary one.  Everything downstream (zero finding, Hardy-space
factorization, trace residuals) consumes the three entry points here:

    det_eval        one sample, interior or boundary of the disc
    log_det_path    a continuous branch of log D along a path, anchored
                    at log D(0) = 0
    taylor_coeffs   c_n with  log D(z) = -sum_n c_n z^n,  via the Cauchy
                    integral on a circle that encloses no zeros

plus ``moment_relation_check`` which arbitrates, numerically, between
the two candidate closed forms tying c_n to the lattice trace moments.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .lattice import Potential, quasi_norm, trace_moments
from .conformal import lambda_of_z
from .resolvent import green_auto, green_torus, green_time, green_boundary
from ._util import map_ordered

__all__ = [
    "QuadPolicy",
    "DeterminantSample",
    "TaylorCoeffs",
    "PathRefinementError",
    "det_eval",
    "log_det_path",
    "taylor_coeffs",
    "moment_relation_check",
    "hinf_constant",
]

_BOUNDARY_TOL = 1e-12


class PathRefinementError(ValueError):
    """Raised when consecutive path samples fail the phase-jump guard."""


@dataclass(frozen=True)
class QuadPolicy:
    """How Green's functions are evaluated inside det_eval.

    engine: "auto" switches torus quadrature <-> damped time integral on
    distance to the band; "torus"/"time" force one representation (the
    forcing modes exist so tests can collapse the dual route on purpose).
    boundary_method: passed to green_boundary for |z| = 1 samples.
    n_quad: torus grid override, only honored when engine == "torus".
    interior_margin: interior samples must satisfy |z| <= 1 - margin.
    """

    engine: str = "auto"
    boundary_method: str = "time"
    dist_switch: float = 0.35
    n_quad: Optional[int] = None
    interior_margin: float = 1e-3

    def __post_init__(self) -> None:
        if self.engine not in ("auto", "torus", "time"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.boundary_method not in ("time", "extrapolated"):
            raise ValueError(f"unknown boundary method {self.boundary_method!r}")
        if not 0.0 < self.interior_margin < 1.0:
            raise ValueError("interior_margin must lie in (0, 1)")


@dataclass
class DeterminantSample:
    z: complex
    value: complex
    err_estimate: float
    log_value: Optional[complex] = None


@dataclass
class TaylorCoeffs:
    r: float
    c: list  # c[0] is c_1
    err_estimate: list  # per coefficient, same indexing

    @property
    def n_max(self) -> int:
        return len(self.c)


def _green_interior(n, lam, d, policy: QuadPolicy):
    if policy.engine == "torus":
        return green_torus(n, lam, d, n_quad=policy.n_quad)
    if policy.engine == "time":
        return green_time(n, lam, d)
    return green_auto(n, lam, d, dist_switch=policy.dist_switch)


def _green_on_circle(n, t, d, policy: QuadPolicy):
    # z = e^{it} is approached radially from inside; lambda(z) then tends
    # to d*cos t with Im lambda -> -d*eps*sin t, so the upper semicircle
    # means the lower side of the cut.
    lam0 = d * math.cos(t)
    side = "minus" if math.sin(t) > 0.0 else "plus"
    return green_boundary(n, lam0, side, d, method=policy.boundary_method)


def _assemble(V: Potential, green_of_diff) -> "tuple[np.ndarray, np.ndarray]":
    sites = V.support
    s = len(sites)
    M = np.empty((s, s), dtype=complex)
    E = np.empty((s, s), dtype=float)
    vd = V.as_dict()
    vals = [vd[x] for x in sites]
    for i, x in enumerate(sites):
        for j, y in enumerate(sites):
            diff = tuple(a - b for a, b in zip(x, y))
            g = green_of_diff(diff)
            M[i, j] = vals[i] * g.value
            E[i, j] = abs(vals[i]) * g.err_estimate
    return M, E


def _det_with_err(M: np.ndarray, E: np.ndarray, z: complex) -> DeterminantSample:
    s = M.shape[0]
    A = np.eye(s, dtype=complex) + M
    det = complex(np.linalg.det(A))
    # |d det| <= ||adj(A)||_2 * ||dA||_2; the adjugate's 2-norm is the
    # product of all singular values but the smallest.
    sigma = np.linalg.svd(A, compute_uv=False)
    adj_norm = float(np.prod(sigma[:-1])) if s > 1 else 1.0
    de = float(np.linalg.norm(E, 2))
    float_noise = s * 2.3e-16 * float(sigma[0]) if s else 0.0
    return DeterminantSample(z=z, value=det, err_estimate=adj_norm * (de + float_noise))


def det_eval(V: Potential, z: complex, policy: QuadPolicy = QuadPolicy()) -> DeterminantSample:
    """One determinant sample at z in the closed unit disc.

    Interior points (|z| <= 1 - margin) go through the off-spectrum Green
    evaluators; |z| = 1 goes through the two-sided boundary limit with the
    side fixed by the semicircle.  The thin rim in between is refused.
    Empty support returns exactly 1.
    """
    z = complex(z)
    d = V.d
    if not V.support:
        return DeterminantSample(z=z, value=1.0 + 0.0j, err_estimate=0.0)
    az = abs(z)
    if az >= 1.0 + _BOUNDARY_TOL:
        raise ValueError(f"z={z} lies outside the closed unit disc")
    if az == 0.0:
        # D(0) = 1 exactly: lambda -> infinity and V R0 -> 0.
        return DeterminantSample(z=z, value=1.0 + 0.0j, err_estimate=0.0)
    if abs(az - 1.0) <= _BOUNDARY_TOL:
        t = cmath.phase(z)
        M, E = _assemble(V, lambda diff: _green_on_circle(diff, t, d, policy))
        return _det_with_err(M, E, z)
    if az > 1.0 - policy.interior_margin + 1e-12:
        raise ValueError(
            f"|z|={az:.6g} is inside the rim margin {policy.interior_margin:g}; "
            "evaluate on |z|=1 (boundary policy) or deeper inside the disc"
        )
    lam = lambda_of_z(z, d)
    M, E = _assemble(V, lambda diff: _green_interior(diff, lam, d, policy))
    return _det_with_err(M, E, z)


def log_det_path(
    V: Potential,
    path: Sequence[complex],
    policy: QuadPolicy = QuadPolicy(),
    jump_guard: float = 2.8,
) -> "list[DeterminantSample]":
    """Continuous branch of log D along ``path``, anchored at log D(0) = 0.

    The path must start at |z| <= 0.01 where D is within O(|z|) of 1, so
    the principal logarithm of the first sample is the anchored branch.
    Between consecutive samples the phase increment must stay below
    ``jump_guard`` < pi, otherwise the path is too coarse to track the
    branch and we refuse instead of guessing a winding.
    """
    if not path:
        return []
    if abs(path[0]) > 0.01:
        raise ValueError(f"path must start at |z| <= 0.01, got |z|={abs(path[0]):.4g}")
    if not 0.0 < jump_guard < math.pi:
        raise ValueError("jump_guard must lie in (0, pi)")
    samples = [det_eval(V, z, policy) for z in path]
    prev = None
    for k, smp in enumerate(samples):
        if abs(smp.value) < 1e-13:
            raise ValueError(
                f"path passes through a zero of the determinant at z={path[k]}"
            )
        if prev is None:
            smp.log_value = cmath.log(smp.value)
        else:
            step = cmath.log(smp.value / prev.value)  # principal branch
            if abs(step.imag) > jump_guard:
                raise PathRefinementError(
                    f"phase jump {step.imag:+.3f} between path points {k-1} and {k} "
                    f"exceeds the guard {jump_guard:g}; refine the path"
                )
            smp.log_value = prev.log_value + step
        prev = smp
    return samples


def _march_log(values: "list[complex]", closed: bool) -> "tuple[np.ndarray, int]":
    """Phase-continuous log along a sample sequence; returns logs and,
    for a closed loop, the integer winding of the final-to-first return."""
    logs = np.empty(len(values), dtype=complex)
    logs[0] = cmath.log(values[0])
    for k in range(1, len(values)):
        logs[k] = logs[k - 1] + cmath.log(values[k] / values[k - 1])
    winding = 0
    if closed:
        ret = cmath.log(values[0] / values[-1])
        total = (logs[-1] + ret - logs[0]).imag
        winding = int(round(total / (2.0 * math.pi)))
    return logs, winding


def taylor_coeffs(
    V: Potential,
    r: float,
    n_max: int = 4,
    m_samples: int = 64,
    policy: QuadPolicy = QuadPolicy(),
) -> TaylorCoeffs:
    """Taylor coefficients c_n of -log D at 0 from the Cauchy integral.

    Samples D on |z| = r at 2*m_samples equispaced points (the requested
    grid plus its refinement, so the error estimate is a strict byproduct),
    marches a continuous log around the circle, checks that the loop closes
    with winding zero (no zeros inside), and reads off

        c_n = -(1/(2 pi i)) oint log D(z) / z^{n+1} dz .
    """
    if not 0.0 < r < 1.0:
        raise ValueError("radius must lie in (0, 1)")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if m_samples < 8 * n_max:
        raise ValueError(f"m_samples={m_samples} < 8*n_max={8 * n_max}")
    if not V.support:
        zeros = [0.0 + 0.0j] * n_max
        return TaylorCoeffs(r=r, c=zeros, err_estimate=[0.0] * n_max)

    m2 = 2 * m_samples
    ts = 2.0 * math.pi * np.arange(m2) / m2
    pts = r * np.exp(1j * ts)
    vals = map_ordered(lambda z: det_eval(V, z, policy).value, list(pts))
    amin = min(abs(v) for v in vals)
    logs, winding = _march_log(vals, closed=True)
    if winding != 0:
        raise ValueError(
            f"circle |z|={r:g} encloses {winding} zero(s) of the determinant; "
            "shrink the radius below r0"
        )
    if amin <= 1e-13:
        raise ValueError(f"determinant vanishes on the sampling circle |z|={r:g}")

    def coeffs_from(logvals: np.ndarray) -> np.ndarray:
        m = len(logvals)
        hat = np.fft.fft(logvals) / m
        n = np.arange(1, n_max + 1)
        return -hat[1 : n_max + 1] * r ** (-n.astype(float))

    fine = coeffs_from(logs)
    coarse = coeffs_from(logs[::2])
    err = np.abs(fine - coarse)
    # rounding in each log D sample is amplified by r^{-n}; the subsampling
    # difference cannot see that floor, so add it explicitly
    log_scale = max(1e-16, float(np.max(np.abs(logs))))
    ns = np.arange(1, n_max + 1, dtype=float)
    noise_floor = 8.0 * 2.3e-16 * log_scale * r ** (-ns)
    err = np.maximum(err, noise_floor)
    return TaylorCoeffs(r=r, c=[complex(c) for c in fine], err_estimate=[float(e) for e in err])


def _relation_predictions(d: int, moments: "list[complex]") -> "dict[str, list[complex]]":
    """The two candidate closed forms tying c_1..c_4 to trace moments.

    (A) takes the printed coefficient display at face value:
        c_1 = a d_1, c_2 = a^2 d_2, c_3 = a^3 d_3 - c_1, c_4 = a^4 d_4 - c_2.
    (B) composes the large-lambda expansion log Dhat = -sum d_n/(n lam^n)
    with 1/lam = a z/(1+z^2), which keeps the 1/n factors:
        c_1 = a d_1, c_2 = a^2 d_2 / 2, c_3 = a^3 d_3 / 3 - c_1,
        c_4 = a^4 d_4 / 4 - 2 c_2.
    Both lists use each relation's own lower coefficients on the right side,
    so each is a pure function of the moments.
    """
    a = 2.0 / d
    d1, d2, d3, d4 = moments[:4]
    ca1 = a * d1
    ca2 = a * a * d2
    ca3 = a ** 3 * d3 - ca1
    ca4 = a ** 4 * d4 - ca2
    cb1 = a * d1
    cb2 = a * a * d2 / 2.0
    cb3 = a ** 3 * d3 / 3.0 - cb1
    cb4 = a ** 4 * d4 / 4.0 - 2.0 * cb2
    return {"A": [ca1, ca2, ca3, ca4], "B": [cb1, cb2, cb3, cb4]}


def moment_relation_check(
    V: Potential,
    coeffs: TaylorCoeffs,
    rel_tol: float = 1e-6,
) -> dict:
    """Compare measured c_1..c_4 against both moment relations.

    The Cauchy-integral coefficients are authoritative; this reports the
    relative residual vector of each candidate and names the winner (the
    unique relation whose n = 2..4 residuals all fall below ``rel_tol``),
    or "both"/"none" when the data cannot separate them (e.g. V empty).
    """
    if coeffs.n_max < 4:
        raise ValueError("need coefficients through c_4")
    moments = trace_moments(V)
    preds = _relation_predictions(V.d, [moments.d1, moments.d2, moments.d3, moments.d4])
    measured = coeffs.c[:4]
    scale = max(max(abs(c) for c in measured), 1e-300)
    report: dict = {"scale": scale, "relations": {}}
    passing = []
    for name, pred in preds.items():
        resid = [abs(m - p) / scale for m, p in zip(measured, pred)]
        ok = all(rv <= rel_tol for rv in resid[1:4])
        report["relations"][name] = {
            "predicted": pred,
            "residual_rel": resid,
            "pass_n2_to_n4": ok,
        }
        if ok:
            passing.append(name)
    if len(passing) == 1:
        report["winner"] = passing[0]
    elif len(passing) == 2:
        report["winner"] = "both"
    else:
        report["winner"] = "none"
    report["c1_residuals"] = {
        name: abs(measured[0] - preds[name][0]) / scale for name in preds
    }
    return report


def hinf_constant(
    V: Potential,
    n_radii: int = 6,
    n_angles: int = 32,
    r_max: float = 0.997,
    policy: QuadPolicy = QuadPolicy(),
) -> dict:
    """Empirical constant in the uniform bound log|D| <= C * ||V||_{2/3}.

    Scans a polar grid of the disc, returns the maximum of log|D| and its
    ratio to the quasi-norm.  Reported, never asserted against theory: the
    true constant depends only on d but its value is unknown.
    """
    if not V.support:
        return {"c_emp": 0.0, "max_log_mod": 0.0, "quasi_norm": 0.0, "argmax_z": 0.0 + 0.0j}
    radii = np.linspace(0.15, r_max, n_radii)
    angles = 2.0 * math.pi * np.arange(n_angles) / n_angles
    grid = [complex(r * math.cos(t), r * math.sin(t)) for r in radii for t in angles]
    vals = map_ordered(lambda z: det_eval(V, z, policy), grid)
    logmods = [math.log(abs(s.value)) for s in vals]
    k = int(np.argmax(logmods))
    qn = quasi_norm(V)
    return {
        "c_emp": logmods[k] / qn,
        "max_log_mod": logmods[k],
        "quasi_norm": qn,
        "argmax_z": grid[k],
    }
