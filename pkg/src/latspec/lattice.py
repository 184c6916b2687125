"""Finitely supported potentials on Z^d and trace moments of H^n - H0^n.

The free operator is the discrete Laplacian acting as the average over
nearest neighbours with weight 1/2 per step,

    (H0 f)(n) = (1/2) * sum_j [ f(n + e_j) + f(n - e_j) ],

whose spectrum is the segment [-d, d].  A potential is a finite complex-valued
function on the lattice; H = H0 + V.  For n = 1..4 the trace of H^n - H0^n
reduces to short closed forms in V (odd powers of H0 are traceless on the
bipartite lattice, and the diagonal of H0^2 equals d/2), which
``trace_moments`` implements.  ``brute_force_moments`` recomputes the same
traces from dense matrices on a finite box and serves as the independent
cross-check: the difference trace is exact once the box extends n_max sites
beyond the support of V, because closed paths that never visit the support
contribute identically to H^n and H0^n.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

Site = tuple[int, ...]


def validate_dimension(d: int) -> int:
    """Check that d is a positive integer lattice dimension."""
    if not isinstance(d, (int, np.integer)):
        raise TypeError(f"dimension must be an integer, got {type(d).__name__}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got d={d}")
    return int(d)


def require_dimension_3(d: int, context: str) -> int:
    """Reject d < 3 for operations whose convergence needs the propagator
    decay t^(-d/3) to be integrable in d dimensions."""
    d = validate_dimension(d)
    if d < 3:
        raise ValueError(
            f"{context} requires lattice dimension d >= 3 (got d={d}): "
            "the time integral of the propagator fails to converge below three dimensions"
        )
    return d


@dataclass(frozen=True)
class Potential:
    """Finitely supported complex potential on Z^d.

    Entries are stored sorted lexicographically by site so that iteration
    order (and everything derived from it) is deterministic.  Exact zero
    values are dropped; duplicate sites are rejected.
    """

    d: int
    entries: tuple[tuple[Site, complex], ...]

    def __init__(self, d: int, values: Mapping[Site, complex] | Iterable[tuple[Site, complex]] = ()):
        d = validate_dimension(d)
        items = list(values.items()) if isinstance(values, Mapping) else list(values)
        seen: dict[Site, complex] = {}
        for site, val in items:
            site = tuple(int(c) for c in site)
            if len(site) != d:
                raise ValueError(f"site {site} has {len(site)} coordinates, expected {d}")
            if site in seen:
                raise ValueError(f"duplicate site {site}")
            seen[site] = complex(val)
        ordered = tuple(sorted((kv for kv in seen.items() if kv[1] != 0), key=lambda kv: kv[0]))
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "entries", ordered)

    @property
    def support(self) -> tuple[Site, ...]:
        """Sites carrying an entry, in lexicographic order."""
        return tuple(site for site, _ in self.entries)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.entries], dtype=complex)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, site: Site) -> complex:
        for s, v in self.entries:
            if s == tuple(site):
                return v
        return 0.0

    def as_dict(self) -> dict[Site, complex]:
        return dict(self.entries)

    def support_radius(self) -> int:
        """Sup-norm radius of the support (0 for the empty potential)."""
        if not self.entries:
            return 0
        return max(max(abs(c) for c in site) for site, _ in self.entries)

    def scale(self, factor: complex) -> "Potential":
        return Potential(self.d, [(s, factor * v) for s, v in self.entries])

    def translate(self, shift: Sequence[int]) -> "Potential":
        shift = tuple(int(c) for c in shift)
        if len(shift) != self.d:
            raise ValueError(f"shift has {len(shift)} coordinates, expected {self.d}")
        return Potential(self.d, [(tuple(a + b for a, b in zip(s, shift)), v) for s, v in self.entries])

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(v.imag) <= tol for _, v in self.entries)

    def to_json(self) -> str:
        payload = {
            "d": self.d,
            "entries": [
                {"site": list(site), "re": v.real, "im": v.imag} for site, v in self.entries
            ],
        }
        return json.dumps(payload, indent=2)

    @staticmethod
    def from_json(text: str) -> "Potential":
        payload = json.loads(text)
        if not isinstance(payload, dict) or "d" not in payload or "entries" not in payload:
            raise ValueError("potential JSON must be an object with 'd' and 'entries'")
        d = payload["d"]
        entries = []
        for rec in payload["entries"]:
            site = rec["site"]
            entries.append((tuple(site), complex(float(rec.get("re", 0.0)), float(rec.get("im", 0.0)))))
        return Potential(d, entries)

    @staticmethod
    def from_file(path: str) -> "Potential":
        with open(path, "r", encoding="utf-8") as fh:
            return Potential.from_json(fh.read())


@dataclass(frozen=True)
class MomentSet:
    """Traces d_n = Tr(H^n - H0^n) for n = 1..4."""

    d1: complex
    d2: complex
    d3: complex
    d4: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.d1, self.d2, self.d3, self.d4)


def quasi_norm(potential: Potential, q: float = 2.0 / 3.0) -> float:
    """The l^q quasi-norm (sum |V_n|^q)^(1/q); q defaults to 2/3."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if not potential.entries:
        return 0.0
    total = math.fsum(abs(v) ** q for _, v in potential.entries)
    return total ** (1.0 / q)


def _neighbour_sum(potential: Potential) -> complex:
    """sum_n V_n * sum_j (V_{n+e_j} + V_{n-e_j})."""
    table = potential.as_dict()
    total = 0.0 + 0.0j
    for site, v in potential.entries:
        acc = 0.0 + 0.0j
        for j in range(potential.d):
            for sgn in (1, -1):
                nb = tuple(c + (sgn if k == j else 0) for k, c in enumerate(site))
                acc += table.get(nb, 0.0)
        total += v * acc
    return total


def trace_moments(potential: Potential) -> MomentSet:
    """Closed-form moments of H^n - H0^n for n = 1..4.

    With the 1/2 hopping weight the only free-operator contributions through
    fourth order are the diagonal of H0^2 (equal to d/2 at every site) and the
    nearest-neighbour correlation 2 Tr(H0 V H0 V) = (1/2) sum_n V_n sum_nb V_nb.
    """
    d = potential.d
    v = potential.values
    s1 = complex(np.sum(v))
    s2 = complex(np.sum(v * v))
    s3 = complex(np.sum(v * v * v))
    s4 = complex(np.sum(v * v * v * v))
    d1 = s1
    d2 = s2
    d3 = s3 + 1.5 * d * s1
    d4 = s4 + 2.0 * d * s2 + 0.5 * _neighbour_sum(potential)
    return MomentSet(d1, d2, d3, d4)


def _box_sites(d: int, radius: int) -> list[Site]:
    rng = range(-radius, radius + 1)
    sites: list[Site] = []

    def rec(prefix: tuple[int, ...]):
        if len(prefix) == d:
            sites.append(prefix)
            return
        for c in rng:
            rec(prefix + (c,))

    rec(())
    return sites


@functools.lru_cache(maxsize=8)
def _box_free_operator(d: int, radius: int) -> tuple[np.ndarray, np.ndarray, dict]:
    """H0 on the box, its square, and the site index (cached: V-independent)."""
    sites = _box_sites(d, radius)
    index = {s: i for i, s in enumerate(sites)}
    m = len(sites)
    h0 = np.zeros((m, m))
    for s, i in index.items():
        for j in range(d):
            for sgn in (1, -1):
                nb = tuple(c + (sgn if k == j else 0) for k, c in enumerate(s))
                if nb in index:
                    h0[i, index[nb]] = 0.5
    return h0, h0 @ h0, index


def brute_force_moments(potential: Potential, n_max: int = 4, box_radius: int | None = None) -> list[complex]:
    """Dense-matrix oracle for Tr(H^n - H0^n), n = 1..n_max.

    The operators are restricted to the box [-box_radius, box_radius]^d.  The
    difference trace is exact (not merely approximate) provided
    box_radius >= support_radius + n_max, since any closed path of length at
    most n_max that touches both the support and the box boundary would have
    to travel further than the box allows; smaller boxes are refused.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    d = potential.d
    r_supp = potential.support_radius()
    if box_radius is None:
        box_radius = r_supp + n_max
    if box_radius < r_supp + n_max:
        raise ValueError(
            f"box_radius={box_radius} too small: need >= support_radius + n_max = {r_supp + n_max}; "
            "the truncated trace would be wrong, not approximate"
        )
    h0, h02, index = _box_free_operator(d, box_radius)
    m = h0.shape[0]
    vdiag = np.zeros(m, dtype=complex)
    for site, val in potential.entries:
        vdiag[index[site]] = val
    h = h0 + np.diag(vdiag)

    out: list[complex] = [complex(np.sum(vdiag))]
    if n_max >= 2:
        # H^2 from the cached H0^2 in O(m^2): cross terms are row/col scalings.
        h2 = h02 + h0 * vdiag[None, :] + vdiag[:, None] * h0 + np.diag(vdiag * vdiag)
        out.append(complex(np.trace(h2) - np.trace(h02)))
    if n_max >= 3:
        # Tr(A^3) = sum(A^2 ∘ A^T) avoids another full matmul.
        out.append(complex(np.sum(h2 * h.T) - np.sum(h02 * h0.T)))
    if n_max >= 4:
        out.append(complex(np.sum(h2 * h2.T) - np.sum(h02 * h02.T)))
    if n_max >= 5:
        hp, h0p = h2 @ h2, h02 @ h02  # holds H^4, H0^4
        for n in range(5, n_max + 1):
            hp, h0p = hp @ h, h0p @ h0
            out.append(complex(np.trace(hp) - np.trace(h0p)))
    return out
