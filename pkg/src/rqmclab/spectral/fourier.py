"""Fourier coefficients, dual lattices, and spectral variance sums.

Quadrature is the composite midpoint rule on 2^q panels per axis, which
never samples panel endpoints and therefore tolerates integrable boundary
singularities. Integrand callables receive an (npts, s) array and return
(npts,) values.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from ..errors import BudgetError
from ..lds import GeneratingVector
from .fit import decay_fit
from .table import SpectrumTable

_MAX_GRID = 1 << 24


@dataclass(frozen=True)
class QuadValue:
    value: complex
    error_estimate: float


@dataclass(frozen=True)
class VarianceEstimate:
    value: float
    tail_estimate: float


def _midpoint_grid(s: int, q: int) -> np.ndarray:
    panels = 1 << q
    if panels ** s > _MAX_GRID:
        raise BudgetError(f"tensor midpoint grid 2^{q * s} exceeds budget")
    axis = (np.arange(panels) + 0.5) / panels
    mesh = np.meshgrid(*([axis] * s), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _midpoint_fourier(f, n: tuple[int, ...], q: int) -> complex:
    pts = _midpoint_grid(len(n), q)
    phase = pts @ np.asarray(n, dtype=np.float64)
    vals = np.asarray(f(pts), dtype=np.complex128)
    return complex(np.mean(vals * np.exp(-2j * np.pi * phase)))


def fourier_coefficient(f, n, q: int) -> QuadValue:
    """c_n = integral of f(t) exp(-2 pi i n.t) by midpoint quadrature.

    2^q panels per axis; the error estimate is the difference against the
    q-1 refinement. Tensor grids are refused beyond s = 3.
    """
    n = tuple(int(v) for v in np.atleast_1d(n))
    if len(n) > 3:
        raise BudgetError("tensor-grid Fourier quadrature is limited to s <= 3")
    if q < 1:
        raise ValueError("need at least 2^1 panels")
    value = _midpoint_fourier(f, n, q)
    coarse = _midpoint_fourier(f, n, q - 1)
    return QuadValue(value=value, error_estimate=abs(value - coarse))


def fourier_spectrum(f, q: int, n_max: int, s: int = 1) -> SpectrumTable:
    """All |c_n|^2 with ||n||_inf <= n_max on one midpoint grid (s <= 2).

    Uses the FFT of the midpoint samples, which reproduces the per-index
    midpoint sums exactly up to roundoff (validated against
    fourier_coefficient in the test suite).
    """
    if s not in (1, 2):
        raise BudgetError("spectrum grids are limited to s in {1, 2}")
    panels = 1 << q
    if n_max >= panels // 2:
        raise ValueError(f"n_max = {n_max} would alias on 2^{q} panels")
    if panels ** s > _MAX_GRID:
        raise BudgetError(f"tensor midpoint grid 2^{q * s} exceeds budget")
    axis = (np.arange(panels) + 0.5) / panels
    if s == 1:
        vals = np.asarray(f(axis[:, None]), dtype=np.float64)
        spec = np.fft.fft(vals) / panels
    else:
        mesh = np.meshgrid(axis, axis, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        vals = np.asarray(f(pts), dtype=np.float64).reshape(panels, panels)
        spec = np.fft.fft2(vals) / panels ** 2
    entries = {}
    rng = range(-n_max, n_max + 1)
    for idx in product(rng, repeat=s):
        c = spec[tuple(np.mod(idx, panels))]
        # midpoint offset: each axis contributes exp(-i pi n / panels)
        c *= np.exp(-1j * np.pi * sum(idx) / panels)
        entries[idx] = float(abs(c) ** 2)
    return SpectrumTable(kind="fourier", quad_tag=f"midpoint:q={q}",
                         entries=entries, n_max=n_max)


def dual_lattice_enumerate(gen: GeneratingVector, n_max: int) -> list[tuple[int, ...]]:
    """All nonzero n with |n_j| <= n_max and n . z = 0 (mod N), lexicographic."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    s = gen.dim
    if (2 * n_max + 1) ** s > _MAX_GRID:
        raise BudgetError("dual-lattice enumeration box exceeds budget")
    axis = np.arange(-n_max, n_max + 1)
    mesh = np.meshgrid(*([axis] * s), indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=-1)
    dots = flat @ np.asarray(gen.z, dtype=np.int64)
    member = (np.mod(dots, gen.n_points) == 0) & np.any(flat != 0, axis=-1)
    return [tuple(int(v) for v in row) for row in flat[member]]


def _dual_member(index: tuple[int, ...], gen: GeneratingVector) -> bool:
    return sum(i * z for i, z in zip(index, gen.z)) % gen.n_points == 0


def _power_law_tail(shell_sums: dict[int, float], n_max: int) -> float:
    """Extrapolated tail beyond the truncation box from the fitted shell decay."""
    pairs = [(r, v) for r, v in sorted(shell_sums.items()) if v > 0.0]
    if len(pairs) < 3:
        # finitely supported spectrum (e.g. a trigonometric polynomial)
        return 0.0 if not pairs or pairs[-1][0] < n_max else float("nan")
    upper = [p for p in pairs if p[0] >= pairs[-1][0] / 4]
    if len(upper) < 3:
        upper = pairs[-3:]
    fit = decay_fit(upper, window=(upper[0][0], upper[-1][0]))
    p = fit.exponent
    if p >= -1.0:
        return float("inf")
    r_last, v_last = upper[-1]
    level = v_last * (n_max / r_last) ** p
    return level * n_max / (-p - 1.0)


def _spectral_sum(spectrum: SpectrumTable, n_max: int | None, keep) -> VarianceEstimate:
    if spectrum.kind != "fourier":
        raise ValueError("variance sums take a Fourier spectrum table")
    if n_max is None:
        n_max = spectrum.n_max
    if spectrum.n_max is not None and n_max > spectrum.n_max:
        raise ValueError(f"spectrum covers |n| <= {spectrum.n_max} < requested {n_max}")
    total = 0.0
    shells: dict[int, float] = {}
    for index, mag2 in spectrum.entries.items():
        if all(i == 0 for i in index):
            continue
        radius = max(abs(i) for i in index)
        if radius > n_max or not keep(index):
            continue
        total += mag2
        shells[radius] = shells.get(radius, 0.0) + mag2
    return VarianceEstimate(value=total, tail_estimate=_power_law_tail(shells, n_max))


def rslr_variance_spectral(spectrum: SpectrumTable, gen: GeneratingVector,
                           n_max: int | None = None) -> VarianceEstimate:
    """Shifted-lattice estimator variance: sum of |c_n|^2 over the dual lattice.

    Sums every nonzero dual-lattice index inside the truncation box and
    reports a tail estimate extrapolated from the fitted shell decay.
    """
    return _spectral_sum(spectrum, n_max, lambda idx: _dual_member(idx, gen))


def mc_variance_spectral(spectrum: SpectrumTable, n_max: int | None = None) -> VarianceEstimate:
    """N-free Monte Carlo variance sum: all nonzero |c_n|^2 in the box.

    The caller divides by the sample count.
    """
    return _spectral_sum(spectrum, n_max, lambda idx: True)
