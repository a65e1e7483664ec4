"""Test integrands f = 1_Omega * g.

The smooth factor g(t) = (1 - 2M)^{s/2} exp(M ||Phi^{-1}(t)||^2) integrates
to exactly 1 over the unit cube for every M < 1/4, is unbounded at the cube
boundary for M > 0, and satisfies the boundary growth envelope with
per-coordinate exponents 2M (declared as 2M + eps). The region families
cover the four benchmark discontinuity types plus the full cube.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from . import lds

CLAMP_LO = 2.0 ** -53
CLAMP_HI = 1.0 - 2.0 ** -53

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# rational initial guess for the normal quantile (Acklam's coefficients),
# sharpened to full double precision by one Halley step below
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_ACK_SPLIT = 0.02425


def _poly(coeffs, x):
    out = np.full_like(x, coeffs[0])
    for c in coeffs[1:]:
        out = out * x + c
    return out


def _quantile_lower_half(p):
    """Phi^{-1}(p) for p in (0, 1/2], accurate to a few ulp."""
    x = np.empty_like(p)
    tail = p < _ACK_SPLIT
    if np.any(tail):
        q = np.sqrt(-2.0 * np.log(p[tail]))
        x[tail] = _poly(_ACK_C, q) / (_poly(_ACK_D, q) * q + 1.0)
    if np.any(~tail):
        q = p[~tail] - 0.5
        r = q * q
        x[~tail] = _poly(_ACK_A, r) * q / (_poly(_ACK_B, r) * r + 1.0)
    # Halley refinement against the complementary error function; x <= 0
    # here so 0.5*erfc(-x/sqrt(2)) evaluates without cancellation.
    err = 0.5 * erfc(-x / _SQRT2) - p
    r = err * _SQRT_2PI * np.exp(0.5 * x * x)
    return x - r / (1.0 + 0.5 * x * r)


def inv_norm_cdf(u):
    """Inverse standard normal CDF, relative accuracy ~1e-15 (contract 1e-9).

    Accepts scalars or arrays; every entry must lie strictly inside (0, 1).
    """
    arr = np.asarray(u, dtype=np.float64)
    if arr.size and (np.min(arr) <= 0.0 or np.max(arr) >= 1.0):
        raise ValueError("inverse normal CDF requires arguments inside (0, 1)")
    lower = np.minimum(arr, 1.0 - arr)  # exact for arr in [0.5, 1]
    x = _quantile_lower_half(np.atleast_1d(lower))
    x = np.where(np.atleast_1d(arr) > 0.5, -x, x)
    if arr.ndim == 0:
        return float(x[0])
    return x.reshape(arr.shape)


def eval_g(t, M: float) -> np.ndarray | float:
    """Gaussian-exponential factor (1-2M)^{s/2} exp(M sum_j Phi^{-1}(t_j)^2).

    ``t`` is one point (shape (s,)) or a batch (shape (n, s)); coordinates
    are clamped into [2^-53, 1 - 2^-53] before the quantile transform.
    """
    if not M < 0.25:
        raise ValueError(f"M = {M} violates M < 1/4")
    t = np.asarray(t, dtype=np.float64)
    single = t.ndim == 1
    pts = np.atleast_2d(t)
    s = pts.shape[-1]
    x = inv_norm_cdf(np.clip(pts, CLAMP_LO, CLAMP_HI))
    out = (1.0 - 2.0 * M) ** (s / 2.0) * np.exp(M * np.sum(x * x, axis=-1))
    return float(out[0]) if single else out


def eval_g_1d(t, M: float):
    """One-coordinate factor (1-2M)^{1/2} exp(M Phi^{-1}(t)^2)."""
    t = np.clip(np.asarray(t, dtype=np.float64), CLAMP_LO, CLAMP_HI)
    x = inv_norm_cdf(t)
    return np.sqrt(1.0 - 2.0 * M) * np.exp(M * np.asarray(x) ** 2)


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FullCube:
    """Omega = [0,1)^s: no discontinuity."""


@dataclass(frozen=True)
class Hypersphere:
    """Omega = {t : sum_j t_j^2 <= radius^2} (boundary included)."""

    radius: float = 1.0


@dataclass(frozen=True)
class Halfspace:
    """Omega = {t : coeffs . t <= bound} (boundary included)."""

    coeffs: tuple[float, ...]
    bound: float = 1.0


@dataclass(frozen=True)
class AxisBox:
    """Half-open box prod_j [lower_j, upper_j)."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("box corner dimensions differ")
        for a, b in zip(self.lower, self.upper):
            if not 0.0 <= a < b <= 1.0:
                raise ValueError(f"box bounds [{a}, {b}) invalid")


@dataclass(frozen=True)
class PartialAxis:
    """Box constraints on ``box_axes`` times a complement-of-ball on the rest.

    Omega = {t : lower_k <= t_{box_axes[k]} < upper_k for all k,
                 sum_{j not in box_axes} t_j^2 >= radius^2}.
    With no remaining axes the second constraint is vacuous and the region
    degenerates to the box alone.
    """

    box_axes: tuple[int, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    radius: float = 1.0


Region = FullCube | Hypersphere | Halfspace | AxisBox | PartialAxis


def region_indicator(region: Region, t) -> np.ndarray | int:
    """1 where t lies in the region, 0 elsewhere; vectorized over points."""
    t = np.asarray(t, dtype=np.float64)
    single = t.ndim == 1
    pts = np.atleast_2d(t)
    s = pts.shape[-1]
    if isinstance(region, FullCube):
        inside = np.ones(pts.shape[0], dtype=bool)
    elif isinstance(region, Hypersphere):
        inside = np.sum(pts * pts, axis=-1) <= region.radius ** 2
    elif isinstance(region, Halfspace):
        if len(region.coeffs) != s:
            raise ValueError(f"halfspace has {len(region.coeffs)} coefficients, points dim {s}")
        inside = pts @ np.asarray(region.coeffs) <= region.bound
    elif isinstance(region, AxisBox):
        if len(region.lower) != s:
            raise ValueError(f"box dim {len(region.lower)} but points dim {s}")
        lo = np.asarray(region.lower)
        hi = np.asarray(region.upper)
        inside = np.all((pts >= lo) & (pts < hi), axis=-1)
    elif isinstance(region, PartialAxis):
        axes = list(region.box_axes)
        if axes and max(axes) >= s:
            raise ValueError(f"box axis {max(axes)} out of range for dim {s}")
        lo = np.asarray(region.lower)
        hi = np.asarray(region.upper)
        inside = np.all((pts[:, axes] >= lo) & (pts[:, axes] < hi), axis=-1)
        rest = [j for j in range(s) if j not in set(axes)]
        if rest:
            inside &= np.sum(pts[:, rest] ** 2, axis=-1) >= region.radius ** 2
    else:
        raise TypeError(f"unsupported region {type(region).__name__}")
    out = inside.astype(np.int64)
    return int(out[0]) if single else out


def example_region(name: str, dim: int) -> Region:
    """The four benchmark regions plus the smooth full cube."""
    if name == "smooth":
        return FullCube()
    if name == "ex1":
        return Hypersphere(1.0)
    if name == "ex2":
        return Halfspace(coeffs=(1.0,) * dim, bound=1.0)
    if name == "ex3":
        return AxisBox(lower=(0.5,) * dim, upper=(1.0,) * dim)
    if name == "ex4":
        if dim < 2:
            raise ValueError("ex4 needs dim >= 2")
        return PartialAxis(box_axes=(0, 1), lower=(0.5, 0.5), upper=(1.0, 1.0), radius=1.0)
    raise ValueError(f"unknown example {name!r}")


# ---------------------------------------------------------------------------
# Integrand specs
# ---------------------------------------------------------------------------

DEFAULT_GROWTH_EPS = 0.01


@dataclass(frozen=True)
class GrowthParams:
    """Growth metadata: M of the smooth factor plus declared exponents A_j."""

    M: float
    A: tuple[float, ...]

    def __post_init__(self):
        if not self.M < 0.25:
            raise ValueError(f"M = {self.M} violates M < 1/4")
        if self.A and not max(self.A) < 0.5:
            raise ValueError(f"A* = {max(self.A)} violates A* < 1/2")

    @property
    def a_star(self) -> float:
        return max(self.A)

    @classmethod
    def for_m(cls, M: float, dim: int, eps: float = DEFAULT_GROWTH_EPS) -> "GrowthParams":
        return cls(M=M, A=(2.0 * M + eps,) * dim)


@dataclass(frozen=True)
class IntegrandSpec:
    growth: GrowthParams
    region: Region
    dim: int
    reference: tuple[float, str] | None = None

    def canonical(self) -> str:
        return f"{self.region!r}|dim={self.dim}|M={self.growth.M!r}"

    def spec_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def example_spec(name: str, dim: int, M: float,
                 eps: float = DEFAULT_GROWTH_EPS) -> IntegrandSpec:
    return IntegrandSpec(growth=GrowthParams.for_m(M, dim, eps),
                         region=example_region(name, dim), dim=dim)


def eval_integrand(spec: IntegrandSpec, t) -> np.ndarray | float:
    """1_Omega(t) * g(t); exactly zero outside the region."""
    t = np.asarray(t, dtype=np.float64)
    if t.shape[-1] != spec.dim:
        raise ValueError(f"points dim {t.shape[-1]} but spec dim {spec.dim}")
    single = t.ndim == 1
    pts = np.atleast_2d(t)
    ind = region_indicator(spec.region, pts)
    out = np.zeros(pts.shape[0])
    hit = np.asarray(ind, dtype=bool)
    if np.any(hit):
        out[hit] = eval_g(pts[hit], spec.growth.M)
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# Reference integrals
# ---------------------------------------------------------------------------

_T9_975 = 2.2621571627409915  # Student-t 0.975 quantile, 9 degrees of freedom

DEFAULT_CACHE = os.path.join(os.path.dirname(__file__), "data", "reference_cache.csv")


@dataclass(frozen=True)
class Reference:
    value: float
    half_width: float
    method: str  # "analytic" or "oracle"


def _read_cache(path):
    entries = {}
    if not path or not os.path.exists(path):
        return entries
    with open(path, newline="") as fh:
        for row in csv.reader(r for r in fh if not r.startswith("#")):
            if not row or row[0] == "spec_hash":
                continue
            entries[row[0]] = Reference(float(row[1]), float(row[2]), row[3])
    return entries


def _append_cache(path, spec_hash, ref):
    exists = os.path.exists(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if not exists:
            writer.writerow(["spec_hash", "value", "half_width", "method"])
        writer.writerow([spec_hash, repr(ref.value), repr(ref.half_width), ref.method])


def _box_reference(spec: IntegrandSpec) -> Reference:
    region = spec.region
    M = spec.growth.M
    value = 1.0
    err = 0.0
    exact = True
    for a, b in zip(region.lower, region.upper):
        if (a, b) == (0.5, 1.0):
            value *= 0.5  # reflection symmetry of Phi^{-1}(t)^2 about t = 1/2
            continue
        exact = False
        mass, mass_err = quad(lambda t: float(eval_g_1d(t, M)), a, b,
                              epsabs=1e-13, epsrel=1e-13, limit=200)
        value *= mass
        err += mass_err / max(mass, 1e-300)
    return Reference(value=value, half_width=0.0 if exact else abs(value) * err,
                     method="analytic")


_ORACLE_SEED = 0x5EEDCAFE


def _oracle_reference(spec: IntegrandSpec, m: int, replicates: int,
                      params: lds.SobolParams | None) -> Reference:
    """Digitally shifted Sobol' estimate at 2^m points, CI over replicates."""
    params = params or lds.default_sobol_params()
    estimates = np.empty(replicates)
    chunk = 1 << 20
    for r in range(replicates):
        shift = lds.digital_shift_only(_ORACLE_SEED, r, spec.dim, params.max_bits)
        ints = lds.sobol_integers(params, m, spec.dim, shift)
        total = 0.0
        for start in range(0, len(ints), chunk):
            block = ints[start:start + chunk].astype(np.float64) * 2.0 ** -params.max_bits
            total += float(np.sum(eval_integrand(spec, block)))
        estimates[r] = total / len(ints)
    value = float(np.mean(estimates))
    half_width = _T9_975 * float(np.std(estimates, ddof=1)) / math.sqrt(replicates)
    return Reference(value=value, half_width=half_width, method="oracle")


def reference_integral(spec: IntegrandSpec, cache_path: str | None = DEFAULT_CACHE,
                       update_cache: bool = False, oracle_m: int = 24,
                       oracle_replicates: int = 10,
                       sobol_params: lds.SobolParams | None = None) -> Reference:
    """Reference value of the integral of 1_Omega * g, with an error bar.

    Analytic where available (full cube integrates to exactly 1; axis boxes
    factor into per-coordinate masses); otherwise a high-budget digitally
    shifted Sobol' oracle whose half-width is reported alongside the value.
    Oracle results are memoized in a CSV cache keyed by spec hash.
    """
    region = spec.region
    if isinstance(region, FullCube):
        return Reference(1.0, 0.0, "analytic")
    if isinstance(region, AxisBox):
        return _box_reference(spec)
    if isinstance(region, PartialAxis) and len(region.box_axes) == spec.dim:
        degenerate = replace(spec, region=AxisBox(region.lower, region.upper))
        return _box_reference(degenerate)
    if not isinstance(region, (Hypersphere, Halfspace, PartialAxis)):
        raise ValueError(f"unsupported region {type(region).__name__}")
    key = spec.spec_hash()
    cached = _read_cache(cache_path).get(key)
    if cached is not None:
        return cached
    ref = _oracle_reference(spec, oracle_m, oracle_replicates, sobol_params)
    if update_cache and cache_path:
        _append_cache(cache_path, key, ref)
    return ref



# ---------------------------------------------------------------------------
# Boundary-growth envelope check
# ---------------------------------------------------------------------------

@dataclass
class EnvelopeProbe:
    subset: tuple[int, ...]
    face: str
    phi: np.ndarray
    ratio: np.ndarray
    trend_slope: float


@dataclass
class EnvelopeReport:
    declared_A: tuple[float, ...]
    max_ratio: float
    min_trend_slope: float
    passed: bool
    probes: list[EnvelopeProbe]


_TREND_TOL = -0.05  # log-log slope below this flags ratio growth toward the face


def _mixed_derivative(fn, point, subset, steps):
    """Central finite difference of the mixed first derivative on ``subset``."""
    total = 0.0
    k = len(subset)
    for mask in range(1 << k):
        t = point.copy()
        sign = 1.0
        for bit, axis in enumerate(subset):
            if (mask >> bit) & 1:
                t[axis] += steps[bit]
            else:
                t[axis] -= steps[bit]
                sign = -sign
        total += sign * fn(t)
    return total / np.prod(2.0 * np.asarray(steps))


def growth_envelope_check(spec: IntegrandSpec, probe_count: int = 9,
                          phi_min: float = 1e-8, phi_max: float = 1e-2) -> EnvelopeReport:
    """Probe |mixed derivative of g| against the declared growth envelope.

    Applies to the smooth factor only (FullCube region). For each coordinate
    subset and each face the probe walks phi(t) down a geometric grid; the
    report records the envelope-normalized ratio and its log-log trend over
    the smallest probed decade. Growth (trend slope below -0.05) fails.
    """
    if not isinstance(spec.region, FullCube):
        raise ValueError("envelope check applies to the smooth factor (FullCube spec)")
    if phi_min < 1e-9:
        raise ValueError("probes below phi = 1e-9 cannot be differenced stably")
    M = spec.growth.M
    A = spec.growth.A
    s = spec.dim
    g = lambda t: eval_g(t, M)
    subsets = [(j,) for j in range(s)]
    if s >= 2:
        subsets.append(tuple(range(s)))
    subsets.extend((i, j) for i in range(s) for j in range(i + 1, s) if s > 2)
    phis = np.geomspace(phi_max, phi_min, probe_count)
    probes = []
    for subset in subsets:
        for face, at_face in (("low", lambda d: d), ("high", lambda d: 1.0 - d)):
            ratios = np.empty_like(phis)
            for idx, delta in enumerate(phis):
                point = np.full(s, 0.5)
                for axis in subset:
                    point[axis] = at_face(delta)
                steps = [delta / 8.0] * len(subset)
                deriv = _mixed_derivative(g, point, subset, steps)
                envelope = 1.0
                for j in range(s):
                    phi_j = min(point[j], 1.0 - point[j])
                    envelope *= phi_j ** (-(1.0 if j in subset else 0.0) - A[j])
                ratios[idx] = abs(deriv) / envelope
            decade = phis <= phis[-1] * 10.0
            logphi = np.log(phis[decade])
            logr = np.log(np.maximum(ratios[decade], 1e-300))
            slope = float(np.polyfit(logphi, logr, 1)[0]) if decade.sum() >= 2 else 0.0
            probes.append(EnvelopeProbe(subset=subset, face=face, phi=phis,
                                        ratio=ratios, trend_slope=slope))
    max_ratio = max(float(np.max(p.ratio)) for p in probes)
    slopes = [p.trend_slope for p in probes]
    min_slope = min(slopes)
    return EnvelopeReport(declared_A=A, max_ratio=max_ratio,
                          min_trend_slope=min_slope,
                          passed=min_slope >= _TREND_TOL, probes=probes)
