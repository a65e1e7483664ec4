"""Integrand factor, regions, references, and the growth-envelope check."""

import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from rqmclab import integrands as ig

mpmath.mp.dps = 40


def quantile_oracle(u: float) -> float:
    """Bisection against the arbitrary-precision normal CDF (series erfc)."""
    lo, hi = mpmath.mpf(-12), mpmath.mpf(12)
    target = mpmath.mpf(u)  # exact binary value; repr would shift deep-tail targets
    for _ in range(120):
        mid = (lo + hi) / 2
        if mpmath.ncdf(mid) < target:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


# ---------------------------------------------------------------------------
# Inverse normal CDF
# ---------------------------------------------------------------------------

def test_quantile_center():
    assert ig.inv_norm_cdf(0.5) == 0.0


@pytest.mark.parametrize("u,expected,tol", [
    (0.841344746068543, 1.0, 1e-9),
    (0.975, 1.959963985, 1e-8),
])
def test_quantile_spec_values(u, expected, tol):
    assert abs(ig.inv_norm_cdf(u) - expected) <= tol
    assert abs(quantile_oracle(u) - expected) <= tol  # oracle agrees with itself


def test_quantile_against_bisection_oracle():
    grid = [1e-12, 1e-8, 1e-4, 0.02, 0.3, 0.5, 0.7, 0.97, 1 - 1e-6, 1 - 1e-12]
    for u in grid:
        exact = quantile_oracle(u)
        got = ig.inv_norm_cdf(u)
        assert abs(got - exact) <= 1e-9 * max(1.0, abs(exact)), u


def test_quantile_round_trip():
    for u in np.geomspace(1e-12, 0.5, 30).tolist() + (1 - np.geomspace(1e-12, 0.5, 30)).tolist():
        x = ig.inv_norm_cdf(float(u))
        assert abs(float(mpmath.ncdf(x)) - u) <= 1e-9


def test_quantile_rejects_out_of_range():
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            ig.inv_norm_cdf(bad)


def test_quantile_vectorized_matches_scalar():
    u = np.array([0.1, 0.5, 0.9])
    vec = ig.inv_norm_cdf(u)
    assert vec.shape == (3,)
    for k in range(3):
        assert vec[k] == ig.inv_norm_cdf(float(u[k]))


# ---------------------------------------------------------------------------
# Gaussian-exponential factor g
# ---------------------------------------------------------------------------

def test_g_at_center():
    assert ig.eval_g([0.5, 0.5], 0.1) == pytest.approx(0.8, abs=1e-15)
    assert ig.eval_g([0.5, 0.5, 0.5], 0.0) == 1.0


def test_g_reflection_symmetry():
    rng = np.random.default_rng(8)
    pts = rng.random((64, 3))
    a = ig.eval_g(pts, 0.2)
    b = ig.eval_g(1.0 - pts, 0.2)
    assert np.allclose(a, b, rtol=1e-14, atol=0)


def test_g_positive_and_clamped_at_edges():
    vals = ig.eval_g(np.array([[0.0, 1.0], [1e-300, 0.5]]), 0.2)
    assert np.all(np.isfinite(vals)) and np.all(vals > 0)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("M", [0.0, 0.1, 0.2])
def test_g_unit_normalization_1d(M):
    val, _ = quad(lambda t: float(ig.eval_g_1d(t, M)), 0, 1,
                  epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(val - 1.0) <= 1e-10


def test_g_unit_normalization_2d():
    # per-axis factorization is exact, so the 2-D integral is the square
    val, _ = quad(lambda t: float(ig.eval_g_1d(t, 0.1)), 0, 1,
                  epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(val * val - 1.0) <= 1e-6


def test_g_rejects_large_m():
    with pytest.raises(ValueError):
        ig.eval_g([0.5], 0.25)


# ---------------------------------------------------------------------------
# Regions and the composed integrand
# ---------------------------------------------------------------------------

def test_region_examples():
    assert ig.region_indicator(ig.Hypersphere(1.0), [0.6, 0.8]) == 1  # boundary in
    assert ig.region_indicator(ig.Halfspace((1.0, 1.0), 1.0), [0.7, 0.6]) == 0
    assert ig.region_indicator(ig.example_region("ex3", 2), [0.5, 0.9]) == 1
    assert ig.region_indicator(ig.example_region("ex3", 2), [0.499, 0.9]) == 0


def test_region_permutation_symmetry():
    rng = np.random.default_rng(5)
    pts = rng.random((128, 3))
    for region in (ig.Hypersphere(1.0), ig.Halfspace((1.0, 1.0, 1.0), 1.0)):
        base = ig.region_indicator(region, pts)
        perm = ig.region_indicator(region, pts[:, [2, 0, 1]])
        assert np.array_equal(base, perm)


def test_region_ex4_shape():
    region = ig.example_region("ex4", 4)
    # box constraint on the first two axes, complement-of-ball on the rest
    assert ig.region_indicator(region, [0.6, 0.7, 0.9, 0.9]) == 1
    assert ig.region_indicator(region, [0.6, 0.7, 0.1, 0.2]) == 0
    assert ig.region_indicator(region, [0.4, 0.7, 0.9, 0.9]) == 0


def test_region_dimension_mismatch():
    with pytest.raises(ValueError):
        ig.region_indicator(ig.Halfspace((1.0, 1.0), 1.0), [0.1, 0.2, 0.3])


def test_integrand_composition():
    spec = ig.example_spec("smooth", 2, 0.1)
    pts = np.array([[0.3, 0.4]])
    assert ig.eval_integrand(spec, pts)[0] == ig.eval_g(pts, 0.1)[0]
    spec1 = ig.example_spec("ex1", 2, 0.1)
    assert ig.eval_integrand(spec1, [0.9, 0.9]) == 0.0


def test_integrand_ex3_value():
    # compose the two oracle-checked primitives at t = (0.75, 0.75)
    x = quantile_oracle(0.75)
    expected = 0.8 * math.exp(0.1 * 2 * x * x)
    got = ig.eval_integrand(ig.example_spec("ex3", 2, 0.1), [0.75, 0.75])
    assert got == pytest.approx(expected, rel=1e-9)


# ---------------------------------------------------------------------------
# Reference integrals
# ---------------------------------------------------------------------------

def test_reference_full_cube():
    spec = ig.example_spec("smooth", 3, 0.15)
    ref = ig.reference_integral(spec, cache_path=None)
    assert (ref.value, ref.half_width, ref.method) == (1.0, 0.0, "analytic")


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_reference_ex3_exact(dim):
    ref = ig.reference_integral(ig.example_spec("ex3", dim, 0.1), cache_path=None)
    assert ref.value == 2.0 ** -dim
    assert ref.half_width == 0.0


def test_reference_general_box_against_gaussian_identity():
    # mass of [a, b] under g dt equals Phi(c Phi^-1(b)) - Phi(c Phi^-1(a)),
    # c = sqrt(1 - 2M): an independent closed form via mpmath
    M = 0.1
    spec = ig.IntegrandSpec(growth=ig.GrowthParams.for_m(M, 2),
                            region=ig.AxisBox((0.2, 0.2), (0.7, 0.7)), dim=2)
    ref = ig.reference_integral(spec, cache_path=None)
    c = mpmath.sqrt(1 - 2 * M)
    mass = mpmath.ncdf(c * quantile_oracle(0.7)) - mpmath.ncdf(c * quantile_oracle(0.2))
    assert ref.value == pytest.approx(float(mass) ** 2, rel=1e-9)


def test_reference_ex4_degenerates_to_box_when_no_sphere_axes():
    ref = ig.reference_integral(ig.example_spec("ex4", 2, 0.1), cache_path=None)
    assert ref.value == 0.25


def test_reference_oracle_consistency_small_budget():
    # quarter disk at M=0: true value pi/4; a small-budget oracle must agree
    spec = ig.IntegrandSpec(growth=ig.GrowthParams.for_m(0.0, 2),
                            region=ig.Hypersphere(1.0), dim=2)
    ref = ig.reference_integral(spec, cache_path=None, oracle_m=16, oracle_replicates=10)
    assert ref.method == "oracle"
    assert abs(ref.value - math.pi / 4) <= max(5 * ref.half_width, 1e-4)


def test_reference_cache_round_trip(tmp_path):
    cache = str(tmp_path / "refs.csv")
    spec = ig.IntegrandSpec(growth=ig.GrowthParams.for_m(0.0, 2),
                            region=ig.Hypersphere(0.8), dim=2)
    first = ig.reference_integral(spec, cache_path=cache, update_cache=True,
                                  oracle_m=12, oracle_replicates=4)
    again = ig.reference_integral(spec, cache_path=cache, oracle_m=20, oracle_replicates=10)
    assert again == first  # cache hit, no recompute at the bigger budget


def test_packaged_cache_has_benchmark_references():
    # half-width bounds frozen from the 2^24-point, 10-replicate oracle runs
    for name, dim, hw_bound in (("ex1", 2, 2e-6), ("ex2", 2, 1e-6), ("ex2", 3, 1e-5)):
        ref = ig.reference_integral(ig.example_spec(name, dim, 0.1))
        assert ref.method == "oracle"
        assert ref.half_width <= hw_bound


def test_packaged_cache_ex2_2d_agrees_with_symmetry_value():
    # t -> 1 - t maps the half-space onto its complement and leaves g
    # invariant, so the true integral at s = 2 is exactly 1/2
    ref = ig.reference_integral(ig.example_spec("ex2", 2, 0.1))
    assert abs(ref.value - 0.5) <= 3 * ref.half_width


# ---------------------------------------------------------------------------
# Growth-envelope check
# ---------------------------------------------------------------------------

def test_envelope_constant_function():
    spec = ig.IntegrandSpec(growth=ig.GrowthParams(M=0.0, A=(0.01,)),
                            region=ig.FullCube(), dim=1)
    report = ig.growth_envelope_check(spec)
    assert report.passed
    assert report.max_ratio == 0.0


def test_envelope_correct_declaration_passes():
    spec = ig.IntegrandSpec(growth=ig.GrowthParams(M=0.1, A=(0.21,)),
                            region=ig.FullCube(), dim=1)
    report = ig.growth_envelope_check(spec)
    assert report.passed
    assert report.min_trend_slope > -0.05


def test_envelope_underdeclared_exponent_fails():
    spec = ig.IntegrandSpec(growth=ig.GrowthParams(M=0.1, A=(0.05,)),
                            region=ig.FullCube(), dim=1)
    report = ig.growth_envelope_check(spec)
    assert not report.passed
    # ratio grows monotonically toward the face
    probe = report.probes[0]
    assert np.all(np.diff(probe.ratio) > 0)


def test_envelope_multidimensional():
    report = ig.growth_envelope_check(ig.example_spec("smooth", 2, 0.1))
    assert report.passed


def test_envelope_rejects_unstable_probes():
    spec = ig.example_spec("smooth", 1, 0.1)
    with pytest.raises(ValueError):
        ig.growth_envelope_check(spec, phi_min=1e-12)
    with pytest.raises(ValueError):
        ig.growth_envelope_check(ig.example_spec("ex1", 2, 0.1))
