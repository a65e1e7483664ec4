"""Replicated RQMC variance-convergence experiments.

A run draws R independent randomizations per grid size N, records squared
errors against the reference integral, and summarizes them as percentiles
plus a fitted convergence slope. Replicate randomness is keyed by
(seed, replicate), so parallel and serial execution produce bit-identical
records in (N, replicate) order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import integrands, lds
from .errors import PrecisionError
from .spectral import catalog_provenance, catalog_vector, decay_fit

_PILOT_STREAM_BASE = 1 << 32
_PILOT_REPLICATES = 4
PERCENTILES = (1, 25, 50, 75, 99)


@dataclass(frozen=True)
class ExperimentConfig:
    sequence: str  # "rslr" | "sobol"
    n_grid: tuple[int, ...]
    replicates: int
    integrand: integrands.IntegrandSpec
    seed: int
    vectors: dict[int, lds.GeneratingVector] | None = None
    sobol_params: lds.SobolParams | None = None
    fit_window: tuple[float, float] | None = None

    def __post_init__(self):
        if self.sequence not in ("rslr", "sobol"):
            raise ValueError(f"unknown sequence {self.sequence!r}")
        if self.replicates < 2:
            raise ValueError("need at least 2 replicates")
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("N grid must be non-empty and strictly increasing")
        if self.sequence == "sobol":
            for n in self.n_grid:
                if n & (n - 1):
                    raise ValueError(f"Sobol' grid sizes must be powers of two, got {n}")

    def generating_vector(self, n: int) -> lds.GeneratingVector:
        if self.vectors and n in self.vectors:
            return self.vectors[n]
        return catalog_vector(n, self.integrand.dim)

    def vector_provenance(self, n: int) -> str:
        if self.vectors and n in self.vectors:
            return f"user z={self.vectors[n].z}"
        return f"catalog z={catalog_vector(n, self.integrand.dim).z} ({catalog_provenance()})"


@dataclass(frozen=True)
class ErrorRecord:
    sequence: str
    n: int
    replicate: int
    estimate: float
    sq_error: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reference: integrands.Reference
    records: list[ErrorRecord]
    provenance: dict[str, str] = field(default_factory=dict)


def rqmc_estimate(config: ExperimentConfig, n: int, replicate_id: int) -> float:
    """Sample mean of the integrand over the randomized point set of size n."""
    spec = config.integrand
    if config.sequence == "rslr":
        gen = config.generating_vector(n)
        shift = lds.random_shift(config.seed, replicate_id, spec.dim)
        pts = lds.lattice_points(gen, shift)
    else:
        m = n.bit_length() - 1
        params = config.sobol_params or lds.default_sobol_params()
        scramble = lds.linear_scramble(config.seed, replicate_id, spec.dim, params.max_bits)
        pts = lds.sobol_points(params, m, spec.dim, scramble)
    return float(np.mean(integrands.eval_integrand(spec, pts)))


def _pilot_rmse(config: ExperimentConfig) -> float:
    """Spread of a few held-out replicates at the largest N; no reference needed."""
    n = config.n_grid[-1]
    pilots = [rqmc_estimate(config, n, _PILOT_STREAM_BASE + k)
              for k in range(_PILOT_REPLICATES)]
    return float(np.std(pilots, ddof=1))


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   reference: integrands.Reference | None = None,
                   cache_path: str | None = integrands.DEFAULT_CACHE,
                   update_cache: bool = False) -> ExperimentResult:
    """All (N, replicate) records, in (N, replicate) order regardless of threads.

    Refuses to run when the reference half-width exceeds one tenth of the
    pilot-estimated RMSE at the largest N; squared errors would then measure
    the reference, not the estimator.
    """
    if reference is None:
        reference = integrands.reference_integral(config.integrand, cache_path,
                                                  update_cache=update_cache)
    if reference.half_width > 0.0:
        rmse = _pilot_rmse(config)
        if reference.half_width > 0.1 * rmse:
            raise PrecisionError(
                f"reference half-width {reference.half_width:.3e} exceeds 10% of the "
                f"pilot RMSE {rmse:.3e} at N={config.n_grid[-1]}; refusing to attribute "
                f"reference error to the estimator")
    tasks = [(n, r) for n in config.n_grid for r in range(config.replicates)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            estimates = list(pool.map(lambda t: rqmc_estimate(config, *t), tasks))
    else:
        estimates = [rqmc_estimate(config, *t) for t in tasks]
    records = [ErrorRecord(config.sequence, n, r, est, (est - reference.value) ** 2)
               for (n, r), est in zip(tasks, estimates)]
    provenance = {"seed": str(config.seed), "sequence": config.sequence,
                  "integrand": config.integrand.canonical(),
                  "reference": f"{reference.value!r} (method={reference.method}, "
                               f"half_width={reference.half_width!r})"}
    if config.sequence == "rslr":
        for n in config.n_grid:
            provenance[f"vector_N{n}"] = config.vector_provenance(n)
    else:
        provenance["direction_numbers"] = "embedded table dims 1-16" \
            if config.sobol_params is None else "user table"
    return ExperimentResult(config=config, reference=reference,
                            records=records, provenance=provenance)


@dataclass(frozen=True)
class SummaryRow:
    n: int
    mse: float
    var: float
    percentiles: tuple[float, ...]  # squared-error percentiles 1,25,50,75,99


@dataclass
class SummaryStats:
    rows: list[SummaryRow]
    slope: float
    slope_stderr: float
    slope_median: float

    def row_for(self, n: int) -> SummaryRow:
        return next(row for row in self.rows if row.n == n)


def summarize(records: list[ErrorRecord],
              fit_window: tuple[float, float] | None = None) -> SummaryStats:
    """Per-N moments/percentiles and the fitted mean-squared-error slope.

    Percentiles interpolate linearly between order statistics; the variance
    is the unbiased sample variance of the estimates. The slope fit needs at
    least three grid sizes, else it is reported as NaN. A median-based slope
    accompanies the MSE slope as a tail-robust cross-check.
    """
    if not records:
        raise ValueError("no records to summarize")
    by_n: dict[int, list[ErrorRecord]] = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec)
    rows = []
    for n in sorted(by_n):
        group = by_n[n]
        if len(group) < 2:
            raise ValueError(f"need >= 2 replicates per N, N={n} has {len(group)}")
        sq = np.array([r.sq_error for r in group])
        est = np.array([r.estimate for r in group])
        rows.append(SummaryRow(
            n=n, mse=float(np.mean(sq)), var=float(np.var(est, ddof=1)),
            percentiles=tuple(float(np.percentile(sq, p, method="linear"))
                              for p in PERCENTILES)))
    slope = slope_err = slope_med = float("nan")
    window = fit_window or (min(by_n), max(by_n))
    positive = [(row.n, row.mse) for row in rows if row.mse > 0]
    if len([1 for n, _ in positive if window[0] <= n <= window[1]]) >= 3:
        fit = decay_fit(positive, window=window)
        slope, slope_err = fit.exponent, fit.stderr
        med = [(row.n, row.percentiles[2]) for row in rows if row.percentiles[2] > 0]
        if len([1 for n, _ in med if window[0] <= n <= window[1]]) >= 3:
            slope_med = decay_fit(med, window=window).exponent
    return SummaryStats(rows=rows, slope=slope, slope_stderr=slope_err,
                        slope_median=slope_med)
