"""Log-log decay-rate fitting for coefficient and error tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    stderr: float
    log_factor: bool
    log_exponent: float | None
    window: tuple[float, float]
    n_points: int


def decay_fit(pairs, window: tuple[float, float] | None = None,
              drop_below: float = 16.0, log_improvement: float = 0.20) -> DecayFit:
    """Least squares of log2(value) on log2(size).

    ``pairs`` is an iterable of (size, value) with positive values. Sizes
    below ``drop_below`` are excluded unless an explicit ``window``
    (inclusive size bounds) is given; the smallest indices sit in the
    pre-asymptotic regime and would bias the fit. A second model with a
    log2(log2 size) correction term is also fitted; ``log_factor`` flags the
    case where it shrinks the residual sum of squares by more than
    ``log_improvement`` (the n^p log n signature).
    """
    data = np.asarray([(float(a), float(b)) for a, b in pairs], dtype=np.float64)
    if data.size == 0:
        raise ValueError("empty decay table")
    sizes, values = data[:, 0], data[:, 1]
    if np.any(values <= 0.0):
        raise ValueError("decay fit requires positive values")
    if window is not None:
        keep = (sizes >= window[0]) & (sizes <= window[1])
    else:
        keep = sizes >= drop_below
        window = (drop_below, float(np.max(sizes)) if sizes.size else drop_below)
    sizes, values = sizes[keep], values[keep]
    if len(sizes) < 3:
        raise ValueError(f"need >= 3 points inside the fit window, have {len(sizes)}")
    x = np.log2(sizes)
    y = np.log2(values)
    design = np.column_stack([np.ones_like(x), x])
    coef, res, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    ssr = float(np.sum((y - fitted) ** 2))
    dof = len(x) - 2
    if dof > 0 and ssr > 0:
        sigma2 = ssr / dof
        cov = sigma2 * np.linalg.inv(design.T @ design)
        stderr = float(np.sqrt(cov[1, 1]))
    else:
        stderr = 0.0
    log_exponent = None
    log_flag = False
    if np.all(x > 0) and ssr >= 0:
        design_log = np.column_stack([np.ones_like(x), x, np.log2(x)])
        coef_log, *_ = np.linalg.lstsq(design_log, y, rcond=None)
        ssr_log = float(np.sum((y - design_log @ coef_log) ** 2))
        if ssr > 0 and ssr_log < (1.0 - log_improvement) * ssr:
            log_flag = True
            log_exponent = float(coef_log[1])
    return DecayFit(exponent=float(coef[1]), stderr=stderr, log_factor=log_flag,
                    log_exponent=log_exponent, window=(float(window[0]), float(window[1])),
                    n_points=len(x))
