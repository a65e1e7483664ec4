"""Component-by-component construction of rank-1 lattice generating vectors.

Greedy minimization of the squared shift-invariant worst-case error in a
weighted Korobov space with product weights,

    e^2(z) = -1 + (1/N) sum_i prod_j [1 + gamma_j omega_alpha({i z_j / N})],

where omega_alpha is the Bernoulli-polynomial kernel of smoothness alpha.
Candidates are the residues coprime to N; z and N - z give identical
criteria, so only the lower half is scanned and ties resolve to the
smallest component.
"""

from __future__ import annotations

import math

import numpy as np

from ..lds import GeneratingVector
from .. import _tables

_TIE_REL = 1e-9
_CHUNK_ENTRIES = 1 << 23


def korobov_kernel(x: np.ndarray, alpha: int) -> np.ndarray:
    """sum_{n != 0} |n|^{-2 alpha} e^{2 pi i n x} via Bernoulli polynomials."""
    x = np.asarray(x, dtype=np.float64)
    if alpha == 1:
        return 2.0 * math.pi ** 2 * (x * x - x + 1.0 / 6.0)
    if alpha == 2:
        b4 = x ** 4 - 2.0 * x ** 3 + x * x - 1.0 / 30.0
        return -(2.0 * math.pi ** 4 / 3.0) * b4
    raise ValueError("alpha must be 1 or 2")


def default_weights(s: int) -> tuple[float, ...]:
    return tuple(1.0 / (j * j) for j in range(1, s + 1))


def cbc_construct(N: int, s: int, weights=None, alpha: int = 2) -> GeneratingVector:
    """Greedy CBC minimizer of the worst-case error criterion.

    Scans every z_j coprime to N (via the z ~ N - z symmetry) and breaks
    criterion ties toward the smallest z_j; scores equal up to a 1e-9
    relative tolerance count as tied, which absorbs summation-order noise
    between mathematically identical candidates.
    """
    if N < 2:
        raise ValueError("CBC construction needs N >= 2")
    if s < 1:
        raise ValueError("dimension must be >= 1")
    gamma = tuple(weights) if weights is not None else default_weights(s)
    if len(gamma) < s:
        raise ValueError(f"{len(gamma)} weights for dimension {s}")
    if any(g <= 0 for g in gamma):
        raise ValueError("weights must be positive")
    kernel = korobov_kernel(np.arange(N) / N, alpha)
    candidates = np.array([z for z in range(1, N // 2 + 1)
                           if math.gcd(z, N) == 1], dtype=np.int64)
    i = np.arange(N, dtype=np.int64)
    prod = np.ones(N, dtype=np.float64)
    zs = []
    chunk = max(1, _CHUNK_ENTRIES // N)
    for j in range(s):
        scores = np.empty(len(candidates))
        for start in range(0, len(candidates), chunk):
            cand = candidates[start:start + chunk]
            idx = (i[np.newaxis, :] * cand[:, np.newaxis]) % N
            scores[start:start + chunk] = kernel[idx] @ prod
        best = float(np.min(scores))
        tol = _TIE_REL * max(1.0, abs(best))
        best_z = int(candidates[np.nonzero(scores <= best + tol)[0][0]])
        zs.append(best_z)
        prod *= 1.0 + gamma[j] * kernel[(i * best_z) % N]
    return GeneratingVector(z=tuple(zs), n_points=N)


def worst_case_error_sq(gen: GeneratingVector, weights=None, alpha: int = 2) -> float:
    """Squared worst-case error of the full vector under the same criterion."""
    gamma = tuple(weights) if weights is not None else default_weights(gen.dim)
    kernel = korobov_kernel(np.arange(gen.n_points) / gen.n_points, alpha)
    i = np.arange(gen.n_points, dtype=np.int64)
    prod = np.ones(gen.n_points, dtype=np.float64)
    for j, zj in enumerate(gen.z):
        prod *= 1.0 + gamma[j] * kernel[(i * zj) % gen.n_points]
    return float(np.mean(prod) - 1.0)


def catalog_vector(N: int, s: int) -> GeneratingVector:
    """Generating vector from the embedded CBC catalog (s <= 8)."""
    if N not in _tables.LATTICE_CATALOG:
        raise KeyError(f"no catalog vector for N = {N}; available: "
                       f"{sorted(_tables.LATTICE_CATALOG)}")
    full = _tables.LATTICE_CATALOG[N]
    if s > len(full):
        raise ValueError(f"catalog covers s <= {len(full)}, requested {s}")
    return GeneratingVector(z=tuple(full[:s]), n_points=N)


def catalog_provenance() -> str:
    return _tables.LATTICE_CATALOG_PROVENANCE
