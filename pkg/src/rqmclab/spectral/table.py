"""Indexed spectra with quadrature provenance.

One table type serves both transforms: Fourier tables are sparse maps from
signed integer index vectors to squared magnitudes over a truncation box;
Walsh tables keep the dense real coefficient array of a dyadic resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SpectrumTable:
    kind: str  # "fourier" | "walsh"
    quad_tag: str
    entries: dict[tuple[int, ...], float] | None = None
    n_max: int | None = None
    coeffs: np.ndarray | None = None
    level: tuple[int, ...] | None = None
    tail_estimate: float = field(default=float("nan"))

    def __post_init__(self):
        if self.kind == "fourier" and self.entries is None:
            raise ValueError("fourier table needs entries")
        if self.kind == "walsh":
            if self.coeffs is None:
                raise ValueError("walsh table needs a coefficient array")
            shape = self.coeffs.shape
            level = tuple(int(n).bit_length() - 1 for n in shape)
            if tuple(1 << l for l in level) != shape:
                raise ValueError(f"coefficient array shape {shape} not a power of two")
            if self.level is None:
                self.level = level
            elif tuple(self.level) != level:
                raise ValueError("declared level disagrees with coefficient shape")

    @property
    def dim(self) -> int:
        if self.kind == "fourier":
            return len(next(iter(self.entries))) if self.entries else 0
        return self.coeffs.ndim

    def magnitude_sq(self, index) -> float:
        index = tuple(int(i) for i in np.atleast_1d(index))
        if self.kind == "fourier":
            return self.entries.get(index, 0.0)
        return float(self.coeffs[index] ** 2)

    def iter_rows(self):
        """(index, magnitude^2) pairs for CSV emission, lexicographic order."""
        if self.kind == "fourier":
            for index in sorted(self.entries):
                yield index, self.entries[index]
        else:
            for index in np.ndindex(self.coeffs.shape):
                yield index, float(self.coeffs[index] ** 2)
