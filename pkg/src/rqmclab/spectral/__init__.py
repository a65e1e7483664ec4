"""Spectral diagnostics: Fourier/Walsh coefficient machinery, dual-lattice
variance sums, decay-rate fits, CBC lattice construction, and the
isotropic-cell geometry operations."""

from .cbc import catalog_provenance, catalog_vector, cbc_construct, worst_case_error_sq
from .fit import DecayFit, decay_fit
from .fourier import (QuadValue, VarianceEstimate, dual_lattice_enumerate,
                      fourier_coefficient, fourier_spectrum,
                      mc_variance_spectral, rslr_variance_spectral)
from .geometry import CellCounts, alternating_sum, count_boundary_cells
from .table import SpectrumTable
from .walsh import (cell_averages, cell_integrals, sigma2_ell, sigma2_ell_beta,
                    sigma2_walsh, walsh_coefficients_fwht, walsh_eval)

__all__ = [
    "CellCounts", "DecayFit", "QuadValue", "SpectrumTable", "VarianceEstimate",
    "alternating_sum", "catalog_provenance", "catalog_vector", "cbc_construct",
    "cell_averages", "cell_integrals", "count_boundary_cells", "decay_fit",
    "dual_lattice_enumerate", "fourier_coefficient", "fourier_spectrum",
    "mc_variance_spectral", "rslr_variance_spectral", "sigma2_ell",
    "sigma2_ell_beta", "sigma2_walsh", "walsh_coefficients_fwht", "walsh_eval",
    "worst_case_error_sq",
]
