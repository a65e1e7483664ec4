"""rqmclab: randomized quasi-Monte Carlo point sets, spectral diagnostics,
and variance-convergence experiments."""

__version__ = "0.1.0"


def provenance() -> dict:
    """Version/provenance fields embedded in every CSV header."""
    import matplotlib
    import numpy
    import scipy

    return {
        "rqmclab": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
    }
