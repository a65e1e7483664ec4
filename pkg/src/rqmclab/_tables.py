"""Embedded parameter tables.

DIRECTION_NUMBER_TABLE holds primitive-polynomial/initial-value rows for
Sobol' dimensions 2..16 in the published ``d s a m_i`` text format (dimension
1 is the van der Corput construction and is synthesized, not listed).
Dimensions beyond 16 require a user-supplied file.

LATTICE_CATALOG maps N -> generating vector for up to 8 dimensions. The
vectors were produced by ``rqmclab.spectral.cbc_construct`` with the weights
and smoothness recorded in LATTICE_CATALOG_PROVENANCE (see
tools/build_lattice_catalog.py); a vector for dimension s <= 8 is the first
s components, which is exactly the component-by-component result for that s.
"""

DIRECTION_NUMBER_TABLE = """\
d       s       a       m_i
2       1       0       1
3       2       1       1 3
4       3       1       1 3 1
5       3       2       1 1 1
6       4       1       1 1 3 3
7       4       4       1 3 5 13
8       5       2       1 1 5 5 17
9       5       4       1 1 5 5 5
10      5       7       1 1 7 11 19
11      5       11      1 1 5 1 1
12      5       13      1 1 1 3 11
13      5       14      1 3 5 5 31
14      6       1       1 3 3 9 7 49
15      6       13      1 1 1 15 21 21
16      6       16      1 3 1 13 27 49
"""

try:
    from ._lattice_catalog import LATTICE_CATALOG, LATTICE_CATALOG_PROVENANCE
except ImportError:  # catalog not generated yet (fresh checkout of tools only)
    LATTICE_CATALOG: dict[int, tuple[int, ...]] = {}
    LATTICE_CATALOG_PROVENANCE = "catalog missing; run tools/build_lattice_catalog.py"
