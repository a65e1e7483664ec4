"""Embedded CBC generating-vector catalog (generated file).

Produced by tools/build_lattice_catalog.py via rqmclab.spectral.cbc_construct
with 'cbc: korobov alpha=2, product weights gamma_j=j^-2, s<=8'. Regenerate after changing the criterion.
"""

LATTICE_CATALOG_PROVENANCE = 'cbc: korobov alpha=2, product weights gamma_j=j^-2, s<=8'

LATTICE_CATALOG = {
    64: (1, 19, 29, 13, 3, 5, 27, 11),
    128: (1, 47, 19, 11, 25, 53, 15, 39),
    256: (1, 75, 23, 123, 39, 89, 27, 7),
    512: (1, 149, 113, 193, 31, 17, 203, 123),
    1024: (1, 275, 167, 317, 403, 103, 451, 15),
    2048: (1, 791, 247, 951, 591, 177, 579, 697),
    4096: (1, 1557, 1087, 859, 1231, 789, 1401, 135),
    8192: (1, 2199, 1325, 1879, 3921, 1407, 2537, 2445),
    16384: (1, 2475, 4283, 3825, 7949, 7579, 1555, 4563),
    32768: (1, 2879, 9247, 11185, 10737, 3023, 7593, 9935),
    65536: (1, 3399, 26497, 7305, 31425, 21365, 2529, 27751),
}
