#!/usr/bin/env python3
"""Regenerate src/rqmclab/_lattice_catalog.py.

Runs the CBC construction for s = 8 at every catalog size and writes the
vectors as a Python module. The first s components of each vector are the
CBC result for dimension s, so one 8-vector serves all s <= 8.
"""

import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from rqmclab.spectral import cbc  # noqa: E402

SIZES = [1 << m for m in range(6, 17)]
DIMS = 8
ALPHA = 2

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "rqmclab", "_lattice_catalog.py")

HEADER = '''"""Embedded CBC generating-vector catalog (generated file).

Produced by tools/build_lattice_catalog.py via rqmclab.spectral.cbc_construct
with {prov!r}. Regenerate after changing the criterion.
"""

LATTICE_CATALOG_PROVENANCE = {prov!r}

LATTICE_CATALOG = {{
'''


def main():
    weights = cbc.default_weights(DIMS)
    prov = f"cbc: korobov alpha={ALPHA}, product weights gamma_j=j^-2, s<={DIMS}"
    lines = [HEADER.format(prov=prov)]
    for n in SIZES:
        t0 = time.time()
        vec = cbc.cbc_construct(n, DIMS, weights=weights, alpha=ALPHA)
        err = cbc.worst_case_error_sq(vec, weights, ALPHA)
        print(f"N={n}: z={vec.z} e2={err:.3e} ({time.time() - t0:.1f}s)", flush=True)
        lines.append(f"    {n}: {vec.z!r},\n")
    lines.append("}\n")
    with open(OUT, "w") as fh:
        fh.writelines(lines)
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
