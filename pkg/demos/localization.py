"""Kernel localization at a boundary point of an annulus.

Run ``python3 demos/localization.py``.  The ratio of the lens kernel (a lower
bound from an orthonormal polynomial basis) to the annulus kernel stays
bounded as the sample points approach the outer circle.
"""

import numpy as np

from bergmanlab.diagnostics import localization_grid, localization_scan
from bergmanlab.domain import build_domain


def main():
    annulus = build_domain("annulus", eps=0.5)
    grid = localization_grid(1.0)
    rep = localization_scan(annulus, 1.0, 0.2, 0.4, None, grid, 20, 5)
    order = np.argsort(rep.dists)
    for i in order[::3]:
        print(f"dist {rep.dists[i]:.4f}  ratio {rep.ratios[i]:.6f}  "
              f"(degree {rep.maxdeg[1]}: {rep.ratios_next[i]:.6f})")
    print(f"C = {rep.C:.6f}, change with degree {rep.stabilization:.2e}, "
          f"trend slope {rep.slope:.3f}")


if __name__ == "__main__":
    main()
