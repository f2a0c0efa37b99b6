"""Tail indicators for symbols that do and do not vanish on the boundary.

Run ``python3 demos/dichotomy.py``.  Each row lists the tail norms
``s_j = ||T[j:, j:]||`` at the cuts, the boundary supremum of the symbol and
the verdict.
"""

from bergmanlab.diagnostics import compactness
from bergmanlab.domain import WeightSpec, build_domain

SYMBOLS = ["1 - abs(z1)^2", "bump(0, 0.5)", "(1 - abs(z1)^2)*re(z1)",
           "1", "abs(z1)^2", "re(z1) + 1.5"]


def main():
    disc = build_domain("disc")
    for r in (0.0, 1.0):
        print(f"disc, weight |rho|^{r:g}")
        for phi in SYMBOLS:
            rep = compactness(disc, WeightSpec(r), phi, 120, [0, 30, 60, 90, 118])
            tail = "  ".join(f"{s:.4f}" for s in rep.tail)
            print(f"  {phi:24s} sup_b {rep.boundary_sup:7.2g}  tail {tail}  -> {rep.verdict}")


if __name__ == "__main__":
    main()
