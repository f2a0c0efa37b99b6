"""The weighted disc kernel as a slice of an unweighted ball kernel.

Run ``python3 demos/inflation.py``.  For integer ``r`` the ratio
``K^r_disc(xi, z) / K_ball(xi, 0; z, 0)`` in dimension ``1 + r`` is the
volume constant ``c_{r,r}``.
"""

from bergmanlab.diagnostics import inflation_check, sample_pairs, volume_c, volume_c_closed


def main():
    pairs = sample_pairs(20, seed=1)
    for r in (1, 2):
        rep = inflation_check(r, pairs)
        mc = volume_c(r, r, "monte_carlo", seed=1, samples=1_000_000)
        print(f"r={r}: mean ratio {rep.mean:.15f}  spread {rep.spread:.1e}  "
              f"closed form {volume_c_closed(r, r):.15f}  "
              f"Monte Carlo {mc.value:.5f} +- {mc.stderr:.1e}")


if __name__ == "__main__":
    main()
