"""Recompute the truss Monte Carlo reference sigma_Y (100 runs x 1e5 draws)."""

import time

from fsspce.models import TRUSS, monte_carlo_reference

if __name__ == "__main__":
    t = time.perf_counter()
    mean, se = monte_carlo_reference(TRUSS, 100, 100_000, seed=20240601)
    print(f"sd_mean={mean:.6f} sd_se={se:.6f} ({time.perf_counter() - t:.1f} s)")
