"""Fitted small-value decay rates of |S(z)| for several point configurations.

Compares beta = 1, 2, 4 on a real configuration, a planar one and a
configuration with a single point close to z.

    python scripts/tail_exponents.py [--trials 100000]
"""
import argparse

import numpy as np

from randeriv.metrics import fit_tail_exponent, small_value_tail
from randeriv.sampling import RngStream


def configs():
    return {
        "real line, z=0.1": (np.arange(-4.5, 5.0, 1.0), 0.1, (2, 8)),
        # planar small balls decay twice as fast, so the window is shorter
        "ten points on a circle": (np.exp(2j * np.pi * (np.arange(10) + 0.3) / 10), 0.05 + 0.02j, (1, 4)),
        # far terms stay below e^-8, so only the near weight's small-value law shows
        "one near point, nine far": (np.concatenate([[1.0], 1e5 * (1 + np.arange(9))]), 0.0, (2, 8)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100_000)
    args = ap.parse_args()
    for name, (pts, z, (lo, hi)) in configs().items():
        t = np.linspace(lo, hi, 13)
        slopes = [fit_tail_exponent(small_value_tail(pts, b, z, t, args.trials, RngStream(1, int(b))))
                  for b in (1.0, 2.0, 4.0)]
        print(f"{name:30s} t in [{lo},{hi}]  " + "  ".join(f"beta={b:g}: {s:.3f}" for b, s in zip((1, 2, 4), slopes)))


if __name__ == "__main__":
    main()
