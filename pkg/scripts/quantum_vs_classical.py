"""Deviation of 2<J>/N from the Bloch solution as N grows at fixed Lambda."""
import argparse

import numpy as np

from bec_dimer.dynamics import PropagationConfig, propagate
from bec_dimer.meanfield import BlochVector, compare_quantum_classical, integrate_meanfield
from bec_dimer.model import ModelParams, Schedule
from bec_dimer.operators import left_well_state


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 50, 100, 200, 400])
    ap.add_argument("--t-end", type=float, default=5.0)
    ap.add_argument("--dt", type=float, default=2e-3)
    args = ap.parse_args()

    cfg = PropagationConfig(0.0, args.t_end, args.dt, record_stride=10, method="magnus4")
    for n in args.sizes:
        p = ModelParams(n, 2 * args.lam / n, 0.0, 0.0, Schedule.constant(0.0), Schedule.constant(1.0))
        dev = compare_quantum_classical(propagate(left_well_state(n), p, "onsite", cfg),
                                        integrate_meanfield(BlochVector.left_well(), p, cfg), n)
        print(f"N={n:5d}  max deviation={dev.max_deviation:.4e}  N*dev={n * dev.max_deviation:.3f}"
              f"  sqrt(N)*dev={np.sqrt(n) * dev.max_deviation:.3f}")


if __name__ == "__main__":
    main()
