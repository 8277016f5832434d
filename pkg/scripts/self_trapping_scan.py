"""Mean-field and quantum self-trapping flags across Lambda = N U0 / (2 |Omega|)."""
import argparse

import numpy as np

from bec_dimer.dynamics import PropagationConfig, propagate, transport_metrics
from bec_dimer.meanfield import BlochVector, integrate_meanfield, self_trapped
from bec_dimer.model import ModelParams, Schedule
from bec_dimer.operators import left_well_state
from bec_dimer.output import render_csv, write_atomic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--lambdas", type=float, nargs="+", default=list(np.arange(0.1, 4.0, 0.3)))
    ap.add_argument("--periods", type=float, default=20.0)
    ap.add_argument("--quantum", action="store_true", help="also run the N-particle dynamics")
    ap.add_argument("--out")
    args = ap.parse_args()

    t_end = args.periods * np.pi
    rows = {"lambda": [], "meanfield_trapped": [], "w_max": [], "quantum_trapped": [], "z_max": []}
    for lam in args.lambdas:
        p = ModelParams(args.n, 2 * lam / args.n, 0.0, 0.0, Schedule.constant(0.0), Schedule.constant(1.0))
        traj = integrate_meanfield(BlochVector.left_well(), p, PropagationConfig(0.0, t_end, 2e-3, record_stride=5))
        rows["lambda"].append(lam)
        rows["meanfield_trapped"].append(int(self_trapped(traj.w)))
        rows["w_max"].append(float(np.max(traj.w)))
        if args.quantum:
            rec = propagate(left_well_state(args.n), p, "onsite",
                            PropagationConfig(0.0, t_end, 1e-2, record_stride=5, method="magnus4"))
            m = transport_metrics(rec, args.n)
            rows["quantum_trapped"].append(int(m.self_trapped))
            rows["z_max"].append(m.z_max)
        else:
            rows["quantum_trapped"].append(-1)
            rows["z_max"].append(float("nan"))
        print(f"Lambda={lam:6.3f}  meanfield={rows['meanfield_trapped'][-1]}  quantum={rows['quantum_trapped'][-1]}")
    if args.out:
        write_atomic(args.out, render_csv(rows, {"n_particles": args.n, "periods": args.periods}))


if __name__ == "__main__":
    main()
