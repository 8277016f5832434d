"""Transfer fidelity of a linear eps sweep through resonance versus sweep rate."""
import argparse

from bec_dimer.dynamics import PropagationConfig, propagate, transport_metrics
from bec_dimer.model import ModelParams, Schedule
from bec_dimer.operators import left_well_state
from bec_dimer.output import render_csv, write_atomic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--u0", type=float, default=0.0)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--eps0", type=float, default=200.0, help="sweep runs from +eps0 to -eps0")
    ap.add_argument("--rates", type=float, nargs="+", default=[0.2, 2.0, 20.0, 200.0])
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = {"rate": [], "fidelity": [], "z_min": [], "z_max": []}
    for rate in args.rates:
        t_end = 2 * args.eps0 / rate
        p = ModelParams(args.n, args.u0, 0.0, 0.0, Schedule.linear_ramp(args.eps0, -args.eps0, 0.0, t_end),
                        Schedule.constant(args.omega))
        rec = propagate(left_well_state(args.n), p, "onsite",
                        PropagationConfig(0.0, t_end, min(0.02, t_end / 4000), record_stride=100, method="magnus4"))
        m = transport_metrics(rec, args.n)
        for key, val in (("rate", rate), ("fidelity", m.fidelity), ("z_min", m.z_min), ("z_max", m.z_max)):
            rows[key].append(val)
        print(f"rate={rate:8.3g}  fidelity={m.fidelity:.6g}")
    if args.out:
        write_atomic(args.out, render_csv(rows, vars(args)))


if __name__ == "__main__":
    main()
