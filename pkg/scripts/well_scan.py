"""Two-mode couplings of a quartic double well across barrier heights."""
import argparse

from bec_dimer.output import render_csv, write_atomic
from bec_dimer.wells import Potential, WellSpec, extract_parameters

KEYS = ("eps_left", "eps_right", "omega", "u0", "ut", "utt", "e_sym", "e_asym")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=float, nargs="+", default=[6.0, 8.0, 12.0, 16.0, 24.0])
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--half-width", type=float, default=3.0)
    ap.add_argument("--points", type=int, default=6401)
    ap.add_argument("--g", type=float, default=1.0)
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = {"beta": [], **{k: [] for k in KEYS}, "omega_over_gap": []}
    for beta in args.betas:
        spec = WellSpec(Potential.quartic(beta, args.a), -args.half_width, args.half_width, args.points, 1.0, args.g)
        p = extract_parameters(spec)
        rows["beta"].append(beta)
        for k in KEYS:
            rows[k].append(getattr(p, k))
        rows["omega_over_gap"].append(p.validity["omega_over_gap"])
        print(f"beta={beta:5.1f}  Omega={p.omega:+.6e}  U0={p.u0:.6e}  Ut={p.ut:+.3e}  Utt={p.utt:.3e}")
    if args.out:
        write_atomic(args.out, render_csv(rows, vars(args)))


if __name__ == "__main__":
    main()
