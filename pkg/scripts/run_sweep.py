"""Upper/lower bound sweep at fixed kappa, with the log-log fit.

    python scripts/run_sweep.py --kappa 1 --Z 20 40 60 80 100 --out runs/sweep
"""

import argparse
import json
from pathlib import Path

from tfwd import bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappa", type=float, default=1.0)
    ap.add_argument("--Z", type=float, nargs="+", default=[20, 40, 60, 80, 100])
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--nodes", type=int, default=4000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("runs/sweep"))
    args = ap.parse_args()

    reports = bounds.asymptotics_sweep(args.kappa, args.Z, beta=args.beta, nodes=args.nodes, jobs=args.jobs)
    args.out.mkdir(parents=True, exist_ok=True)
    bounds.write_sweep_csv(reports, args.out / "sweep.csv")
    meta = {"kappa": args.kappa, "beta": args.beta, "nodes": args.nodes}
    (args.out / "sweep.json").write_text(bounds.sweep_json(reports, meta) + "\n")

    print(f"{'Z':>6} {'upper':>14} {'E_TF':>14} {'gap/Z^2':>10} {'lemma l gap/Z^2':>16}")
    for r in reports:
        if r.error:
            print(f"{r.Z:6.0f}  failed: {r.error}")
            continue
        print(f"{r.Z:6.0f} {r.upper:14.4f} {r.E_TF:14.4f} {r.upper_gap_over_Z2:10.4f} {r.lemma_l_gap / r.Z**2:16.4f}")
    print(json.dumps(bounds.fit_summary(reports), indent=2))


if __name__ == "__main__":
    main()
