"""Sensitivity of completion time to one tunable parameter.

    python3 scripts/sweep_parameter.py StigDiffusion 0.5 0.7 0.85 0.95
    python3 scripts/sweep_parameter.py WiggleVar --bisect 30 170 --tol 20
"""

import argparse

from stigflock.experiment import TrialConfig, bisect_sweep, sweep
from stigflock.params import SimParams
from stigflock.scenario import generate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("param", help="parameter name as listed in the README table")
    ap.add_argument("values", nargs="*", type=float)
    ap.add_argument("--bisect", nargs=2, type=float, metavar=("LO", "HI"))
    ap.add_argument("--tol", type=float, default=0.05)
    ap.add_argument("--scenario", default="field")
    ap.add_argument("--algo", default="sf")
    ap.add_argument("--redundancy", type=int, default=1)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    if bool(args.values) == bool(args.bisect):
        ap.error("give either explicit values or --bisect LO HI")

    cfg = TrialConfig(generate(args.scenario, args.seed),
                      SimParams(algorithm=args.algo, redundancy=args.redundancy), args.seed)
    if args.bisect:
        best, result = bisect_sweep(args.param, *args.bisect, args.tol, cfg, args.trials, args.workers)
    else:
        result = sweep(args.param, args.values, cfg, args.trials, args.workers)
        best = result.argmin
    print(result.csv(), end="")
    print(f"argmin {args.param} = {best:g}")


if __name__ == "__main__":
    main()
