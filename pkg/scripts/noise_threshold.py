"""Mean-fitness trend of the mono GA under Gaussian kernel noise (K=0).

    python3 scripts/noise_threshold.py --noise 0 0.01 0.02 0.05 --seeds 5 --out noise.csv
"""
import argparse
import csv

from qgk.experiments import noise_threshold_trial


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--noise", type=float, nargs="+", default=[0.0, 0.01, 0.05])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--population", type=int, default=30)
    p.add_argument("--generations", type=int, default=60)
    p.add_argument("--parents", type=int, help="default: half the population")
    p.add_argument("--out", help="CSV of per-run slopes")
    args = p.parse_args()

    trial = noise_threshold_trial(
        args.noise, range(args.seeds), samples=args.samples, population=args.population,
        generations=args.generations, parents=args.parents or args.population // 2,
        progress=lambda mu, s, slope: print(f"noise={mu:<6g} seed={s} mean-f slope={slope:+.2e}", flush=True))
    for mu in trial.noise_levels:
        print(f"noise={mu:<6g} positive {trial.positive_count(mu)}/{args.seeds}  "
              f"suppressed vs noiseless {trial.suppressed_count(mu)}/{args.seeds}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["noise", "seed", "mean_f_slope", "best_f_slope"])
            for (mu, s), v in sorted(trial.slopes.items()):
                w.writerow([mu, s, repr(v), repr(trial.best_slopes[(mu, s)])])


if __name__ == "__main__":
    main()
