"""Multi-site simulations: Frobenius ranking, worst-first exclusion, shot scaling.

    python3 scripts/site_ranking.py --seeds 5 --replicates 50
"""
import argparse

import numpy as np

from qgk.experiments import exclusion_trial, shot_scaling_trial, site_ranking_trial


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--sites", type=int, default=20)
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--shots", type=int, nargs="+", default=[1000, 4000, 16000])
    args = p.parse_args()

    for seed in range(args.seeds):
        print(f"seed {seed}: Spearman(Frobenius, true noise) = {site_ranking_trial(seed, args.sites):.3f}")
    ex = exclusion_trial(args.replicates)
    mean_curve = np.mean(ex.curves, axis=0)
    print(f"exclusion: {ex.successes}/{args.replicates} curves non-increasing, sign-test p = {ex.p_value:.2e}")
    print("excluded,mean_average_spread")
    for e, v in enumerate(mean_curve):
        print(f"{e},{v:.6f}")
    sc = shot_scaling_trial(tuple(args.shots))
    for s, v in zip(sc.shots, sc.spreads):
        print(f"shots={s}: average spread {v:.6f} (x sqrt(shots) = {v * np.sqrt(s):.4f})")


if __name__ == "__main__":
    main()
