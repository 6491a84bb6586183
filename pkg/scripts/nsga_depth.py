"""Accuracy/depth trade-off under NSGA-II: initial population vs final Pareto front.

    python3 scripts/nsga_depth.py --seeds 5 --generations 60
"""
import argparse

from qgk.experiments import nsga_depth_trial


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--population", type=int, default=30)
    p.add_argument("--generations", type=int, default=60)
    p.add_argument("--parents", type=int, help="default: half the population")
    args = p.parse_args()
    print("seed,initial_mean_depth,front_mean_depth,initial_max_a,front_max_a,passed")
    runs = nsga_depth_trial(range(args.seeds), samples=args.samples, population=args.population,
                            generations=args.generations, parents=args.parents or args.population // 2,
                            progress=lambda r: print(f"{r.seed},{r.initial_mean_depth:.2f},{r.front_mean_depth:.2f},"
                                                     f"{r.initial_max_a:.3f},{r.front_max_a:.3f},{r.passed}",
                                                     flush=True))
    print(f"# {sum(r.passed for r in runs)}/{len(runs)} seeds show shallower fronts without losing accuracy")


if __name__ == "__main__":
    main()
