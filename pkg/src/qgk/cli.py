"""Command-line front end.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import shutil
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import default_backend, load_run_config
from .dataset import load_csv, rescale_unit_interval, synth_generate, write_csv
from .errors import ConfigError, DataError, NumericalError
from .ga import GaConfig, evaluate, make_context, run, write_generations_csv, write_pareto_csv, write_population_csv
from .genome import read_chromosome, write_chromosome
from .kernel import embed_all, kernel_matrix, write_kernel_csv
from .qpu_sim import (load_backend_sites, schedule_generation, site_kernels, spread_stats, write_site_report,
                      write_spread_curve)
from .transpile import load_backend

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4
MANIFEST = "manifest.json"


def _threads(value) -> int:
    if value is None:
        value = os.environ.get("QGK_THREADS", "1")
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"invalid thread count {value!r}") from None
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


def _load_data(path, max_samples: int | None = None, seed: int = 0):
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        data = rescale_unit_interval(load_csv(path))
    if max_samples is not None and max_samples < data.num_samples:
        idx = np.sort(np.random.default_rng(seed).choice(data.num_samples, max_samples, replace=False))
        data = data.subset(idx)
    return data


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------


def cmd_gen_data(args) -> int:
    if args.samples < 2 or args.samples % 2:
        raise ConfigError(f"--samples must be even and >= 2, got {args.samples}")
    if args.features < 1:
        raise ConfigError("--features must be >= 1")
    try:
        if args.overlap is not None:
            data = synth_generate(args.samples, args.features, overlap=args.overlap, seed=args.seed)
        else:
            data = synth_generate(args.samples, args.features, seed=args.seed, bayes_accuracy=args.bayes_accuracy)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    write_csv(data, args.out)
    return 0


def _run_optimize(config_path: Path, data_path: Path, out: Path, threads: int) -> int:
    data = _load_data(data_path)
    cfg, backend = load_run_config(config_path, data.num_features)
    out.mkdir(parents=True, exist_ok=True)
    snapshot = out / "config.json"
    raw = config_path.read_bytes()
    if config_path.resolve() != snapshot.resolve():
        shutil.copyfile(config_path, snapshot)
    manifest = {
        "software": "qgk",
        "version": __version__,
        "seed": cfg.seed,
        "config": "config.json",
        "config_sha256": hashlib.sha256(raw).hexdigest(),
        "data": str(data_path.resolve()),
        "started": _now(),
        "finished": None,
        "outputs": [],
    }
    (out / MANIFEST).write_text(json.dumps(manifest, indent=1) + "\n")

    result = run(cfg, data, backend, threads=threads)
    outputs = ["initial_population.csv", "final_population.csv"]
    write_population_csv(result.logs[0], out / outputs[0])
    write_population_csv(result.final, out / outputs[1])
    if cfg.objective == "mono":
        write_generations_csv(result.logs, out / "generations.csv")
        best = result.final.best
        write_chromosome(out / "best_chromosome.json", result.population[best], cfg.genes,
                         fitness=result.final.records[best].f)
        outputs += ["generations.csv", "best_chromosome.json"]
    else:
        write_pareto_csv(result.logs, out / "pareto.csv")
        front_dir = out / "front"
        front_dir.mkdir(exist_ok=True)
        for member in result.final.front:
            rec = result.final.records[member]
            name = f"member_{member:03d}.json"
            write_chromosome(front_dir / name, result.population[member], cfg.genes, a=rec.a, depth=rec.depth)
            outputs.append(f"front/{name}")
        outputs.append("pareto.csv")
    manifest["finished"] = _now()
    manifest["evaluations"] = result.evaluations
    manifest["outputs"] = outputs
    (out / MANIFEST).write_text(json.dumps(manifest, indent=1) + "\n")
    print(f"{result.evaluations} kernel evaluations, results in {out}")
    return 0


def cmd_optimize(args) -> int:
    threads = _threads(args.threads)
    if args.resume:
        out = Path(args.resume)
        mpath = out / MANIFEST
        if not mpath.is_file():
            raise ConfigError(f"{out} holds no run manifest")
        manifest = json.loads(mpath.read_text())
        if manifest.get("finished"):
            print(f"run in {out} already finished")
            return 0
        return _run_optimize(out / manifest["config"], Path(manifest["data"]), out, threads)
    if not (args.config and args.data and args.out):
        raise ConfigError("optimize needs --config, --data and --out (or --resume)")
    return _run_optimize(Path(args.config), Path(args.data), Path(args.out), threads)


def _gene_context(args, genes_cfg, data, noise=0.0, shots=None):
    if data.num_features != genes_cfg.num_features:
        raise DataError(f"chromosome expects {genes_cfg.num_features} features, data has {data.num_features}")
    backend = load_backend(args.backend) if getattr(args, "backend", None) else default_backend(genes_cfg.num_qubits)
    if backend.num_qubits < genes_cfg.num_qubits:
        raise DataError(f"backend has {backend.num_qubits} qubits, chromosome needs {genes_cfg.num_qubits}")
    cfg = GaConfig(genes_cfg, population=1, generations=1, parents=1, elitism=0, mutation_rate=0.0,
                   crossover_prob=0.0, eta=args.eta, seed=args.seed, svm_c=args.svm_c, folds=args.folds,
                   noise_std=noise, shots=shots)
    return make_context(cfg, data, backend)


def cmd_evaluate(args) -> int:
    genes, gcfg = read_chromosome(args.chromosome)
    data = _load_data(args.data)
    ctx = _gene_context(args, gcfg, data, args.noise, args.shots)
    rng = np.random.default_rng([args.seed, 2]) if ctx.cfg.noisy else None
    rec = evaluate(genes, ctx, rng)
    doc = {"a": rec.a, "sigma": rec.sigma, "depth": rec.depth, "f": rec.f}
    text = json.dumps(doc)
    print(text)
    if args.json:
        Path(args.json).write_text(text + "\n")
    if args.kernel_out:
        write_kernel_csv(kernel_matrix(embed_all(genes, gcfg, data.features)), args.kernel_out)
    return 0


def cmd_sites(args) -> int:
    if args.action == "schedule":
        backends = {}
        for path in args.backend:
            b, sites = load_backend_sites(path, seed=args.seed)
            backends[b.name if b.name not in backends else f"{b.name}#{len(backends)}"] = sites
        sched = schedule_generation(args.population, backends)
        print("backend,site_id,evaluations")
        for (name, sid), jobs in sched.assignments.items():
            print(f"{name},{sid},{' '.join(map(str, jobs))}")
        print(f"# wall_clock={sched.wall_clock:g} serial={sched.serial:g} speedup={sched.speedup:g}")
        return 0

    if len(args.backend) != 1:
        raise ConfigError(f"{args.action} takes exactly one --backend")
    if not (args.chromosome and args.data):
        raise ConfigError(f"{args.action} needs --chromosome and --data")
    backend, sites = load_backend_sites(args.backend[0], seed=args.seed)
    genes, gcfg = read_chromosome(args.chromosome)
    data = _load_data(args.data, args.max_samples, args.seed)
    if data.num_features != gcfg.num_features:
        raise DataError(f"chromosome expects {gcfg.num_features} features, data has {data.num_features}")
    k_exact = kernel_matrix(embed_all(genes, gcfg, data.features))
    kernels = site_kernels(k_exact, sites, args.seed, args.shots)
    report = spread_stats(kernels, k_exact, [s.site_id for s in sites], exclude_ids=args.exclude_ids)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    if args.action == "rank":
        if out:
            write_site_report(report, out / "site_report.csv")
        else:
            print("site_id,frobenius,excluded_rank")
            n = len(report.ranking)
            for pos, i in enumerate(report.ranking):
                print(f"{report.site_ids[i]},{report.frobenius[i]!r},{n - 1 - pos}")
        return 0
    # spread
    if not report.exclusion_curve:
        raise DataError("spread needs at least two sites")
    if not 0 <= args.exclude_worst < len(report.exclusion_curve):
        raise ConfigError(f"--exclude-worst must lie in [0, {len(report.exclusion_curve) - 1}]")
    if out:
        write_spread_curve(report, out / "spread_curve.csv")
        write_site_report(report, out / "site_report.csv")
    print(f"average_spread all_sites={report.average_spread!r} "
          f"excluding_worst_{args.exclude_worst}={report.spread_excluding(args.exclude_worst)!r}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgk", description="Genetic optimisation of quantum-kernel feature maps.")
    p.add_argument("--version", action="version", version=f"qgk {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic two-class dataset")
    g.add_argument("--samples", type=int, required=True)
    g.add_argument("--features", type=int, required=True)
    acc = g.add_mutually_exclusive_group(required=True)
    acc.add_argument("--bayes-accuracy", type=float)
    acc.add_argument("--overlap", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_data)

    o = sub.add_parser("optimize", help="run the genetic search")
    o.add_argument("--config")
    o.add_argument("--data")
    o.add_argument("--out")
    o.add_argument("--resume", metavar="DIR")
    o.add_argument("--threads", type=int)
    o.set_defaults(func=cmd_optimize)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--folds", type=int, default=5)
    common.add_argument("--svm-c", type=float, default=1.0)
    common.add_argument("--eta", type=float, default=0.025)

    e = sub.add_parser("evaluate", parents=[common], help="score one chromosome")
    e.add_argument("--chromosome", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--backend")
    e.add_argument("--noise", type=float, default=0.0)
    e.add_argument("--shots", type=int)
    e.add_argument("--json")
    e.add_argument("--kernel-out")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sites", help="partitioned-QPU simulations")
    s.add_argument("action", choices=("rank", "spread", "schedule"))
    s.add_argument("--backend", action="append", required=True)
    s.add_argument("--chromosome")
    s.add_argument("--data")
    s.add_argument("--shots", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-samples", type=int)
    s.add_argument("--exclude-worst", type=int, default=0)
    s.add_argument("--exclude-ids", type=int, nargs="*", default=[])
    s.add_argument("--population", type=int, default=45)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sites)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "threads", None) is not None:
            _threads(args.threads)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
