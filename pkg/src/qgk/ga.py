"""Genetic search over feature-map chromosomes.

Each generation: evaluate, pick parents (steady-state top-M for the scalar
fitness, NSGA-II rank/crowding for the (accuracy, -depth) objective), carry
the K elites over unchanged, and fill the remaining N-K slots with offspring
(two-point crossover with probability gamma, then mutation of a fraction mu
of the genes).

Randomness is drawn from independent streams keyed by
``(seed, purpose, generation, slot)`` so results do not depend on how
evaluations are scheduled across threads.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .dataset import Dataset, FoldAssignment, kfold_split
from .genome import GeneConfig, decode_skeleton, random_chromosome
from .kernel import embed_all, kernel_matrix, offdiag_std, perturb_kernel
from .svm import cv_accuracy
from .transpile import BackendModel, depth, route

# stream purposes
_INIT, _BREED, _NOISE, _FOLDS, _SELECT = range(5)


def substream(seed: int, purpose: int, generation: int = 0, slot: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, purpose, generation, slot])


@dataclass(frozen=True)
class GaConfig:
    genes: GeneConfig
    population: int
    generations: int
    parents: int
    elitism: int
    mutation_rate: float
    crossover_prob: float
    eta: float = 0.025
    objective: str = "mono"
    seed: int = 0
    svm_c: float = 1.0
    folds: int = 5
    selection: str = "steady_state"
    patience: int | None = None
    noise_std: float = 0.0
    shots: int | None = None
    svm_tol: float = 1e-3

    def __post_init__(self):
        if not 0 <= self.elitism <= self.parents <= self.population:
            raise ValueError("need 0 <= elitism <= parents <= population")
        if self.parents < 1 or self.generations < 1:
            raise ValueError("need at least one parent and one generation")
        if not (0 <= self.mutation_rate <= 1 and 0 <= self.crossover_prob <= 1):
            raise ValueError("mutation_rate and crossover_prob must lie in [0, 1]")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.objective not in ("mono", "multi"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.selection not in ("steady_state", "rank_proportional"):
            raise ValueError(f"unknown selection {self.selection!r}")
        if self.noise_std < 0 or (self.shots is not None and self.shots < 1):
            raise ValueError("noise_std must be >= 0 and shots >= 1")
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be >= 1")

    @property
    def noisy(self) -> bool:
        return self.noise_std > 0 or self.shots is not None


@dataclass(frozen=True)
class FitnessRecord:
    a: float
    sigma: float
    depth: int
    f: float

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.a, -float(self.depth))


@dataclass(frozen=True)
class GenerationLog:
    generation: int
    records: tuple[FitnessRecord, ...]
    evaluations: int
    front: tuple[int, ...] = ()
    rng_streams: tuple[tuple[int, int, int], ...] = ()

    @property
    def fitness(self) -> np.ndarray:
        return np.array([r.f for r in self.records])

    @property
    def best(self) -> int:
        """Index of the best member (first index among ties)."""
        return int(np.argmax(self.fitness))

    @property
    def best_f(self) -> float:
        return float(self.fitness.max())

    @property
    def mean_f(self) -> float:
        return float(self.fitness.mean())


@dataclass
class RunResult:
    logs: list[GenerationLog]
    population: list[np.ndarray]
    evaluations: int
    folds: FoldAssignment = field(repr=False)

    @property
    def final(self) -> GenerationLog:
        return self.logs[-1]


def fitness_mono(a: float, sigma: float, eta: float) -> float:
    if eta < 0:
        raise ValueError("eta must be non-negative")
    return a + eta * sigma


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class EvalContext:
    cfg: GaConfig
    dataset: Dataset
    folds: FoldAssignment
    backend: BackendModel


def make_context(cfg: GaConfig, dataset: Dataset, backend: BackendModel) -> EvalContext:
    if dataset.num_features != cfg.genes.num_features:
        raise ValueError(f"dataset has {dataset.num_features} features, genes expect {cfg.genes.num_features}")
    folds = kfold_split(dataset, cfg.folds, seed=int(substream(cfg.seed, _FOLDS).integers(2**63)))
    return EvalContext(cfg, dataset, folds, backend)


def evaluate(genes, ctx: EvalContext, rng: np.random.Generator | None = None) -> FitnessRecord:
    """Accuracy, kernel contrast and transpiled depth of one chromosome.

    With noise configured, a and sigma come from the perturbed kernel; ``rng``
    then must be supplied.
    """
    cfg = ctx.cfg
    k = kernel_matrix(embed_all(genes, cfg.genes, ctx.dataset.features))
    if cfg.noisy:
        if rng is None:
            raise ValueError("noisy evaluation needs an rng")
        k = perturb_kernel(k, rng, cfg.noise_std, cfg.shots)
    a = cv_accuracy(k, ctx.dataset.labels, ctx.folds, cfg.svm_c, cfg.svm_tol)
    sigma = offdiag_std(k)
    d = depth(route(decode_skeleton(genes, cfg.genes), ctx.backend).circuit)
    return FitnessRecord(a, sigma, d, fitness_mono(a, sigma, cfg.eta))


# ---------------------------------------------------------------------------
# selection


def select_parents_steady_state(fitness: Sequence[float], m: int) -> np.ndarray:
    """The m fittest indices, ties broken by lower index."""
    f = np.asarray(fitness, dtype=float)
    return np.argsort(-f, kind="stable")[:m]


def select_parents_rank_proportional(fitness: Sequence[float], m: int, rng: np.random.Generator) -> np.ndarray:
    """m distinct indices drawn with probability proportional to (N - rank)."""
    order = select_parents_steady_state(fitness, len(fitness))
    weights = np.arange(len(order), 0, -1, dtype=float)
    return rng.choice(order, size=m, replace=False, p=weights / weights.sum())


def dominates(u, v) -> bool:
    """u dominates v under maximisation."""
    u, v = np.asarray(u), np.asarray(v)
    return bool(np.all(u >= v) and np.any(u > v))


def nsga2_sort(objectives) -> tuple[np.ndarray, np.ndarray]:
    """Fast non-dominated sort (rank 0 = first front) and crowding distance,
    all objectives maximised. Boundary points of each front get +inf."""
    obj = np.asarray(objectives, dtype=float)
    n = obj.shape[0]
    ge = np.all(obj[:, None, :] >= obj[None, :, :], axis=2)
    gt = np.any(obj[:, None, :] > obj[None, :, :], axis=2)
    dom = ge & gt  # dom[i, j]: i dominates j
    counts = dom.sum(axis=0)
    rank = np.full(n, -1, dtype=int)
    current = np.flatnonzero(counts == 0)
    r = 0
    while current.size:
        rank[current] = r
        counts = counts - dom[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
        r += 1
    crowd = np.zeros(n)
    for fr in range(r):
        members = np.flatnonzero(rank == fr)
        if members.size <= 2:
            crowd[members] = np.inf
            continue
        for m in range(obj.shape[1]):
            vals = obj[members, m]
            order = members[np.argsort(vals, kind="stable")]
            crowd[order[0]] = crowd[order[-1]] = np.inf
            span = vals.max() - vals.min()
            if span == 0:
                continue
            crowd[order[1:-1]] += (obj[order[2:], m] - obj[order[:-2], m]) / span
    return rank, crowd


def nsga2_order(objectives) -> np.ndarray:
    """Indices sorted by (rank, -crowding, index)."""
    rank, crowd = nsga2_sort(objectives)
    return np.lexsort((np.arange(len(rank)), -crowd, rank))


# ---------------------------------------------------------------------------
# variation


def crossover_two_point(p1, p2, rng: np.random.Generator, cuts: tuple[int, int] | None = None) -> np.ndarray:
    """p1[:a] + p2[a:b] + p1[b:] with 0 <= a < b <= L."""
    p1, p2 = np.asarray(p1), np.asarray(p2)
    if p1.shape != p2.shape:
        raise ValueError("parents differ in length")
    L = p1.size
    if L < 3:
        raise ValueError("chromosomes need at least 3 genes")
    a, b = sorted(int(v) for v in rng.choice(L + 1, size=2, replace=False)) if cuts is None else cuts
    child = p1.copy()
    child[a:b] = p2[a:b]
    return child


def mutate(genes, rate: float, cfg: GeneConfig, rng: np.random.Generator) -> np.ndarray:
    """Redraw exactly floor(rate * L + 0.5) distinct genes from their own ranges."""
    g = np.array(genes, copy=True)
    k = int(math.floor(rate * g.size + 0.5))
    if k:
        pos = rng.choice(g.size, size=k, replace=False)
        g[pos] = rng.integers(0, cfg.gene_upper[pos])
    return g


# ---------------------------------------------------------------------------
# main loop


def _ordering(cfg: GaConfig, records: Sequence[FitnessRecord]) -> np.ndarray:
    if cfg.objective == "multi":
        return nsga2_order([r.objectives for r in records])
    return select_parents_steady_state([r.f for r in records], len(records))


def _front(cfg: GaConfig, records) -> tuple[int, ...]:
    if cfg.objective != "multi":
        return ()
    rank, _ = nsga2_sort([r.objectives for r in records])
    return tuple(int(i) for i in np.flatnonzero(rank == 0))


def run(cfg: GaConfig, dataset: Dataset, backend: BackendModel, noise: float | None = None, *,
        threads: int = 1, on_generation: Callable[[GenerationLog], None] | None = None) -> RunResult:
    """Run the genetic search; ``noise`` overrides ``cfg.noise_std``.

    Returns one log for the initial population (generation 0) and one per
    bred generation.
    """
    if noise is not None:
        cfg = replace(cfg, noise_std=float(noise))
    ctx = make_context(cfg, dataset, backend)
    n, k_el, m = cfg.population, cfg.elitism, cfg.parents

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def evaluate_batch(pop, generation, slots):
        def one(args):
            genes, slot = args
            rng = substream(cfg.seed, _NOISE, generation, slot) if cfg.noisy else None
            return evaluate(genes, ctx, rng)

        jobs = list(zip(pop, slots))
        return list(pool.map(one, jobs)) if pool else [one(j) for j in jobs]

    try:
        pop = [random_chromosome(cfg.genes, substream(cfg.seed, _INIT, 0, i)) for i in range(n)]
        records = evaluate_batch(pop, 0, range(n))
        evaluations = n
        logs = [GenerationLog(0, tuple(records), evaluations, _front(cfg, records),
                              tuple((_INIT, 0, i) for i in range(n)))]
        if on_generation:
            on_generation(logs[-1])
        best_so_far, stale = _progress_key(cfg, records), 0

        for g in range(1, cfg.generations + 1):
            order = _ordering(cfg, records)
            if cfg.selection == "rank_proportional" and cfg.objective == "mono":
                parents = select_parents_rank_proportional([r.f for r in records], m, substream(cfg.seed, _SELECT, g))
            else:
                parents = order[:m]
            elites = order[:k_el]
            kids = []
            for slot in range(k_el, n):
                rng = substream(cfg.seed, _BREED, g, slot)
                i, j = rng.choice(parents, size=2, replace=len(parents) < 2)
                child = crossover_two_point(pop[i], pop[j], rng) if rng.random() < cfg.crossover_prob else pop[i].copy()
                kids.append(mutate(child, cfg.mutation_rate, cfg.genes, rng))
            kid_records = evaluate_batch(kids, g, range(k_el, n))
            evaluations += len(kids)
            pop = [pop[i] for i in elites] + kids
            records = [records[i] for i in elites] + kid_records
            logs.append(GenerationLog(g, tuple(records), evaluations, _front(cfg, records),
                                      tuple((_BREED, g, s) for s in range(k_el, n))))
            if on_generation:
                on_generation(logs[-1])
            key = _progress_key(cfg, records)
            if key > best_so_far:
                best_so_far, stale = key, 0
            else:
                stale += 1
            if cfg.patience is not None and stale >= cfg.patience:
                break
    finally:
        if pool:
            pool.shutdown()
    return RunResult(logs, pop, evaluations, ctx.folds)


def _progress_key(cfg: GaConfig, records) -> float:
    return max(r.a for r in records) if cfg.objective == "multi" else max(r.f for r in records)


# ---------------------------------------------------------------------------
# reports


def _fmt(v) -> str:
    return repr(float(v)) if not isinstance(v, (int, np.integer)) else str(int(v))


def write_generations_csv(logs: Sequence[GenerationLog], path) -> None:
    """One row per bred generation (the initial population is reported separately)."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generation", "best_f", "mean_f", "best_a", "best_sigma", "best_depth"])
        for log in logs:
            if log.generation == 0:
                continue
            b = log.records[log.best]
            w.writerow([log.generation, _fmt(log.best_f), _fmt(log.mean_f), _fmt(b.a), _fmt(b.sigma), b.depth])


def write_pareto_csv(logs: Sequence[GenerationLog], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generation", "member", "a", "depth"])
        for log in logs:
            if log.generation == 0:
                continue
            for member in log.front:
                r = log.records[member]
                w.writerow([log.generation, member, _fmt(r.a), r.depth])


def write_population_csv(log: GenerationLog, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "a", "sigma", "depth", "f"])
        for i, r in enumerate(log.records):
            w.writerow([i, _fmt(r.a), _fmt(r.sigma), r.depth, _fmt(r.f)])


def trend_slope(values: Sequence[float]) -> float:
    """Least-squares slope of a series against its index."""
    y = np.asarray(values, dtype=float)
    return float(np.polyfit(np.arange(y.size), y, 1)[0])
