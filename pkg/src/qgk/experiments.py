"""Scaled-down reproductions of the headline experiments.

Each trial returns plain dataclasses so the acceptance suite and the scripts
in ``scripts/`` share one implementation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest, spearmanr

from .dataset import synth_generate
from .ga import GaConfig, run, trend_slope
from .genome import GeneConfig, random_chromosome
from .kernel import embed_all, kernel_matrix
from .qpu_sim import NoiseProfile, build_sites, site_kernels, spread_stats
from .transpile import chain_backend

NATIVE_GATES = ("I", "RZ", "SX", "X", "ECR")


def chain_genes(num_features: int, circuit_size: int = 8, num_qubits: int = 4) -> tuple[GeneConfig, object]:
    backend = chain_backend(num_qubits)
    return GeneConfig(num_qubits, circuit_size, num_features, NATIVE_GATES, connectivity=backend.edges), backend


# ---------------------------------------------------------------------------
# noise threshold


@dataclass(frozen=True)
class NoiseTrial:
    noise_levels: tuple[float, ...]
    seeds: tuple[int, ...]
    slopes: dict  # (noise, seed) -> slope of mean f over generations 0..G
    best_slopes: dict  # (noise, seed) -> slope of best f

    def slope(self, noise: float, seed: int) -> float:
        return self.slopes[(noise, seed)]

    def positive_count(self, noise: float) -> int:
        return sum(self.slopes[(noise, s)] > 0 for s in self.seeds)

    def suppressed_count(self, noise: float, reference: float = 0.0, factor: float = 5.0) -> int:
        """Seeds whose slope at ``noise`` is non-positive or ``factor``x below the reference slope."""
        n = 0
        for s in self.seeds:
            v, ref = self.slopes[(noise, s)], self.slopes[(reference, s)]
            n += v <= 0 or (ref > 0 and v * factor <= ref)
        return n


def noise_threshold_trial(noise_levels=(0.0, 0.01, 0.05), seeds=range(5), *, samples: int = 200,
                          features: int = 18, bayes_accuracy: float = 0.75, population: int = 30,
                          generations: int = 60, parents: int = 15, mutation_rate: float = 0.05,
                          crossover_prob: float = 0.9, data_seed: int = 0, progress=None) -> NoiseTrial:
    data = synth_generate(samples, features, seed=data_seed, bayes_accuracy=bayes_accuracy)
    genes, backend = chain_genes(features)
    slopes, best = {}, {}
    for mu in noise_levels:
        for seed in seeds:
            cfg = GaConfig(genes, population, generations, parents, 0, mutation_rate, crossover_prob,
                           seed=seed, noise_std=mu)
            logs = run(cfg, data, backend).logs
            slopes[(mu, seed)] = trend_slope([log.mean_f for log in logs])
            best[(mu, seed)] = trend_slope([log.best_f for log in logs])
            if progress:
                progress(mu, seed, slopes[(mu, seed)])
    return NoiseTrial(tuple(noise_levels), tuple(seeds), slopes, best)


# ---------------------------------------------------------------------------
# multi-objective depth trend


@dataclass(frozen=True)
class DepthRun:
    seed: int
    initial_mean_depth: float
    front_mean_depth: float
    initial_max_a: float
    front_max_a: float

    @property
    def passed(self) -> bool:
        return self.front_mean_depth < self.initial_mean_depth and self.front_max_a >= self.initial_max_a


def nsga_depth_trial(seeds=range(5), *, samples: int = 200, features: int = 18, bayes_accuracy: float = 0.75,
                     population: int = 30, generations: int = 60, parents: int = 15, elitism: int = 0,
                     mutation_rate: float = 0.05, crossover_prob: float = 0.9, data_seed: int = 0,
                     progress=None) -> list[DepthRun]:
    data = synth_generate(samples, features, seed=data_seed, bayes_accuracy=bayes_accuracy)
    genes, backend = chain_genes(features)
    out = []
    for seed in seeds:
        cfg = GaConfig(genes, population, generations, parents, elitism, mutation_rate, crossover_prob,
                       objective="multi", seed=seed)
        logs = run(cfg, data, backend).logs
        init, final = logs[0].records, logs[-1]
        front = [final.records[i] for i in final.front]
        res = DepthRun(seed, float(np.mean([r.depth for r in init])), float(np.mean([r.depth for r in front])),
                       max(r.a for r in init), max(r.a for r in front))
        out.append(res)
        if progress:
            progress(res)
    return out


# ---------------------------------------------------------------------------
# multi-site simulations


def _reference_kernel(seed: int, samples: int = 30, features: int = 4) -> np.ndarray:
    data = synth_generate(samples, features, seed=seed, bayes_accuracy=0.75)
    genes, _ = chain_genes(features)
    chrom = random_chromosome(genes, np.random.default_rng([seed, 99]))
    return kernel_matrix(embed_all(chrom, genes, data.features))


def site_ranking_trial(seed: int, num_sites: int = 20, shots: int | None = None, samples: int = 30) -> float:
    """Spearman correlation between Frobenius score and true site noise scale."""
    k = _reference_kernel(seed, samples)
    sites = build_sites(num_sites, NoiseProfile(0.005, 0.05), seed=seed)
    report = spread_stats(site_kernels(k, sites, seed, shots), k, [s.site_id for s in sites])
    return float(spearmanr(report.frobenius, [s.noise_scale for s in sites]).statistic)


@dataclass(frozen=True)
class ExclusionTrial:
    curves: tuple[tuple[float, ...], ...]
    successes: int  # replicates whose curve is non-increasing and ends at zero
    p_value: float  # one-sided sign test against a fair coin


def exclusion_trial(replicates: int = 50, num_sites: int = 21, samples: int = 20, seed: int = 0) -> ExclusionTrial:
    curves, wins = [], 0
    for r in range(replicates):
        k = _reference_kernel(seed * 1000 + r, samples)
        sites = build_sites(num_sites, NoiseProfile(0.005, 0.05), seed=seed * 1000 + r)
        curve = spread_stats(site_kernels(k, sites, seed * 1000 + r), k).exclusion_curve
        curves.append(curve)
        c = np.asarray(curve)
        wins += bool(np.all(np.diff(c) <= 1e-12) and c[-1] == 0.0)
    p = binomtest(wins, replicates, 0.5, alternative="greater").pvalue
    return ExclusionTrial(tuple(curves), wins, float(p))


@dataclass(frozen=True)
class ShotScaling:
    shots: tuple[int, ...]
    spreads: tuple[float, ...]

    def ratios(self) -> list[float]:
        """Observed spread ratio over the 1/sqrt(shots) prediction, for each consecutive pair."""
        out = []
        for (s0, v0), (s1, v1) in zip(zip(self.shots, self.spreads), zip(self.shots[1:], self.spreads[1:])):
            out.append((v0 / v1) / np.sqrt(s1 / s0))
        return out


def shot_scaling_trial(shots=(1000, 4000, 16000), num_sites: int = 21, samples: int = 30, seed: int = 0) -> ShotScaling:
    k = _reference_kernel(seed, samples)
    sites = build_sites(num_sites, [0.0] * num_sites, seed=seed)
    spreads = [spread_stats(site_kernels(k, sites, seed, s), k).average_spread for s in shots]
    return ShotScaling(tuple(shots), tuple(spreads))

