"""Simulated execution of one kernel circuit on many QPU partitions (sites).

Each site returns the exact kernel corrupted at the entry level: optional
binomial shot sampling, then zero-mean Gaussian noise of the site's scale
(plus an optional fixed bias). Sites are ranked by the Frobenius distance of
their kernel to the exact one; the across-site spread of every entry is then
tracked while the worst sites are excluded one at a time.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .kernel import offdiag_values, perturb_kernel
from .transpile import BackendModel, backend_from_json

CHAIN_PATTERN = ">><"


def chain_edges(qubits: Sequence[int], pattern: str = CHAIN_PATTERN) -> tuple[tuple[int, int], ...]:
    """Directed edges of a chain over ``qubits``; '>' points along the chain."""
    if len(pattern) != len(qubits) - 1:
        raise ValueError(f"pattern {pattern!r} does not fit {len(qubits)} qubits")
    return tuple((a, b) if p == ">" else (b, a) for a, b, p in zip(qubits, qubits[1:], pattern))


@dataclass(frozen=True)
class Site:
    site_id: int
    qubits: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    noise_scale: float
    bias: float = 0.0

    def __post_init__(self):
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be non-negative")


@dataclass(frozen=True)
class NoiseProfile:
    """Per-site noise scales: explicit ``values`` or log-uniform over [low, high]."""

    low: float = 0.005
    high: float = 0.05
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.values is None and not 0 < self.low <= self.high:
            raise ValueError(f"invalid log-uniform bounds [{self.low}, {self.high}]")

    def draw(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.values is not None:
            if len(self.values) != count:
                raise ValueError(f"{len(self.values)} explicit scales for {count} sites")
            return np.asarray(self.values, dtype=float)
        return np.exp(rng.uniform(math.log(self.low), math.log(self.high), size=count))


def build_sites(count: int, noise: NoiseProfile | Sequence[float] = NoiseProfile(), seed: int = 0,
                site_qubits: Sequence[Sequence[int]] | None = None, pattern: str = CHAIN_PATTERN,
                biases: Sequence[float] | None = None) -> list[Site]:
    """``count`` sites with identical internal topology.

    Without ``site_qubits`` the sites occupy disjoint consecutive qubit blocks.
    """
    if count < 1:
        raise ValueError("need at least one site")
    if not isinstance(noise, NoiseProfile):
        noise = NoiseProfile(values=tuple(float(v) for v in noise))
    width = len(pattern) + 1
    if site_qubits is None:
        site_qubits = [tuple(range(i * width, (i + 1) * width)) for i in range(count)]
    if len(site_qubits) != count:
        raise ValueError(f"{len(site_qubits)} qubit groups for {count} sites")
    scales = noise.draw(count, np.random.default_rng(seed))
    biases = [0.0] * count if biases is None else list(biases)
    return [Site(i, tuple(q), chain_edges(tuple(q), pattern), float(s), float(b))
            for i, (q, s, b) in enumerate(zip(site_qubits, scales, biases))]


def site_kernel(k_exact: np.ndarray, site: Site, rng: np.random.Generator, shots: int | None = None) -> np.ndarray:
    return perturb_kernel(k_exact, rng, site.noise_scale, shots, site.bias)


def site_rng(seed: int, site_id: int) -> np.random.Generator:
    return np.random.default_rng([seed, 7, site_id])


def site_kernels(k_exact: np.ndarray, sites: Sequence[Site], seed: int, shots: int | None = None) -> list[np.ndarray]:
    return [site_kernel(k_exact, s, site_rng(seed, s.site_id), shots) for s in sites]


def frobenius_score(k_site: np.ndarray, k_exact: np.ndarray) -> float:
    if k_site.shape != k_exact.shape:
        raise ValueError(f"shape mismatch {k_site.shape} vs {k_exact.shape}")
    return float(np.sqrt(np.sum((k_site - k_exact) ** 2)))


def rank_sites(scores: Sequence[float], site_ids: Sequence[int] | None = None) -> list[int]:
    """Positions sorted by ascending score, ties by site id."""
    ids = list(range(len(scores))) if site_ids is None else list(site_ids)
    return sorted(range(len(scores)), key=lambda i: (scores[i], ids[i]))


@dataclass(frozen=True)
class SiteReport:
    site_ids: tuple[int, ...]
    frobenius: tuple[float, ...]
    ranking: tuple[int, ...]  # positions, best first
    entry_spread: np.ndarray  # across-site std per strict-upper entry (all sites)
    exclusion_curve: tuple[float, ...]  # average spread with e worst sites removed

    @property
    def average_spread(self) -> float:
        return self.exclusion_curve[0] if self.exclusion_curve else 0.0

    def spread_excluding(self, worst: int) -> float:
        return self.exclusion_curve[worst]


def _site_std(vals: np.ndarray) -> np.ndarray:
    # shifting by one site's values keeps agreeing sites at exactly zero spread
    return np.std(vals - vals[:1], axis=0)


def entry_spread(kernels: Sequence[np.ndarray]) -> np.ndarray:
    """Population std across sites of every strict-upper kernel entry."""
    return _site_std(np.stack([offdiag_values(k) for k in kernels]))


def spread_stats(kernels: Sequence[np.ndarray], k_exact: np.ndarray, site_ids: Sequence[int] | None = None,
                 exclude_ids: Sequence[int] = ()) -> SiteReport:
    """Rank sites and build the worst-first exclusion curve.

    Sites listed in ``exclude_ids`` are dropped before anything is computed.
    """
    ids = list(range(len(kernels))) if site_ids is None else list(site_ids)
    keep = [i for i, sid in enumerate(ids) if sid not in set(exclude_ids)]
    kernels = [kernels[i] for i in keep]
    ids = [ids[i] for i in keep]
    scores = [frobenius_score(k, k_exact) for k in kernels]
    ranking = rank_sites(scores, ids)
    vals = np.stack([offdiag_values(k) for k in kernels])
    curve = []
    if len(kernels) >= 2:
        for excluded in range(len(kernels)):
            remaining = ranking[: len(kernels) - excluded]
            curve.append(float(np.mean(_site_std(vals[remaining]))))
        spread = _site_std(vals)
    else:
        spread = np.zeros(vals.shape[1])
    return SiteReport(tuple(ids), tuple(scores), tuple(ranking), spread, tuple(curve))


def retain_top_fraction(sites: Sequence, scores: Sequence[float], fraction: float) -> list:
    """The ceil(fraction * count) best-scoring sites, best first."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    keep = math.ceil(round(fraction * len(sites), 9))
    ids = [getattr(s, "site_id", i) for i, s in enumerate(sites)]
    return [sites[i] for i in rank_sites(scores, ids)[:keep]]


@dataclass(frozen=True)
class Schedule:
    assignments: dict  # (backend name, site id) -> list of evaluation indices
    wall_clock: float
    serial: float

    @property
    def speedup(self) -> float:
        return self.serial / self.wall_clock if self.wall_clock else 0.0

    def loads(self) -> list[int]:
        return [len(v) for v in self.assignments.values()]


def schedule_generation(num_evaluations: int, sites_by_backend: dict[str, Sequence[Site]],
                        cost_per_kernel: float = 1.0) -> Schedule:
    """Deal evaluations round-robin over every site of every backend."""
    slots = [(name, s.site_id) for name, sites in sites_by_backend.items() for s in sites]
    if not slots:
        raise ValueError("no sites to schedule on")
    assignments = {slot: [] for slot in slots}
    for i in range(num_evaluations):
        assignments[slots[i % len(slots)]].append(i)
    wall = max(len(v) for v in assignments.values()) * cost_per_kernel
    return Schedule(assignments, wall, num_evaluations * cost_per_kernel)


# ---------------------------------------------------------------------------
# files


def load_backend_sites(path, noise: NoiseProfile | None = None, seed: int = 0) -> tuple[BackendModel, list[Site]]:
    """Backend description with a ``sites`` list of qubit groups.

    Each site may carry ``noise_scale`` (and ``bias``); otherwise scales are
    drawn from ``noise`` or the file's ``noise_profile``.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read backend file {path}: {exc}") from None
    backend = backend_from_json(doc)
    raw = doc.get("sites")
    if not raw:
        raise ConfigError(f"{path}: backend file lists no sites")
    try:
        groups = [tuple(s["qubits"] if isinstance(s, dict) else s) for s in raw]
        explicit = [s.get("noise_scale") if isinstance(s, dict) else None for s in raw]
        biases = [float(s.get("bias", 0.0)) if isinstance(s, dict) else 0.0 for s in raw]
        if noise is None:
            prof = doc.get("noise_profile", {})
            noise = NoiseProfile(float(prof.get("low", 0.005)), float(prof.get("high", 0.05)))
        drawn = noise.draw(len(groups), np.random.default_rng(seed))
        scales = [float(e) if e is not None else float(d) for e, d in zip(explicit, drawn)]
        pattern = doc.get("site_pattern", CHAIN_PATTERN)
        sites = [Site(i, g, chain_edges(g, pattern) if len(g) == len(pattern) + 1 else (), s, b)
                 for i, (g, s, b) in enumerate(zip(groups, scales, biases))]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: invalid sites: {exc!r}") from None
    return backend, sites


def write_site_report(report: SiteReport, path) -> None:
    n = len(report.ranking)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["site_id", "frobenius", "excluded_rank"])
        for pos, i in enumerate(report.ranking):
            # excluded_rank 0 = first site dropped (the worst)
            w.writerow([report.site_ids[i], repr(report.frobenius[i]), n - 1 - pos])


def write_spread_curve(report: SiteReport, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["excluded", "average_spread"])
        for e, v in enumerate(report.exclusion_curve):
            w.writerow([e, repr(v)])
