"""Fidelity quantum kernel: cached state embedding, Gram matrix, contrast
(off-diagonal std) and noisy/finite-shot estimates."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .circuit import MAX_QUBITS, apply_matrix, gate_matrices, gate_unitary, zero_state
from .genome import GeneConfig, decode_slots


def embed_all(genes, cfg: GeneConfig, features: np.ndarray) -> np.ndarray:
    """States U(x_i)|0...0> for every row of ``features``; shape (n, 2**Q).

    All samples share the decoded gate structure, so each gate is applied to
    the whole batch at once with per-sample angles.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[1] != cfg.num_features:
        raise ValueError(f"expected (n, {cfg.num_features}) features, got {x.shape}")
    if cfg.num_qubits > MAX_QUBITS:
        raise ValueError(f"{cfg.num_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}")
    states = zero_state(cfg.num_qubits, batch=x.shape[0])
    for slot in decode_slots(genes, cfg):
        if slot.kind.parametric:
            mats = gate_matrices(slot.kind, slot.angles(x))
        else:
            mats = gate_unitary(slot.kind)
        states = apply_matrix(states, mats, slot.qubits, cfg.num_qubits)
    return states


def kernel_matrix(states: np.ndarray) -> np.ndarray:
    """K[i, j] = |<phi_i|phi_j>|**2, exactly symmetric with a unit diagonal."""
    s = np.asarray(states)
    if s.ndim != 2 or s.shape[0] < 2:
        raise ValueError("need a (n >= 2, dim) array of states")
    overlaps = s.conj() @ s.T
    upper = np.triu(np.abs(overlaps) ** 2, k=1)
    k = upper + upper.T
    np.fill_diagonal(k, 1.0)
    return k


def offdiag_values(k: np.ndarray) -> np.ndarray:
    return k[np.triu_indices(k.shape[0], 1)]


def offdiag_std(k: np.ndarray) -> float:
    """Population standard deviation of the strict upper triangle."""
    if k.shape[0] < 3:
        raise ValueError("need n >= 3 for an off-diagonal spread")
    return float(np.std(offdiag_values(k)))


def shot_estimate(p, shots: int, rng: np.random.Generator):
    """Frequency of the all-zeros outcome over ``shots`` runs of the
    compute-uncompute circuit whose true probability is ``p``."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    out = rng.binomial(shots, p) / shots
    return out if np.ndim(out) else float(out)


def perturb_kernel(k: np.ndarray, rng: np.random.Generator, noise_std: float = 0.0,
                   shots: int | None = None, bias: float = 0.0) -> np.ndarray:
    """Noisy estimate of an exact kernel, one draw per unordered pair.

    Upper-triangle entries are optionally shot-sampled, then shifted by
    ``bias`` plus zero-mean Gaussian noise, clamped to [0, 1] and mirrored.
    The diagonal stays exactly 1.
    """
    n = k.shape[0]
    iu = np.triu_indices(n, 1)
    vals = k[iu]
    if shots is not None:
        vals = shot_estimate(vals, shots, rng)
    if noise_std > 0:
        vals = vals + rng.normal(0.0, noise_std, size=vals.shape)
    if bias:
        vals = vals + bias
    out = np.zeros_like(k, dtype=float)
    out[iu] = np.clip(vals, 0.0, 1.0)
    out = out + out.T
    np.fill_diagonal(out, 1.0)
    return out


def write_kernel_csv(k: np.ndarray, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in k:
            w.writerow([format(v, ".17g") for v in row])


def read_kernel_csv(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        return np.array([[float(v) for v in row] for row in csv.reader(fh) if row])
