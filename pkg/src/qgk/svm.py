"""C-SVM on a precomputed kernel, solved with SMO (maximal-violating-pair
working set), plus pooled k-fold cross-validated accuracy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dataset import FoldAssignment
from .errors import DataError, NumericalError

_TAU = 1e-12


@njit(cache=True, nogil=True)
def _smo(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 0.5 a'Qa - e'a with Q = yy'K
    it = 0
    gap = np.inf
    while it < max_iter:
        gmax = -np.inf
        gmin = np.inf
        i = -1
        j = -1
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > gmax:
                    gmax = v
                    i = t
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                if v < gmin:
                    gmin = v
                    j = t
        gap = gmax - gmin
        if i < 0 or j < 0 or gap < tol:
            break
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if quad <= 0:
                quad = _TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if quad <= 0:
                quad = _TAU
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        di = alpha[i] - ai
        dj = alpha[j] - aj
        for t in range(n):
            grad[t] += y[t] * (y[i] * K[i, t] * di + y[j] * K[j, t] * dj)
        it += 1

    # bias: average y*grad over free vectors, else midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    free_sum = 0.0
    n_free = 0
    for t in range(n):
        yg = y[t] * grad[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            n_free += 1
            free_sum += yg
    rho = free_sum / n_free if n_free > 0 else (ub + lb) / 2.0
    return alpha, -rho, gap, it


@dataclass(frozen=True)
class SvmModel:
    alpha: np.ndarray
    labels: np.ndarray
    bias: float
    C: float
    kkt_gap: float
    iterations: int

    @property
    def dual_coef(self) -> np.ndarray:
        return self.alpha * self.labels

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alpha > 0)


def train_svm(K: np.ndarray, y: np.ndarray, C: float = 1.0, tol: float = 1e-3,
              max_iter: int = 1_000_000) -> SvmModel:
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.asarray(y)
    if K.shape != (y.size, y.size):
        raise ValueError(f"kernel {K.shape} does not match {y.size} labels")
    if not np.isfinite(K).all():
        raise NumericalError("non-finite kernel entries")
    if not (np.any(y == 1) and np.any(y == -1)):
        raise DataError("training fold holds a single class")
    if C <= 0:
        raise ValueError("C must be positive")
    yf = y.astype(np.float64)
    alpha, bias, gap, it = _smo(K, yf, float(C), float(tol), int(max_iter))
    return SvmModel(alpha, y.astype(int), float(bias), float(C), float(gap), int(it))


def dual_objective(alpha: np.ndarray, K: np.ndarray, y: np.ndarray) -> float:
    """e'a - 0.5 (a*y)' K (a*y), the quantity SMO maximises."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def kkt_violation(model: SvmModel, K: np.ndarray) -> float:
    """Maximal violating-pair gap m(a) - M(a); <= tol at a KKT point."""
    y, a, C = model.labels, model.alpha, model.C
    grad = y * (K @ (a * y)) - 1.0
    v = -y * grad
    up = ((y > 0) & (a < C)) | ((y < 0) & (a > 0))
    low = ((y > 0) & (a > 0)) | ((y < 0) & (a < C))
    if not up.any() or not low.any():
        return 0.0
    return float(max(v[up].max() - v[low].min(), 0.0))


def decision_function(model: SvmModel, k_rows: np.ndarray) -> np.ndarray:
    k_rows = np.asarray(k_rows, dtype=float)
    if k_rows.shape[-1] != model.alpha.size:
        raise ValueError(f"kernel row length {k_rows.shape[-1]} != training size {model.alpha.size}")
    return k_rows @ model.dual_coef + model.bias


def predict(model: SvmModel, k_rows: np.ndarray):
    """sign(decision); an exact zero maps to +1."""
    out = np.where(decision_function(model, k_rows) >= 0.0, 1, -1)
    return out if out.ndim else int(out)


def cv_accuracy(K: np.ndarray, y: np.ndarray, folds: FoldAssignment, C: float = 1.0,
                tol: float = 1e-3) -> float:
    """Pooled fraction of correct out-of-fold predictions."""
    y = np.asarray(y)
    correct = 0
    for train, test in folds.splits():
        model = train_svm(K[np.ix_(train, train)], y[train], C, tol)
        correct += int(np.sum(predict(model, K[np.ix_(test, train)]) == y[test]))
    return correct / y.size
